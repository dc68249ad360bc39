"""Published AES known-answer vectors (FIPS-197 appendix C, SP 800-38A F.1/F.2/F.5)."""

from . import aes

PT4 = ("6bc1bee22e409f96e93d7e117393172a" "ae2d8a571e03ac9c9eb76fac45af8e51"
       "30c81c46a35ce411e5fbc1191a0a52ef" "f69f2445df4f9b17ad2b417be66c3710")
K128 = "2b7e151628aed2a6abf7158809cf4f3c"
K256 = "603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4"
CBC_IV = "000102030405060708090a0b0c0d0e0f"
CTR_IV = "f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff"

# (mode, key, iv, plaintext, ciphertext)
VECTORS = [
    ("ECB", "000102030405060708090a0b0c0d0e0f", None,
     "00112233445566778899aabbccddeeff", "69c4e0d86a7b0430d8cdb78070b4c55a"),
    ("ECB", "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f", None,
     "00112233445566778899aabbccddeeff", "8ea2b7ca516745bfeafc49904b496089"),
    ("ECB", K128, None, PT4,
     "3ad77bb40d7a3660a89ecaf32466ef97" "f5d3d58503b9699de785895a96fdbaaf"
     "43b1cd7f598ece23881b00e3ed030688" "7b0c785e27e8ad3f8223207104725dd4"),
    ("ECB", K256, None, PT4,
     "f3eed1bdb5d2a03c064b5a7e3db181f8" "591ccb10d410ed26dc5ba74a31362870"
     "b6ed21b99ca6f4f9f153e7b1beafed1d" "23304b7a39f9f3ff067d8d8f9e24ecc7"),
    ("CBC", K128, CBC_IV, PT4,
     "7649abac8119b246cee98e9b12e9197d" "5086cb9b507219ee95db113a917678b2"
     "73bed6b8e3c1743b7116e69e22229516" "3ff1caa1681fac09120eca307586e1a7"),
    ("CBC", K256, CBC_IV, PT4,
     "f58c4c04d6e5f1ba779eabfb5f7bfbd6" "9cfc4e967edb808d679f777bc6702c7d"
     "39f23369a9d9bacfa530e26304231461" "b2eb05e2c39be9fcda6c19078c6a9d1b"),
    ("CTR", K128, CTR_IV, PT4,
     "874d6191b620e3261bef6864990db6ce" "9806f66b7970fdff8617187bb9fffdff"
     "5ae4df3edbd5d35e5b4f09020db03eab" "1e031dda2fbe03d1792170a0f3009cee"),
    ("CTR", K256, CTR_IV, PT4,
     "601ec313775789a5b7a7f504bbf3d228" "f443e3ca4d62b59aca84e990cacaf5c5"
     "2b0930daa23de94ce87017ba2d84988d" "dfc9c58db67aada613c2dd08457941a6"),
]


def vectors():
    for mode, key, iv, pt, ct in VECTORS:
        yield (mode, bytes.fromhex(key), bytes.fromhex(iv) if iv else None,
               bytes.fromhex(pt), bytes.fromhex(ct))


def check_oracle() -> list[tuple[str, int, bool]]:
    """Run the reference AES over every vector in both directions."""
    out = []
    for mode, key, iv, pt, ct in vectors():
        if mode == "ECB":
            ok = aes.ecb(key, pt) == ct and aes.ecb(key, ct, True) == pt
        elif mode == "CBC":
            ok = aes.cbc(key, iv, pt) == ct and aes.cbc(key, iv, ct, True) == pt
        else:
            ok = aes.ctr(key, iv, pt) == ct and aes.ctr(key, iv, ct) == pt
        out.append((mode, 8 * len(key), ok))
    return out
