import pytest
from hypothesis import given, strategies as st

from xsram import aes, kat

blocks = st.integers(1, 6).flatmap(lambda n: st.binary(min_size=16 * n, max_size=16 * n))
keys = st.sampled_from([16, 24, 32]).flatmap(lambda n: st.binary(min_size=n, max_size=n))
ivs = st.binary(min_size=16, max_size=16)


def test_sbox_spot_values():
    assert aes.SBOX[0x00] == 0x63
    assert aes.SBOX[0x53] == 0xED
    assert aes.INV_SBOX[0x63] == 0x00


def test_gmul():
    assert aes.gmul(0x57, 0x83) == 0xC1
    assert aes.gmul(0x57, 0x13) == 0xFE


def test_key_expansion_tail():
    rk = aes.expand_key(bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c"))
    assert bytes(rk[-1]).hex() == "d014f9a8c9ee2589e13f0cc8b6630ca6"


def test_bad_key():
    with pytest.raises(aes.BadKeyLength):
        aes.expand_key(b"short")


def test_unaligned():
    with pytest.raises(ValueError):
        aes.ecb(bytes(16), bytes(15))


@pytest.mark.parametrize("row", kat.check_oracle(), ids=lambda r: f"{r[0]}-{r[1]}")
def test_known_answers(row):
    assert row[2]


def test_ctr_counter_wraps():
    assert aes.ctr_block(b"\xff" * 16, 1) == bytes(16)


@given(keys, blocks, ivs)
def test_round_trips(key, data, iv):
    assert aes.ecb(key, aes.ecb(key, data), True) == data
    assert aes.cbc(key, iv, aes.cbc(key, iv, data), True) == data
    assert aes.ctr(key, iv, aes.ctr(key, iv, data)) == data


@given(keys, blocks, ivs)
def test_matches_cryptography(key, data, iv):
    ciphers = pytest.importorskip("cryptography.hazmat.primitives.ciphers")
    alg = ciphers.algorithms.AES(key)
    for mode, ours in ((ciphers.modes.ECB(), aes.ecb(key, data)),
                       (ciphers.modes.CBC(iv), aes.cbc(key, iv, data)),
                       (ciphers.modes.CTR(iv), aes.ctr(key, iv, data))):
        enc = ciphers.Cipher(alg, mode).encryptor()
        assert enc.update(data) + enc.finalize() == ours
