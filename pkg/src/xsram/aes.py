"""Byte-oriented reference AES (FIPS-197) with ECB, CBC and CTR modes.

Deliberately plain: no T-tables, no numpy. Serves as the oracle the
memory-mapped implementation in ``aesbench`` is checked against.
"""

from __future__ import annotations


def _xtime(b: int) -> int:
    b <<= 1
    return (b ^ 0x11B) & 0xFF if b & 0x100 else b


def gmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a = _xtime(a)
        b >>= 1
    return out


def _sbox():
    # multiplicative inverse followed by the affine map
    inv = [0] * 256
    for x in range(1, 256):
        for y in range(1, 256):
            if gmul(x, y) == 1:
                inv[x] = y
                break
    box = []
    for x in range(256):
        b = inv[x]
        s = b
        for k in range(1, 5):
            s ^= ((b << k) | (b >> (8 - k))) & 0xFF
        box.append(s ^ 0x63)
    return box


SBOX = _sbox()
INV_SBOX = [0] * 256
for _i, _s in enumerate(SBOX):
    INV_SBOX[_s] = _i
RCON = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36]


class BadKeyLength(ValueError):
    pass


def rounds_for(key: bytes) -> int:
    if len(key) not in (16, 24, 32):
        raise BadKeyLength(f"AES key must be 16, 24 or 32 bytes, got {len(key)}")
    return {16: 10, 24: 12, 32: 14}[len(key)]


def expand_key(key: bytes) -> list[list[int]]:
    """Round keys as lists of 16 bytes (column-major, like the state)."""
    nr = rounds_for(key)
    nk = len(key) // 4
    w = [list(key[4 * i:4 * i + 4]) for i in range(nk)]
    for i in range(nk, 4 * (nr + 1)):
        t = list(w[i - 1])
        if i % nk == 0:
            t = t[1:] + t[:1]
            t = [SBOX[b] for b in t]
            t[0] ^= RCON[i // nk - 1]
        elif nk > 6 and i % nk == 4:
            t = [SBOX[b] for b in t]
        w.append([a ^ b for a, b in zip(w[i - nk], t)])
    return [sum(w[4 * r:4 * r + 4], []) for r in range(nr + 1)]


def _shift_rows(s):
    return [s[(4 * (c + r) + r) % 16] for c in range(4) for r in range(4)]


def _inv_shift_rows(s):
    return [s[(4 * (c - r) + r) % 16] for c in range(4) for r in range(4)]


# product tables for the (Inv)MixColumns coefficients
_MUL = {m: [gmul(x, m) for x in range(256)] for m in (1, 2, 3, 9, 11, 13, 14)}


def _mix(s, m):
    tabs = [_MUL[c] for c in m]
    out = []
    for c in range(4):
        col = s[4 * c:4 * c + 4]
        for r in range(4):
            v = 0
            for k in range(4):
                v ^= tabs[(k - r) % 4][col[k]]
            out.append(v)
    return out


def encrypt_block(key: bytes, block: bytes, round_keys=None) -> bytes:
    rk = round_keys or expand_key(key)
    nr = len(rk) - 1
    s = [a ^ b for a, b in zip(block, rk[0])]
    for r in range(1, nr + 1):
        s = _shift_rows([SBOX[b] for b in s])
        if r != nr:
            s = _mix(s, (2, 3, 1, 1))
        s = [a ^ b for a, b in zip(s, rk[r])]
    return bytes(s)


def decrypt_block(key: bytes, block: bytes, round_keys=None) -> bytes:
    rk = round_keys or expand_key(key)
    nr = len(rk) - 1
    s = [a ^ b for a, b in zip(block, rk[nr])]
    for r in range(nr - 1, -1, -1):
        s = [INV_SBOX[b] for b in _inv_shift_rows(s)]
        s = [a ^ b for a, b in zip(s, rk[r])]
        if r != 0:
            s = _mix(s, (14, 11, 13, 9))
    return bytes(s)


def _blocks(data: bytes):
    if len(data) % 16:
        raise ValueError("data length must be a multiple of 16 bytes")
    return [data[i:i + 16] for i in range(0, len(data), 16)]


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def ctr_block(iv: bytes, i: int) -> bytes:
    return ((int.from_bytes(iv, "big") + i) % (1 << 128)).to_bytes(16, "big")


def ecb(key: bytes, data: bytes, decrypt: bool = False) -> bytes:
    rk = expand_key(key)
    f = decrypt_block if decrypt else encrypt_block
    return b"".join(f(key, b, rk) for b in _blocks(data))


def cbc(key: bytes, iv: bytes, data: bytes, decrypt: bool = False) -> bytes:
    rk = expand_key(key)
    out, prev = [], iv
    for b in _blocks(data):
        if decrypt:
            out.append(_xor(decrypt_block(key, b, rk), prev))
            prev = b
        else:
            prev = encrypt_block(key, _xor(b, prev), rk)
            out.append(prev)
    return b"".join(out)


def ctr(key: bytes, iv: bytes, data: bytes) -> bytes:
    rk = expand_key(key)
    return b"".join(_xor(b, encrypt_block(key, ctr_block(iv, i), rk))
                    for i, b in enumerate(_blocks(data)))
