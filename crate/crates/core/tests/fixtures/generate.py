"""Regenerates oracle.json from OpenSSL (via `cryptography`), hashlib and zlib.

Run: python3 generate.py > oracle.json
"""
import hashlib
import hmac
import json
import random
import zlib

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes


def aes_ecb(key, block):
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def double(t):
    # GF(2^128) doubling, little-endian byte order, poly x^128+x^7+x^2+x+1
    n = int.from_bytes(t, "little")
    carry = n >> 127
    n = (n << 1) & ((1 << 128) - 1)
    if carry:
        n ^= 0x87
    return n.to_bytes(16, "little")


def xts_manual(key1, key2, sector, pt):
    t = aes_ecb(key2, sector.to_bytes(16, "little"))
    out = b""
    for j in range(0, len(pt), 16):
        x = bytes(a ^ b for a, b in zip(pt[j:j + 16], t))
        y = aes_ecb(key1, x)
        out += bytes(a ^ b for a, b in zip(y, t))
        t = double(t)
    return out


def xts_openssl(key1, key2, sector, pt):
    enc = Cipher(algorithms.AES(key1 + key2), modes.XTS(sector.to_bytes(16, "little"))).encryptor()
    return enc.update(pt) + enc.finalize()


def main():
    rng = random.Random(0x0D15C7)
    out = {}

    pt = bytes.fromhex("00112233445566778899aabbccddeeff")
    out["aes_kat"] = [
        {"key": bytes(range(n)).hex(), "pt": pt.hex(), "ct": aes_ecb(bytes(range(n)), pt).hex()}
        for n in (16, 24, 32)
    ]
    aes_random = []
    for n in (16, 24, 32):
        for _ in range(8):
            k = rng.randbytes(n)
            p = rng.randbytes(16)
            aes_random.append({"key": k.hex(), "pt": p.hex(), "ct": aes_ecb(k, p).hex()})
    out["aes_random"] = aes_random

    xts = []
    # 512-octet IEEE 1619 vector 4 inputs
    k1 = bytes.fromhex("27182818284590452353602874713526")
    k2 = bytes.fromhex("31415926535897932384626433832795")
    p = bytes(range(256)) * 2
    c = xts_openssl(k1, k2, 0, p)
    assert c == xts_manual(k1, k2, 0, p)
    xts.append({"data_key": k1.hex(), "tweak_key": k2.hex(), "sector": 0, "pt": p.hex(), "ct": c.hex()})
    for n in (16, 24, 32):
        for _ in range(4):
            k1 = rng.randbytes(n)
            k2 = rng.randbytes(n)
            sector = rng.choice([0, 1, 255, 1 << 32, rng.getrandbits(64)])
            p = rng.randbytes(512)
            c = xts_manual(k1, k2, sector, p)
            if n != 24:
                assert c == xts_openssl(k1, k2, sector, p)
            xts.append({"data_key": k1.hex(), "tweak_key": k2.hex(), "sector": sector, "pt": p.hex(), "ct": c.hex()})
    out["xts"] = xts

    # message = pattern repeated `repeat` times
    out["sha256"] = [
        {"pattern": m.hex(), "repeat": r, "digest": hashlib.sha256(m * r).hexdigest()}
        for m, r in ((b"", 1), (b"abc", 1), (b"a", 1_000_000), (bytes(range(256)), 3), (b"x", 55), (b"x", 56), (b"x", 64))
    ]
    hmacs = []
    for key, msg in (
        (b"\x0b" * 20, b"Hi There"),
        (b"", b""),
        (bytes(range(100)), b"message with a key longer than one block"),
        (b"\xaa" * 64, b"exactly one block of key"),
    ):
        hmacs.append({"key": key.hex(), "msg": msg.hex(), "mac": hmac.new(key, msg, hashlib.sha256).hexdigest()})
    out["hmac_sha256"] = hmacs
    pb = []
    for pw, salt, it, n in (
        (b"password", b"salt", 1, 32),
        (b"password", b"salt", 2, 32),
        (b"password", b"salt", 4096, 32),
        (b"password", b"salt", 2, 64),
        (b"passwordPASSWORDpassword", b"saltSALTsaltSALTsaltSALTsaltSALTsalt", 10, 40),
        (b"", bytes(64), 3, 64),
    ):
        pb.append({"password": pw.hex(), "salt": salt.hex(), "iterations": it, "length": n,
                   "key": hashlib.pbkdf2_hmac("sha256", pw, salt, it, n).hex()})
    out["pbkdf2_hmac_sha256"] = pb

    out["crc32"] = [
        {"msg": m.hex(), "crc": zlib.crc32(m)}
        for m in (b"", b"123456789", b"DTRS", bytes(range(256)), b"The quick brown fox jumps over the lazy dog")
    ]
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
