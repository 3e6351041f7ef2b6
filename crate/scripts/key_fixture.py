"""Reference key generation over a fixed bit stream.

Stream: SHA-256(b"ldc-forge/keytest" || u32 counter) blocks, bits taken
most significant first. Writes the permutation and packed pad as JSON.
"""
import hashlib
import json
import sys


def stream_bits(n):
    out = []
    counter = 0
    while len(out) < n:
        block = hashlib.sha256(b"ldc-forge/keytest" + counter.to_bytes(4, "big")).digest()
        for byte in block:
            out.extend((byte >> (7 - i)) & 1 for i in range(8))
        counter += 1
    return out[:n]


def genkey(k, bits):
    pos = 0

    def take(n):
        nonlocal pos
        v = 0
        for b in bits[pos:pos + n]:
            v = (v << 1) | b
        pos += n
        return v

    pi = list(range(k))
    for j in range(k - 1, 0, -1):
        width = j.bit_length()
        while True:
            v = take(width)
            if v <= j:
                break
        pi[j], pi[v] = pi[v], pi[j]
    mask = [take(1) for _ in range(k)]
    packed = bytearray((k + 7) // 8)
    for i, b in enumerate(mask):
        if b:
            packed[i // 8] |= 0x80 >> (i % 8)
    return {"pi": pi, "mask_hex": packed.hex(), "consumed": pos}


if __name__ == "__main__":
    k = int(sys.argv[1]) if len(sys.argv) > 1 else 120
    bits = stream_bits(64 * k)
    key = genkey(k, bits)
    json.dump({"codeword_bits": k, "stream_bits": len(bits), **key}, sys.stdout)
    print()
