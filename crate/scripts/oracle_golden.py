"""Reference oracle answers.

H(x) = SHA-256(b"ldc-forge/oracle" || seed || u64 len(x) || x || u32 counter),
counter blocks concatenated, truncated to ceil(w/8) bytes, unused low bits
of the last byte cleared.
"""
import hashlib
import json
import sys


def answer(seed, width, x):
    nbytes = (width + 7) // 8
    out = b""
    counter = 0
    while len(out) < nbytes:
        h = hashlib.sha256()
        h.update(b"ldc-forge/oracle")
        h.update(seed)
        h.update(len(x).to_bytes(8, "big"))
        h.update(x)
        h.update(counter.to_bytes(4, "big"))
        out += h.digest()
        counter += 1
    out = bytearray(out[:nbytes])
    spare = nbytes * 8 - width
    if spare:
        out[-1] &= (0xFF << spare) & 0xFF
    return bytes(out)


if __name__ == "__main__":
    seed = bytes(range(32))
    inputs = [b"", b"abc", bytes(range(40))]
    cases = [
        {"width": w, "input_hex": x.hex(), "answer_hex": answer(seed, w, x).hex()}
        for w in (64, 12, 300)
        for x in inputs
    ]
    json.dump({"seed_hex": seed.hex(), "cases": cases}, sys.stdout, indent=1)
    print()
