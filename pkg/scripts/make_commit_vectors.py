"""Regenerate tests/data/commit_vectors.json.

The hashes are built with ``struct.pack`` and ``hashlib`` directly rather
than through the package, so the file is an independent oracle for the
commitment encoding.  Run once; the output is committed and frozen.
"""

import hashlib
import json
import random
import struct
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "commit_vectors.json"


def reference_hash(decision: int, block: int, nonce: bytes, validator: int) -> str:
    payload = struct.pack(">B", decision) + struct.pack(">Q", block) + nonce + struct.pack(">Q", validator)
    return hashlib.sha256(payload).hexdigest()


def main() -> None:
    rnd = random.Random(20240601)
    cases = [
        (0, 0, bytes(32), 0),
        (1, 0, bytes(32), 0),
        (1, 1, b"\xff" * 32, 2**64 - 1),
        (0, 2**64 - 1, bytes(range(32)), 1),
    ]
    for _ in range(28):
        cases.append((rnd.randrange(2), rnd.randrange(2**64), rnd.randbytes(32), rnd.randrange(2**64)))
    vectors = [
        {"decision": d, "block": b, "nonce": n.hex(), "validator": v, "hash": reference_hash(d, b, n, v)}
        for d, b, n, v in cases
    ]
    OUT.write_text(json.dumps(vectors, indent=1) + "\n")
    print(f"wrote {len(vectors)} vectors to {OUT}")


if __name__ == "__main__":
    main()
