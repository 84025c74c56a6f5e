"""Regenerate tests/fixtures/zfec_reference.json from the reference zfec package.

Needs ``pip install zfec``; the package is not a runtime or test dependency.
"""

import json
import os
import random
import subprocess
import tempfile
from pathlib import Path

import zfec
import zfec.easyfec

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "zfec_reference.json"


def share_names(k, m):
    with tempfile.TemporaryDirectory() as tmp:
        src = os.path.join(tmp, "data.bin")
        with open(src, "wb") as f:
            f.write(b"x" * 97)
        subprocess.run(["zfec", "-k", str(k), "-m", str(m), "-q", src], check=True, cwd=tmp)
        return sorted(n for n in os.listdir(tmp) if n.endswith(".fec"))


def main():
    rng = random.Random(20151029)
    vectors = []
    for k, m, size in [(1, 1, 5), (2, 3, 7), (3, 5, 20), (4, 8, 33), (10, 15, 101), (8, 10, 64)]:
        data = bytes(rng.randrange(256) for _ in range(size))
        shares = zfec.easyfec.Encoder(k, m).encode(data)
        vectors.append({
            "k": k, "m": m, "data": data.hex(),
            "shares": [bytes(s).hex() for s in shares],
        })
    names = {f"{k}_{m}": share_names(k, m) for k, m in [(10, 15), (8, 10), (3, 5), (3, 100)]}
    doc = {"zfec_version": zfec.__version__, "names": names, "vectors": vectors}
    OUT.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
