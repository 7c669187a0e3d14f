"""Rewrite the golden files under tests/golden from the current build.

Only run this after an intentional change to the bundled dataset or the
output formats; the tests exist to catch unintentional ones.

Run:  python tools/regen_golden.py
"""

import json
import subprocess
import sys
from pathlib import Path

from cvconcur import qpm

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"
CONCUR_ARGS = ["qpm", "concur", "--period-range", "41.5:42.5", "--lobes", "2"]


def cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "cvconcur", *args], check=True, capture_output=True, text=True
    ).stdout


def main():
    GOLDEN.mkdir(exist_ok=True)
    s = qpm.load_dataset()
    indices = {
        f"{axis}@{lam}um,{temp}C": qpm.refractive_index(s, axis, lam, temp)
        for axis in qpm.AXES
        for lam in (0.532, 1.064)
        for temp in (25.0, 60.0)
    }
    (GOLDEN / "rta_indices.json").write_text(json.dumps(indices, indent=2, sort_keys=True) + "\n")
    (GOLDEN / "concur_41.5_42.5_lobes2.csv").write_text(cli(*CONCUR_ARGS))
    print(f"wrote golden files to {GOLDEN}")


if __name__ == "__main__":
    main()
