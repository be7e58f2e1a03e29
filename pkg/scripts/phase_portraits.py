"""Classical phase portraits (circle, ellipse, n = 6 cosine table) as CSV point clouds."""
import argparse
import sys

from oval_billiards.cli import run

TABLES = {"circle": ["circle"], "ellipse": ["ellipse", "e=0.35"], "cosine6": ["cosine", "a=0.01", "n=6"]}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--starts", default="40")
    ap.add_argument("--iterations", default="2000")
    ap.add_argument("--out", default="runs/phase")
    args = ap.parse_args()
    code = 0
    for name, spec in TABLES.items():
        code |= run(["phase", "--table", *spec, "--starts", args.starts, "--iterations", args.iterations,
                     "--out", f"{args.out}/{name}"])
    sys.exit(code)
