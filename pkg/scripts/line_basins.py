"""Basins of the invariant line of the n = 6 cosine table for four contraction rates.

    python scripts/line_basins.py --res 256 --out runs/basins
"""
import argparse
import math
from pathlib import Path

from oval_billiards import ConstantLine, CosineRadius, LinearLaw, solve_beta0
from oval_billiards.analysis import MapConfig, basin_grid
from oval_billiards.artifacts import basin_image, write_basin_csv, write_pgm


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--res", type=int, default=256)
    ap.add_argument("--a", type=float, default=0.01)
    ap.add_argument("--mu", type=float, nargs="+", default=[0.1, 0.35, 0.37, 0.4])
    ap.add_argument("--out", default="runs/basins")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table, curve = CosineRadius(args.a, 6), ConstantLine(solve_beta0(6))
    region = ((0.0, 2 * math.pi), (0.15 * math.pi, 0.85 * math.pi))
    for mu in args.mu:
        grid = basin_grid(MapConfig(table, curve, LinearLaw(mu)), region=region, resolution=(args.res, args.res))
        stem = f"basin_a{args.a:g}_mu{mu:g}"
        write_pgm(out / f"{stem}.pgm", basin_image(grid))
        write_basin_csv(out / f"{stem}.csv", grid)
        print(f"mu={mu:g}  fraction_to_curve={grid.fraction_to_curve:.6f}  {grid.counts()}")


if __name__ == "__main__":
    main()
