"""Where do the off-line periodic attractors of the n = 6 cosine table live?

Prints, for each amplitude a, the largest one-bounce change of alpha under
the classical map, the band around the invariant line that every
non-elastic orbit must enter, the rotation numbers found in that band, and
the periodic fates on a coarse basin grid.
"""
import argparse
import math

import numpy as np

from oval_billiards import ConstantLine, CosineRadius, LinearLaw, solve_beta0
from oval_billiards.analysis import FateKind, MapConfig, basin_grid, iterate_arrays
from oval_billiards.classical import step_arrays


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, nargs="+", default=[0.01, 0.05, 0.1])
    ap.add_argument("--mu", type=float, default=0.1)
    ap.add_argument("--res", type=int, default=48)
    args = ap.parse_args()

    b0 = solve_beta0(6)
    curve = ConstantLine(b0)
    region = ((0.0, 2 * math.pi), (0.15 * math.pi, 0.85 * math.pi))
    for a in args.a:
        table = CosineRadius(a, 6)
        phi, alpha = np.meshgrid(np.linspace(0, 2 * math.pi, 400), np.linspace(0.15 * math.pi, 0.85 * math.pi, 200))
        _, a1 = step_arrays(table, phi.ravel(), alpha.ravel())
        jump = float(np.max(np.abs(a1 - alpha.ravel())))
        # a fixed offset x survives only if mu |x| <= jump
        band = jump / args.mu
        offs = np.linspace(-band, band, 9)
        P, A, L = iterate_arrays(MapConfig(table), np.zeros_like(offs), b0 + offs, 4000)
        rho = (L[-1] - L[0]) / (2 * math.pi * 4000)
        grid = basin_grid(MapConfig(table, curve, LinearLaw(args.mu)), region=region, resolution=(args.res, args.res))
        periodic = {k: v for k, v in grid.counts().items() if k.startswith("PERIODIC_")}
        print(f"a={a:g}: max one-bounce |d alpha| = {jump:.4g}, band |alpha - beta0| <= {band:.4g}, "
              f"classical rotation numbers in band {rho.min():.4f}..{rho.max():.4f}, "
              f"to-curve fraction {grid.fraction(FateKind.TO_CURVE):.4f}, periodic {periodic}")


if __name__ == "__main__":
    main()
