"""Attraction to the F0 = 0.25 level of the e = 0.35 ellipse: fates and the decay of |F - F0|."""
import argparse
import math

import numpy as np

from oval_billiards import Ellipse, EllipseLevel, LinearLaw
from oval_billiards.analysis import MapConfig, classify_arrays, iterate_arrays
from oval_billiards.curves import ellipse_first_integral
from oval_billiards.nonelastic import certify_strip

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, nargs="+", default=[0.3, 0.5, 0.7])
    ap.add_argument("--starts", type=int, default=100)
    ap.add_argument("--width", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    e, F0 = 0.35, 0.25
    lvl = EllipseLevel(F0, e)
    rng = np.random.default_rng(args.seed)
    phi = rng.uniform(0, 2 * math.pi, args.starts)
    alpha = lvl.value(phi) + rng.uniform(-args.width, args.width, args.starts)
    for mu in args.mu:
        cfg = MapConfig(Ellipse(e), lvl, LinearLaw(mu))
        kind, _, iters, _ = classify_arrays(cfg, phi, alpha)
        P, A, _ = iterate_arrays(cfg, phi, alpha, 40)
        decay = np.nanmax(np.abs(ellipse_first_integral(e, P, A) - F0), axis=1)
        cert = certify_strip(Ellipse(e), lvl, LinearLaw(mu), require_threshold=False)
        print(f"mu={mu:g}: fates {np.bincount(kind, minlength=4).tolist()} median iters {int(np.median(iters))}"
              f"  max|F-F0| at steps 0,10,20,40: {decay[0]:.2e} {decay[10]:.2e} {decay[20]:.2e} {decay[40]:.2e}"
              f"  certificate {cert.verdict} (halfwidth {cert.halfwidth:g})")
