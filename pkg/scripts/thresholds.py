"""Contraction thresholds 1 - l for the three table families, closed form next to the sampled bound."""
from oval_billiards import Circle, ConstantLine, CosineRadius, Ellipse, EllipseLevel, solve_beta0
from oval_billiards.curves import lower_bound_l, sampled_lower_bound_l

CASES = [
    ("circle", Circle(1.0), ConstantLine(1.0)),
    ("ellipse e=0.35 F0=0.25", Ellipse(0.35), EllipseLevel(0.25, 0.35)),
    ("ellipse e=0.5 F0=0.5", Ellipse(0.5), EllipseLevel(0.5, 0.5)),
    ("cosine a=0.01 n=6", CosineRadius(0.01, 6), ConstantLine(solve_beta0(6))),
    ("cosine a=0.1 n=6", CosineRadius(0.1, 6), ConstantLine(solve_beta0(6))),
    ("cosine a=0.05 n=8", CosineRadius(0.05, 8), ConstantLine(solve_beta0(8))),
]

if __name__ == "__main__":
    print(f"{'case':28s} {'1-l (bound)':>12s} {'1-min l0/l1':>12s}")
    for name, table, curve in CASES:
        lb = lower_bound_l(table, curve)
        sampled = sampled_lower_bound_l(table, curve, safety=1.0)
        print(f"{name:28s} {1 - lb:12.6f} {1 - sampled:12.6f}")
