"""Invariant rotational curves ``alpha = g(phi)`` and the quantities built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .classical import step_arrays
from .errors import InvalidLevelError, RootNotFound
from .geometry import Circle, CosineRadius, Ellipse, OvalTable, TWO_PI


@dataclass(frozen=True)
class ConstantLine:
    """Horizontal line ``alpha = beta0``."""

    beta0: float

    def __post_init__(self):
        if not (0.0 < self.beta0 < math.pi):
            raise ValueError(f"beta0 must lie in (0, pi), got {self.beta0}")

    def value(self, phi):
        return self.beta0 + 0.0 * np.asarray(phi, dtype=float)[()]

    def slope(self, phi):
        return 0.0 * np.asarray(phi, dtype=float)[()]


@dataclass(frozen=True)
class EllipseLevel:
    """One branch of the level set ``F = F0`` of the elliptic first integral.

    The lower branch lies in (0, pi/2), the upper one is its mirror image
    under ``alpha -> pi - alpha``.
    """

    F0: float
    e: float
    branch: str = "lower"

    def __post_init__(self):
        if not (0.0 < self.F0 < 1.0):
            raise ValueError(f"F0 must lie in (0, 1) for a rotational level, got {self.F0}")
        if not (0.0 <= self.e < 1.0):
            raise ValueError(f"eccentricity must lie in [0, 1), got {self.e}")
        if self.branch not in ("lower", "upper"):
            raise ValueError(f"branch must be 'lower' or 'upper', got {self.branch!r}")

    def value(self, phi):
        c = np.sqrt(self.F0 + (1.0 - self.F0) * self.e**2 * np.cos(phi) ** 2)
        g = np.arccos(c)
        return g if self.branch == "lower" else math.pi - g

    def slope(self, phi):
        s2a = np.sin(2.0 * self.value(phi))
        s2p = np.sin(2.0 * np.asarray(phi, dtype=float))
        if np.any((s2a == 0.0) & (s2p != 0.0)):
            raise InvalidLevelError("sin(2 alpha) vanishes on the level curve")
        return (1.0 - self.F0) * self.e**2 * s2p / s2a

    @property
    def slope_scale(self) -> float:
        """``(1 - F0) e^2``, the value of ``g'`` where the level crosses ``alpha = phi``."""
        return (1.0 - self.F0) * self.e**2

    @property
    def max_slope(self) -> float:
        """``max |g'|`` over the circle.

        With ``u = cos^2 phi`` the squared slope is
        ``k^2 u (1 - u) / ((F0 + k u)(1 - F0 - k u))``, maximized over [0, 1].
        It exceeds ``slope_scale``: the crossing ``alpha = phi`` is not a
        critical point of ``g'``.
        """
        k, F0 = self.slope_scale, self.F0
        if k == 0.0:
            return 0.0
        ratio = lambda u: -u * (1.0 - u) / ((F0 + k * u) * (1.0 - F0 - k * u))
        res = minimize_scalar(ratio, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
        return k * math.sqrt(-res.fun)


InvariantCurve = ConstantLine | EllipseLevel


def ellipse_first_integral(e, phi, alpha):
    """Conserved quantity of the elliptic billiard."""
    c2 = np.cos(phi) ** 2
    return (np.cos(alpha) ** 2 - e * e * c2) / (1.0 - e * e * c2)


def g_value(curve, phi):
    return curve.value(phi)


def g_slope(curve, phi):
    return curve.slope(phi)


def caustic_residual(table: OvalTable, curve, phi0):
    """Left-hand side minus right-hand side of the caustic relation.

    ``R0 sin a0 / (1 + g'0) + R1 sin a1 / (1 - g'1) - L``: zero when the
    chord from ``(phi0, g(phi0))`` is tangent to the caustic of ``curve``.
    """
    alpha0 = curve.value(phi0)
    phi1, alpha1 = step_arrays(table, phi0, alpha0)
    tq = _transition_arrays(table, curve, phi0, alpha0, phi1, alpha1)
    return tq.r0s0 / (1.0 + tq.g0) + tq.r1s1 / (1.0 - tq.g1) - tq.L


@dataclass
class TransitionQuantities:
    l0: float | np.ndarray
    l1: float | np.ndarray
    l01: float | np.ndarray
    r0s0: float | np.ndarray
    r1s1: float | np.ndarray
    L: float | np.ndarray
    g0: float | np.ndarray
    g1: float | np.ndarray


def _transition_arrays(table, curve, phi0, alpha0, phi1, alpha1):
    r0s0 = table.radius_of_curvature(phi0) * np.sin(alpha0)
    r1s1 = table.radius_of_curvature(phi1) * np.sin(alpha1)
    x0, y0 = table.point_at(phi0)
    x1, y1 = table.point_at(phi1)
    L = np.hypot(x1 - x0, y1 - y0)
    g0 = curve.slope(phi0)
    g1 = curve.slope(phi1)
    l0 = L * (1.0 + g0) - r0s0
    l1 = L * (1.0 - g1) - r1s1
    l01 = L * (1.0 + g0) * (1.0 - g1) - (1.0 - g1) * r0s0 - (1.0 + g0) * r1s1
    return TransitionQuantities(l0, l1, l01, r0s0, r1s1, L, g0, g1)


def transition_quantities(table: OvalTable, curve, phi0, alpha0=None) -> TransitionQuantities:
    """``l0, l1, l01`` for the transition starting at ``(phi0, alpha0)``.

    ``alpha0`` defaults to ``g(phi0)``.  Off the curve the same definitions
    apply with the curve's slopes at the two endpoints.
    """
    if alpha0 is None:
        alpha0 = curve.value(phi0)
    phi1, alpha1 = step_arrays(table, phi0, alpha0)
    return _transition_arrays(table, curve, phi0, alpha0, phi1, alpha1)


def sampled_lower_bound_l(table: OvalTable, curve, samples: int = 10_000, safety: float = 0.999):
    """Diagnostic: ``safety * min l0/l1`` over ``samples`` on-curve transitions."""
    phi = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    tq = transition_quantities(table, curve, phi)
    return safety * float(np.min(tq.l0 / tq.l1))


def lower_bound_l(table: OvalTable, curve) -> float:
    """A lower bound for ``l0/l1`` along the curve, in (0, 1].

    Closed forms: 1 for lines in a circle, the elliptic bound for ellipse
    levels, ``min R / max R`` for lines in a cosine table.  Other pairings
    fall back to the sampled estimate.
    """
    if isinstance(table, Circle) and isinstance(curve, ConstantLine):
        return 1.0
    if isinstance(table, Ellipse) and isinstance(curve, EllipseLevel):
        e2 = table.e**2
        k = (1.0 - curve.F0) * e2
        return (1.0 - e2) ** 2 * ((1.0 - k) / (1.0 + k)) ** 2
    if isinstance(table, CosineRadius) and isinstance(curve, ConstantLine):
        return table.r_min / table.r_max
    return min(1.0, sampled_lower_bound_l(table, curve))


def beta0_equation(n: int, beta):
    return n * np.tan(beta) - np.tan(n * beta)


def beta0_roots(n: int, samples_per_interval: int = 256) -> list[float]:
    """All roots of ``n tan b = tan(n b)`` in (0, pi/2), ascending.

    The interval is split at the poles of ``tan(n b)``; each piece is
    scanned for sign changes and refined with Brent's method.
    """
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    poles = [(2 * k + 1) * math.pi / (2 * n) for k in range(n) if (2 * k + 1) < n]
    edges = [0.0] + poles + [math.pi / 2]
    roots = []
    pad = 1e-9
    for lo, hi in zip(edges[:-1], edges[1:]):
        grid = np.linspace(lo + pad, hi - pad, samples_per_interval)
        f = beta0_equation(n, grid)
        for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]:
            r = brentq(lambda b: beta0_equation(n, b), grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
            # a sign flip across a near-pole is not a root
            if abs(beta0_equation(n, r)) < 1e-6:
                roots.append(r)
    return sorted(roots)


def solve_beta0(n: int, branch: int | None = None) -> float:
    """Angle of the invariant line of the ``R = 1 + a cos(n phi)`` tables.

    By default returns the largest root in ((n - 2) pi / (2 n), pi / 2); for
    n = 6 this is ``arctan sqrt(7 + 4 sqrt(21) / 3)``.  ``branch`` instead
    indexes the ascending list from ``beta0_roots``.
    """
    roots = beta0_roots(n)
    if branch is not None:
        try:
            return roots[branch]
        except IndexError:
            raise RootNotFound(f"n={n}: no root with index {branch} (found {len(roots)})") from None
    lo = (n - 2) * math.pi / (2 * n)
    cands = [r for r in roots if lo < r < math.pi / 2]
    if not cands:
        raise RootNotFound(f"n={n}: no root in ({lo:.6g}, pi/2)")
    return max(cands)


def check_compatible(table: OvalTable, curve) -> None:
    """Raise ValueError when ``curve`` is not an invariant curve of ``table``."""
    if isinstance(curve, EllipseLevel):
        if not isinstance(table, Ellipse):
            raise ValueError("an ellipse level curve needs an ellipse table")
        if not math.isclose(curve.e, table.e, rel_tol=0, abs_tol=1e-15):
            raise ValueError(f"level curve eccentricity {curve.e} != table eccentricity {table.e}")
    elif isinstance(curve, ConstantLine):
        if isinstance(table, Circle):
            return
        if isinstance(table, CosineRadius):
            if abs(beta0_equation(table.n, curve.beta0)) > 1e-8:
                raise ValueError(
                    f"alpha = {curve.beta0} is not an invariant line of the n={table.n} cosine table"
                )
            return
        raise ValueError("constant lines are invariant only for circle and cosine tables")
