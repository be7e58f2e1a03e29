"""The classical billiard map on the open cylinder [0, 2 pi) x (0, pi).

The array-level functions (``step_arrays`` and friends) are the workhorses
used by the analysis code; ``billiard_step`` and the other ``PhaseState``
functions are thin scalar wrappers around them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GrazingError, SolverError
from .geometry import TWO_PI, OvalTable, chord_length, wrap_angle

GRAZING_EPS = 1e-8
MAX_SOLVER_ITER = 100


@dataclass(frozen=True)
class PhaseState:
    """A point ``(phi, alpha)`` of the phase cylinder.

    ``phi`` is reduced into [0, 2 pi); ``alpha`` must lie strictly in (0, pi).
    """

    phi: float
    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.alpha)):
            raise ValueError(f"non-finite phase state ({self.phi}, {self.alpha})")
        if not (0.0 < self.alpha < math.pi):
            raise ValueError(f"alpha must lie in (0, pi), got {self.alpha}")
        object.__setattr__(self, "phi", wrap_angle(float(self.phi)))
        object.__setattr__(self, "alpha", float(self.alpha))

    def reflected(self) -> "PhaseState":
        """Image under the reversing symmetry ``(phi, alpha) -> (phi, pi - alpha)``."""
        return PhaseState(self.phi, math.pi - self.alpha)


def grazing_mask(alpha, eps=GRAZING_EPS):
    alpha = np.asarray(alpha)
    return (alpha < eps) | (alpha > math.pi - eps)


def _cross_offset(table, phi0, x0, y0, dx, dy, t):
    x, y = table.point_at(phi0 + t)
    return (x - x0) * dy - (y - y0) * dx


def next_impact(table: OvalTable, phi0, alpha0):
    """Solve for the forward advance ``t = phi1 - phi0`` in (0, 2 pi).

    Returns ``(t, ok)``.  The transverse offset ``c(t)`` of ``Gamma(phi0 + t)``
    from the ray is positive before the impact and negative after it, so the
    bracket (0, 2 pi) always holds exactly one sign change.  Newton steps from
    the circle guess ``2 alpha0`` are used while they stay inside the bracket,
    bisection otherwise.
    """
    phi0 = np.atleast_1d(np.asarray(phi0, dtype=float))
    alpha0 = np.atleast_1d(np.asarray(alpha0, dtype=float))
    phi0, alpha0 = np.broadcast_arrays(phi0, alpha0)
    theta = phi0 + alpha0
    dx, dy = np.cos(theta), np.sin(theta)
    x0, y0 = table.point_at(phi0)

    t = np.clip(2.0 * alpha0, 1e-3, TWO_PI - 1e-3)
    lo = np.zeros_like(t)
    hi = np.full_like(t, TWO_PI)
    ok = np.zeros(t.shape, dtype=bool)
    idx = np.arange(t.size)

    for _ in range(MAX_SOLVER_ITER):
        if idx.size == 0:
            break
        ti = t[idx]
        p0 = phi0[idx]
        c = _cross_offset(table, p0, x0[idx], y0[idx], dx[idx], dy[idx], ti)
        dc = table.radius_of_curvature(p0 + ti) * np.sin(theta[idx] - p0 - ti)
        pos = c > 0
        lo_i = np.where(pos, ti, lo[idx])
        hi_i = np.where(pos, hi[idx], ti)
        lo[idx], hi[idx] = lo_i, hi_i
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = ti - c / dc
        inside = np.isfinite(newton) & (newton >= lo_i) & (newton <= hi_i)
        hit = c == 0.0
        t_new = np.where(hit, ti, np.where(inside, newton, 0.5 * (lo_i + hi_i)))
        t[idx] = t_new
        # a Newton correction below 1e-9 of t leaves an error far under
        # rounding once squared; relative so near-grazing chords keep digits
        step = np.abs(t_new - ti)
        done = (inside & (step <= 1e-9 * ti)) | hit
        done |= (hi_i - lo_i) <= 4e-16 * np.maximum(hi_i, 1e-300)
        ok[idx[done]] = True
        idx = idx[~done]
    return t, ok


def step_arrays(table: OvalTable, phi0, alpha0, graze_eps=GRAZING_EPS):
    """Vectorized ``B``: returns ``(phi1, alpha1)`` as arrays.

    Raises GrazingError or SolverError if any input state is bad.
    """
    phi0 = np.asarray(phi0, dtype=float)
    alpha0 = np.asarray(alpha0, dtype=float)
    bad = grazing_mask(alpha0, graze_eps)
    if np.any(bad):
        raise GrazingError(f"grazing ray: alpha = {np.atleast_1d(alpha0)[np.atleast_1d(bad)][0]!r}")
    t, ok = next_impact(table, phi0, alpha0)
    if not np.all(ok):
        p, a = np.broadcast_arrays(np.atleast_1d(phi0), np.atleast_1d(alpha0))
        failed = list(zip(p[~ok].tolist(), a[~ok].tolist()))
        raise SolverError(f"next-impact solver failed for {len(failed)} state(s)", failed)
    shape = np.broadcast(phi0, alpha0).shape
    return impact_to_state(phi0, alpha0, t.reshape(shape))


def impact_to_state(phi0, alpha0, t):
    """Arrival state for a ray from ``phi0`` at ``alpha0`` landing at ``phi0 + t``."""
    phi1 = np.mod(phi0 + t, TWO_PI)
    theta = phi0 + alpha0
    alpha1 = math.pi - np.mod(theta - phi1, math.pi)
    return phi1, alpha1


def inverse_arrays(table: OvalTable, phi, alpha, graze_eps=GRAZING_EPS):
    """Vectorized ``B^-1 = S o B o S``."""
    phi1, alpha1 = step_arrays(table, phi, math.pi - np.asarray(alpha, dtype=float), graze_eps)
    return phi1, math.pi - alpha1


def derivative_arrays(table: OvalTable, phi0, alpha0, phi1, alpha1):
    """``DB`` at ``(phi0, alpha0)`` given its image; shape ``(..., 2, 2)``."""
    r0s0 = table.radius_of_curvature(phi0) * np.sin(alpha0)
    r1s1 = table.radius_of_curvature(phi1) * np.sin(alpha1)
    x0, y0 = table.point_at(phi0)
    x1, y1 = table.point_at(phi1)
    L = np.hypot(x1 - x0, y1 - y0)
    m = np.empty(np.shape(L) + (2, 2))
    m[..., 0, 0] = L - r0s0
    m[..., 0, 1] = L
    m[..., 1, 0] = L - r0s0 - r1s1
    m[..., 1, 1] = L - r1s1
    return m / np.asarray(r1s1)[..., None, None]


def billiard_step(table: OvalTable, s: PhaseState, graze_eps=GRAZING_EPS) -> PhaseState:
    phi1, alpha1 = step_arrays(table, s.phi, s.alpha, graze_eps)
    return PhaseState(float(phi1), float(alpha1))


def billiard_inverse(table: OvalTable, s: PhaseState, graze_eps=GRAZING_EPS) -> PhaseState:
    phi, alpha = inverse_arrays(table, s.phi, s.alpha, graze_eps)
    return PhaseState(float(phi), float(alpha))


def billiard_derivative(table: OvalTable, s0: PhaseState, s1: PhaseState) -> np.ndarray:
    """The 2x2 derivative of ``B`` at ``s0``; ``s1`` must be ``B(s0)``."""
    chord_length(table, s0.phi, s1.phi)  # rejects a degenerate chord
    return derivative_arrays(table, s0.phi, s0.alpha, s1.phi, s1.alpha)


def measure_density(table: OvalTable, s: PhaseState) -> float:
    """Density ``R(phi) sin(alpha)`` of the invariant measure."""
    return float(table.radius_of_curvature(s.phi) * math.sin(s.alpha))
