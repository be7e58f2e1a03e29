"""Non-elastic billiards: the classical map followed by a fiber contraction.

``P(phi0, alpha0) = (phi1, alpha1 - h(alpha1 - g(phi1)))`` where
``(phi1, alpha1) = B(phi0, alpha0)``, ``g`` is an invariant curve of ``B`` and
``h`` a contraction law.  The cone-field certificate checks that the
derivative of ``P`` written in the bases ``u = (1, g' - delta)``,
``v = (1, g' + delta)`` has strictly positive entries on a strip around
the curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classical import PhaseState, derivative_arrays, grazing_mask, next_impact, impact_to_state, step_arrays
from .curves import lower_bound_l
from .errors import DomainError, SingularBasisError, StripEscape
from .geometry import TWO_PI, OvalTable

FULL_FIBER = (-math.pi, math.pi)


@dataclass(frozen=True)
class LinearLaw:
    """``h(x) = mu x`` with 0 < mu < 1."""

    mu: float
    domain: tuple[float, float] = FULL_FIBER

    def __post_init__(self):
        if not (0.0 < self.mu < 1.0):
            raise ValueError(f"linear law needs 0 < mu < 1, got mu={self.mu}")
        _check_domain(self.domain)

    def __call__(self, x):
        return self.mu * np.asarray(x, dtype=float)[()]

    def slope(self, x):
        return self.mu + 0.0 * np.asarray(x, dtype=float)[()]

    @property
    def slope0(self) -> float:
        return self.mu


@dataclass(frozen=True)
class TanhLaw:
    """``h(x) = s tanh(mu x / s)``: slope ``mu`` at 0, saturating at ``+-s``."""

    mu: float
    saturation: float = 1.0
    domain: tuple[float, float] = FULL_FIBER

    def __post_init__(self):
        if not (0.0 < self.mu < 1.0):
            raise ValueError(f"tanh law needs 0 < mu < 1, got mu={self.mu}")
        if not self.saturation > 0:
            raise ValueError(f"saturation must be positive, got {self.saturation}")
        _check_domain(self.domain)

    def __call__(self, x):
        s = self.saturation
        return s * np.tanh(self.mu * np.asarray(x, dtype=float) / s)[()]

    def slope(self, x):
        c = np.cosh(self.mu * np.asarray(x, dtype=float) / self.saturation)
        return (self.mu / (c * c))[()]

    @property
    def slope0(self) -> float:
        return self.mu


ContractionLaw = LinearLaw | TanhLaw


def _check_domain(domain):
    lo, hi = domain
    if not (lo <= 0.0 <= hi and lo < hi):
        raise ValueError(f"law domain must be an interval containing 0, got {domain}")


def _in_domain(law, x):
    lo, hi = law.domain
    x = np.asarray(x)
    return (x >= lo) & (x <= hi)


def h_apply(law, x):
    if not np.all(_in_domain(law, x)):
        raise DomainError(f"{x!r} outside law domain {law.domain}")
    return law(x)


def h_slope(law, x):
    if not np.all(_in_domain(law, x)):
        raise DomainError(f"{x!r} outside law domain {law.domain}")
    return law.slope(x)


def perturbed_arrays(table: OvalTable, curve, law, phi0, alpha0):
    """Vectorized ``P``.

    Returns ``(phi1, alpha1_new, alpha1_pre, ok)``: ``alpha1_pre`` is the
    unperturbed arrival angle and ``ok`` flags states whose fiber offset fell
    inside the law's domain and whose impact solve converged.  States with
    ``ok == False`` carry the unperturbed angle.
    """
    phi0 = np.atleast_1d(np.asarray(phi0, dtype=float))
    alpha0 = np.atleast_1d(np.asarray(alpha0, dtype=float))
    t, ok = next_impact(table, phi0, alpha0)
    phi1, alpha1 = impact_to_state(phi0, alpha0, t)
    offset = alpha1 - curve.value(phi1)
    inside = _in_domain(law, offset)
    ok = ok & inside
    alpha_new = np.where(inside, alpha1 - law(np.where(inside, offset, 0.0)), alpha1)
    return phi1, alpha_new, alpha1, ok


def perturbed_step(table: OvalTable, curve, law, s0: PhaseState) -> PhaseState:
    phi1, alpha1 = step_arrays(table, s0.phi, s0.alpha)
    offset = float(alpha1 - curve.value(phi1))
    if not _in_domain(law, offset):
        raise StripEscape(
            f"fiber offset {offset!r} at phi={float(phi1)!r} outside {law.domain}",
            state=(float(phi1), float(alpha1)),
        )
    return PhaseState(float(phi1), float(alpha1 - law(offset)))


def contraction_factor(curve, law, phi1, alpha1_pre):
    """Left factor ``[[1, 0], [h' g', 1 - h']]`` of ``DP``; shape ``(..., 2, 2)``."""
    g1 = curve.slope(phi1)
    h1 = law.slope(alpha1_pre - curve.value(phi1))
    g1, h1 = np.broadcast_arrays(np.asarray(g1, dtype=float), np.asarray(h1, dtype=float))
    m = np.zeros(g1.shape + (2, 2))
    m[..., 0, 0] = 1.0
    m[..., 1, 0] = h1 * g1
    m[..., 1, 1] = 1.0 - h1
    return m


def perturbed_derivative_arrays(table, curve, law, phi0, alpha0, phi1, alpha1_pre):
    db = derivative_arrays(table, phi0, alpha0, phi1, alpha1_pre)
    return contraction_factor(curve, law, phi1, alpha1_pre) @ db


def perturbed_derivative(table, curve, law, s0: PhaseState, s1_pre: PhaseState) -> np.ndarray:
    """``DP`` at ``s0``; ``s1_pre`` is the unperturbed image ``B(s0)``."""
    return perturbed_derivative_arrays(table, curve, law, s0.phi, s0.alpha, s1_pre.phi, s1_pre.alpha)


@dataclass(frozen=True)
class ConeBasis:
    """Cone field with edges ``u = (1, g' - delta)`` and ``v = (1, g' + delta)``."""

    delta: float
    curve: object

    def __post_init__(self):
        if not self.delta > 0:
            raise SingularBasisError(f"cone half-width must be positive, got {self.delta}")

    def matrix(self, phi):
        return basis_matrix(self.curve.slope(phi), self.delta)

    def quadratic_form(self, phi, w):
        """``Q(a u + b v) = a b`` for the tangent vector(s) ``w``."""
        a, b = to_cone_coords(self.curve.slope(phi), self.delta, w)
        return a * b


def basis_matrix(slope, delta):
    """Columns ``u, v``: ``[[1, 1], [g' - delta, g' + delta]]``."""
    slope = np.asarray(slope, dtype=float)
    m = np.empty(slope.shape + (2, 2))
    m[..., 0, 0] = 1.0
    m[..., 0, 1] = 1.0
    m[..., 1, 0] = slope - delta
    m[..., 1, 1] = slope + delta
    return m


def to_cone_coords(slope, delta, w):
    """Coordinates ``(a, b)`` of ``w = a u + b v``."""
    w = np.asarray(w, dtype=float)
    x, y = w[..., 0], w[..., 1]
    # b - a = (y - g' x) / delta, a + b = x
    d = (y - slope * x) / delta
    return 0.5 * (x - d), 0.5 * (x + d)


def cone_basis_matrix(dp, slope0, slope1, delta):
    """``T1^-1 DP T0`` with ``Ti`` the basis matrix at each end."""
    if not delta > 0:
        raise SingularBasisError(f"cone half-width must be positive, got {delta}")
    dp = np.asarray(dp, dtype=float)
    t0 = basis_matrix(slope0, delta)
    slope1 = np.asarray(slope1, dtype=float)
    # closed-form inverse of [[1, 1], [g - d, g + d]] (determinant 2 d)
    t1inv = np.empty(slope1.shape + (2, 2))
    t1inv[..., 0, 0] = slope1 + delta
    t1inv[..., 0, 1] = -1.0
    t1inv[..., 1, 0] = -(slope1 - delta)
    t1inv[..., 1, 1] = 1.0
    t1inv /= 2.0 * delta
    return t1inv @ dp @ t0


def cone_matrix_explicit(tq, h1, delta):
    """The cone-basis derivative written out in terms of ``l0, l1, l01``.

    Algebraically identical to ``cone_basis_matrix`` applied to ``DP``; kept
    as an independent route for cross-checking.
    """
    if not delta > 0:
        raise SingularBasisError(f"cone half-width must be positive, got {delta}")
    q = 1.0 - np.asarray(h1, dtype=float)
    l0, l1, l01, L = (np.asarray(v, dtype=float) for v in (tq.l0, tq.l1, tq.l01, tq.L))
    shape = np.broadcast(l0, q).shape
    m = np.empty(shape + (2, 2))
    m[..., 0, 0] = delta * (l0 - delta * L) + q * (delta * l1 - l01)
    m[..., 0, 1] = delta * (l0 + delta * L) - q * (delta * l1 + l01)
    m[..., 1, 0] = delta * (l0 - delta * L) - q * (delta * l1 - l01)
    m[..., 1, 1] = delta * (l0 + delta * L) + q * (delta * l1 + l01)
    return m / (2.0 * delta * np.asarray(tq.r1s1))[..., None, None]


def positivity_check(m) -> bool:
    """True iff every entry of ``m`` is strictly positive."""
    return bool(np.all(np.asarray(m) > 0))


def contraction_threshold(table: OvalTable, curve) -> float:
    """Laws with ``h'(0)`` strictly above this value satisfy the sufficient contraction bound."""
    return 1.0 - lower_bound_l(table, curve)


@dataclass
class SplittingCertificate:
    verdict: str
    delta: float
    halfwidth: float
    min_entry: float
    sample_count: int
    threshold: float
    slope0: float
    maps_into_interval: bool | None = None
    reason: str = ""
    violating_state: tuple[float, float] | None = None
    tested: list[tuple[float, float, float]] = field(default_factory=list)
    grid: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def report_lines(self) -> list[str]:
        def f(x):
            return "none" if x is None else format(x, ".17g") if isinstance(x, float) else str(x)

        lines = [
            f"verdict = {self.verdict}",
            f"delta = {f(self.delta)}",
            f"halfwidth = {f(self.halfwidth)}",
            f"min_entry = {f(self.min_entry)}",
            f"sample_count = {self.sample_count}",
            f"threshold = {f(self.threshold)}",
            f"slope0 = {f(self.slope0)}",
            f"maps_into_interval = {self.maps_into_interval}",
            f"reason = {self.reason or 'none'}",
        ]
        if self.violating_state is not None:
            lines.append(
                f"violating_state = {f(self.violating_state[0])} {f(self.violating_state[1])}"
            )
        return lines


def default_deltas():
    return np.logspace(-4.0, math.log10(0.5), 17)


def default_widths(max_halfwidth, start=1e-4):
    widths = []
    w = start
    while w < max_halfwidth:
        widths.append(w)
        w *= 2.0
    widths.append(float(max_halfwidth))
    return widths


def strip_derivatives(table, curve, law, halfwidth, n_phi=256, n_alpha=33):
    """Sample ``DP`` on the strip ``{(phi, g(phi) + s): |s| <= halfwidth}``.

    The samples are a uniform ``phi`` grid times ``n_alpha`` offsets.  Returns
    flattened ``(phi, offset, dp, slope0, slope1, ok)``; ``ok`` is False where
    the map is not defined (grazing, solver failure, offset outside the
    law's domain).
    """
    phi = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    offs = np.linspace(-halfwidth, halfwidth, n_alpha)
    P, S = np.meshgrid(phi, offs, indexing="ij")
    P, S = P.ravel(), S.ravel()
    alpha0 = curve.value(P) + S
    ok = ~grazing_mask(alpha0)
    a0 = np.where(ok, alpha0, 0.5 * math.pi)
    phi1, _, a1, good = perturbed_arrays(table, curve, law, P, a0)
    ok &= good & ~grazing_mask(a1)
    dp = perturbed_derivative_arrays(table, curve, law, P, a0, phi1, a1)
    return P, S, dp, curve.slope(P), curve.slope(phi1), ok


def strip_entries(table, curve, law, halfwidth, delta, n_phi=256, n_alpha=33):
    """Per-sample minimum entry of the cone-basis ``DP`` (``-inf`` where undefined)."""
    P, S, dp, g0, g1, ok = strip_derivatives(table, curve, law, halfwidth, n_phi, n_alpha)
    return P, S, _min_entries(dp, g0, g1, delta, ok), ok


def _min_entries(dp, g0, g1, delta, ok):
    mins = cone_basis_matrix(dp, g0, g1, delta).reshape(-1, 4).min(axis=1)
    return np.where(ok, mins, -np.inf)


def certify_strip(
    table: OvalTable,
    curve,
    law,
    max_halfwidth: float = 0.5,
    deltas=None,
    samples: tuple[int, int] = (256, 33),
    require_threshold: bool = True,
) -> SplittingCertificate:
    """Search for a strip and a cone half-width certifying dominated splitting.

    Strip half-widths double from 1e-4 up to ``max_halfwidth``; at each width
    every candidate ``delta`` is tried and the one maximizing the smallest
    entry is kept.  The search stops at the first width with no positive
    candidate and reports the widest passing strip.  When
    ``require_threshold`` is set, a law whose ``h'(0)`` does not exceed
    ``contraction_threshold`` fails immediately.
    """
    deltas = default_deltas() if deltas is None else np.asarray(deltas, dtype=float)
    n_phi, n_alpha = samples
    thr = contraction_threshold(table, curve)
    slope0 = float(law.slope0)
    cert = SplittingCertificate(
        verdict="fail", delta=float("nan"), halfwidth=0.0, min_entry=float("-inf"),
        sample_count=0, threshold=thr, slope0=slope0,
    )
    if require_threshold and not slope0 > thr:
        cert.reason = f"h'(0) = {slope0:.6g} does not exceed threshold {thr:.6g}"
        return cert

    for w in default_widths(max_halfwidth):
        best = None
        P, S, dp, g0, g1, ok = strip_derivatives(table, curve, law, w, n_phi, n_alpha)
        for d in deltas:
            mins = _min_entries(dp, g0, g1, float(d), ok)
            m = float(mins.min())
            cert.tested.append((w, float(d), m))
            if best is None or m > best[1]:
                best = (float(d), m, P, S, mins)
        d, m, P, S, mins = best
        if m > 0:
            cert.verdict = "pass"
            cert.delta, cert.halfwidth, cert.min_entry = d, w, m
            cert.sample_count = P.size
            cert.grid = (P, S, mins)
            cert.reason = ""
            cert.violating_state = None
        else:
            k = int(np.argmin(mins))
            cert.violating_state = (float(P[k]), float(curve.value(P[k]) + S[k]))
            cert.reason = f"no delta gives positive entries at halfwidth {w:.6g}"
            if cert.verdict != "pass":
                cert.delta, cert.min_entry, cert.sample_count = d, m, P.size
                cert.grid = (P, S, mins)
            break

    if cert.verdict == "pass":
        cert.maps_into_interval = maps_into_interval(law, (-cert.halfwidth, cert.halfwidth))
    return cert


def maps_into_interval(law, interval, samples: int = 1001) -> bool:
    """Sampled check that ``h`` sends ``interval`` into itself."""
    lo, hi = interval
    x = np.linspace(lo, hi, samples)
    y = law(x)
    return bool(np.all((y >= lo) & (y <= hi)))
