"""Orbits, rotation numbers, attractor classification and basin grids."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .classical import GRAZING_EPS, PhaseState, grazing_mask, impact_to_state, next_impact
from .geometry import TWO_PI, OvalTable, circular_distance
from .nonelastic import perturbed_arrays

DEFAULT_REGION = ((0.0, TWO_PI), (0.05 * math.pi, 0.95 * math.pi))


@dataclass(frozen=True)
class MapConfig:
    """A classical map (``law is None``) or a non-elastic one."""

    table: OvalTable
    curve: object = None
    law: object = None
    graze_eps: float = GRAZING_EPS

    def __post_init__(self):
        if self.law is not None and self.curve is None:
            raise ValueError("a non-elastic map needs an invariant curve")

    @property
    def perturbed(self) -> bool:
        return self.law is not None

    def step_arrays(self, phi, alpha):
        """One step on arrays; returns ``(phi1, alpha1, ok)``.

        ``ok`` is False for grazing inputs, solver failures and strip escapes;
        the outputs at those positions are meaningless.
        """
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        good = ~grazing_mask(alpha, self.graze_eps) & np.isfinite(alpha)
        a = np.where(good, alpha, 0.5 * math.pi)
        if self.law is None:
            t, ok = next_impact(self.table, phi, a)
            phi1, alpha1 = impact_to_state(phi, a, t)
        else:
            phi1, alpha1, _, ok = perturbed_arrays(self.table, self.curve, self.law, phi, a)
        return phi1, alpha1, ok & good


@dataclass
class OrbitRecord:
    states: list[PhaseState]
    lift: np.ndarray
    escaped: bool = False

    @property
    def phi(self) -> np.ndarray:
        return np.array([s.phi for s in self.states])

    @property
    def alpha(self) -> np.ndarray:
        return np.array([s.alpha for s in self.states])


def iterate(config: MapConfig, s0: PhaseState, n: int) -> OrbitRecord:
    """Up to ``n`` steps from ``s0``; stops early (``escaped=True``) on failure."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    states = [s0]
    lift = [s0.phi]
    phi, alpha = s0.phi, s0.alpha
    escaped = False
    for _ in range(n):
        p1, a1, ok = config.step_arrays(phi, alpha)
        p1, a1 = float(p1[0]), float(a1[0])
        if not ok[0] or not (0.0 < a1 < math.pi):
            escaped = True
            break
        lift.append(lift[-1] + (p1 - phi) % TWO_PI)
        phi, alpha = p1, a1
        states.append(PhaseState(phi, alpha))
    return OrbitRecord(states, np.array(lift), escaped)


def iterate_arrays(config: MapConfig, phi0, alpha0, n: int):
    """Iterate many orbits at once; returns ``(phi, alpha, lift)`` of shape (n + 1, M).

    Orbits that fail are frozen and their entries from then on are NaN.
    """
    phi = np.atleast_1d(np.asarray(phi0, dtype=float)).copy()
    alpha = np.atleast_1d(np.asarray(alpha0, dtype=float)).copy()
    out_p = np.full((n + 1,) + phi.shape, np.nan)
    out_a = np.full_like(out_p, np.nan)
    out_l = np.full_like(out_p, np.nan)
    out_p[0], out_a[0], out_l[0] = phi, alpha, phi
    alive = np.ones(phi.shape, dtype=bool)
    lift = phi.copy()
    for k in range(1, n + 1):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        p1, a1, ok = config.step_arrays(phi[idx], alpha[idx])
        lift[idx] += np.mod(p1 - phi[idx], TWO_PI)
        phi[idx], alpha[idx] = p1, a1
        alive[idx[~ok]] = False
        keep = idx[ok]
        out_p[k, keep], out_a[k, keep], out_l[k, keep] = phi[keep], alpha[keep], lift[keep]
    return out_p, out_a, out_l


def rotation_number(record: OrbitRecord) -> float:
    """Average advance per step as a fraction of a full turn."""
    if record.escaped:
        raise ValueError("rotation number is undefined for an escaped orbit")
    n = len(record.lift) - 1
    if n + 1 < 100:
        raise ValueError(f"need at least 100 states, got {n + 1}")
    return float((record.lift[-1] - record.lift[0]) / (TWO_PI * n))


class FateKind(IntEnum):
    TO_CURVE = 0
    PERIODIC = 1
    ESCAPED = 2
    UNDECIDED = 3


@dataclass(frozen=True)
class Fate:
    kind: FateKind
    iterations_used: int
    final_distance: float
    period: int | None = None

    def __post_init__(self):
        if self.kind == FateKind.PERIODIC and not (self.period and self.period >= 1):
            raise ValueError("a periodic fate needs period >= 1")


@dataclass(frozen=True)
class ClassifierParams:
    max_iter: int = 20_000
    tol_curve: float = 1e-6
    tol_period: float = 1e-6
    window: int = 50
    max_period: int = 64

    def __post_init__(self):
        if min(self.max_iter, self.window, self.max_period) < 1:
            raise ValueError("classifier iteration counts must be positive")
        if not (self.tol_curve > 0 and self.tol_period > 0):
            raise ValueError("classifier tolerances must be positive")


def classify_arrays(config: MapConfig, phi0, alpha0, curve=None, params: ClassifierParams | None = None):
    """Classify many initial conditions at once.

    Returns ``(kind, period, iters, distance)`` arrays.  An orbit counts as
    attracted to the curve once ``|alpha - g(phi)| < tol_curve`` has held for
    ``window`` consecutive states, and as periodic when it comes back within
    ``tol_period`` (in both coordinates, ``phi`` taken on the circle) of one
    of its last ``max_period`` states while off the curve; the smallest such
    lag is the reported period.  A state exactly on the curve is accepted
    immediately.
    """
    curve = config.curve if curve is None else curve
    if curve is None:
        raise ValueError("classification needs a target curve")
    p = params or ClassifierParams()
    P = p.max_period

    phi0 = np.atleast_1d(np.asarray(phi0, dtype=float)).ravel()
    alpha0 = np.atleast_1d(np.asarray(alpha0, dtype=float)).ravel()
    phi0, alpha0 = np.broadcast_arrays(phi0, alpha0)
    N = phi0.size
    kind = np.full(N, FateKind.UNDECIDED, dtype=np.int8)
    period = np.zeros(N, dtype=np.int32)
    iters = np.full(N, p.max_iter, dtype=np.int32)
    dist_out = np.full(N, np.nan)

    org = np.arange(N)
    ph = phi0.copy()
    al = alpha0.copy()
    streak = np.zeros(N, dtype=np.int32)
    hph = np.empty((N, P))
    hal = np.empty((N, P))

    def finish(mask, k, code, lag=None):
        rows = org[mask]
        kind[rows] = code
        iters[rows] = k
        dist_out[rows] = dist[mask]
        if lag is not None:
            period[rows] = lag

    for k in range(p.max_iter + 1):
        dist = np.abs(al - curve.value(ph))
        on = dist < p.tol_curve
        streak = np.where(on, streak + 1, 0)
        done = streak >= p.window
        if k == 0:
            done |= dist == 0.0
        finish(done, k, FateKind.TO_CURVE)

        per = np.zeros(org.size, dtype=bool)
        lags = min(k, P)
        cand = np.nonzero(~on & ~done)[0]
        if lags and cand.size:
            cols = (k - np.arange(1, lags + 1)) % P
            close = (np.abs(al[cand, None] - hal[cand][:, cols]) < p.tol_period) & (
                circular_distance(ph[cand, None], hph[cand][:, cols]) < p.tol_period
            )
            hit = close.any(axis=1)
            if hit.any():
                rows = cand[hit]
                lag = np.argmax(close[hit], axis=1) + 1
                per[rows] = True
                lagfull = np.zeros(org.size, dtype=np.int32)
                lagfull[rows] = lag
                finish(per, k, FateKind.PERIODIC, lagfull[per])
        done |= per

        if k == p.max_iter:
            rest = ~done
            dist_out[org[rest]] = dist[rest]
            break

        keep = ~done
        org, ph, al, streak = org[keep], ph[keep], al[keep], streak[keep]
        hph, hal = hph[keep], hal[keep]
        if org.size == 0:
            break
        hph[:, k % P] = ph
        hal[:, k % P] = al

        ph1, al1, ok = config.step_arrays(ph, al)
        bad = ~ok | ~(al1 > 0) | ~(al1 < math.pi)
        if bad.any():
            dist = np.abs(al - curve.value(ph))
            finish(bad, k + 1, FateKind.ESCAPED)
            keep = ~bad
            org, streak, hph, hal = org[keep], streak[keep], hph[keep], hal[keep]
            ph1, al1 = ph1[keep], al1[keep]
        ph, al = ph1, al1
        if org.size == 0:
            break

    return kind, period, iters, dist_out


def classify_fate(config: MapConfig, s0: PhaseState, curve=None, params: ClassifierParams | None = None) -> Fate:
    kind, period, iters, dist = classify_arrays(config, s0.phi, s0.alpha, curve, params)
    k = FateKind(int(kind[0]))
    return Fate(k, int(iters[0]), float(dist[0]), int(period[0]) if k == FateKind.PERIODIC else None)


@dataclass
class BasinGrid:
    region: tuple[tuple[float, float], tuple[float, float]]
    resolution: tuple[int, int]
    phi: np.ndarray
    alpha: np.ndarray
    kinds: np.ndarray  # shape (n_alpha, n_phi)
    periods: np.ndarray
    iterations: np.ndarray
    distances: np.ndarray

    @property
    def fraction_to_curve(self) -> float:
        return float(np.mean(self.kinds == FateKind.TO_CURVE))

    def fraction(self, kind: FateKind, period: int | None = None) -> float:
        mask = self.kinds == kind
        if period is not None:
            mask &= self.periods == period
        return float(np.mean(mask))

    def counts(self) -> dict[str, int]:
        out = {k.name: int(np.sum(self.kinds == k)) for k in FateKind}
        for q in np.unique(self.periods[self.kinds == FateKind.PERIODIC]):
            out[f"PERIODIC_{int(q)}"] = int(np.sum((self.kinds == FateKind.PERIODIC) & (self.periods == q)))
        return out


def cell_centers(region, resolution):
    (p0, p1), (a0, a1) = region
    n_phi, n_alpha = resolution
    phi = p0 + (np.arange(n_phi) + 0.5) * (p1 - p0) / n_phi
    alpha = a0 + (np.arange(n_alpha) + 0.5) * (a1 - a0) / n_alpha
    return phi, alpha


def default_workers() -> int:
    env = os.environ.get("OVAL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"OVAL_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def basin_grid(
    config: MapConfig,
    curve=None,
    region=DEFAULT_REGION,
    resolution: tuple[int, int] = (256, 256),
    params: ClassifierParams | None = None,
    workers: int | None = None,
) -> BasinGrid:
    """Classify the center of every cell of a ``n_phi x n_alpha`` grid.

    Rows of the result run over ``alpha`` (ascending), columns over ``phi``.
    Cells are split into contiguous chunks processed by up to ``workers``
    threads; results do not depend on the split.
    """
    n_phi, n_alpha = resolution
    if n_phi < 16 or n_alpha < 16:
        raise ValueError(f"resolution must be at least 16x16, got {n_phi}x{n_alpha}")
    phi, alpha = cell_centers(region, resolution)
    A, Ph = np.meshgrid(alpha, phi, indexing="ij")
    flat_p, flat_a = Ph.ravel(), A.ravel()
    workers = default_workers() if workers is None else max(1, workers)

    n = flat_p.size
    if workers == 1:
        parts = [classify_arrays(config, flat_p, flat_a, curve, params)]
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(workers) as ex:
            parts = list(
                ex.map(
                    lambda ij: classify_arrays(config, flat_p[ij[0]:ij[1]], flat_a[ij[0]:ij[1]], curve, params),
                    zip(bounds[:-1], bounds[1:]),
                )
            )
    kind, per, its, dist = (np.concatenate([q[i] for q in parts]) for i in range(4))
    shape = (n_alpha, n_phi)
    return BasinGrid(
        region=region,
        resolution=(n_phi, n_alpha),
        phi=phi,
        alpha=alpha,
        kinds=kind.reshape(shape),
        periods=per.reshape(shape),
        iterations=its.reshape(shape),
        distances=dist.reshape(shape),
    )
