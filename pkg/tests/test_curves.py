import math

import numpy as np
import pytest

from oval_billiards.classical import derivative_arrays, step_arrays
from oval_billiards.curves import (
    ConstantLine,
    EllipseLevel,
    beta0_equation,
    beta0_roots,
    caustic_residual,
    check_compatible,
    g_slope,
    g_value,
    lower_bound_l,
    sampled_lower_bound_l,
    solve_beta0,
    transition_quantities,
)
from oval_billiards.errors import RootNotFound
from oval_billiards.geometry import Circle, CosineRadius, Ellipse

GRID = np.linspace(0.0, 2 * math.pi, 10_000, endpoint=False)


def pairs():
    b6 = solve_beta0(6)
    return [
        ("circle-line", Circle(1.0), ConstantLine(1.0)),
        ("ellipse-lower", Ellipse(0.35), EllipseLevel(0.25, 0.35)),
        ("ellipse-upper", Ellipse(0.35), EllipseLevel(0.25, 0.35, "upper")),
        ("ellipse-e08", Ellipse(0.8), EllipseLevel(0.1, 0.8)),
        ("cosine-line", CosineRadius(0.01, 6), ConstantLine(b6)),
        ("cosine-big", CosineRadius(0.3, 6), ConstantLine(b6)),
    ]


PAIRS = pairs()
IDS = [p[0] for p in PAIRS]


def test_g_examples():
    assert g_value(ConstantLine(math.pi / 2), 0.7) == math.pi / 2
    lvl = EllipseLevel(0.25, 0.35)
    assert g_value(lvl, math.pi / 2) == pytest.approx(math.acos(0.5), abs=1e-15)
    assert g_value(EllipseLevel(0.25, 0.35, "upper"), math.pi / 2) == pytest.approx(math.pi - math.acos(0.5))
    assert g_slope(ConstantLine(0.4), np.array([0.0, 1.0])).tolist() == [0.0, 0.0]


def test_level_sin_range():
    F0, e = 0.25, 0.35
    s = np.sin(g_value(EllipseLevel(F0, e), GRID))
    assert s.min() >= math.sqrt((1 - F0) * (1 - e * e)) - 1e-15
    assert s.max() <= math.sqrt(1 - F0) + 1e-15
    assert s.min() == pytest.approx(math.sqrt((1 - F0) * (1 - e * e)), abs=1e-12)
    assert s.max() == pytest.approx(math.sqrt(1 - F0), abs=1e-12)


def test_level_branches():
    lower = g_value(EllipseLevel(0.25, 0.35), GRID)
    upper = g_value(EllipseLevel(0.25, 0.35, "upper"), GRID)
    assert np.all((0 < lower) & (lower < math.pi / 2))
    assert np.all((math.pi / 2 < upper) & (upper < math.pi))


def test_level_slope_at_crossing():
    # where the level crosses alpha = phi, g' equals (1 - F0) e^2
    lvl = EllipseLevel(0.25, 0.35)
    assert lvl.slope_scale == pytest.approx(0.091875, abs=1e-15)
    from scipy.optimize import brentq

    phi_x = brentq(lambda p: lvl.value(p) - p, 0.5, 1.5, xtol=1e-15)
    assert lvl.slope(phi_x) == pytest.approx(0.091875, abs=1e-12)


def test_level_max_slope():
    lvl = EllipseLevel(0.25, 0.35)
    gp = g_slope(lvl, GRID)
    assert lvl.max_slope == pytest.approx(gp.max(), abs=1e-7)
    assert lvl.max_slope == pytest.approx(-gp.min(), abs=1e-7)
    assert np.all(np.abs(gp) <= lvl.max_slope + 1e-12)
    # the crossing value is not the maximum
    assert lvl.max_slope > lvl.slope_scale + 5e-3
    assert lvl.max_slope == pytest.approx(0.10074, abs=1e-5)


@pytest.mark.parametrize("branch", ["lower", "upper"])
def test_level_slope_vs_fd(branch):
    lvl = EllipseLevel(0.25, 0.35, branch)
    phi = np.linspace(0.0, 2 * math.pi, 400)
    h = 1e-6
    fd = (g_value(lvl, phi + h) - g_value(lvl, phi - h)) / (2 * h)
    assert np.max(np.abs(fd - g_slope(lvl, phi))) < 1e-5


def test_invalid_curves():
    for bad in (lambda: ConstantLine(0.0), lambda: ConstantLine(math.pi), lambda: EllipseLevel(0.0, 0.35),
                lambda: EllipseLevel(1.0, 0.35), lambda: EllipseLevel(0.5, 0.35, "middle")):
        with pytest.raises(ValueError):
            bad()


@pytest.mark.parametrize("name,table,curve", PAIRS, ids=IDS)
def test_slope_bound(name, table, curve):
    assert np.max(np.abs(g_slope(curve, GRID))) < 1


def test_circle_caustic_residual():
    r = caustic_residual(Circle(1.0), ConstantLine(1.2), np.linspace(0, 6, 7))
    assert np.max(np.abs(r)) < 1e-12


@pytest.mark.parametrize("name,table,curve", PAIRS, ids=IDS)
def test_caustic_residual_on_invariant_curves(name, table, curve, rng):
    phi = rng.uniform(0, 2 * math.pi, 100)
    assert np.max(np.abs(caustic_residual(table, curve, phi))) < 1e-8


def test_caustic_residual_negative_control(rng):
    phi = rng.uniform(0, 2 * math.pi, 100)
    r = caustic_residual(Ellipse(0.35), ConstantLine(0.3), phi)
    assert np.max(np.abs(r)) > 1e-3


def test_circle_transition_quantities():
    b = 1.1
    tq = transition_quantities(Circle(1.0), ConstantLine(b), 0.4)
    assert tq.l0 == pytest.approx(math.sin(b), abs=1e-12)
    assert tq.l1 == pytest.approx(math.sin(b), abs=1e-12)
    assert abs(tq.l01) < 1e-12
    assert tq.L == pytest.approx(2 * math.sin(b), abs=1e-12)


@pytest.mark.parametrize("name,table,curve", PAIRS, ids=IDS)
def test_on_curve_identities(name, table, curve, rng):
    phi = rng.uniform(0, 2 * math.pi, 100)
    tq = transition_quantities(table, curve, phi)
    assert np.max(np.abs(tq.l01)) < 1e-8
    assert np.all(tq.l0 > 0) and np.all(tq.l1 > 0)
    assert np.allclose(tq.l0 * tq.l1, tq.r0s0 * tq.r1s1, rtol=0, atol=1e-8)
    assert np.allclose(tq.l0, (1 + tq.g0) / (1 - tq.g1) * tq.r1s1, rtol=0, atol=1e-8)


def test_lower_bound_examples():
    assert lower_bound_l(Circle(1.0), ConstantLine(0.7)) == 1.0
    lb = lower_bound_l(Ellipse(0.35), EllipseLevel(0.25, 0.35))
    assert 1 - lb == pytest.approx(0.467, abs=0.005)
    assert lower_bound_l(CosineRadius(0.01, 6), ConstantLine(solve_beta0(6))) == pytest.approx(0.99 / 1.01, abs=1e-15)


@pytest.mark.parametrize("name,table,curve", PAIRS, ids=IDS)
def test_lower_bound_below_sampled_minimum(name, table, curve):
    tq = transition_quantities(table, curve, GRID)
    sampled = np.min(tq.l0 / tq.l1)
    lb = lower_bound_l(table, curve)
    assert 0 < lb <= 1
    assert lb <= sampled + 1e-12
    assert sampled_lower_bound_l(table, curve) == pytest.approx(0.999 * sampled)


def test_beta0_closed_form():
    b = solve_beta0(6)
    assert b == pytest.approx(math.atan(math.sqrt(7 + 4 * math.sqrt(21) / 3)), abs=1e-10)
    assert b / math.pi == pytest.approx(0.414, abs=0.001)
    assert b == pytest.approx(1.3014, abs=1e-4)
    assert abs(beta0_equation(6, b)) < 1e-10


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8, 10])
def test_beta0_roots_are_roots(n):
    roots = beta0_roots(n)
    for r in roots:
        assert 0 < r < math.pi / 2
        assert abs(beta0_equation(n, r)) < 1e-8


def test_beta0_odd_n_default_window():
    # odd n: the constant-width case, no root in the default window
    with pytest.raises(RootNotFound):
        solve_beta0(5)
    with pytest.raises(RootNotFound):
        solve_beta0(6, branch=99)
    with pytest.raises(ValueError):
        beta0_roots(3)


def test_line_orbit_stays_put():
    b = solve_beta0(6)
    t = CosineRadius(0.01, 6)
    phi, alpha = np.array([0.3]), np.array([b])
    worst = 0.0
    for _ in range(1000):
        phi, alpha = step_arrays(t, phi, alpha)
        worst = max(worst, abs(alpha[0] - b))
    assert worst < 1e-6


@pytest.mark.parametrize("name,table,curve", PAIRS, ids=IDS)
def test_tangent_propagation(name, table, curve, rng):
    phi0 = rng.uniform(0, 2 * math.pi, 200)
    alpha0 = curve.value(phi0)
    phi1, alpha1 = step_arrays(table, phi0, alpha0)
    db = derivative_arrays(table, phi0, alpha0, phi1, alpha1)
    w = np.einsum("nij,nj->ni", db, np.stack([np.ones_like(phi0), curve.slope(phi0)], axis=-1))
    target = np.stack([np.ones_like(phi1), curve.slope(phi1)], axis=-1)
    cross = w[:, 0] * target[:, 1] - w[:, 1] * target[:, 0]
    assert np.max(np.abs(cross) / np.hypot(w[:, 0], w[:, 1])) < 1e-7
    assert np.all(w[:, 0] > 0)


def test_check_compatible():
    check_compatible(Circle(1.0), ConstantLine(0.3))
    with pytest.raises(ValueError):
        check_compatible(Ellipse(0.35), ConstantLine(0.3))
    with pytest.raises(ValueError):
        check_compatible(Ellipse(0.3), EllipseLevel(0.25, 0.35))
    with pytest.raises(ValueError):
        check_compatible(CosineRadius(0.01, 6), ConstantLine(1.0))
    with pytest.raises(ValueError):
        check_compatible(Circle(1.0), EllipseLevel(0.25, 0.35))
