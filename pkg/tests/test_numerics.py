import math
import random
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from koopeig.algebra import Polynomial, quad
from koopeig.numerics import (
    Eigen2x2,
    IntegratorConfig,
    eig2x2,
    newton_polish,
    rk45,
    roots_univariate_numeric,
    sylvester_resultant,
)
from koopeig.sysparse import parse_system

F = Fraction
LINEAR = parse_system("vars x y\ndx/dt = x - y\ndy/dt = -2*x\n").field
A = np.array([[1.0, -1.0], [-2.0, 0.0]])


def linear_exact(x0, t):
    return scipy.linalg.expm(A * t) @ np.asarray(x0, dtype=float)


def test_rk45_matches_matrix_exponential():
    cfg = IntegratorConfig(rtol=1e-10, atol=1e-12, horizon=1.0)
    traj = rk45(LINEAR, (1.0, 0.0), cfg)
    assert traj.reason == "horizon"
    err = np.abs(np.array(traj.states[-1]) - linear_exact((1.0, 0.0), 1.0)).max()
    assert err < 1e-8


def test_rk45_dense_output():
    cfg = IntegratorConfig(rtol=1e-10, atol=1e-12, horizon=1.0, dense=True)
    traj = rk45(LINEAR, (0.3, -0.7), cfg)
    for t in np.linspace(0.0, 1.0, 17):
        err = np.abs(
            np.array(traj.sample(float(t))) - linear_exact((0.3, -0.7), float(t))
        ).max()
        assert err < 1e-8


def test_rk45_exponential_accuracy():
    # dx/dt = lam x reproduces e^{lam t} within 10 (atol + rtol)
    for lam in (-2, -1, 1, 2):
        spec = parse_system(f"vars x\ndx/dt = {lam}*x\n")
        cfg = IntegratorConfig(rtol=1e-8, atol=1e-10, horizon=5.0)
        traj = rk45(spec.field, (1.0,), cfg)
        for t, (x,) in zip(traj.times, traj.states):
            assert abs(x - math.exp(lam * t)) <= 10 * (1e-10 + 1e-8 * abs(x)) * math.exp(
                max(0.0, lam * t)
            )


def test_rk45_divergence_on_quadratic_blowup():
    spec = parse_system("vars x\ndx/dt = x^2\n")
    traj = rk45(spec.field, (1.0,), IntegratorConfig(rtol=1e-8, atol=1e-10, horizon=2.0))
    assert traj.reason == "divergence"
    assert abs(traj.t_end - 1.0) < 1e-3  # blow-up of x0/(1-t) at t = 1


def test_rk45_zero_horizon():
    traj = rk45(LINEAR, (1.0, 2.0), IntegratorConfig(horizon=0.0))
    assert traj.times == [0.0]
    assert traj.states == [(1.0, 2.0)]
    assert traj.reason == "horizon"


def test_rk45_tolerance_monotonicity():
    errs = []
    for rtol in (1e-4, 1e-6, 1e-8, 1e-10):
        cfg = IntegratorConfig(rtol=rtol, atol=rtol * 1e-2, horizon=1.0, dense=True)
        traj = rk45(LINEAR, (1.0, 0.0), cfg)
        worst = max(
            np.abs(np.array(traj.sample(float(t))) - linear_exact((1.0, 0.0), float(t))).max()
            for t in np.linspace(0, 1, 9)
        )
        errs.append(worst)
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_roots_simple():
    roots = roots_univariate_numeric([1, 0, 1])  # x^2 + 1
    assert len(roots) == 2
    assert min(abs(r - 1j) for r in roots) < 1e-12
    assert min(abs(r + 1j) for r in roots) < 1e-12


def test_roots_cubic_with_complex_pair():
    roots = roots_univariate_numeric([0, 2, 2, 1])  # x (x^2 + 2x + 2)
    expected = [0, -1 - 1j, -1 + 1j]
    for e in expected:
        assert min(abs(r - e) for r in roots) < 1e-10


def test_roots_random_products():
    rng = random.Random(12)
    for _ in range(20):
        true = [complex(rng.randint(-3, 3), rng.randint(-2, 2)) for _ in range(rng.randint(2, 6))]
        coeffs = [1.0 + 0j]
        for r in true:
            coeffs = [0j] + coeffs
            new = [c for c in coeffs]
            for i in range(len(coeffs) - 1):
                new[i] -= r * coeffs[i + 1]
            coeffs = new
        found = roots_univariate_numeric(coeffs)
        for r in true:
            assert min(abs(f - r) for f in found) < 1e-6


def test_newton_polish():
    spec = parse_system("vars x y\ndx/dt = x*y\ndy/dt = y^2 - x - 1\n")
    z = newton_polish(list(spec.field.components), (0.02, 0.97))
    assert abs(z[0] - 0) < 1e-12 and abs(z[1] - 1) < 1e-12


def test_eig2x2_exact_integer():
    out = eig2x2([[F(1), F(-1)], [F(-2), F(0)]])
    assert out.exact
    assert set(out.values) == {F(2), F(-1)}
    by_val = dict(zip(out.values, out.vectors))
    v2 = by_val[F(2)]
    assert v2[0] + v2[1] == 0  # direction [-1, 1]
    v_m1 = by_val[F(-1)]
    assert v_m1[1] == 2 * v_m1[0]  # direction [1, 2]


def test_eig2x2_quadratic_extension():
    out = eig2x2([[F(1), F(-1)], [F(-1), F(-1)]], ambient_d=2)
    assert out.exact
    s2 = quad(0, 1, 2)
    assert set(out.values) == {s2, -s2}


def test_eig2x2_defective():
    out = eig2x2([[F(1), F(1)], [F(0), F(1)]])
    assert out.defective
    assert len(out.vectors) == 1
    out2 = eig2x2([[F(3), F(0)], [F(0), F(3)]])
    assert not out2.defective and len(out2.vectors) == 2


def test_eig2x2_numeric_fallback():
    out = eig2x2([[0.0, 1.0], [-1.0, 0.0]])
    assert not out.exact
    assert min(abs(v - 1j) for v in out.values) < 1e-12


def test_sylvester_resultant_fixed_points():
    spec = parse_system("vars x y\ndx/dt = x*y\ndy/dt = y^2 - x - 1\n")
    res = sylvester_resultant(*spec.field.components, eliminate="y")
    coeffs = res.univariate_coeffs("x")
    for root in (0.0, -1.0):
        value = sum(float(c) * root**k for k, c in enumerate(coeffs))
        assert abs(value) < 1e-12


def test_resultant_vanishes_exactly_at_common_projections():
    # planted products: p = prod (y - a_i x), q = prod (y - b_j x - c_j)
    rng = random.Random(13)
    V = ("x", "y")
    X = Polynomial.variable(V, "x")
    Y = Polynomial.variable(V, "y")
    for _ in range(20):
        a = rng.randint(-3, 3)
        if a == -2:  # would duplicate the y = -x + 1 factor below
            a = 3
        c = rng.randint(1, 3)
        p = (Y - a * X) * (Y + X - 1)
        q = (Y - a * X) * (Y + c)
        res = sylvester_resultant(p, q, "y")
        # common factor (y - a x) for all x means the resultant vanishes identically
        assert not res
        q2 = (Y - (a + 1) * X - 1) * (Y + c)
        res2 = sylvester_resultant(p, q2, "y")
        assert res2
        # res2 must vanish exactly at x-projections of common roots
        # intersection of y = a x with y = (a+1) x + 1 is x = -1
        x_common = F(-1)
        y_common = a * x_common
        # (x=-1, y=-a) is a common root of p and q2
        assert p.eval((x_common, y_common)) == 0
        assert q2.eval((x_common, y_common)) == 0
        assert res2.eval((x_common, F(0))) == 0


def test_invalid_config():
    with pytest.raises(ValueError):
        IntegratorConfig(rtol=0.0)
