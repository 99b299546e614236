"""Kernels: quadrature, winding counts, Newton, embedded RK advance."""

import math

import numpy as np
import pytest

from mbamp.errors import BoundaryZero, Diverged, NonConvergence
from mbamp.numerics import (Tolerances, adaptive_quad, complex_newton,
                            count_zeros_rect, ode_advance)

# integral of log(1+s^2)/(s+2) over [-1,1]; dense-oracle value, frozen from a
# 1e6-panel trapezoid cross-checked against mpmath.quad at 40 digits.
LOG_INTEGRAL = 0.31014910540009094


def test_tolerances_defaults_and_validation():
    tol = Tolerances()
    assert tol.ode_rel == 1e-10 and tol.quad_tol == 1e-10
    with pytest.raises(ValueError):
        Tolerances(ode_rel=0.0)
    with pytest.raises(ValueError):
        Tolerances(quad_tol=1e-17)


def test_quad_zero_integrand():
    assert adaptive_quad(lambda s: 0.0, 0.0, 1.0, 1e-10) == 0.0


def test_quad_linear():
    assert adaptive_quad(lambda s: s, 0.0, 1.0, 1e-10) == pytest.approx(0.5, abs=1e-12)


def test_quad_polynomial_exactness_degree5():
    rng = np.random.default_rng(7)
    for _ in range(10):
        coeffs = rng.normal(size=6)
        a, b = sorted(rng.uniform(-3, 3, size=2))
        if b - a < 1e-3:
            continue
        exact = sum(c / (p + 1) * (b ** (p + 1) - a ** (p + 1))
                    for p, c in enumerate(coeffs))
        got = adaptive_quad(lambda s: sum(c * s ** p for p, c in enumerate(coeffs)),
                            a, b, 1e-12)
        assert got == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_quad_log_kernel_vs_dense_oracle():
    got = adaptive_quad(lambda s: math.log1p(s * s) / (s + 2.0), -1.0, 1.0, 1e-12)
    assert got == pytest.approx(LOG_INTEGRAL, abs=1e-11)


def test_quad_dense_trapezoid_agreement():
    # independent oracle for a lumpier integrand
    f = lambda s: math.exp(-s) * math.sin(7 * s)
    s = np.linspace(0.0, 2.0, 1_000_001)
    oracle = np.trapezoid(np.exp(-s) * np.sin(7 * s), s)
    got = adaptive_quad(f, 0.0, 2.0, 1e-11)
    assert got == pytest.approx(oracle, abs=5e-11)


def test_quad_reversed_interval_sign():
    v1 = adaptive_quad(lambda s: s * s, 0.0, 2.0, 1e-12)
    v2 = adaptive_quad(lambda s: s * s, 2.0, 0.0, 1e-12)
    assert v1 == pytest.approx(-v2, rel=1e-12)


def test_quad_budget_exhaustion_raises():
    with pytest.raises(NonConvergence):
        adaptive_quad(lambda s: math.sin(1000.0 / (abs(s) + 1e-8)), -1.0, 1.0,
                      1e-14, max_panels=8)


def test_count_single_linear_zero():
    assert count_zeros_rect(lambda k: k - (1 + 1j), (0, 2, 0, 2)) == 1


def test_count_nonvanishing():
    assert count_zeros_rect(lambda k: 1.0 + 0j, (-3, 1, 0.5, 4)) == 0


def test_count_additive_under_split():
    f = lambda k: (k - (0.5 + 0.5j)) * (k - (1.5 + 1.2j)) * (k + 1 - 0.8j)
    whole = count_zeros_rect(f, (-2, 2, 0.1, 2))
    left = count_zeros_rect(f, (-2, 1.0, 0.1, 2))
    right = count_zeros_rect(f, (1.0, 2, 0.1, 2))
    assert whole == left + right == 3


def test_count_boundary_zero_raises():
    with pytest.raises(BoundaryZero):
        count_zeros_rect(lambda k: k - 1j, (-1, 1, 1, 2))


def test_newton_double_root_from_nearby_seed():
    root = complex_newton(lambda z: z * z, lambda z: 2 * z, 0.1 + 0j, 1e-10)
    assert abs(root * root) <= 1e-10


def test_newton_simple_root():
    root = complex_newton(lambda z: z - 1j, lambda z: 1.0 + 0j, 2j, 1e-12)
    assert abs(root - 1j) < 1e-12


def test_newton_diverges_without_reachable_root():
    # real seed on z^2+1: the iteration never leaves the real axis, where
    # |f| >= 1, so no convergence is possible
    with pytest.raises(Diverged):
        complex_newton(lambda z: z * z + 1.0, lambda z: 2.0 * z,
                       0.5 + 0j, 1e-12, max_iter=40)


def test_ode_constant():
    y = ode_advance(lambda t, y: 0.0 * y, 0.0, 1.0, np.array([1.0 + 0j]), 1e-10)
    assert y[0] == pytest.approx(1.0, abs=1e-14)


def test_ode_exponential():
    y = ode_advance(lambda t, y: y, 0.0, 1.0, np.array([1.0 + 0j]), 1e-10)
    assert abs(y[0] - math.e) < 1e-9


def test_ode_constant_matrix_vs_eigen_oracle():
    # frozen AKNS-type generator with constant coefficients
    k = 0.7 + 0.3j
    M = np.array([[-2j * k, -0.5], [0.5, 0.0]], dtype=complex)
    w, V = np.linalg.eig(M)
    expM = V @ np.diag(np.exp(w * 2.0)) @ np.linalg.inv(V)
    y0 = np.array([0.2 + 0j, 1.0 + 0j])
    oracle = expM @ y0
    got = ode_advance(lambda t, y: M @ y, 0.0, 2.0, y0, 1e-11, atol=1e-13)
    assert np.max(np.abs(got - oracle)) < 1e-9


def test_ode_backward_direction():
    y = ode_advance(lambda t, y: y, 1.0, 0.0, np.array([math.e + 0j]), 1e-10)
    assert abs(y[0] - 1.0) < 1e-9


def test_ode_tol_halving_invariance():
    rhs = lambda t, y: np.array([np.sin(t) * y[0] + 0.1 * y[1], -y[0]])
    y0 = np.array([1.0 + 0j, 0.5 + 0j])
    tol = 1e-9
    a = ode_advance(rhs, 0.0, 3.0, y0, tol)
    b = ode_advance(rhs, 0.0, 3.0, y0, tol / 2)
    assert np.max(np.abs(a - b)) < 10 * tol
