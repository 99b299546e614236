"""Direct scattering: Jost matrix, transition coefficients, tail fit.

The constant box pulse has closed-form coefficients
    a(k) = e^{ikT} (cos(wT) - i (k/w) sin(wT)),
    b(k) = (A/(2w)) sin(wT) e^{ikT},      w = sqrt(k^2 + A^2/4),
which serve as the matrix-exponential oracle throughout.
"""

import math

import numpy as np
import pytest

from mbamp.errors import DivisionNearZero, FitRejected, Overflow
from mbamp.numerics import Tolerances, complex_newton
from mbamp.pulse import BoxPulse, PowerStartPulse, SmoothBumpPulse
from mbamp.scattering import ScatteringData


def box_ab(A, T, k):
    k = complex(k)
    w = np.sqrt(k * k + A * A / 4.0 + 0j)
    a = np.exp(1j * k * T) * (np.cos(w * T) - 1j * (k / w) * np.sin(w * T))
    b = (A / (2.0 * w)) * np.sin(w * T) * np.exp(1j * k * T)
    return a, b


def box_bdot(A, T, k):
    k = complex(k)
    w = np.sqrt(k * k + A * A / 4.0 + 0j)
    return (A / 2.0) * np.exp(1j * k * T) * (
        k * T * np.cos(w * T) / w ** 2
        - k * np.sin(w * T) / w ** 3
        + 1j * T * np.sin(w * T) / w)


@pytest.fixture(scope="module")
def sd52():
    return ScatteringData(BoxPulse(5.0, 2.0))


def test_box_values_at_origin(sd52):
    a, b = sd52.ab(0.0)
    assert a == pytest.approx(math.cos(5.0), abs=1e-9)
    assert b == pytest.approx(math.sin(5.0), abs=1e-9)


def test_box_closed_form_various_k(sd52):
    for k in (0.3, -7.5, 2j, 0.5 + 2j, 1.9448904595703225j, 100j):
        a, b = sd52.ab(k)
        ae, be = box_ab(5.0, 2.0, k)
        assert abs(a - ae) < 1e-9 * max(1.0, abs(ae))
        assert abs(b - be) < 1e-9 * max(1.0, abs(be))


def test_unitarity_on_real_grid(sd52):
    ks = np.linspace(-20.0, 20.0, 400)
    a, b = sd52.ab_many(ks)
    defect = np.abs(np.abs(a) ** 2 + np.abs(b) ** 2 - 1.0)
    assert float(defect.max()) < 1e-8


def test_a_tends_to_one(sd52):
    # a - 1 decays like A^2 T / (8k) for the box
    for k in (80.0, 200.0, 60j):
        a, _ = sd52.ab(k)
        assert abs(a - 1.0) < 8.0 / abs(complex(k))


def test_jost_matrix_structure_and_det(sd52):
    for k in (0.4, -3.0, 1.2):
        M = sd52.jost_matrix(k)
        assert abs(np.linalg.det(M) - 1.0) < 1e-9
        # real k: [[A*, B], [-B*, A]]
        assert abs(M[0, 0] - np.conj(M[1, 1])) < 1e-8
        assert abs(M[1, 0] + np.conj(M[0, 1])) < 1e-8
    M = sd52.jost_matrix(0.5 + 1j)
    assert abs(np.linalg.det(M) - 1.0) < 1e-9


def test_jost_overflow_guard(sd52):
    with pytest.raises(Overflow):
        sd52.jost_matrix(400j)


def test_real_pulse_symmetry(sd52):
    ks = np.linspace(0.3, 15.0, 24)
    ap, bp = sd52.ab_many(ks)
    am, bm = sd52.ab_many(-ks)
    assert np.max(np.abs(am - np.conj(ap))) < 1e-8
    assert np.max(np.abs(bm - np.conj(bp))) < 1e-8


def test_reflection_symmetry_and_zero(sd52):
    r = sd52.reflection(1.3)
    rm = sd52.reflection(-1.3)
    assert rm == pytest.approx(np.conj(r), abs=1e-8)
    _, b = sd52.ab(1.9448904595703225j)
    assert abs(b) < 1e-6


def test_reflection_near_zero_of_a(sd52):
    # locate a zero of a on the positive imaginary axis, then demand refusal
    kappas = np.linspace(0.05, 2.49, 200)
    a, _ = sd52.ab_many(1j * kappas)
    seed = 1j * kappas[int(np.argmin(np.abs(a)))]

    def a_of(k):
        return sd52.ab_and_derivs_many([k])[0][0]

    def adot_of(k):
        return sd52.ab_and_derivs_many([k])[2][0]

    k_zero = complex_newton(a_of, adot_of, seed, 1e-13)
    assert k_zero.imag > 0
    with pytest.raises(DivisionNearZero):
        sd52.reflection(k_zero)


def test_b_deriv_against_closed_form(sd52):
    for k in (0.3 + 0.5j, 1.9448904595703225j, 2.0 + 0j):
        got = sd52.b_deriv(k)
        ref = box_bdot(5.0, 2.0, k)
        assert abs(got - ref) < 1e-8 * max(1.0, abs(ref))


def test_b_deriv_against_central_difference(sd52):
    k = 0.3 + 0.5j
    h = 1e-5
    _, b1 = sd52.ab(k + h)
    _, b2 = sd52.ab(k - h)
    fd = (b1 - b2) / (2 * h)
    assert abs(sd52.b_deriv(k) - fd) < 1e-6 * abs(fd)


def test_smallest_pulses_linearize():
    # weak pulse: a ~ 1, b scales linearly with the amplitude
    sd1 = ScatteringData(BoxPulse(1e-4, 1.0))
    sd2 = ScatteringData(BoxPulse(2e-4, 1.0))
    a1, b1 = sd1.ab(0.7)
    _, b2 = sd2.ab(0.7)
    assert abs(a1 - 1.0) < 1e-6
    assert abs(b2 / b1 - 2.0) < 1e-4


def test_trivial_pulse_rejected():
    with pytest.raises(ValueError):
        ScatteringData(BoxPulse(0.0, 1.0))


def test_real_line_cache_interpolation(sd52):
    ks = np.array([-7.31, -0.42, 3.17, 11.93])
    a_direct, b_direct = sd52.ab_many(ks)
    for k, ad, bd in zip(ks, a_direct, b_direct):
        assert abs(sd52.a_real(k) - ad) < 1e-8
        assert abs(sd52.b_real(k) - bd) < 1e-8
        assert abs(sd52.r_real(k) - bd / ad) < 1e-7


def test_real_zero_splits_finds_box_zeros(sd52):
    # b has real zeros at +-sqrt(pi^2/T^2 n^2 - A^2/4) for n pi/T > A/2
    expect = math.sqrt(math.pi ** 2 - 6.25)
    splits = sd52.real_zero_splits(2.5)
    assert any(abs(s - expect) < 0.02 for s in splits)
    assert any(abs(s + expect) < 0.02 for s in splits)


def test_tail_fit_power_start():
    sd = ScatteringData(PowerStartPulse(1.0, 2.0, 1.0))
    fit = sd.tail_fit()
    assert 1.9 <= fit.order <= 2.1
    assert fit.residual < 0.08


def test_tail_fit_linear_in_amplitude():
    sd1 = ScatteringData(SmoothBumpPulse(0.05, 2.0, 1.0))
    sd2 = ScatteringData(SmoothBumpPulse(0.1, 2.0, 1.0))
    c1 = abs(sd1.tail_fit().constant)
    c2 = abs(sd2.tail_fit().constant)
    assert c2 / c1 == pytest.approx(2.0, rel=1e-3)


def test_tail_fit_stable_under_tolerance_refinement():
    p = PowerStartPulse(1.0, 2.0, 1.0)
    m1 = ScatteringData(p).tail_fit().order
    m2 = ScatteringData(p, Tolerances().scaled(0.1)).tail_fit().order
    assert abs(m1 - m2) < 1e-6


def test_tail_fit_rejection_threshold():
    sd = ScatteringData(PowerStartPulse(1.0, 2.0, 1.0))
    with pytest.raises(FitRejected):
        sd.tail_fit(residual_tol=1e-12)


def test_reflection_uhp_model_switch():
    sd = ScatteringData(PowerStartPulse(1.0, 2.0, 1.0))
    fit = sd.tail_fit()
    r_model = sd.reflection_uhp(200j)
    assert r_model == fit.constant * (200j) ** (-fit.order)
    # direct and model agree up to the next-order tail correction ~3/kappa
    r_direct = sd.reflection(35j)
    r_mod = fit.constant * (35j) ** (-fit.order)
    assert abs(r_direct - r_mod) / abs(r_direct) < 0.12


def test_reflection_power_law_bounded_on_imag_axis():
    # r(i kappa) (i kappa)^m stays bounded above and below over [10, 100]
    sd = ScatteringData(PowerStartPulse(1.0, 2.0, 1.0))
    kappas = np.geomspace(10.0, 100.0, 12)
    a, b = sd.ab_many(1j * kappas)
    scaled = np.abs((b / a) * (1j * kappas) ** 2.0)
    assert float(scaled.max()) / float(scaled.min()) < 2.0
