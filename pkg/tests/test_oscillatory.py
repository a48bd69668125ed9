import cmath
import math

import numpy as np
import pytest
from scipy import integrate as sint

from strichartz_lab.oscillatory import (
    ContractError,
    OscillatoryProblem,
    bump,
    constant,
    eval_I,
    fit_loglog,
    gaussian,
    polynomial,
    remainder_scan,
    richardson_derivative,
    stationary_phase_coefficients,
    stationary_phase_leading,
    van_der_corput_check,
    vdc_slope,
)

HALF_SQUARE = polynomial([0, 0, 0.5])


def simpson_oracle(prob, n=1_000_001):
    a, b = prob.interval
    x = np.linspace(a, b, n)
    y = np.exp(1j * prob.lam * prob.phase(x)) * prob.amplitude(x)
    return sint.simpson(y.real, x=x) + 1j * sint.simpson(y.imag, x=x)


def test_bump_derivatives_at_zero():
    a = bump()
    z = np.array([0.0])
    assert a(z)[0] == pytest.approx(1.0)
    assert a(z, 2)[0] == pytest.approx(-2.0)
    assert a(z, 4)[0] == pytest.approx(-12.0)
    # odd derivatives vanish by symmetry
    assert abs(a(z, 3)[0]) < 1e-12


def test_bump_vanishes_at_ends():
    prob = OscillatoryProblem(HALF_SQUARE, bump(), 10.0)
    assert prob.amplitude_vanishes_at_ends()


def test_eval_against_fine_simpson():
    prob = OscillatoryProblem(HALF_SQUARE, bump(), 100.0)
    assert abs(eval_I(prob, 1e-12) - simpson_oracle(prob)) <= 1e-8


def test_linear_phase_even_amplitude_is_real():
    prob = OscillatoryProblem(polynomial([0, 1]), bump(), 37.0)
    assert abs(eval_I(prob).imag) <= 1e-13


def test_linear_phase_closed_form():
    for lam in (3.0, 40.0, 500.0):
        prob = OscillatoryProblem(polynomial([0, 1]), constant(1.0), lam, (0.0, 1.0))
        exact = (cmath.exp(1j * lam) - 1) / (1j * lam)
        assert abs(eval_I(prob) - exact) <= 1e-12
        lhs, rhs = van_der_corput_check(prob, 1)
        assert rhs == pytest.approx(1 / lam)
        assert lhs <= 2 * rhs


def test_linearity_and_reflection():
    prob = OscillatoryProblem(polynomial([0, 0, 0.5, 0.1]), bump(), 250.0)
    base = eval_I(prob)
    scaled = OscillatoryProblem(prob.phase, bump().scaled(3.5), prob.lam)
    assert abs(eval_I(scaled) - 3.5 * base) <= 1e-12
    lead = stationary_phase_leading(prob).leading
    assert abs(stationary_phase_leading(scaled).leading - 3.5 * lead) <= 1e-12
    flipped = OscillatoryProblem(prob.phase.negated(), prob.amplitude, prob.lam)
    assert abs(eval_I(flipped) - base.conjugate()) <= 1e-12


def test_leading_term_value():
    res = stationary_phase_leading(OscillatoryProblem(HALF_SQUARE, bump(), 100.0))
    assert abs(res.leading - math.sqrt(2 * math.pi / 100) * cmath.exp(1j * math.pi / 4)) < 1e-15
    assert abs(res.leading) == pytest.approx(0.25066, abs=1e-5)


def test_translated_stationary_point():
    x0 = 0.3
    phase = polynomial([0.2 + 0.5 * x0**2, -x0, 0.5])  # 0.2 + (x - x0)^2 / 2
    prob = OscillatoryProblem(phase, bump(), 400.0)
    res = stationary_phase_leading(prob, x0=x0)
    centered = stationary_phase_leading(OscillatoryProblem(HALF_SQUARE, bump(center=-x0), 400.0))
    assert abs(res.leading) == pytest.approx(abs(centered.leading), rel=1e-12)
    assert cmath.phase(res.leading / abs(res.leading)) == pytest.approx(
        cmath.phase(cmath.exp(1j * (math.pi / 4 + 400.0 * 0.2))), abs=1e-12
    )


def test_mode_violations():
    with pytest.raises(ContractError):
        stationary_phase_leading(OscillatoryProblem(polynomial([0, 0.1, 0.5]), bump(), 10.0))
    with pytest.raises(ContractError):
        stationary_phase_leading(OscillatoryProblem(polynomial([0, 0, -0.5]), bump(), 10.0))
    with pytest.raises(ContractError):
        van_der_corput_check(OscillatoryProblem(polynomial([0, 0, 0.4]), bump(), 10.0), 2)


def test_remainder_slope_leading():
    lams = list(np.logspace(2, 4, 5))
    scan = remainder_scan(OscillatoryProblem(HALF_SQUARE, bump(), 1.0), lams, K=1)
    s, _ = scan.slopes["remainder"]
    assert abs(s + 1.5) <= 0.1
    s1, _ = scan.slopes["remainder_K1"]
    assert abs(s1 + 2.5) <= 0.15


def test_van_der_corput_slopes():
    lams = list(np.logspace(2, 5, 7))
    s2, _, pairs = vdc_slope(OscillatoryProblem(HALF_SQUARE, bump(), 1.0), 2, lams)
    assert abs(s2 + 0.5) <= 0.05
    assert all(lhs > 0 and rhs > 0 for lhs, rhs in pairs)
    cubic = polynomial([0, 0, 0, 1 / 6])
    s3, _, _ = vdc_slope(OscillatoryProblem(cubic, bump(), 1.0), 3, lams)
    assert abs(s3 + 1 / 3) <= 0.05


def test_coefficients_identity_change_of_variables():
    c = stationary_phase_coefficients(OscillatoryProblem(HALF_SQUARE, bump(), 1.0), 2)
    assert abs(c[0] - 0.5j * (-2.0)) <= 1e-6
    assert abs(c[1] - (0.5j) ** 2 * (-12.0)) <= 1e-4


def test_coefficients_gaussian_amplitude():
    sigma = 0.3
    c = stationary_phase_coefficients(OscillatoryProblem(HALF_SQUARE, gaussian(sigma), 1.0), 1)
    # exp(-x^2 / (2 sigma^2)) has a''(0) = -1 / sigma^2
    assert abs(c[0] - 0.5j * (-1 / sigma**2)) <= 1e-6


def test_richardson_on_known_function():
    val, err = richardson_derivative(np.cos, 4)
    assert val == pytest.approx(1.0, abs=1e-7)


def test_fit_loglog_exact_power():
    xs = [1, 2, 4, 8, 16]
    s, e, _ = fit_loglog(xs, [3 * x**-0.75 for x in xs], base=2)
    assert s == pytest.approx(-0.75) and e < 1e-12
