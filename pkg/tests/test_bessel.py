import math

import mpmath
import numpy as np
import pytest

from strichartz_lab import bessel
from strichartz_lab.bessel import (
    BesselPoint,
    DomainError,
    EnvelopeReport,
    asymptotic_main_lemma25,
    decay_region_lemma23,
    envelope_lemma22,
    expansion_lemma25_part2,
    j_prime,
    j_schlafli,
    theta,
    theta_prime,
    tilde_envelope,
)
from strichartz_lab.quadrature import PrecisionError


def series_oracle(nu, r, dps=40):
    """Power series sum_k (-1)^k (r/2)^{2k+nu} / (k! Gamma(k+nu+1)) in extended precision."""
    with mpmath.workdps(dps):
        nu, r = mpmath.mpf(nu), mpmath.mpf(r)
        total, k = mpmath.mpf(0), 0
        while True:
            term = (-1) ** k * (r / 2) ** (2 * k + nu) / (mpmath.factorial(k) * mpmath.gamma(k + nu + 1))
            total += term
            if k > 5 and abs(term) < mpmath.mpf(10) ** (-dps + 5):
                return float(total)
            k += 1


def J(nu, r, tol=1e-12):
    return j_schlafli(BesselPoint(nu, r), tol).value


def test_integer_order_has_no_exponential_piece():
    res = j_schlafli(BesselPoint(5, 3.0))
    assert res.je == 0.0


def test_known_values():
    assert J(0, 1.0) == pytest.approx(0.7651976866, abs=1e-10)
    assert J(0.5, math.pi / 2) == pytest.approx(2 / math.pi, abs=1e-12)


@pytest.mark.parametrize("nu", [0, 1, 2, 0.5, 1.5])
@pytest.mark.parametrize("r", [0.05, 0.1, 1.0, 3.3, 5.0, 10.0, 17.2, 20.0])
def test_series_agreement(nu, r):
    assert abs(J(nu, r) - series_oracle(nu, r)) <= 1e-10


@pytest.mark.parametrize("nu, r", [(-0.3, 2.0), (0.7, 15.0), (10.5, 40.0), (33.0, 31.0), (120.0, 250.0)])
def test_against_mpmath(nu, r):
    assert abs(J(nu, r) - float(mpmath.besselj(nu, r))) <= 1e-11


def test_imaginary_residual_reported():
    res = j_schlafli(BesselPoint(3.3, 12.0))
    assert abs(res.jm_imag) <= 1e-10


def test_three_term_recurrence_on_grid():
    tol = 1e-12
    worst = 0.0
    for nu in np.linspace(0.6, 40.0, 25):
        for r in np.linspace(0.5, 60.0, 40):
            lhs = J(nu - 1, r, tol) + J(nu + 1, r, tol)
            worst = max(worst, abs(lhs - 2 * nu / r * J(nu, r, tol)))
    assert worst <= 100 * tol


def test_j_prime():
    assert j_prime(BesselPoint(1.0, 1e-6)) == pytest.approx(0.5, abs=1e-9)
    h, tol = 1e-2, 1e-12
    f = [J(2.0, 5.0 + k * h, tol) for k in (-2, -1, 1, 2)]
    fd = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
    assert abs(j_prime(BesselPoint(2.0, 5.0), tol) - fd) <= 1e-9
    with pytest.raises(DomainError):
        j_prime(BesselPoint(0.0, 3.0))


def test_invalid_points():
    with pytest.raises(DomainError):
        BesselPoint(-0.5, 1.0)
    with pytest.raises(DomainError):
        BesselPoint(1.0, 0.0)


def test_budget_exhaustion_raises():
    with pytest.raises(PrecisionError) as info:
        j_schlafli(BesselPoint(2.5, 50.0), tol=1e-30)
    assert info.value.estimate > 0


def test_theta_closed_forms():
    nu = 37.0
    assert theta(BesselPoint(nu, nu)) == pytest.approx(-math.pi / 4, abs=1e-14)
    assert theta(BesselPoint(nu, math.sqrt(2) * nu)) == pytest.approx(nu * (1 - math.pi / 4) - math.pi / 4, rel=1e-13)
    r = 1e7
    assert theta(BesselPoint(3.0, r)) - (r - 3.0 * math.pi / 2 - math.pi / 4) == pytest.approx(0, abs=1e-5)
    with pytest.raises(DomainError):
        theta(BesselPoint(10.0, 9.0))


@pytest.mark.parametrize("nu", [12.0, 50.5, 300.0])
def test_theta_derivative(nu):
    for r in np.linspace(nu * 1.01, nu * 8, 15):
        h = 1e-6 * r
        fd = (theta(BesselPoint(nu, r + h)) - theta(BesselPoint(nu, r - h))) / (2 * h)
        exact = theta_prime(BesselPoint(nu, r))
        assert exact > 0
        assert fd == pytest.approx(exact, rel=1e-6)


def test_transitional_envelope():
    p = BesselPoint(100.0, 100.0)
    env = envelope_lemma22(p)
    assert env == pytest.approx(100 ** (-1 / 3))
    assert abs(J(100.0, 100.0)) / env == pytest.approx(0.4473, abs=2e-3)
    assert envelope_lemma22(BesselPoint(100.0, 200.0)) == pytest.approx(200 ** (-1 / 3) * (1 + 200 ** (-1 / 3) * 100) ** -0.25)
    # boundary of the transitional band: r = nu + r^{1/3}
    r = 64.0
    assert envelope_lemma22(BesselPoint(r - 4.0, r)) == pytest.approx(r ** (-1 / 3) * 2 ** -0.25)
    with pytest.raises(DomainError):
        envelope_lemma22(BesselPoint(5.0, 20.0))


def test_decay_region():
    assert decay_region_lemma23(2000, 1000.0, 0.1, 5).applicable
    assert not decay_region_lemma23(1001, 1000.0, 0.1, 5).applicable
    assert decay_region_lemma23(2000, 1000.0, 0.1, 5).bound == pytest.approx(1000.0**-0.5)


def test_decay_scan_bounded():
    rep = bessel.lemma23_scan([50.0, 100.0, 200.0, 400.0], lambda r: 2 * r, 0.2, 3)
    assert rep.sup_ratio <= 1e-6


def test_main_term_regimes():
    mt = asymptotic_main_lemma25(BesselPoint(50.0, 200.0))
    assert mt.remainder_envelope == pytest.approx(1 / 200)
    mt = asymptotic_main_lemma25(BesselPoint(50.0, 55.0))
    assert mt.remainder_envelope == pytest.approx(2500 / (55**2 - 50**2) ** 1.75 + 1 / 55)
    with pytest.raises(DomainError):
        asymptotic_main_lemma25(BesselPoint(50.0, 51.0))


def test_main_term_against_oracle_far_out():
    p = BesselPoint(20.0, 2000.0)
    mt = asymptotic_main_lemma25(p)
    assert abs(float(mpmath.besselj(20, 2000)) - mt.main) <= 2 * mt.remainder_envelope


def test_first_correction_scale_and_effect():
    p = BesselPoint(50.0, 100.0)
    x0 = math.pi / 3
    ex = expansion_lemma25_part2(p, 1)
    assert abs(ex.terms[0].imag) < 1e-14
    scale = x0 * (100.0 * x0**3) ** -1.5
    assert 1e-3 * scale < abs(ex.terms[0]) < 10 * scale
    exact = float(mpmath.besselj(50, 100))
    main = asymptotic_main_lemma25(p).main
    assert abs(exact - main - ex.terms[0].real) < 0.1 * abs(exact - main)


def test_tilde_envelope_integer_tail():
    assert tilde_envelope(BesselPoint(20.0, 100.0), 1) == pytest.approx(100.0**-1.5)
    assert tilde_envelope(BesselPoint(20.5, 100.0), 1) == pytest.approx(1 / 100.0)


def test_report_csv_round_trip():
    rep = bessel.lemma22_scan([10.5, 20.0], n_points=7)
    back = EnvelopeReport.from_csv(rep.to_csv(), rep.lemma)
    assert back.points == rep.points
    assert rep.to_csv().endswith("\r\n")
    assert back.sup_ratio == rep.sup_ratio
    with pytest.raises(ValueError):
        rep.add(1.0, 1.0, 0.3, 0.0)
