"""Acceptance suite: one test per criterion, each emitting a PASS/FAIL line.

The lines are collected in ``conftest.VERDICTS`` and shown in pytest's
terminal summary, so ``pytest -v`` output carries the full verdict table.
"""

import time
from fractions import Fraction as F

import numpy as np
import pytest
from conftest import VERDICTS

from strichartz_lab import bessel, cli, dyadic_ops, knapp, oscillatory
from strichartz_lab.bessel import BesselPoint, EnvelopeReport, j_schlafli
from strichartz_lab.exponents import (
    INF,
    ExponentTuple,
    beta_of_p,
    rsa_admissible,
    rsa_margin,
    sa_admissible,
    sa_margin,
    wa_admissible,
    wa_margin,
)

from test_bessel import series_oracle


def verdict(number, title, ok, detail, elapsed=None, limit=None):
    timing = ""
    if elapsed is not None:
        timing = f" [{elapsed:.1f}s of {limit:g}s]"
        ok = ok and elapsed < limit
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}: {detail}{timing}"
    VERDICTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_bessel_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for nu in (0, 0.5, 1, 1.5, 2):
        for r in (0.1, 1, 5, 10, 20):
            worst = max(worst, abs(j_schlafli(BesselPoint(nu, r), 1e-12).value - series_oracle(nu, r)))
    verdict(1, "Bessel integral vs power series", worst <= 1e-10, f"max abs error {worst:.2e} (limit 1e-10)",
            time.perf_counter() - t0, 10)


def test_criterion_2_transitional_envelope():
    t0 = time.perf_counter()
    rep = bessel.lemma22_scan([10.5, 20, 50, 100, 200], rmax_mult=10.0, n_points=200, rmin=10.0)
    sups = rep.sup_by_nu()
    spread = max(sups.values()) / min(sups.values())
    ok = np.isfinite(rep.sup_ratio) and spread <= 2.0
    detail = f"sup ratio {rep.sup_ratio:.4f}, cross-order spread {spread:.3f} (limit 2)"
    verdict(2, "uniform transitional envelope", ok, detail, time.perf_counter() - t0, 120)


def test_criterion_3_asymptotic_remainder():
    t0 = time.perf_counter()
    main = bessel.lemma25_scan([20, 50, 100], rmax_mult=10.0, n_points=200)
    tail = bessel.integer_tail_scan([20, 50], rmax_mult=10.0, n_points=200)
    ok = main.sup_ratio <= bessel.LEMMA25_CONSTANT and tail.sup_ratio <= bessel.INTEGER_TAIL_CONSTANT
    detail = (f"remainder ratio {main.sup_ratio:.4f} <= {bessel.LEMMA25_CONSTANT}, "
              f"integer tail ratio {tail.sup_ratio:.4f} <= {bessel.INTEGER_TAIL_CONSTANT}")
    verdict(3, "asymptotic main term remainder", ok, detail, time.perf_counter() - t0, 600)


def test_criterion_4_oscillatory_slopes():
    t0 = time.perf_counter()
    lams = list(np.logspace(2, 4, 5))
    half_square = oscillatory.polynomial([0, 0, 0.5])
    scan = oscillatory.remainder_scan(oscillatory.OscillatoryProblem(half_square, oscillatory.bump(), 1.0), lams, K=1)
    s0, s1 = scan.slopes["remainder"][0], scan.slopes["remainder_K1"][0]
    wide = list(np.logspace(2, 5, 7))
    v2, _, _ = oscillatory.vdc_slope(oscillatory.OscillatoryProblem(half_square, oscillatory.bump(), 1.0), 2, wide)
    cubic = oscillatory.polynomial([0, 0, 0, 1 / 6])
    v3, _, _ = oscillatory.vdc_slope(oscillatory.OscillatoryProblem(cubic, oscillatory.bump(), 1.0), 3, wide)
    ok = abs(s0 + 1.5) <= 0.1 and abs(s1 + 2.5) <= 0.15 and abs(v2 + 0.5) <= 0.05 and abs(v3 + 1 / 3) <= 0.05
    detail = f"remainder {s0:.3f}, corrected {s1:.3f}, second-derivative decay {v2:.3f}, third-derivative decay {v3:.3f}"
    verdict(4, "stationary phase and decay slopes", ok, detail, time.perf_counter() - t0, 60)


def test_criterion_5_exponent_predicates():
    t0 = time.perf_counter()
    d3 = ExponentTuple(3, 2, 2, INF)
    d2 = ExponentTuple(2, 2, 2, INF)
    endpoint = [ExponentTuple(d, 2, 2, F(4 * d - 2, 2 * d - 3)) for d in (3, 4, 5)]
    checks = [
        wa_margin(d3) >= 0 and not wa_admissible(d3),
        sa_margin(d2) >= 0 and not sa_admissible(d2),
        all(rsa_margin(e) >= 0 and not rsa_admissible(e) for e in endpoint),
        sa_admissible(ExponentTuple(3, 2, 2, 6)),
        wa_admissible(ExponentTuple(3, 2, INF, 2)),
        rsa_admissible(ExponentTuple(3, 2, 2, 4)),
        beta_of_p(3, 4) == F(8, 3),
        beta_of_p(3, F(10, 3)) == 2,
        beta_of_p(3, 6) == 6,
    ]
    verdict(5, "admissibility predicates and beta", all(checks), f"{sum(checks)}/{len(checks)} checks",
            time.perf_counter() - t0, 1)


@pytest.mark.slow
def test_criterion_6_dyadic_scan():
    t0 = time.perf_counter()
    adm = dyadic_ops.dyadic_scan(2.0, 3, 2, 4, (10, 50, 200), (5, 10), seed=0, threads=2)
    slopes = {nu: s for nu, (s, _, _) in adm.slopes.items()}
    decays = len(slopes) == 3 and all(s <= -0.05 for s in slopes.values())
    non = dyadic_ops.dyadic_scan(2.0, 3, 2, F(5, 2), (10, 50), (5, 10), seed=0, threads=2)
    flat = {nu: s for nu, (s, _, _) in non.slopes.items()}
    no_decay = len(flat) == 2 and all(s >= -0.01 for s in flat.values())
    ok = decays and adm.spread <= 3.0 and no_decay
    detail = ("(2,4) slopes " + ", ".join(f"nu={nu:g}: {s:.3f}" for nu, s in slopes.items())
              + f"; spread {adm.spread:.2f} (limit 3); (2,5/2) slopes "
              + ", ".join(f"nu={nu:g}: {s:.3f}" for nu, s in flat.items()))
    verdict(6, "dyadic annulus decay", ok, detail, time.perf_counter() - t0, 1800)


def test_criterion_7_cap_example():
    t0 = time.perf_counter()
    deltas = [2.0**-k for k in range(3, 7)]
    good = knapp.knapp_scan(knapp.KnappConfig(d=2, a=2.0, q=2, p=8, s=2), deltas)
    bad = knapp.knapp_scan(knapp.KnappConfig(d=2, a=2.0, q=2, p=8, s=4), deltas)
    norm = knapp.norm_slope(2, deltas)
    ok = (abs(good.fitted_slope - 0.125) <= 0.15 and abs(bad.fitted_slope + 0.125) <= 0.15
          and bad.verdict == "violated" and abs(norm - 1) <= 0.01)
    detail = (f"s=2 slope {good.fitted_slope:.4f} ({good.verdict}), s=4 slope {bad.fitted_slope:.4f} ({bad.verdict}), "
              f"data norm slope {norm:.4f}")
    verdict(7, "cap example slopes", ok, detail, time.perf_counter() - t0, 600)


def test_criterion_8_structural_identities(tmp_path, capsys):
    results = {}

    xi = np.random.default_rng(0).uniform(-4, 4, 1000)
    K = 5
    total = sum(dyadic_ops.chi(k, xi) for k in range(-K, 1))
    results["telescoping"] = np.max(np.abs(total - (dyadic_ops.eta(xi) - dyadic_ops.eta(2.0 ** (K + 1) * xi)))) <= 1e-14

    h = dyadic_ops.RadialProfile.from_function(lambda rho: np.exp(-((rho - 1.1) ** 2) / 0.05) + 0j)
    g = dyadic_ops.RadialProfile.from_function(lambda rho: np.cos(5 * rho) + 0j)
    t = np.linspace(-100, 100, 11)
    r = np.linspace(40, 102.4, 33)
    full = dyadic_ops.apply_S_R(h, 2.0, 60.0, 64.0, t, r).values
    lam = dyadic_ops.lambda_threshold(64.0)
    parts = sum(dyadic_ops.apply_S_R_j(h, 2.0, 60.0, 64.0, lam, j, t, r).values for j in (1, 2, 3))
    results["gamma partition"] = np.max(np.abs(parts - full)) <= 1e-10

    lhs = dyadic_ops.apply_T(2.0 * h + (-1.5j) * g, 2.0, 3.0, 3, t, r).values
    rhs = 2.0 * dyadic_ops.apply_T(h, 2.0, 3.0, 3, t, r).values - 1.5j * dyadic_ops.apply_T(g, 2.0, 3.0, 3, t, r).values
    results["linearity"] = np.max(np.abs(lhs - rhs)) <= 1e-12

    rep = bessel.lemma22_scan([10.5], n_points=9)
    sc = knapp.knapp_scan(knapp.KnappConfig(), [1 / 8, 1 / 16], n=16)
    dy = dyadic_ops.dyadic_scan(nu_list=(10,), j_range=(5, 6), n_iter=3, ensemble_size=2, seed=5)
    results["csv round trip"] = (
        EnvelopeReport.from_csv(rep.to_csv(), rep.lemma).points == rep.points
        and [row[:2] for row in knapp.KnappScan.rows_from_csv(sc.to_csv())] == list(zip(sc.deltas, sc.ratios))
        and dyadic_ops.DyadicScanResult.rows_from_csv(dy.to_csv()) == dy.rows
    )

    argv = ["dyadic-scan", "--nu", "10", "--jmin", "5", "--jmax", "6", "--n-iter", "3", "--ensemble", "2", "--seed", "9"]
    for sub in ("a", "b"):
        cli.main(argv + ["--out", str(tmp_path / sub)])
    capsys.readouterr()
    results["byte-identical reruns"] = all(
        (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for name in ("dyadic-scan.csv", "dyadic-scan.json")
    )

    detail = ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in results.items())
    verdict(8, "structural identities", all(results.values()), detail)
