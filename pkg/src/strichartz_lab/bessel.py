"""Bessel functions of real order from Schlafli's integral, and uniform envelopes.

``J_nu(r) = J^M - J^E`` with

    J^M = (1/2pi) int_{-pi}^{pi} exp(i (r sin x - nu x)) dx
    J^E = (sin(nu pi)/pi) int_0^inf exp(-nu tau - r sinh tau) dtau

Both pieces are computed by composite Gauss-Legendre quadrature.  The module
also evaluates the transitional envelope, the rapid-decay criterion, the
leading asymptotic term with its remainder envelope, and the first
correction terms of the uniform expansion.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import interpolate, special

from .oscillatory import OscillatoryProblem, Smooth, constant, stationary_phase_coefficients
from .quadrature import PrecisionError, integrate, uniform_panels


# Measured sup ratios (nu = 20, 50, 100; 200 points each) with 20% headroom.
LEMMA25_CONSTANT = 0.14
INTEGER_TAIL_CONSTANT = 0.22


class DomainError(ValueError):
    """Arguments outside the region where a formula or envelope is stated."""


@dataclass(frozen=True)
class BesselPoint:
    nu: float
    r: float

    def __post_init__(self):
        if not self.nu > -0.5:
            raise DomainError(f"order must exceed -1/2, got {self.nu}")
        if not self.r > 0:
            raise DomainError(f"argument must be positive, got {self.r}")

    def regions(self, lam: float | None = None) -> set[str]:
        """Region tags; ``lam`` defaults to ``r**(1/3)`` for the decaying test."""
        nu, r = self.nu, self.r
        lam = r ** (1 / 3) if lam is None else lam
        tags = set()
        if abs(r - nu) <= r ** (1 / 3):
            tags.add("transitional")
        if nu > 0 and r > nu + nu ** (1 / 3):
            tags.add("oscillatory")
        if nu > r + lam:
            tags.add("decaying")
        return tags


class SchlafliResult(NamedTuple):
    jm: float
    je: float
    jm_imag: float
    error: float

    @property
    def value(self) -> float:
        return self.jm - self.je


def sin_pi(nu: float) -> float:
    """``sin(pi nu)`` with exact zeros at the integers (range reduction mod 2)."""
    red = math.fmod(nu, 2.0)
    if red == math.floor(red):
        return 0.0
    if red > 1.0:
        red -= 2.0
    elif red < -1.0:
        red += 2.0
    if red > 0.5:
        red = 1.0 - red
    elif red < -0.5:
        red = -1.0 - red
    return math.sin(math.pi * red)


def _jm(nu: float, r: float, tol: float, n_nodes: int = 16):
    speed = r + abs(nu) + 1.0
    # panel width 2 pi / speed * (n_nodes / 4) before the first halving
    breaks = uniform_panels(-math.pi, math.pi, 2.0 * math.pi / speed * (n_nodes / 4.0))

    def f(x):
        return np.exp(1j * (r * np.sin(x) - nu * x))

    val, err = integrate(f, breaks, tol * 2 * math.pi, n_nodes=n_nodes, where={"nu": nu, "r": r, "part": "M"})
    return val / (2 * math.pi), err / (2 * math.pi)


def _je_tail_bound(nu: float, r: float, U: float) -> float:
    # e^{-nu asinh(u/r)} <= max(1, (1 + 2u/r)^{-nu}) and 1/sqrt(r^2+u^2) <= 1/max(r, u)
    grow = 1.0 if nu >= 0 else (1.0 + 2.0 * U / r) ** (-nu)
    return 2.0 * math.exp(-U) * grow / max(r, U, 1e-300)


def _je_integral(nu: float, r: float, tol: float, n_nodes: int = 16):
    """``int_0^inf exp(-nu tau - r sinh tau) dtau`` via ``tau = asinh(u / r)``."""
    U = 1.0
    while _je_tail_bound(nu, r, U) > tol / 10:
        U *= 1.5
    s = min(r, 1.0) / 4.0
    breaks = [0.0]
    w = s
    while breaks[-1] + w < U:
        breaks.append(breaks[-1] + w)
        w *= 2.0
    breaks.append(U)

    def f(u):
        return np.exp(-nu * np.arcsinh(u / r) - u) / np.hypot(r, u)

    return integrate(f, np.array(breaks), tol, n_nodes=n_nodes, where={"nu": nu, "r": r, "part": "E"})


def j_schlafli(p: BesselPoint, tol: float = 1e-12) -> SchlafliResult:
    """Evaluate both pieces of Schlafli's representation to absolute ``tol``.

    ``jm`` is the real part of the oscillatory piece; ``jm_imag`` is the
    residual imaginary part, which vanishes in exact arithmetic.  For integer
    order ``je`` is exactly zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    nu, r = float(p.nu), float(p.r)
    jm, err_m = _jm(nu, r, tol / 2)
    sn = sin_pi(nu)
    if sn == 0.0:
        je, err_e = 0.0, 0.0
    else:
        integral, err_i = _je_integral(nu, r, tol / 2 * math.pi / abs(sn))
        je = sn / math.pi * integral
        err_e = abs(sn) / math.pi * err_i
    return SchlafliResult(float(jm.real), float(je), float(jm.imag), float(err_m + err_e))


def bessel_j(nu: float, r: float, tol: float = 1e-12) -> float:
    return j_schlafli(BesselPoint(nu, r), tol).value


def bessel_j_bulk(nu: float, x) -> np.ndarray:
    """Vectorized ``J_nu(x)`` for operator grids (AMOS routines via scipy)."""
    return special.jv(nu, x)


def bessel_j_table(nu: float, x, step: float = 0.02) -> np.ndarray:
    """``J_nu`` on a large array through a cubic spline on a uniform table.

    The table has spacing ``step`` over ``[min x, max x]``; with the default
    the interpolation error is below ``1e-9`` for the arguments used by the
    operator grids.  Small arrays are evaluated directly.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    n = int(math.ceil((hi - lo) / step)) + 1
    if n + 4 >= x.size or n < 4:
        return special.jv(nu, x)
    grid = np.linspace(lo, hi, n)
    spline = interpolate.CubicSpline(grid, special.jv(nu, grid))
    return spline(x)


def j_prime(p: BesselPoint, tol: float = 1e-12) -> float:
    """``(J_{nu-1}(r) - J_{nu+1}(r)) / 2``; needs ``nu > 1/2``."""
    if not p.nu > 0.5:
        raise DomainError(f"j_prime needs nu > 1/2 so that nu - 1 > -1/2, got {p.nu}")
    lo = j_schlafli(BesselPoint(p.nu - 1, p.r), tol).value
    hi = j_schlafli(BesselPoint(p.nu + 1, p.r), tol).value
    return 0.5 * (lo - hi)


def theta(p: BesselPoint) -> float:
    """Phase ``sqrt(r^2 - nu^2) - nu arccos(nu/r) - pi/4`` for ``r >= nu``."""
    nu, r = p.nu, p.r
    if r < nu:
        raise DomainError(f"theta needs r >= nu, got r={r}, nu={nu}")
    return math.sqrt((r - nu) * (r + nu)) - nu * math.acos(min(1.0, nu / r)) - math.pi / 4


def theta_prime(p: BesselPoint) -> float:
    nu, r = p.nu, p.r
    if r < nu:
        raise DomainError(f"theta needs r >= nu, got r={r}, nu={nu}")
    return math.sqrt((r - nu) * (r + nu)) / r


# --- envelopes ---------------------------------------------------------------


def envelope_lemma22(p: BesselPoint) -> float:
    """Transitional envelope ``r^{-1/3} (1 + r^{-1/3} |r - nu|)^{-1/4}`` for ``r, nu > 10``."""
    if not (p.r > 10 and p.nu > 10):
        raise DomainError(f"transitional envelope needs r, nu > 10, got nu={p.nu}, r={p.r}")
    c = p.r ** (-1 / 3)
    return c * (1.0 + c * abs(p.r - p.nu)) ** -0.25


class DecayRegion(NamedTuple):
    applicable: bool
    bound: float


def decay_region_lemma23(nu: int, r: float, eps: float, K: int) -> DecayRegion:
    """Rapid-decay criterion ``nu - r > r^{1/3 + eps}`` and its bound ``r^{-K eps}``.

    The constant in front of the bound is not known; callers compare the
    measured ``|J| r^{K eps}`` across a scan instead.
    """
    if int(nu) != nu:
        raise DomainError(f"rapid decay is stated for integer order, got {nu}")
    if not (nu > 10 and r > 10 and eps > 0 and K >= 0):
        raise DomainError("need integer nu > 10, r > 10, eps > 0, K >= 0")
    return DecayRegion(nu - r > r ** (1 / 3 + eps), r ** (-K * eps))


def _check_oscillatory(p: BesselPoint) -> None:
    if not (p.nu > 10 and p.r > p.nu + p.nu ** (1 / 3)):
        raise DomainError(f"asymptotic form needs nu > 10 and r > nu + nu^(1/3), got nu={p.nu}, r={p.r}")


class MainTerm(NamedTuple):
    main: float
    remainder_envelope: float


def remainder_envelope(p: BesselPoint) -> float:
    nu, r = p.nu, p.r
    if r <= 2 * nu:
        return nu**2 / ((r - nu) * (r + nu)) ** 1.75 + 1.0 / r
    return 1.0 / r


def asymptotic_main_lemma25(p: BesselPoint) -> MainTerm:
    """``sqrt(2/pi) cos(theta) / (r^2 - nu^2)^{1/4}`` and the envelope of the remainder."""
    _check_oscillatory(p)
    nu, r = p.nu, p.r
    main = math.sqrt(2 / math.pi) * math.cos(theta(p)) / ((r - nu) * (r + nu)) ** 0.25
    return MainTerm(main, remainder_envelope(p))


def is_integer_order(nu: float) -> bool:
    return float(nu).is_integer()


def tilde_envelope(p: BesselPoint, K: int) -> float:
    """Envelope for what is left after ``K`` correction terms.

    Integer orders drop the ``1/r`` part inside ``[nu + nu^{1/3}, 2 nu]``
    and improve the far tail to ``r^{-3/2}``.
    """
    nu, r = p.nu, p.r
    integer = is_integer_order(nu)
    if r <= 2 * nu:
        core = r ** (K / 2 + 0.25) / (r - nu) ** (1.5 * K + 1.75)
        return core if integer else core + 1.0 / r
    return r**-1.5 if integer else 1.0 / r


def _rescaled_phase(nu: float, r: float, x0: float) -> Smooth:
    """``-(x0^-3) [phi(x0 + x0 x) - phi(x0)]`` with ``phi(x) = sin x - (nu/r) x``.

    The sign flip makes the curvature at 0 positive (``sin(x0)/x0``).
    """
    c = nu / r

    def f(x, k):
        z = x0 + x0 * x
        if k == 0:
            val = (np.sin(z) - c * z) - (math.sin(x0) - c * x0)
        elif k == 1:
            val = x0 * (np.cos(z) - c)
        else:
            # d^k/dz^k sin z = sin(z + k pi / 2)
            val = x0**k * np.sin(z + k * math.pi / 2)
        return -val / x0**3

    return Smooth(f, 64, f"rescaled Bessel phase nu={nu} r={r}")


def expansion_coefficients(p: BesselPoint, K: int) -> list[complex]:
    """Coefficients ``b_1..b_K`` at the minimum ``-x0`` of the rescaled phase.

    The terms at ``+x0`` use the conjugates, so the correction is real.
    """
    x0 = math.acos(p.nu / p.r)
    prob = OscillatoryProblem(_rescaled_phase(p.nu, p.r, x0), constant(1.0), p.r * x0**3)
    return stationary_phase_coefficients(prob, K)


class Expansion(NamedTuple):
    terms: list
    tilde_envelope: float


def expansion_lemma25_part2(p: BesselPoint, K: int) -> Expansion:
    """Correction terms ``k = 1..K`` of the uniform expansion and the leftover envelope.

    Term ``k`` is ``(2pi)^{-1/2} x0 (r x0^3)^{-k-1/2} / k! (e^{i theta} conj(b_k) + e^{-i theta} b_k)``
    with ``x0 = arccos(nu/r)``; it is real up to rounding.
    """
    _check_oscillatory(p)
    if K < 1:
        raise ValueError("K must be >= 1")
    x0 = math.acos(p.nu / p.r)
    lam = p.r * x0**3
    th = theta(p)
    e = complex(math.cos(th), math.sin(th))
    terms = []
    for k, b in enumerate(expansion_coefficients(p, K), start=1):
        scale = x0 * lam ** (-k - 0.5) / math.factorial(k) / math.sqrt(2 * math.pi)
        terms.append(complex(scale * (e * b.conjugate() + e.conjugate() * b)))
    return Expansion(terms, tilde_envelope(p, K))


# --- reports ---------------------------------------------------------------


@dataclass
class EnvelopeReport:
    """Per-point ``(nu, r, value, envelope, ratio)`` and the sup of the ratios."""

    lemma: str
    points: list = field(default_factory=list)
    grid_spec: dict = field(default_factory=dict)

    COLUMNS = ("nu", "r", "value", "envelope", "ratio")

    def add(self, nu: float, r: float, value: float, envelope: float) -> None:
        if not envelope > 0:
            raise ValueError(f"envelope must be positive at nu={nu}, r={r}")
        self.points.append((float(nu), float(r), float(value), float(envelope), float(abs(value) / envelope)))

    @property
    def sup_ratio(self) -> float:
        return max(pt[4] for pt in self.points)

    @property
    def arg_sup(self) -> tuple[float, float]:
        best = max(self.points, key=lambda pt: pt[4])
        return best[0], best[1]

    def sup_by_nu(self) -> dict:
        out: dict = {}
        for nu, _, _, _, ratio in self.points:
            out[nu] = max(out.get(nu, 0.0), ratio)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.COLUMNS)
        for pt in self.points:
            w.writerow([repr(v) for v in pt])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, lemma: str = "") -> "EnvelopeReport":
        rows = list(csv.reader(io.StringIO(text)))
        if tuple(rows[0]) != cls.COLUMNS:
            raise ValueError(f"unexpected header {rows[0]}")
        rep = cls(lemma)
        rep.points = [tuple(float(v) for v in row) for row in rows[1:] if row]
        return rep

    def summary(self) -> dict:
        return {
            "lemma": self.lemma,
            "sup_ratio": self.sup_ratio,
            "arg_sup": list(self.arg_sup),
            "sup_by_nu": {repr(k): v for k, v in self.sup_by_nu().items()},
            "grid_spec": self.grid_spec,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True, indent=2)


def lemma22_scan(nus, rmax_mult: float = 10.0, n_points: int = 200, tol: float = 1e-12, rmin: float = 10.0) -> EnvelopeReport:
    """Ratio ``|J_nu(r)|`` over the transitional envelope on ``r in (rmin, rmax_mult * nu]``."""
    rep = EnvelopeReport("2.2", grid_spec={"nus": list(nus), "rmin": rmin, "rmax_mult": rmax_mult, "n_points": n_points, "tol": tol})
    for nu in nus:
        rs = np.linspace(rmin, rmax_mult * nu, n_points + 1)[1:]
        for r in rs:
            p = BesselPoint(nu, r)
            rep.add(nu, r, j_schlafli(p, tol).value, envelope_lemma22(p))
    return rep


def lemma23_scan(rs, nu_of_r, eps: float, K: int, tol: float = 1e-12) -> EnvelopeReport:
    """Measured ``|J_nu(r)|`` against ``r^{-K eps}`` with ``nu = nu_of_r(r)`` (integer)."""
    rep = EnvelopeReport("2.3", grid_spec={"rs": list(rs), "eps": eps, "K": K, "tol": tol})
    for r in rs:
        nu = int(nu_of_r(r))
        region = decay_region_lemma23(nu, r, eps, K)
        if not region.applicable:
            raise DomainError(f"nu={nu}, r={r} is outside the rapid decay region")
        rep.add(nu, r, j_schlafli(BesselPoint(nu, r), tol).value, region.bound)
    return rep


def oscillatory_grid(nu: float, rmax_mult: float = 10.0, n_points: int = 200) -> np.ndarray:
    lo = nu + nu ** (1 / 3)
    return np.geomspace(lo * (1 + 1e-9), rmax_mult * nu, n_points)


def lemma25_scan(nus, rmax_mult: float = 10.0, n_points: int = 200, tol: float = 1e-12, K: int = 0, rmin_mult: float | None = None) -> EnvelopeReport:
    """``|J - main - corrections|`` over the matching envelope.

    ``K = 0`` uses the leading remainder envelope; ``K >= 1`` subtracts ``K`` correction
    terms and uses the leftover envelope.  ``rmin_mult`` restricts the scan to
    ``r >= rmin_mult * nu`` (for the far-tail checks).
    """
    lemma = "2.5(1)" if K == 0 else f"2.5(2) K={K}"
    rep = EnvelopeReport(lemma, grid_spec={"nus": list(nus), "rmax_mult": rmax_mult, "n_points": n_points, "tol": tol, "K": K, "rmin_mult": rmin_mult})
    for nu in nus:
        if rmin_mult is None:
            rs = oscillatory_grid(nu, rmax_mult, n_points)
        else:
            rs = np.geomspace(rmin_mult * nu, rmax_mult * nu, n_points)
        for r in rs:
            p = BesselPoint(nu, r)
            J = j_schlafli(p, tol).value
            mt = asymptotic_main_lemma25(p)
            if K == 0:
                rep.add(nu, r, J - mt.main, mt.remainder_envelope)
            else:
                ex = expansion_lemma25_part2(p, K)
                rep.add(nu, r, J - mt.main - sum(t.real for t in ex.terms), ex.tilde_envelope)
    return rep


def integer_tail_scan(nus, rmax_mult: float = 10.0, n_points: int = 200, tol: float = 1e-12, rmin_mult: float = 2.0) -> EnvelopeReport:
    """``|J - main|`` against ``r^{-3/2}`` for integer orders, ``r >= rmin_mult * nu``."""
    bad = [nu for nu in nus if not float(nu).is_integer()]
    if bad:
        raise ValueError(f"the improved tail applies to integer orders only, got {bad}")
    base = lemma25_scan(nus, rmax_mult, n_points, tol, K=0, rmin_mult=rmin_mult)
    rep = EnvelopeReport("2.5 integer tail", grid_spec=base.grid_spec)
    for nu, r, val, _, _ in base.points:
        rep.add(nu, r, val, r**-1.5)
    return rep
