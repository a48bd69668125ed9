"""Dyadic operators of the radial reduction and their norms.

The operators act on a radial frequency profile ``h`` supported where
``chi_0`` lives (``5/8 <= rho <= 8/5``)::

    T(h)(t, r)      = r^{-(d-2)/2} int e^{-i t rho^a} J_nu(r rho) rho^{d/2} chi_0(rho) h(rho) drho
    S_R(h)(t, r)    = chi_0(r/R) int e^{-i t rho^a} J_nu(r rho) chi_0(rho) h(rho) drho
    S_{R,j}(h)(t,r) = same as S_R with gamma_j((r rho - nu)/lam) inside the integral

Fields on arbitrary grids are computed directly (``apply_*``).  Norm scans use
:class:`FFTOperator`, which samples ``rho`` so that ``s = rho^a`` is uniform and
evaluates all times at once with an FFT.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import fft as sfft

from .bessel import bessel_j_bulk, bessel_j_table
from .exponents import INF, as_exponent
from .oscillatory import fit_loglog

PLATEAU = 5.0 / 4.0
EDGE = 8.0 / 5.0
SUPPORT = (5.0 / 8.0, 8.0 / 5.0)


# --- cutoffs ---------------------------------------------------------------


def smooth_step(x):
    """C-infinity step: 0 for ``x <= 0``, 1 for ``x >= 1``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
        return np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, a / (a + b)))


def eta(xi):
    """Even bump: 1 on ``|xi| <= 5/4``, 0 on ``|xi| >= 8/5``."""
    z = (np.abs(np.asarray(xi, dtype=float)) - PLATEAU) / (EDGE - PLATEAU)
    return 1.0 - smooth_step(z)


def chi(k: int, xi):
    """Dyadic piece ``eta(xi / 2^k) - eta(xi / 2^(k-1))``."""
    xi = np.asarray(xi, dtype=float)
    return eta(xi / 2.0**k) - eta(xi / 2.0 ** (k - 1))


def chi0(xi):
    return chi(0, xi)


def gamma(j: int, x):
    """Partition ``gamma_1 = eta``, ``gamma_2 = (1 - eta) 1_{x<0}``, ``gamma_3 = (1 - eta) 1_{x>0}``."""
    x = np.asarray(x, dtype=float)
    if j == 1:
        return eta(x)
    if j == 2:
        return np.where(x < 0, 1.0 - eta(x), 0.0)
    if j == 3:
        return np.where(x > 0, 1.0 - eta(x), 0.0)
    raise ValueError(f"gamma index must be 1, 2 or 3, got {j}")


@dataclass(frozen=True)
class CutoffFamily:
    """Bundles the cutoffs; all members are plain functions of numpy arrays."""

    def eta(self, xi):
        return eta(xi)

    def chi(self, k, xi):
        return chi(k, xi)

    def gamma(self, j, x):
        return gamma(j, x)


def spherical_order(d: int, k: int) -> float:
    """Bessel order ``(d - 2 + 2k) / 2`` of the degree-``k`` spherical harmonics."""
    if d < 2 or k < 0:
        raise ValueError("need d >= 2 and k >= 0")
    return (d - 2 + 2 * k) / 2


def harmonic_constant(d: int, k: int) -> complex:
    """``(2 pi)^{d/2} i^{-k}``."""
    return (2 * math.pi) ** (d / 2) * (1j) ** (-k)


# --- profiles and fields ------------------------------------------------------

PROFILE_RANGE = (SUPPORT[0] / 2, SUPPORT[1] * 2)


@dataclass
class RadialProfile:
    """Samples ``h(rho_i)`` with quadrature weights.

    The canonical grid is uniform on ``[5/16, 16/5]`` with trapezoid weights;
    ``func`` (when known) lets operators refine the grid.
    """

    rho: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    func: Optional[Callable] = None

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        self.weights = np.asarray(self.weights, dtype=float)
        self.norm = float(np.sqrt(np.sum(self.weights * np.abs(self.values) ** 2)))

    @property
    def step(self) -> float:
        return float(self.rho[1] - self.rho[0])

    @staticmethod
    def uniform_grid(n: int = 1025):
        rho = np.linspace(*PROFILE_RANGE, n)
        w = np.full(n, rho[1] - rho[0])
        w[0] = w[-1] = 0.5 * w[0]
        return rho, w

    @classmethod
    def from_function(cls, func, n: int = 1025) -> "RadialProfile":
        rho, w = cls.uniform_grid(n)
        return cls(rho, func(rho), w, func)

    @classmethod
    def from_samples(cls, values) -> "RadialProfile":
        values = np.asarray(values)
        rho, w = cls.uniform_grid(len(values))
        return cls(rho, values, w)

    def points_in_support(self) -> int:
        return int(np.sum((self.rho >= SUPPORT[0]) & (self.rho <= SUPPORT[1])))

    def refined(self) -> "RadialProfile":
        if self.func is None:
            raise ValueError("profile has no generating function to refine")
        return RadialProfile.from_function(self.func, 2 * len(self.rho) - 1)

    def __add__(self, other: "RadialProfile") -> "RadialProfile":
        self._check_same_grid(other)
        f = None
        if self.func is not None and other.func is not None:
            f1, f2 = self.func, other.func
            f = lambda x: f1(x) + f2(x)  # noqa: E731
        return RadialProfile(self.rho, self.values + other.values, self.weights, f)

    def __mul__(self, c) -> "RadialProfile":
        f = None
        if self.func is not None:
            f0 = self.func
            f = lambda x: c * f0(x)  # noqa: E731
        return RadialProfile(self.rho, c * self.values, self.weights, f)

    __rmul__ = __mul__

    def _check_same_grid(self, other):
        if self.rho.shape != other.rho.shape or not np.array_equal(self.rho, other.rho):
            raise ValueError("profiles live on different grids")


@dataclass
class SampledField:
    """Values ``u[t_i, r_j]`` with the grids and the radial measure ``r^w dr``."""

    values: np.ndarray
    t: np.ndarray
    r: np.ndarray
    d: int
    radial_weight: float
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.t = np.atleast_1d(np.asarray(self.t, dtype=float))
        self.r = np.atleast_1d(np.asarray(self.r, dtype=float))
        if self.values.shape != (self.t.size, self.r.size):
            raise ValueError(f"values shape {self.values.shape} does not match grids {(self.t.size, self.r.size)}")


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    if x.size == 1:
        return np.ones(1)
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w


def _as_float_exponent(e) -> float:
    e = as_exponent(e)
    return math.inf if e is INF else float(e)


def _pow(x: np.ndarray, e: float) -> np.ndarray:
    if e == int(e) and 1 <= e <= 8:
        out = x
        for _ in range(int(e) - 1):
            out = out * x
        return out
    return x**e


def _norm_core(absu: np.ndarray, q: float, p: float, t_weights: np.ndarray, r_weights: np.ndarray):
    """Mixed ``L^q_t L^p_r`` norm of ``|u|`` and the per-time radial norms."""
    if math.isinf(p):
        inner = absu.max(axis=1)
    else:
        inner = (_pow(absu, p) @ r_weights) ** (1.0 / p)
    if math.isinf(q):
        total = inner.max()
    else:
        total = float((inner**q) @ t_weights) ** (1.0 / q)
    return float(total), inner


def mixed_norm(u: SampledField, q, p) -> float:
    """Trapezoidal ``L^q_t L^p_r`` norm with radial measure ``r^w dr``; ``inf`` via max."""
    q, p = _as_float_exponent(q), _as_float_exponent(p)
    if q < 1 or p < 1:
        raise ValueError("exponents must be >= 1")
    rw = _trapezoid_weights(u.r) * u.r**u.radial_weight
    tw = _trapezoid_weights(u.t)
    return _norm_core(np.abs(u.values), q, p, tw, rw)[0]


# --- direct operator application -----------------------------------------------

LAMBDA_FACTOR = 100.0


def _kernel(kind: str, nu, d, a, R, lam, j, r, rho, tabulate=False):
    """Kernel ``K[r, rho]`` without the time phase and without quadrature weights."""
    x = np.outer(r, rho)
    K = (bessel_j_table if tabulate else bessel_j_bulk)(nu, x) * chi0(rho)[None, :]
    if kind == "T":
        K = K * (r[:, None] ** (-(d - 2) / 2)) * (rho[None, :] ** (d / 2))
    elif kind in ("S_R", "S_R_j"):
        K = K * chi0(r / R)[:, None]
        if kind == "S_R_j":
            K = K * gamma(j, (x - nu) / lam)
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    return K


def _apply(kind, h: RadialProfile, a, nu, d, R, lam, j, t_grid, r_grid, tol, radial_weight):
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    r = np.atleast_1d(np.asarray(r_grid, dtype=float))

    def once(prof: RadialProfile):
        K = _kernel(kind, nu, d, a, R, lam, j, r, prof.rho)
        g = K * (prof.values * prof.weights)[None, :]
        E = np.exp(-1j * np.outer(t, prof.rho**a))
        return E @ g.T

    vals = once(h)
    if h.func is not None and tol is not None:
        prof = h
        scale = max(h.norm, 1e-300)
        for _ in range(8):
            prof = prof.refined()
            finer = once(prof)
            err = float(np.max(np.abs(finer - vals)))
            vals = finer
            if err <= tol * scale:
                break
        else:
            from .quadrature import PrecisionError

            idx = np.unravel_index(np.argmax(np.abs(finer - vals)), vals.shape)
            raise PrecisionError("rho quadrature did not converge", estimate=err, where={"t": t[idx[0]], "r": r[idx[1]]})
    return SampledField(vals, t, r, d, radial_weight)


def apply_T(h: RadialProfile, a: float, nu: float, d: int, t_grid, r_grid, tol: Optional[float] = None) -> SampledField:
    """Reduced evolution of the profile ``h`` in the degree with Bessel order ``nu``.

    With ``tol`` and a profile built from a function, the rho grid is doubled
    until successive fields agree to ``tol * ||h||_2`` pointwise; otherwise the
    samples are used as given.
    """
    if a < 1 or nu < 0:
        raise ValueError("need a >= 1 and nu >= 0")
    return _apply("T", h, a, nu, d, None, None, None, t_grid, r_grid, tol, d - 1)


def apply_S_R(h: RadialProfile, a: float, nu: float, R: float, t_grid, r_grid, tol: Optional[float] = None, d: int = 3) -> SampledField:
    """Annulus-localized operator; the field carries the measure ``dr``."""
    if R < 32:
        raise ValueError(f"R must be >= 32, got {R}")
    return _apply("S_R", h, a, nu, d, R, None, None, t_grid, r_grid, tol, 0)


def lambda_threshold(R: float) -> float:
    return LAMBDA_FACTOR * R ** (1 / 3)


def apply_S_R_j(h: RadialProfile, a: float, nu: float, R: float, lam: float, j: int, t_grid, r_grid, tol: Optional[float] = None, d: int = 3) -> SampledField:
    """``gamma_j``-localized piece; flags (and warns) when ``lam < 100 R^{1/3}``."""
    if R < 32:
        raise ValueError(f"R must be >= 32, got {R}")
    out = _apply("S_R_j", h, a, nu, d, R, lam, j, t_grid, r_grid, tol, 0)
    if lam < lambda_threshold(R):
        out.flags["lambda_below_threshold"] = True
        warnings.warn(f"lam = {lam:.4g} below 100 R^(1/3) = {lambda_threshold(R):.4g}", stacklevel=2)
    return out


def gamma_support_empty(j: int, nu: float, R: float, lam: float) -> bool:
    """True when ``gamma_j((r rho - nu)/lam)`` vanishes on the whole support."""
    lo = SUPPORT[0] * SUPPORT[0] * R
    hi = SUPPORT[1] * SUPPORT[1] * R
    if j == 2:
        return lo - nu >= -PLATEAU * lam
    if j == 3:
        return hi - nu <= PLATEAU * lam
    return nu - hi >= EDGE * lam or lo - nu >= EDGE * lam


# --- discretized operators for norm estimation ---------------------------------------


class DenseOperator:
    """Operator given by an explicit array ``A[t, r, n]`` (small grids, sanity checks)."""

    def __init__(self, A, in_weights, t_weights, r_weights):
        self.A = np.asarray(A, dtype=complex)
        self.in_weights = np.asarray(in_weights, dtype=float)
        self.t_weights = np.asarray(t_weights, dtype=float)
        self.r_weights = np.asarray(r_weights, dtype=float)

    @property
    def n_in(self) -> int:
        return self.A.shape[2]

    def forward(self, h):
        return np.tensordot(self.A, h, axes=([2], [0]))

    def adjoint(self, g):
        return np.tensordot(self.A.conj(), g, axes=([0, 1], [0, 1]))

    def focusing_profiles(self, n: int, rng):
        nt, nr, _ = self.A.shape
        out = []
        for _ in range(n):
            i, k = rng.integers(nt), rng.integers(nr)
            out.append(self.A[i, k].conj() / self.in_weights)
        return out


@dataclass
class Discretization:
    """Grid parameters for :class:`FFTOperator`.

    ``s_step`` defaults to ``pi / (4 R)`` so the periodic time window spans
    ``|t| <= 4R``; ``r_step`` is the radial spacing; ``oversample`` pads the
    FFT for finer time sampling.
    """

    s_step: Optional[float] = None
    r_step: float = 0.35
    oversample: int = 2
    t_window: Optional[float] = None


class FFTOperator:
    """``S_R``, ``S_{R,j}`` or ``T`` on a grid where ``s = rho^a`` is uniform.

    Forward maps input samples ``h_n`` at ``rho_n = s_n^{1/a}`` to ``u[t_m, r_k]``
    for the periodic times ``t_m = 2 pi m / (M ds)``; input norm uses the
    weights ``drho_n = ds / (a rho_n^{a-1})``.
    """

    def __init__(self, kind: str, a: float, nu: float, R: float, d: int = 3, lam: Optional[float] = None, j: Optional[int] = None,
                 disc: Optional[Discretization] = None, r_range: Optional[tuple] = None):
        disc = disc or Discretization()
        self.kind, self.a, self.nu, self.R, self.d, self.lam, self.j = kind, a, nu, R, d, lam, j
        ds = disc.s_step or math.pi / (4.0 * R)
        s_lo, s_hi = SUPPORT[0] ** a, SUPPORT[1] ** a
        n = int(math.ceil((s_hi - s_lo) / ds)) + 1
        self.s = s_lo + ds * np.arange(n)
        self.rho = self.s ** (1.0 / a)
        self.in_weights = ds / (a * self.rho ** (a - 1))
        self.ds = ds
        if r_range is None:
            r_range = (SUPPORT[0] * R, SUPPORT[1] * R)
        nr = int(math.ceil((r_range[1] - r_range[0]) / disc.r_step)) + 1
        self.r = np.linspace(r_range[0], r_range[1], nr)
        self.r_weights = _trapezoid_weights(self.r) * (self.r ** (d - 1) if kind == "T" else 1.0)
        self.M = sfft.next_fast_len(disc.oversample * n)
        self.dt = 2 * math.pi / (self.M * ds)
        m = np.arange(self.M)
        self.t = np.where(m < (self.M + 1) // 2, m, m - self.M) * self.dt
        self.t_weights = np.full(self.M, self.dt)
        if disc.t_window is not None:
            self.t_weights = np.where(np.abs(self.t) <= disc.t_window, self.dt, 0.0)
        self._shift = np.exp(-1j * self.t * s_lo)
        self.K = _kernel(kind, nu, d, a, R, lam, j, self.r, self.rho, tabulate=True) * self.in_weights[None, :]

    @property
    def n_in(self) -> int:
        return self.s.size

    @property
    def is_zero(self) -> bool:
        return not np.any(self.K)

    def forward(self, h):
        G = self.K * h[None, :]
        U = sfft.fft(G, n=self.M, axis=1)
        return (U * self._shift[None, :]).T

    def adjoint(self, g):
        V = g.T * np.conj(self._shift)[None, :]
        W = sfft.ifft(V, axis=1) * self.M
        return np.sum(np.conj(self.K) * W[:, : self.n_in], axis=0)

    def exact_l2_norm(self) -> float:
        """Exact ``L^2_t L^2_r`` operator norm of the discretization (Parseval)."""
        tw = self.t_weights
        if not np.allclose(tw, self.dt):
            raise ValueError("exact L2 norm needs the full periodic time window")
        col = (np.abs(self.K) ** 2 * self.r_weights[:, None]).sum(axis=0)
        return float(np.sqrt(np.max(self.M * self.dt * col / self.in_weights)))

    def fixed_time_norm(self) -> float:
        """Spectral norm of ``h -> u(t, .)``, the same for every ``t``."""
        B = np.sqrt(self.r_weights)[:, None] * self.K / np.sqrt(self.in_weights)[None, :]
        return float(np.linalg.norm(B, 2))

    def focusing_profiles(self, n: int, rng):
        """Profiles ``W^{-1} A^* delta_{(t0, r0)}`` that concentrate the output at a point."""
        out = []
        for _ in range(n):
            k = int(rng.integers(self.r.size))
            t0 = float(rng.uniform(-2.0 * self.R, 2.0 * self.R))
            col = np.conj(self.K[k]) * np.exp(1j * t0 * self.s)
            out.append(col / self.in_weights)
        return out

    def describe(self) -> dict:
        return {
            "kind": self.kind, "a": self.a, "nu": self.nu, "R": self.R, "d": self.d, "lam": self.lam, "j": self.j,
            "n_rho": int(self.n_in), "n_r": int(self.r.size), "n_t": int(self.M), "dt": self.dt, "ds": self.ds,
        }


def _dual_direction(u, q, p, t_weights, r_weights):
    """``(f(u), g)`` with ``Re <g, u> = f(u)`` and ``g`` a (sub)gradient of the mixed norm."""
    absu = np.abs(u)
    f, inner = _norm_core(absu, q, p, t_weights, r_weights)
    if f == 0.0:
        return 0.0, np.zeros_like(u)
    if math.isinf(q):
        tim = np.zeros_like(inner)
        tim[np.argmax(inner)] = 1.0
    else:
        tim = t_weights * inner ** (q - 1) * f ** (1.0 - q)
    if math.isinf(p):
        g = np.zeros_like(u)
        rows = np.arange(absu.shape[0])
        idx = np.argmax(absu, axis=1)
        peak = absu[rows, idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            g[rows, idx] = np.where(peak > 0, tim * u[rows, idx] / np.where(peak > 0, peak, 1.0), 0.0)
        return f, g
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(inner > 0, tim * inner ** (1.0 - p), 0.0)
    # |u|^{p-1} u/|u| = |u|^{p-2} u, finite for p >= 2
    rad = u if p == 2 else _pow(absu, p - 2) * u
    return f, (scale[:, None] * r_weights[None, :]) * rad


@dataclass
class NormEstimate:
    value: float
    history: list
    best_member: int
    members: list


def opnorm_estimate(op, q=2, p=2, n_iter: int = 12, ensemble_size: int = 4, seed: int = 0, n_focus: Optional[int] = None,
                    rtol: float = 1e-6) -> NormEstimate:
    """Lower bound for ``||op||_{L^2 -> L^q_t L^p_r}``.

    Starts from a seeded ensemble of Gaussian and focusing profiles and
    improves each by the nonlinear power iteration
    ``h <- W^{-1} A^* grad||A h|| / ||.||_W``, which never decreases the ratio
    because the norm is convex.  At ``q = p = 2`` this is the ordinary power
    iteration on the normal operator.  Profiles with ``||h||_2 < 1e-8`` are
    discarded.
    """
    qf, pf = _as_float_exponent(q), _as_float_exponent(p)
    rng = np.random.default_rng(seed)
    w = op.in_weights
    n_focus = ensemble_size // 2 if n_focus is None else n_focus
    starts = []
    for _ in range(ensemble_size - n_focus):
        starts.append(rng.standard_normal(op.n_in) + 1j * rng.standard_normal(op.n_in))
    starts.extend(op.focusing_profiles(n_focus, rng))
    members = []
    histories = []
    for h in starts:
        nrm = math.sqrt(float(np.sum(w * np.abs(h) ** 2)))
        if nrm < 1e-8:
            continue
        h = h / nrm
        hist = []
        for _ in range(max(1, n_iter)):
            u = op.forward(h)
            f, g = _dual_direction(u, qf, pf, op.t_weights, op.r_weights)
            hist.append(f)
            if f == 0.0:
                break
            if len(hist) > 1 and hist[-1] - hist[-2] <= rtol * hist[-1]:
                break
            v = op.adjoint(g) / w
            vn = math.sqrt(float(np.sum(w * np.abs(v) ** 2)))
            if vn == 0.0:
                break
            h = v / vn
        members.append(max(hist))
        histories.append(hist)
    if not members:
        return NormEstimate(0.0, [], -1, [])
    best = int(np.argmax(members))
    return NormEstimate(float(members[best]), histories[best], best, members)


# --- scans -----------------------------------------------------------------------


def weight_exponent(d: int, p) -> float:
    """``(d-1)/p - (d-2)/2``: power of ``R`` in front of the annulus norm."""
    pf = _as_float_exponent(p)
    return (d - 1) / pf - (d - 2) / 2 if not math.isinf(pf) else -(d - 2) / 2


def lambda_from_rule(rule: str, R: float, eps: float = 0.05) -> float:
    if rule in ("R^{1/2+eps}", "half"):
        return R ** (0.5 + eps)
    if rule in ("R^{1/3+eps}", "third"):
        return R ** (1 / 3 + eps)
    raise ValueError(f"unknown lambda rule {rule!r}")


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def past_turning_point(nu: float, R: float) -> bool:
    """True when the annulus centre ``r = R, rho = 1`` has ``r rho >= nu``.

    Below this the annulus only grazes the oscillatory region of ``J_nu`` and
    the norm is still rising towards its peak.
    """
    return R >= nu


@dataclass
class DyadicScanResult:
    rows: list
    slopes: dict
    full_slopes: dict
    constants: dict
    spread: float
    spec: dict

    COLUMNS = ("nu", "R", "weighted_norm")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.COLUMNS)
        for nu, R, wn in self.rows:
            w.writerow([repr(float(nu)), repr(float(R)), repr(float(wn))])
        return buf.getvalue()

    @staticmethod
    def rows_from_csv(text: str) -> list:
        rows = list(csv.reader(io.StringIO(text)))
        if tuple(rows[0]) != DyadicScanResult.COLUMNS:
            raise ValueError(f"unexpected header {rows[0]}")
        return [tuple(float(v) for v in row) for row in rows[1:] if row]

    def summary(self) -> dict:
        return {
            "slopes": {repr(k): {"slope": v[0], "stderr": v[1], "n_points": v[2]} for k, v in self.slopes.items()},
            "full_range_slopes": {repr(k): {"slope": v[0], "stderr": v[1]} for k, v in self.full_slopes.items()},
            "constants": {repr(k): v for k, v in self.constants.items()},
            "spread": self.spread,
            "spec": self.spec,
        }


def dyadic_scan(a: float = 2.0, d: int = 3, q=2, p=4, nu_list=(10, 50, 200), j_range=(5, 10), lambda_rule: str = "R^{1/2+eps}",
                eps: float = 0.05, n_iter: int = 12, ensemble_size: int = 4, seed: int = 0, threads: int = 1,
                disc: Optional[Discretization] = None) -> DyadicScanResult:
    """Weighted annulus norms ``R^{(d-1)/p-(d-2)/2} ||S_R||`` over dyadic ``R``.

    Slopes are least-squares fits of ``log2`` weighted norm against ``log2 R``
    over the radii with ``R >= nu``, where the annulus centre is past the
    turning point of ``J_nu``; smaller radii see the exponentially small
    region or the onset of the peak.  The fit over the whole range is kept in
    ``full_slopes``.  ``constants`` is the largest weighted norm per order and
    ``spread`` the ratio of the largest to the smallest constant.
    """
    if a <= 1:
        raise ValueError("dyadic scan needs a > 1")
    j_lo, j_hi = j_range
    if j_lo < 5:
        raise ValueError("dyadic radii start at j = 5")
    Rs = [2.0**j for j in range(j_lo, j_hi + 1)]
    wexp = weight_exponent(d, p)
    tasks = [(nu, R) for nu in nu_list for R in Rs]
    seeds = np.random.SeedSequence(seed).spawn(len(tasks))

    def run(idx):
        nu, R = tasks[idx]
        op = FFTOperator("S_R", a, nu, R, d=d, disc=disc)
        if op.is_zero:
            return 0.0
        s = int(seeds[idx].generate_state(1)[0])
        est = opnorm_estimate(op, q, p, n_iter=n_iter, ensemble_size=ensemble_size, seed=s)
        return R**wexp * est.value

    values = _pmap(run, range(len(tasks)), threads)
    rows = [(nu, R, v) for (nu, R), v in zip(tasks, values)]
    slopes, full, consts = {}, {}, {}
    for nu in nu_list:
        pts = [(R, v) for (n_, R, v) in rows if n_ == nu and v > 0]
        fit_pts = [(R, v) for R, v in pts if past_turning_point(nu, R)]
        if len(fit_pts) >= 2:
            s, e, _ = fit_loglog([x for x, _ in fit_pts], [y for _, y in fit_pts], base=2.0)
            slopes[nu] = (s, e, len(fit_pts))
        if len(pts) >= 2:
            s, e, _ = fit_loglog([x for x, _ in pts], [y for _, y in pts], base=2.0)
            full[nu] = (s, e)
        consts[nu] = max((v for R, v in pts), default=0.0)
    pos = [c for c in consts.values() if c > 0]
    spread = max(pos) / min(pos) if pos else float("nan")
    spec = {
        "a": a, "d": d, "q": str(q), "p": str(p), "nu_list": list(nu_list), "j_range": list(j_range),
        "lambda_rule": lambda_rule, "eps": eps, "n_iter": n_iter, "ensemble_size": ensemble_size, "seed": seed,
        "weight_exponent": wexp, "discretization": (disc or Discretization()).__dict__,
    }
    return DyadicScanResult(rows, slopes, full, consts, spread, spec)


@dataclass
class Lemma34Report:
    nu: int
    rows: list
    slope: float
    stderr: float
    target: float
    vanishing_from: Optional[float]
    spec: dict

    def summary(self) -> dict:
        return {
            "nu": self.nu, "slope": self.slope, "stderr": self.stderr, "target_slope": self.target,
            "vanishing_from": self.vanishing_from, "rows": [list(r) for r in self.rows], "spec": self.spec,
        }


def lemma34_scan(nu, R_list, eps: float = 0.1, N: float = 1.0, lambda_factor: float = LAMBDA_FACTOR, q=2, p=2, a: float = 2.0,
                 n_iter: int = 12, ensemble_size: int = 4, seed: int = 0, nu_of_R: Optional[Callable] = None,
                 disc: Optional[Discretization] = None) -> Lemma34Report:
    """Norm estimates of ``S_{R,2}`` with ``lam = lambda_factor R^{1/3+eps}``.

    When ``gamma_2`` has empty support the operator is exactly zero and the
    estimate is recorded as 0.  The slope is fitted over the positive
    estimates; if the estimates vanish from some radius on, the slope is
    ``-inf``.  ``nu_of_R`` ties the order to the radius (uniformity scans).
    """
    rows = []
    ss = np.random.SeedSequence(seed).spawn(len(R_list))
    for i, R in enumerate(R_list):
        n_ = int(nu_of_R(R)) if nu_of_R is not None else int(nu)
        lam = lambda_factor * R ** (1 / 3 + eps)
        if gamma_support_empty(2, n_, R, lam):
            rows.append((n_, R, lam, 0.0))
            continue
        op = FFTOperator("S_R_j", a, n_, R, lam=lam, j=2, disc=disc)
        est = 0.0
        if not op.is_zero:
            est = opnorm_estimate(op, q, p, n_iter=n_iter, ensemble_size=ensemble_size, seed=int(ss[i].generate_state(1)[0])).value
        rows.append((n_, R, lam, est))
    positive = [(R, v) for (_, R, _, v) in rows if v > 0]
    vanish = None
    for k in range(len(rows)):
        if all(r[3] == 0.0 for r in rows[k:]):
            vanish = rows[k][1]
            break
    if len(positive) >= 2 and vanish is None:
        slope, stderr, _ = fit_loglog([x for x, _ in positive], [y for _, y in positive], base=2.0)
    elif vanish is not None:
        slope, stderr = -math.inf, 0.0
    else:
        slope, stderr = math.nan, math.nan
    spec = {"eps": eps, "N": N, "lambda_factor": lambda_factor, "q": str(q), "p": str(p), "a": a, "seed": seed,
            "R_list": list(R_list), "nu_tracks_R": nu_of_R is not None}
    return Lemma34Report(int(nu), rows, slope, stderr, -N * eps, vanish, spec)


def summary_json(obj) -> str:
    return json.dumps(obj.summary(), sort_keys=True, indent=2, default=str)
