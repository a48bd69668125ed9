"""Cap example: data concentrated on a small frequency box near ``e_1``.

With ``f^ = 1_D`` for ``D = {|xi_1 - 1| <= delta, |xi'| <= delta}`` the
evolution ``u(t, x) = int_D e^{i(t|xi|^a + x.xi)} dxi`` stays of size ``|D|``
on a tube of length ``~ delta^-2`` and width ``~ delta^-1``.  Measuring the
mixed norm on that tube gives a power of ``delta`` whose sign decides whether
the estimate can hold.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exponents import INF, ExponentTuple, as_exponent, fmt_exponent, knapp_predicted_slope
from .oscillatory import fit_loglog
from .quadrature import gauss_legendre

# tube proportions: |t| in [T0, 2 T0] delta^-2, rho within a|t| +- RHO_HALF/delta, angle < ANGLE delta
T0 = 1.0 / 16.0
RHO_HALF = 0.25
ANGLE = 0.5


@dataclass(frozen=True)
class KnappConfig:
    d: int = 2
    a: float = 2.0
    delta: float = 1.0 / 16.0
    q: object = 2
    p: object = 8
    s: object = 2

    def __post_init__(self):
        if not 0 < self.delta <= 1 / 8:
            raise ValueError(f"delta must lie in (0, 1/8], got {self.delta}")
        if self.a <= 0 or self.a == 1:
            raise ValueError(f"need a > 0 and a != 1, got {self.a}")
        if self.d not in (2, 3):
            raise ValueError("cap example is implemented for d = 2 and d = 3")
        if self.d == 3 and self.delta < 1 / 16:
            raise ValueError("d = 3 is limited to delta >= 1/16")
        for name in ("q", "p", "s"):
            object.__setattr__(self, name, as_exponent(getattr(self, name)))

    def exponents(self) -> ExponentTuple:
        return ExponentTuple(self.d, 2, self.q, self.p, self.s)

    def with_delta(self, delta: float) -> "KnappConfig":
        return KnappConfig(self.d, self.a, delta, self.q, self.p, self.s)

    def as_dict(self) -> dict:
        return {"d": self.d, "a": self.a, "delta": self.delta,
                "q": fmt_exponent(self.q), "p": fmt_exponent(self.p), "s": fmt_exponent(self.s)}


def box_measure(d: int, delta: float) -> float:
    return (2.0 * delta) ** d


def data_norm(d: int, delta: float) -> float:
    """``||f||_2 = |D|^{1/2}`` by Plancherel."""
    return math.sqrt(box_measure(d, delta))


def _box_rule(d: int, delta: float, n: int):
    x, w = gauss_legendre(n)
    axes = [1.0 + delta * x] + [delta * x] * (d - 1)
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weight = np.ones(1)
    for _ in range(d):
        weight = np.multiply.outer(weight, delta * w).ravel()
    return nodes, weight


def knapp_extension(d: int, a: float, delta: float, t, x, n_nodes: int = 16) -> np.ndarray:
    """``int_D e^{i(t|xi|^a + x.xi)} dxi`` at times ``t`` (shape ``(m,)``) and points ``x`` (``(m, d)``).

    Gauss-Legendre with ``n_nodes`` per axis; the phase varies by ``O(1)`` over
    ``D`` on the tube, so the default is accurate to rounding there.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    nodes, weight = _box_rule(d, delta, n_nodes)
    mod = np.linalg.norm(nodes, axis=1) ** a
    out = np.empty(t.size, dtype=complex)
    chunk = max(1, (1 << 20) // nodes.shape[0])
    for i in range(0, t.size, chunk):
        ph = np.outer(t[i:i + chunk], mod) + x[i:i + chunk] @ nodes.T
        out[i:i + chunk] = np.exp(1j * ph) @ weight
    return out


@dataclass
class TubeGrid:
    """Gauss-Legendre tensor grid over the tube, in polar coordinates for ``x``."""

    t: np.ndarray
    wt: np.ndarray
    rho_offset: np.ndarray
    wrho: np.ndarray
    theta: np.ndarray
    wtheta: np.ndarray
    phi: np.ndarray = field(default_factory=lambda: np.zeros(1))
    wphi: np.ndarray = field(default_factory=lambda: np.ones(1))


def tube_grid(d: int, delta: float, n: int = 64) -> TubeGrid:
    x, w = gauss_legendre(n)
    t_lo, t_hi = -2 * T0 / delta**2, -T0 / delta**2
    t = 0.5 * (t_lo + t_hi) + 0.5 * (t_hi - t_lo) * x
    wt = 0.5 * (t_hi - t_lo) * w
    h = RHO_HALF / delta
    rho_off, wrho = h * x, h * w
    if d == 2:
        th, wth = ANGLE * delta * x, ANGLE * delta * w
        return TubeGrid(t, wt, rho_off, wrho, th, wth)
    # polar angle from e_1 on [0, ANGLE delta], azimuth over the full circle
    th = 0.5 * ANGLE * delta * (1 + x)
    wth = 0.5 * ANGLE * delta * w * np.sin(th)
    phi = 2 * math.pi * (np.arange(n) + 0.5) / n
    return TubeGrid(t, wt, rho_off, wrho, th, wth, phi, np.full(n, 2 * math.pi / n))


def tube_points(d: int, a: float, g: TubeGrid, ti: int):
    """Space points of the tube slice at time index ``ti`` (ρ centred on ``a|t|``)."""
    rho = a * abs(g.t[ti]) + g.rho_offset
    if d == 2:
        R, TH = np.meshgrid(rho, g.theta, indexing="ij")
        return rho, np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2)
    R, TH, PH = np.meshgrid(rho, g.theta, g.phi, indexing="ij")
    pts = np.stack([R * np.cos(TH), R * np.sin(TH) * np.cos(PH), R * np.sin(TH) * np.sin(PH)], axis=-1)
    return rho, pts.reshape(-1, 3)


@lru_cache(maxsize=32)
def tube_field(d: int, a: float, delta: float, n: int = 64, n_nodes: int = 16):
    """``|u|`` on the tube grid, shape ``(n_t, n_rho, n_angles)``, plus the grid."""
    g = tube_grid(d, delta, n)
    n_ang = g.theta.size * g.phi.size
    out = np.empty((g.t.size, g.rho_offset.size, n_ang))
    for i in range(g.t.size):
        _, pts = tube_points(d, a, g, i)
        u = knapp_extension(d, a, delta, np.full(pts.shape[0], g.t[i]), pts, n_nodes)
        out[i] = np.abs(u).reshape(g.rho_offset.size, n_ang)
    out.setflags(write=False)
    return out, g


def _lp(vals: np.ndarray, w: np.ndarray, e, axis: int) -> np.ndarray:
    if e is INF:
        return vals.max(axis=axis)
    e = float(e)
    return np.tensordot(vals**e, w, axes=([axis], [0])) ** (1.0 / e)


def tube_norm(cfg: KnappConfig, n: int = 64, n_nodes: int = 16) -> float:
    """``L^q_t L^p_rho L^s_omega`` norm of the evolution restricted to the tube."""
    absu, g = tube_field(cfg.d, cfg.a, cfg.delta, n, n_nodes)
    w_ang = np.multiply.outer(g.wtheta, g.wphi).ravel()
    ang = _lp(absu, w_ang, cfg.s, axis=2)
    out = np.empty(g.t.size)
    for i in range(g.t.size):
        rho = cfg.a * abs(g.t[i]) + g.rho_offset
        out[i] = _lp(ang[i][None, :], g.wrho * rho ** (cfg.d - 1), cfg.p, axis=1)[0]
    return float(_lp(out[None, :], g.wt, cfg.q, axis=1)[0])


def knapp_ratio(cfg: KnappConfig, n: int = 64, n_nodes: int = 16) -> float:
    """Tube norm divided by ``||f||_2``."""
    return tube_norm(cfg, n, n_nodes) / data_norm(cfg.d, cfg.delta)


@dataclass
class KnappScan:
    cfg: KnappConfig
    deltas: list
    ratios: list
    predicted_slope: float
    fitted_slope: float
    stderr: float
    verdict: str

    COLUMNS = ("delta", "ratio", "predicted_slope", "fitted_slope", "stderr")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.COLUMNS)
        for dl, r in zip(self.deltas, self.ratios):
            w.writerow([repr(float(dl)), repr(float(r)), repr(self.predicted_slope), repr(self.fitted_slope), repr(self.stderr)])
        return buf.getvalue()

    @staticmethod
    def rows_from_csv(text: str) -> list:
        rows = list(csv.reader(io.StringIO(text)))
        if tuple(rows[0]) != KnappScan.COLUMNS:
            raise ValueError(f"unexpected header {rows[0]}")
        return [tuple(float(v) for v in row) for row in rows[1:] if row]

    def summary(self) -> dict:
        return {"config": self.cfg.as_dict(), "deltas": self.deltas, "ratios": self.ratios,
                "predicted_slope": self.predicted_slope, "fitted_slope": self.fitted_slope,
                "stderr": self.stderr, "verdict": self.verdict}


MIN_EFFECT = 0.02


def knapp_verdict(slope: float, stderr: float, min_effect: float = MIN_EFFECT) -> str:
    """``violated`` / ``consistent`` when the slope clears both ``2 stderr`` and ``min_effect``."""
    margin = max(2.0 * stderr, min_effect)
    if slope < -margin:
        return "violated"
    if slope > margin:
        return "consistent"
    return "inconclusive"


def knapp_scan(cfg: KnappConfig, deltas=None, n: int = 64, n_nodes: int = 16) -> KnappScan:
    """Ratios over ``deltas`` (default ``2^-3 .. 2^-6``) and the fitted log-log slope."""
    if deltas is None:
        deltas = [2.0**-k for k in range(3, 7)]
    deltas = sorted(deltas, reverse=True)
    ratios = [knapp_ratio(cfg.with_delta(dl), n, n_nodes) for dl in deltas]
    slope, stderr, _ = fit_loglog(deltas, ratios, base=2.0)
    pred = knapp_predicted_slope(cfg.exponents())
    return KnappScan(cfg, deltas, ratios, pred, slope, stderr, knapp_verdict(slope, stderr))


def norm_slope(d: int, deltas) -> float:
    return fit_loglog(list(deltas), [data_norm(d, dl) for dl in deltas], base=2.0)[0]
