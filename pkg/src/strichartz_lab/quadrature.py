"""Composite Gauss-Legendre rules with panel doubling."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class PrecisionError(RuntimeError):
    """Quadrature could not reach the requested tolerance within its node budget."""

    def __init__(self, message: str, estimate: float = float("nan"), where=None):
        super().__init__(message)
        self.estimate = estimate
        self.where = where


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(breaks: np.ndarray, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an ``n_nodes``-point rule on every panel of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(n_nodes)
    half = 0.5 * np.diff(breaks)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def uniform_panels(a: float, b: float, max_width: float) -> np.ndarray:
    n = max(1, int(np.ceil((b - a) / max_width)))
    return np.linspace(a, b, n + 1)


def refine(breaks: np.ndarray) -> np.ndarray:
    """Split every panel in two."""
    mids = 0.5 * (breaks[1:] + breaks[:-1])
    out = np.empty(2 * len(breaks) - 1)
    out[0::2] = breaks
    out[1::2] = mids
    return out


def integrate(
    f,
    breaks: np.ndarray,
    tol: float,
    n_nodes: int = 16,
    max_nodes: int = 1 << 22,
    where=None,
):
    """Integrate ``f`` over the panels in ``breaks``, halving panels until converged.

    ``f`` is evaluated on numpy arrays.  The error estimate is the difference
    between two successive refinements; the finer value is returned.

    Returns
    -------
    value, error_estimate
    """
    breaks = np.asarray(breaks, dtype=float)
    nodes, weights = panel_rule(breaks, n_nodes)
    prev = np.sum(weights * f(nodes))
    while True:
        breaks = refine(breaks)
        nodes, weights = panel_rule(breaks, n_nodes)
        cur = np.sum(weights * f(nodes))
        err = abs(cur - prev)
        if err <= tol:
            return cur, err
        if nodes.size > max_nodes:
            raise PrecisionError(
                f"quadrature stalled at error {err:.3e} > tol {tol:.1e} "
                f"with {nodes.size} nodes",
                estimate=err,
                where=where,
            )
        prev = cur
