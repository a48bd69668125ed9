"""Oscillatory integrals ``I(lam) = int exp(i lam phase(x)) amplitude(x) dx``.

Provides adaptive evaluation of ``I``, the Van der Corput bound, the
one-term stationary phase approximation with its remainder, and numerical
extraction of the higher expansion coefficients through the change of
variables ``y = x * psi(x)**0.5`` that turns the phase into ``y**2 / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quadrature import PrecisionError, gauss_legendre, integrate, uniform_panels


class ContractError(ValueError):
    """A hypothesis of the requested estimate is not met by the problem."""


class Smooth:
    """A real function with callback access to its derivatives.

    ``f(x, k)`` returns the ``k``-th derivative at ``x`` (array in, array out).
    """

    def __init__(self, func: Callable[[np.ndarray, int], np.ndarray], max_order: int, name: str = ""):
        self._func = func
        self.max_order = max_order
        self.name = name

    def __call__(self, x, k: int = 0):
        if k > self.max_order:
            raise ValueError(f"{self.name or 'function'}: derivative order {k} > {self.max_order}")
        return self._func(np.asarray(x, dtype=float), k)

    def __repr__(self) -> str:
        return f"Smooth({self.name!r})"

    def scaled(self, c: float) -> "Smooth":
        return Smooth(lambda x, k: c * self._func(x, k), self.max_order, f"{c}*{self.name}")

    def negated(self) -> "Smooth":
        return Smooth(lambda x, k: -self._func(x, k), self.max_order, f"-{self.name}")


def polynomial(coeffs, name: str = "poly") -> Smooth:
    """Polynomial with coefficients in increasing degree order."""
    base = np.polynomial.Polynomial(coeffs)
    derivs = [base]
    for _ in range(len(coeffs) + 8):
        derivs.append(derivs[-1].deriv())

    def f(x, k):
        if k >= len(derivs):
            return np.zeros_like(x)
        return derivs[k](x)

    return Smooth(f, 64, name)


def constant(c: float = 1.0) -> Smooth:
    return Smooth(lambda x, k: np.full_like(x, c if k == 0 else 0.0), 64, f"const {c}")


def _pole_term_derivs(x, kmax):
    # g(x) = 1 - 1/(1 - x^2) = 1 - (1/(1-x) + 1/(1+x)) / 2, derivatives 0..kmax
    out = [1.0 - 1.0 / (1.0 - x * x)]
    fact = 1.0
    for k in range(1, kmax + 1):
        fact *= k
        out.append(-0.5 * fact * ((1.0 - x) ** (-k - 1) + (-1) ** k * (1.0 + x) ** (-k - 1)))
    return out


def bump(width: float = 1.0, center: float = 0.0, height: float = 1.0) -> Smooth:
    """``height * exp(1 - 1/(1 - z^2))`` with ``z = (x - center)/width``, zero for ``|z| >= 1``.

    Derivatives come from Faa di Bruno's recursion for ``exp(g)`` with the
    closed-form derivatives of ``g``; exact to rounding.
    """
    max_order = 8

    def f(x, k):
        shape = np.shape(x)
        z = (np.atleast_1d(x) - center) / width
        inside = np.abs(z) < 1.0
        out = np.zeros_like(z)
        if not np.any(inside):
            return out.reshape(shape)
        zi = z[inside]
        g = _pole_term_derivs(zi, k)
        F = [np.exp(g[0])]
        for n in range(1, k + 1):
            acc = np.zeros_like(zi)
            for j in range(n):
                acc += math.comb(n - 1, j) * g[j + 1] * F[n - 1 - j]
            F.append(acc)
        out[inside] = height * F[k] / width**k
        return out.reshape(shape)

    return Smooth(f, max_order, f"bump(w={width}, c={center})")


def gaussian(sigma: float = 0.2, height: float = 1.0) -> Smooth:
    """``height * exp(-x^2 / (2 sigma^2))`` with Hermite-polynomial derivatives."""

    def f(x, k):
        z = x / sigma
        he = np.polynomial.hermite_e.HermiteE.basis(k)(z)
        return height * (-1) ** k * he * np.exp(-0.5 * z * z) / sigma**k

    return Smooth(f, 32, f"gauss(sigma={sigma})")


@dataclass
class OscillatoryProblem:
    """Phase, amplitude and large parameter of ``I(lam)``.

    ``interval`` is the integration range; the amplitude is expected to
    vanish (with its derivatives) at its ends unless a Van der Corput check on
    a sharp interval is intended.
    """

    phase: Smooth
    amplitude: Smooth
    lam: float
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")

    def with_lam(self, lam: float) -> "OscillatoryProblem":
        return OscillatoryProblem(self.phase, self.amplitude, lam, self.interval)

    def amplitude_vanishes_at_ends(self, orders: int = 4, atol: float = 1e-8) -> bool:
        a, b = self.interval
        ends = np.array([a, b])
        return all(np.all(np.abs(self.amplitude(ends, k)) <= atol) for k in range(orders + 1))


@dataclass
class StationaryPhaseResult:
    leading: complex
    remainder: complex
    remainder_bound: float
    higher_terms: Optional[list] = None
    value: complex = 0j
    corrected_remainder: Optional[complex] = None


def _max_phase_speed(prob: OscillatoryProblem, n: int = 2001) -> float:
    a, b = prob.interval
    xs = np.linspace(a, b, n)
    return float(np.max(np.abs(prob.phase(xs, 1))))


def eval_I(prob: OscillatoryProblem, tol: float = 1e-12, n_nodes: int = 16) -> complex:
    """Adaptive composite Gauss-Legendre evaluation of ``I(lam)`` to absolute ``tol``.

    Panels start at two local wavelengths each (wavelength taken from the
    sampled maximum of ``lam * |phase'|``) and are halved until two successive
    values agree.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = prob.interval
    speed = prob.lam * _max_phase_speed(prob) + 1.0
    breaks = uniform_panels(a, b, 2.0 * 2.0 * math.pi / speed)
    lam = prob.lam
    phase = prob.phase
    amp = prob.amplitude

    def f(x):
        return np.exp(1j * lam * phase(x)) * amp(x)

    value, _ = integrate(f, breaks, tol, n_nodes=n_nodes, where={"lam": lam})
    return complex(value)


def _total_variation(f: Smooth, a: float, b: float, n: int = 20001) -> float:
    xs = np.linspace(a, b, n)
    d = np.abs(f(xs, 1))
    return float(np.sum(0.5 * (d[1:] + d[:-1]) * np.diff(xs)))


def van_der_corput_check(prob: OscillatoryProblem, k: int, n_samples: int = 20001, tol: float = 1e-13):
    """Compare ``|I(lam)|`` with ``lam^(-1/k) [|psi(b)| + int |psi'|]``.

    The hypothesis ``|phase^(k)| >= 1`` is checked on ``n_samples`` points of
    the open interval (and monotonicity of ``phase'`` when ``k = 1``).

    Returns
    -------
    (lhs, rhs) without the constant ``c_k``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    a, b = prob.interval
    xs = np.linspace(a, b, n_samples)[1:-1]
    dk = prob.phase(xs, k)
    if np.any(np.abs(dk) < 1.0 - 1e-12):
        raise ContractError(f"|phase^({k})| < 1 somewhere on ({a}, {b})")
    if k == 1:
        d2 = prob.phase(xs, 2)
        if not (np.all(d2 >= -1e-14) or np.all(d2 <= 1e-14)):
            raise ContractError("phase' is not monotonic on the interval")
    lhs = abs(eval_I(prob, tol))
    psi = prob.amplitude
    rhs = prob.lam ** (-1.0 / k) * (abs(float(psi(np.array([b]))[0])) + _total_variation(psi, a, b))
    return lhs, rhs


def _check_nondegenerate_minimum(prob: OscillatoryProblem, x0: float = 0.0, atol: float = 1e-10) -> None:
    phi = prob.phase
    p0 = np.array([x0])
    if abs(float(phi(p0, 1)[0])) > atol:
        raise ContractError(f"phase'({x0}) = {float(phi(p0, 1)[0]):.3e} is not zero")
    a, b = prob.interval
    xs = np.linspace(a, b, 2001)
    d2 = phi(xs, 2)
    if x0 == 0.0 and abs(float(phi(p0, 0)[0])) > atol:
        raise ContractError("phase(0) must vanish")
    if x0 == 0.0 and not np.all(d2 > 0):
        raise ContractError("phase'' must be positive on the interval")


def leading_term(prob: OscillatoryProblem, x0: float = 0.0) -> complex:
    """One-term stationary phase value at a non-degenerate critical point ``x0``."""
    p0 = np.array([x0])
    d2 = float(prob.phase(p0, 2)[0])
    if d2 == 0.0:
        raise ContractError("degenerate stationary point")
    lam = prob.lam
    a0 = float(prob.amplitude(p0)[0])
    ph0 = float(prob.phase(p0)[0])
    return (
        math.sqrt(2.0 * math.pi / lam)
        / math.sqrt(abs(d2))
        * np.exp(1j * (math.pi / 4.0 * math.copysign(1.0, d2) + lam * ph0))
        * a0
    )


def amplitude_sup_norm(prob: OscillatoryProblem, orders: int = 4, n: int = 4001) -> float:
    a, b = prob.interval
    xs = np.linspace(a, b, n)
    return float(sum(np.max(np.abs(prob.amplitude(xs, k))) for k in range(orders + 1)))


def stationary_phase_leading(prob: OscillatoryProblem, x0: float = 0.0, tol: float = 1e-14) -> StationaryPhaseResult:
    """Leading stationary phase term, numeric remainder and its slope-level bound.

    With ``x0 = 0`` the normalized hypotheses are enforced (phase and its
    derivative vanish at 0, positive curvature).  A nonzero ``x0`` uses the
    general form with the factor ``exp(i lam phase(x0))``.
    """
    _check_nondegenerate_minimum(prob, x0)
    value = eval_I(prob, tol)
    leading = leading_term(prob, x0)
    bound = prob.lam ** -1.5 * amplitude_sup_norm(prob)
    return StationaryPhaseResult(
        leading=complex(leading), remainder=complex(value - leading), remainder_bound=bound, value=value
    )


# --- expansion coefficients ------------------------------------------------

_T_NODES, _T_WEIGHTS = gauss_legendre(24)
_T = 0.5 * (_T_NODES + 1.0)
_TW = 0.5 * _T_WEIGHTS


def _psi_and_mean(phase2, x):
    """``psi(x) = 2 int_0^1 (1-t) phase''(tx) dt`` and ``int_0^1 phase''(tx) dt``."""
    x = np.atleast_1d(x)
    vals = phase2(np.outer(x, _T))
    psi = 2.0 * vals @ (_TW * (1.0 - _T))
    mean = vals @ _TW
    return psi, mean


def _invert_y(phase2, y, tol=1e-15, max_iter=60):
    """Solve ``x * psi(x)**0.5 = y`` by Newton iteration from ``y / sqrt(phase''(0))``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    c0 = float(phase2(np.array([0.0]))[0])
    x = y / math.sqrt(c0)
    for _ in range(max_iter):
        psi, mean = _psi_and_mean(phase2, x)
        if np.any(psi <= 0):
            raise PrecisionError("change of variables left the region psi > 0")
        g = x * np.sqrt(psi) - y
        dg = mean / np.sqrt(psi)
        step = g / dg
        x = x - step
        if np.all(np.abs(step) <= tol * (1.0 + np.abs(x))):
            break
    else:
        raise PrecisionError("Newton inversion of y(x) did not converge", estimate=float(np.max(np.abs(step))))
    psi, mean = _psi_and_mean(phase2, x)
    return x, np.sqrt(psi) / mean


def _fd_weights(order: int, offsets: np.ndarray) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at 0 on ``offsets``."""
    n = len(offsets)
    V = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def richardson_derivative(f, order: int, h0: float = 1e-2, levels: int = 7):
    """Derivative of ``f`` at 0 from central differences at ``h_j = h0 * 2^(order-2) * 2^-j`` plus Richardson.

    Widening the base step with the order keeps rounding (``~ eps / h^order``)
    below the truncation error on the first levels.

    The basic stencil is second-order accurate and symmetric, so the error is
    a series in ``h^2``; a Neville tableau eliminates successive terms and the
    entry whose successive difference is smallest is returned.

    Returns
    -------
    value, error_estimate
    """
    half = (order + 1) // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    w = _fd_weights(order, offsets)
    wsum = float(np.sum(np.abs(w)))
    base, noise = [], []
    for j in range(levels):
        h = h0 * 2.0 ** (max(order, 2) - 2) * 2.0**-j
        vals = f(offsets * h)
        base.append(np.dot(w, vals) / h**order)
        noise.append(4 * np.finfo(float).eps * wsum * float(np.max(np.abs(vals))) / h**order)
    table, tnoise = [base], [noise]
    for m in range(1, levels):
        prev, pn = table[-1], tnoise[-1]
        fac = 4.0**m
        table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0) for i in range(len(prev) - 1)])
        tnoise.append([(fac * pn[i + 1] + pn[i]) / (fac - 1.0) for i in range(len(pn) - 1)])
    # pick the entry with the smallest truncation-plus-rounding estimate
    best, best_err = base[-1], abs(base[-1] - base[-2]) + noise[-1]
    for col, cn in zip(table, tnoise):
        for i in range(1, len(col)):
            err = abs(col[i] - col[i - 1]) + cn[i]
            if err < best_err:
                best, best_err = col[i], err
    return best, best_err


def transformed_amplitude(prob: OscillatoryProblem, x0: float = 0.0):
    """``u(y) = a(x0 + x(y)) x'(y)`` for the phase recentered at ``x0``."""
    phi = prob.phase

    def phase2(x):
        return phi(x0 + x, 2)

    def u(y):
        x, dxdy = _invert_y(phase2, y)
        return prob.amplitude(x0 + x) * dxdy

    return u


def stationary_phase_coefficients(prob: OscillatoryProblem, K: int, x0: float = 0.0, h0: float = 1e-2, levels: int = 7):
    """Coefficients ``a_1..a_K`` of the expansion of the remainder.

    ``I(lam) = sqrt(2 pi / lam) e^{i pi/4} e^{i lam phase(x0)} sum_k a_k lam^-k / k!``
    with ``a_0 = a(x0) / sqrt(phase''(x0))`` and ``a_k = (i/2)^k u^(2k)(0)``.
    Requires ``phase''(x0) > 0``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    d2 = float(prob.phase(np.array([x0]), 2)[0])
    if d2 <= 0:
        raise ContractError("coefficient extraction needs phase''(x0) > 0")
    u = transformed_amplitude(prob, x0)
    coeffs = []
    for k in range(1, K + 1):
        val, err = richardson_derivative(u, 2 * k, h0=h0, levels=levels)
        if not np.isfinite(val) or err > 1e-4 * (1.0 + abs(val)):
            raise PrecisionError(f"extrapolated derivative of order {2 * k} unstable", estimate=err)
        coeffs.append((0.5j) ** k * val)
    return coeffs


def expansion_value(prob: OscillatoryProblem, coeffs, x0: float = 0.0) -> complex:
    """Stationary phase sum through ``len(coeffs)`` correction terms."""
    lam = prob.lam
    p0 = np.array([x0])
    a0 = float(prob.amplitude(p0)[0]) / math.sqrt(float(prob.phase(p0, 2)[0]))
    total = complex(a0)
    for k, ak in enumerate(coeffs, start=1):
        total += ak * lam**-k / math.factorial(k)
    ph0 = float(prob.phase(p0)[0])
    return math.sqrt(2 * math.pi / lam) * np.exp(1j * (math.pi / 4 + lam * ph0)) * total


def stationary_phase_expansion(prob: OscillatoryProblem, K: int, tol: float = 1e-14) -> StationaryPhaseResult:
    """Leading term plus ``K`` corrections; ``corrected_remainder`` is what is left."""
    base = stationary_phase_leading(prob, tol=tol)
    coeffs = stationary_phase_coefficients(prob, K)
    lam = prob.lam
    pref = math.sqrt(2 * math.pi / lam) * np.exp(1j * math.pi / 4)
    terms = [complex(pref * ak * lam**-k / math.factorial(k)) for k, ak in enumerate(coeffs, start=1)]
    base.higher_terms = terms
    base.corrected_remainder = complex(base.remainder - sum(terms))
    return base


def fit_loglog(xs, ys, base: float = 10.0):
    """Least-squares slope of ``log ys`` against ``log xs`` and its standard error."""
    lx = np.log(np.asarray(xs, dtype=float)) / math.log(base)
    ly = np.log(np.asarray(ys, dtype=float)) / math.log(base)
    n = len(lx)
    if n < 2:
        raise ValueError("need at least two points for a slope")
    A = np.vstack([lx, np.ones(n)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    if n > 2:
        resid = ly - (slope * lx + intercept)
        s2 = float(resid @ resid) / (n - 2)
        stderr = math.sqrt(s2 / float(np.sum((lx - lx.mean()) ** 2)))
    else:
        stderr = 0.0
    return slope, stderr, intercept


@dataclass
class LambdaScan:
    lams: list
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)


def remainder_scan(prob: OscillatoryProblem, lams, K: int = 0, tol: float = 1e-15) -> LambdaScan:
    """Tabulate ``|I|``, ``|leading|``, ``|remainder|`` and bound over ``lams``.

    With ``K >= 1`` the remainder after ``K`` correction terms is also fitted.
    Coefficients do not depend on ``lam`` and are extracted once.
    """
    coeffs = stationary_phase_coefficients(prob, K) if K >= 1 else []
    scan = LambdaScan(list(lams))
    rem, rem_k = [], []
    for lam in lams:
        p = prob.with_lam(lam)
        res = stationary_phase_leading(p, tol=tol)
        row = {
            "lambda": lam,
            "abs_I": abs(res.value),
            "abs_leading": abs(res.leading),
            "abs_remainder": abs(res.remainder),
            "bound": res.remainder_bound,
        }
        rem.append(abs(res.remainder))
        if coeffs:
            corrected = res.value - expansion_value(p, coeffs)
            row["abs_corrected_remainder"] = abs(corrected)
            rem_k.append(abs(corrected))
        scan.rows.append(row)
    scan.slopes["remainder"] = fit_loglog(lams, rem)[:2]
    if coeffs:
        scan.slopes[f"remainder_K{K}"] = fit_loglog(lams, rem_k)[:2]
    return scan


def vdc_slope(prob: OscillatoryProblem, k: int, lams, tol: float = 1e-13):
    """Fitted slope of ``|I(lam)|`` in ``lam`` together with per-lam ``(lhs, rhs)``."""
    pairs = [van_der_corput_check(prob.with_lam(lam), k, tol=tol) for lam in lams]
    slope, stderr, _ = fit_loglog(lams, [lhs for lhs, _ in pairs])
    return slope, stderr, pairs
