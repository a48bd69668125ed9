"""Admissibility conditions and exponent formulas.

Every exponent is an exact :class:`fractions.Fraction` or the sentinel
:data:`INF`.  Reciprocals go through :func:`recip`, which maps ``INF`` to an
exact zero, so no boundary case is ever decided by a float comparison.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class _Infinity:
    """Exact +infinity for Lebesgue exponents."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("strichartz_lab.INF")

    def __float__(self) -> float:
        return float("inf")


INF = _Infinity()

Exponent = Union[Fraction, _Infinity]

OPEN = "open"


def as_exponent(value) -> Exponent:
    """Coerce ``value`` to an exact exponent.

    Accepts ints, Fractions, ``INF``, float infinity and strings such as
    ``"10/3"``, ``"4"``, ``"inf"`` or ``"2.5"``.  Finite floats are converted
    through their decimal string so ``2.5`` becomes ``5/2``.
    """
    if value is INF:
        return INF
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value == float("inf"):
            return INF
        if value != value or value == float("-inf"):
            raise ValueError(f"not an exponent: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return parse_exponent(value)
    raise TypeError(f"cannot interpret {value!r} as an exponent")


_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def parse_exponent(text: str) -> Exponent:
    """Parse ``"inf"``, an integer, a decimal or a single ``a/b`` fraction."""
    s = text.strip().lower()
    if s in ("inf", "infinity", "oo", "+inf"):
        return INF
    if "/" in s:
        num, sep, den = s.partition("/")
        if not sep or "/" in den or not _NUMBER.match(num) or not _NUMBER.match(den):
            raise ValueError(f"malformed exponent {text!r}")
        d = Fraction(den)
        if d == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(num) / d
    if not _NUMBER.match(s):
        raise ValueError(f"malformed exponent {text!r}")
    return Fraction(s)


def recip(e: Exponent) -> Fraction:
    """Exact reciprocal; ``1/INF == 0``."""
    if e is INF:
        return Fraction(0)
    return 1 / e


def fmt_exponent(e: Exponent) -> str:
    return "inf" if e is INF else str(e)


@dataclass(frozen=True)
class ExponentTuple:
    """Coordinates ``(d, a, q, p, s)`` of an estimate.

    ``d`` is the dimension, ``a`` the dispersion order, ``q``, ``p`` and ``s``
    the time, radial and angular Lebesgue exponents.
    """

    d: int
    a: Fraction = Fraction(2)
    q: Exponent = Fraction(2)
    p: Exponent = Fraction(2)
    s: Exponent = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "a", as_exponent(self.a))
        for name in ("q", "p", "s"):
            object.__setattr__(self, name, as_exponent(getattr(self, name)))
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if self.a is INF or self.a <= 0:
            raise ValueError(f"dispersion order must be positive and finite, got {self.a}")
        for name in ("q", "p", "s"):
            v = getattr(self, name)
            if v is not INF and v < 2:
                raise ValueError(f"{name} must lie in [2, inf], got {v}")

    @property
    def inv_q(self) -> Fraction:
        return recip(self.q)

    @property
    def inv_p(self) -> Fraction:
        return recip(self.p)

    @property
    def inv_s(self) -> Fraction:
        return recip(self.s)

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "a": fmt_exponent(self.a),
            "q": fmt_exponent(self.q),
            "p": fmt_exponent(self.p),
            "s": fmt_exponent(self.s),
        }


_HALF = Fraction(1, 2)


def radial_endpoint(d: int) -> Fraction:
    """The excluded radial exponent ``(4d-2)/(2d-3)``."""
    return Fraction(4 * d - 2, 2 * d - 3)


def _in_range(e: ExponentTuple) -> bool:
    # q, p >= 2 already enforced by ExponentTuple; kept for clarity at call sites
    return e.inv_q <= _HALF and e.inv_p <= _HALF


def wa_margin(e: ExponentTuple) -> Fraction:
    return Fraction(e.d - 1, 2) * (_HALF - e.inv_p) - e.inv_q


def sa_margin(e: ExponentTuple) -> Fraction:
    return Fraction(e.d, 2) * (_HALF - e.inv_p) - e.inv_q


def rwa_margin(e: ExponentTuple) -> Fraction:
    return (e.d - 1) * (_HALF - e.inv_p) - e.inv_q


def rsa_margin(e: ExponentTuple) -> Fraction:
    return (e.d - _HALF) * (_HALF - e.inv_p) - e.inv_q


def wa_admissible(e: ExponentTuple) -> bool:
    """Wave admissibility (non-strict), excluding ``(q, p, d) = (2, inf, 3)``."""
    if not _in_range(e):
        return False
    if e.q == 2 and e.p is INF and e.d == 3:
        return False
    return wa_margin(e) >= 0


def sa_admissible(e: ExponentTuple) -> bool:
    """Schrodinger admissibility (non-strict), excluding ``(q, p, d) = (2, inf, 2)``."""
    if not _in_range(e):
        return False
    if e.q == 2 and e.p is INF and e.d == 2:
        return False
    return sa_margin(e) >= 0


def rwa_admissible(e: ExponentTuple) -> bool:
    """Radial wave admissibility: strict inequality, or ``(q, p) = (inf, 2)``."""
    if not _in_range(e):
        return False
    if e.q is INF and e.p == 2:
        return True
    return rwa_margin(e) > 0


def rsa_admissible(e: ExponentTuple) -> bool:
    """Radial Schrodinger admissibility (non-strict), minus the radial endpoint."""
    if not _in_range(e):
        return False
    if e.q == 2 and e.p == radial_endpoint(e.d):
        return False
    return rsa_margin(e) >= 0


def _check_dispersion_power(e: ExponentTuple) -> None:
    if e.a <= 1:
        raise ValueError(f"the averaged estimate is stated for a > 1, got a = {e.a}")


def thm11_admissible(e: ExponentTuple) -> bool:
    """Range on which the spherically averaged estimate is proved (``a > 1``).

    For ``d = 2`` this is the strict condition with coefficient ``3/2`` (plus
    the pair ``(inf, 2)``); for ``d >= 3`` it is :func:`rsa_admissible`.
    """
    _check_dispersion_power(e)
    if e.d == 2:
        if not _in_range(e):
            return False
        if e.q is INF and e.p == 2:
            return True
        return rsa_margin(e) > 0
    return rsa_admissible(e)


def thm11_status(e: ExponentTuple):
    """Three-state verdict: ``True``, ``False`` or :data:`OPEN`.

    The unresolved cases are the radial endpoint ``(2, (4d-2)/(2d-3))`` for
    ``d >= 3`` and the whole line ``1/q = (3/2)(1/2 - 1/p)`` for ``d = 2``.
    """
    if thm11_admissible(e):
        return True
    if not _in_range(e):
        return False
    if e.d == 2:
        if rsa_margin(e) == 0:
            return OPEN
        return False
    if e.q == 2 and e.p == radial_endpoint(e.d):
        return OPEN
    return False


def beta_bounds(d: int) -> tuple[Fraction, Exponent]:
    """Radial exponent range ``((4d-2)/(2d-3), 2d/(d-2))``; upper is ``INF`` for d = 2."""
    lo = radial_endpoint(d)
    hi = INF if d == 2 else Fraction(2 * d, d - 2)
    return lo, hi


def beta_of_p(d: int, p) -> Fraction:
    """Sharp angular exponent ``2p(d-1) / ((4-p)d + 2p - 2)``.

    The closed interval between the two radial bounds is accepted so that the
    endpoint values can be evaluated exactly.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    p = as_exponent(p)
    lo, hi = beta_bounds(d)
    if p is INF or p < lo or (hi is not INF and p > hi):
        raise ValueError(
            f"p = {fmt_exponent(p)} outside [{lo}, {fmt_exponent(hi)}] for d = {d}"
        )
    return Fraction(2 * (d - 1)) * p / ((4 - p) * d + 2 * p - 2)


def knapp_exponent(e: ExponentTuple) -> Fraction:
    """Exact value of ``d/2 - 2/q - (2d-1)/p + (d-1)/s``."""
    return Fraction(e.d, 2) - 2 * e.inv_q - (2 * e.d - 1) * e.inv_p + (e.d - 1) * e.inv_s


def knapp_predicted_slope(e: ExponentTuple) -> float:
    """Predicted log-log slope of the Knapp ratio in the cap width.

    Nonnegative exactly when the necessary condition for the mixed
    angular-radial estimate holds.
    """
    return float(knapp_exponent(e))


CONDITIONS = {
    "WA": (wa_admissible, wa_margin),
    "SA": (sa_admissible, sa_margin),
    "RWA": (rwa_admissible, rwa_margin),
    "RSA": (rsa_admissible, rsa_margin),
}


def condition_report(e: ExponentTuple) -> list[dict]:
    """One record per condition: ``{condition, tuple, result, boundary_distance}``.

    ``boundary_distance`` is the exact signed margin of the condition's main
    inequality (right-hand side minus ``1/q``) rendered as a fraction string.
    """
    rows = []
    for name, (pred, margin) in CONDITIONS.items():
        rows.append(
            {
                "condition": name,
                "tuple": e.as_dict(),
                "result": pred(e),
                "boundary_distance": str(margin(e)),
            }
        )
    if e.a > 1:
        status = thm11_status(e)
        rows.append(
            {
                "condition": "THM11",
                "tuple": e.as_dict(),
                "result": status,
                "boundary_distance": str(rsa_margin(e)),
            }
        )
    rows.append(
        {
            "condition": "KNAPP",
            "tuple": e.as_dict(),
            "result": knapp_exponent(e) >= 0,
            "boundary_distance": str(knapp_exponent(e)),
        }
    )
    return rows
