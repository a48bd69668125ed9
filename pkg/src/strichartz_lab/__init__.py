"""Numerical checks for radial Strichartz estimates and the Bessel asymptotics behind them."""

from .exponents import INF, OPEN, ExponentTuple, parse_exponent
from .quadrature import PrecisionError

__all__ = ["INF", "OPEN", "ExponentTuple", "PrecisionError", "parse_exponent"]
__version__ = "0.1.0"
