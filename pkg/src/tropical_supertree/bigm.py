"""Exact linear polynomials ``a + b*M`` in a formal parameter ``M``.

Values are ordered by their behaviour as ``M`` grows without bound: the
slope decides first, the constant breaks ties.  Every computation that
only adds, subtracts, rescales by rationals and compares therefore
produces the answer valid for all sufficiently large ``M`` at once.

Rationals are :class:`fractions.Fraction`, which is always kept in lowest
terms with a positive denominator.
"""

from __future__ import annotations

import re
from decimal import Decimal, ROUND_HALF_EVEN, localcontext
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Union

__all__ = [
    "BigM",
    "Infinity",
    "INF",
    "Rationalish",
    "ZERO",
    "M",
    "as_bigm",
    "parse_bigm",
    "parse_rational",
    "bigm_min",
    "bigm_max",
    "crossing_point",
    "format_decimal",
]

Rationalish = Union[int, Fraction]

_NUM = r"\d+(?:/\d+)?"
_CONST_RE = re.compile(rf"^[+-]?{_NUM}$")
_AFFINE_RE = re.compile(
    rf"^(?:(?P<a>[+-]?{_NUM})(?P<s>[+-])|(?P<s2>[+-]?))(?:(?P<c>{_NUM})\*)?M$"
)


def parse_rational(text: str) -> Fraction:
    """Parse ``p`` or ``p/q`` (optionally signed) into an exact rational."""
    text = text.strip()
    if not _CONST_RE.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in {text!r}") from None


@total_ordering
class BigM:
    """Immutable scalar ``const + slope*M`` with the eventual order."""

    __slots__ = ("const", "slope")

    def __init__(self, const: Rationalish = 0, slope: Rationalish = 0):
        object.__setattr__(self, "const", Fraction(const))
        object.__setattr__(self, "slope", Fraction(slope))

    def __setattr__(self, name, value):
        raise AttributeError("BigM is immutable")

    def __reduce__(self):
        return (BigM, (self.const, self.slope))

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return BigM(self.const + other.const, self.slope + other.slope)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return BigM(self.const - other.const, self.slope - other.slope)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return BigM(-self.const, -self.slope)

    def __pos__(self):
        return self

    def __mul__(self, c):
        # only rational scaling; products of two M-terms leave the ring
        if isinstance(c, BigM):
            if c.slope == 0:
                c = c.const
            elif self.slope == 0:
                return c * self.const
            else:
                raise TypeError("product of two non-constant BigM values is not linear in M")
        if not isinstance(c, (int, Fraction)):
            return NotImplemented
        return BigM(self.const * c, self.slope * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, BigM):
            if c.slope != 0:
                raise TypeError("division by a non-constant BigM value")
            c = c.const
        if not isinstance(c, (int, Fraction)):
            return NotImplemented
        return BigM(self.const / c, self.slope / c)

    def scale(self, c: Rationalish) -> "BigM":
        return self * Fraction(c)

    # -- order ------------------------------------------------------------
    def _key(self):
        return (self.slope, self.const)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.slope == other.slope and self.const == other.const

    def __lt__(self, other):
        if isinstance(other, Infinity):
            return True
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._key() < other._key()

    def __hash__(self):
        if self.slope == 0:
            return hash(self.const)
        return hash((self.const, self.slope))

    def compare(self, other) -> int:
        """Return -1, 0 or 1 as ``self`` is eventually below, equal to or above ``other``."""
        other = _coerce(other)
        a, b = self._key(), other._key()
        return (a > b) - (a < b)

    def sign(self) -> int:
        return self.compare(ZERO)

    # -- numeric bridge ---------------------------------------------------
    @property
    def is_constant(self) -> bool:
        return self.slope == 0

    def eval(self, m0: Rationalish) -> Fraction:
        """Substitute the number ``m0`` for ``M``."""
        return self.const + self.slope * Fraction(m0)

    def at(self, m0: Rationalish) -> "BigM":
        return BigM(self.eval(m0))

    # -- text -------------------------------------------------------------
    def __str__(self):
        if self.slope == 0:
            return str(self.const)
        sign = "-" if self.slope < 0 else "+"
        return f"{self.const}{sign}{abs(self.slope)}*M"

    def __repr__(self):
        return f"BigM({self})"


class Infinity:
    """The ``+inf`` sentinel used for absent difference constraints.

    It absorbs addition and is above every :class:`BigM`, but it is kept
    out of BigM arithmetic results on purpose.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (Infinity, ())

    def __add__(self, other):
        if isinstance(other, (BigM, Infinity, int, Fraction)):
            return self
        return NotImplemented

    __radd__ = __add__

    def __eq__(self, other):
        return isinstance(other, Infinity)

    def __hash__(self):
        return hash("BigM-infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, Infinity)

    def __gt__(self, other):
        return not isinstance(other, Infinity)

    def __ge__(self, other):
        return True

    def __str__(self):
        return "inf"

    __repr__ = __str__


INF = Infinity()


def _coerce(x):
    if isinstance(x, BigM):
        return x
    if isinstance(x, (int, Fraction)):
        return BigM(x)
    return NotImplemented


def as_bigm(x) -> BigM:
    """Accept a BigM, an int, a Fraction or a literal string."""
    if isinstance(x, BigM):
        return x
    if isinstance(x, (int, Fraction)):
        return BigM(x)
    if isinstance(x, str):
        return parse_bigm(x)
    raise TypeError(f"cannot interpret {x!r} as BigM")


def parse_bigm(text: str) -> BigM:
    """Parse ``a``, ``a/b``, ``a+c*M``, ``a/b-c/d*M``; also ``M``, ``-M``, ``c*M``."""
    s = text.strip()
    if _CONST_RE.match(s):
        return BigM(parse_rational(s))
    m = _AFFINE_RE.match(s)
    if not m:
        raise ValueError(f"not a BigM literal: {text!r}")
    const = parse_rational(m["a"]) if m["a"] is not None else Fraction(0)
    sign = m["s"] if m["a"] is not None else m["s2"]
    slope = parse_rational(m["c"]) if m["c"] is not None else Fraction(1)
    if sign == "-":
        slope = -slope
    return BigM(const, slope)


M = BigM(0, 1)
ZERO = BigM(0, 0)


def bigm_min(values: Iterable[BigM]) -> BigM:
    values = list(values)
    if not values:
        raise ValueError("min of an empty sequence")
    return min(values)


def bigm_max(values: Iterable[BigM]) -> BigM:
    values = list(values)
    if not values:
        raise ValueError("max of an empty sequence")
    return max(values)


def crossing_point(x: BigM, y: BigM) -> Fraction | None:
    """The value of ``M`` where ``x`` and ``y`` coincide, or None if they never cross."""
    ds = x.slope - y.slope
    if ds == 0:
        return None
    return (y.const - x.const) / ds


def _decimal(q: Fraction, digits: int) -> str:
    with localcontext() as ctx:
        ctx.prec = max(50, digits + len(str(abs(q.numerator))) + 5)
        d = Decimal(q.numerator) / Decimal(q.denominator)
        quant = Decimal(1).scaleb(-digits)
        return str(d.quantize(quant, rounding=ROUND_HALF_EVEN))


def format_decimal(x: BigM, digits: int) -> str:
    """Render with ``digits`` decimal places; output only, never parsed back."""
    if x.slope == 0:
        return _decimal(x.const, digits)
    sign = "-" if x.slope < 0 else "+"
    return f"{_decimal(x.const, digits)}{sign}{_decimal(abs(x.slope), digits)}*M"
