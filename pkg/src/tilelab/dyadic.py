"""Exact dyadic rational numbers.

A dyadic rational is ``num * 2**-exp`` with integer ``num`` and non-negative
integer ``exp``.  Values are kept normalized: ``exp`` is minimal, i.e. ``num``
is odd or ``(num, exp) == (0, 0)``.  Dyadics are closed under addition,
subtraction, multiplication and halving, which is all the geometry kernel
needs; comparisons and hashing are exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Number = Union["Dyadic", int]


class Dyadic:
    __slots__ = ("num", "exp")

    def __init__(self, num: int, exp: int = 0):
        if exp < 0:
            num <<= -exp
            exp = 0
        while exp > 0 and num % 2 == 0:
            # strip factors of two; terminates quickly because exp bounds the loop
            num //= 2
            exp -= 1
        if num == 0:
            exp = 0
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    def __setattr__(self, *a):
        raise AttributeError("Dyadic is immutable")

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def coerce(x: Number) -> "Dyadic":
        if isinstance(x, Dyadic):
            return x
        if isinstance(x, int):
            return Dyadic(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to Dyadic")

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: Number) -> "Dyadic":
        o = Dyadic.coerce(other)
        e = max(self.exp, o.exp)
        return Dyadic((self.num << (e - self.exp)) + (o.num << (e - o.exp)), e)

    __radd__ = __add__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.num, self.exp)

    def __sub__(self, other: Number) -> "Dyadic":
        return self + (-Dyadic.coerce(other))

    def __rsub__(self, other: Number) -> "Dyadic":
        return Dyadic.coerce(other) + (-self)

    def __mul__(self, other: Number) -> "Dyadic":
        o = Dyadic.coerce(other)
        return Dyadic(self.num * o.num, self.exp + o.exp)

    __rmul__ = __mul__

    def halve(self) -> "Dyadic":
        return Dyadic(self.num, self.exp + 1)

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.num), self.exp)

    # -- comparison -----------------------------------------------------------

    def _cmp(self, other: Number) -> int:
        o = Dyadic.coerce(other)
        e = max(self.exp, o.exp)
        a = self.num << (e - self.exp)
        b = o.num << (e - o.exp)
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other: Number) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: Number) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: Number) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: Number) -> bool:
        return self._cmp(other) >= 0

    def __hash__(self) -> int:
        return hash(Fraction(self.num, 1 << self.exp))

    # -- conversions ----------------------------------------------------------

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __float__(self) -> float:
        return self.num / (1 << self.exp)

    def as_pair(self) -> list:
        """JSON form ``[num, exp]``."""
        return [self.num, self.exp]

    @staticmethod
    def from_pair(pair) -> "Dyadic":
        num, exp = pair
        return Dyadic(int(num), int(exp))

    def __repr__(self) -> str:
        if self.exp == 0:
            return f"Dyadic({self.num})"
        return f"Dyadic({self.num}, {self.exp})"

    def __str__(self) -> str:
        if self.exp == 0:
            return str(self.num)
        return f"{self.num}/2^{self.exp}"


ZERO = Dyadic(0)
ONE = Dyadic(1)
HALF = Dyadic(1, 1)


def dmin(*xs: Number) -> Dyadic:
    return min((Dyadic.coerce(x) for x in xs), key=lambda d: d.as_fraction())


def dmax(*xs: Number) -> Dyadic:
    return max((Dyadic.coerce(x) for x in xs), key=lambda d: d.as_fraction())
