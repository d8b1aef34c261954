"""Exact arithmetic over the real quadratic field Q(sqrt 3).

Rationals are `fractions.Fraction` (arbitrary precision, always reduced to
lowest terms with positive denominator), so the only type defined here is
the field element a + b*sqrt(3).  All order decisions downstream (signs of
exponents, nondegeneracy of resonance denominators) reduce to `QuadExt.sign`,
which compares a^2 against 3*b^2 with integer arithmetic; floating point
enters only through `to_real`, which feeds the numeric cross-check oracle.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

Rational = Fraction


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


class QuadExt:
    """An element a + b*sqrt(3) of Q(sqrt 3).

    Values are immutable; equality is componentwise, which coincides with
    equality under the real embedding because sqrt(3) is irrational.
    """

    __slots__ = ("a", "b", "_hash")

    def __init__(self, a=0, b=0):
        self.a = _as_fraction(a)
        self.b = _as_fraction(b)
        self._hash = None

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def coerce(x) -> "QuadExt":
        if isinstance(x, QuadExt):
            return x
        if isinstance(x, (int, Fraction)):
            return QuadExt(x)
        raise TypeError(f"cannot interpret {type(x).__name__} as QuadExt")

    # -- predicates ------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.a and not self.b

    @property
    def is_one(self) -> bool:
        return self.a == 1 and not self.b

    @property
    def is_rational(self) -> bool:
        return not self.b

    @property
    def is_integer(self) -> bool:
        return not self.b and self.a.denominator == 1

    def as_int(self) -> int:
        if not self.is_integer:
            raise ValueError(f"{self} is not an integer")
        return int(self.a)

    # -- field arithmetic -------------------------------------------------------

    def __add__(self, other):
        o = QuadExt.coerce(other)
        return QuadExt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = QuadExt.coerce(other)
        return QuadExt(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return QuadExt.coerce(other) - self

    def __neg__(self):
        return QuadExt(-self.a, -self.b)

    def __mul__(self, other):
        o = QuadExt.coerce(other)
        # (a + b s)(c + d s) = ac + 3bd + (ad + bc) s   with s^2 = 3
        return QuadExt(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadExt":
        return QuadExt(self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - 3 * self.b * self.b

    def inverse(self) -> "QuadExt":
        if self.is_zero:
            raise ZeroDivisionError("division by zero in Q(sqrt 3)")
        n = self.norm()
        return QuadExt(self.a / n, -self.b / n)

    def __truediv__(self, other):
        return self * QuadExt.coerce(other).inverse()

    def __rtruediv__(self, other):
        return QuadExt.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("QuadExt powers must be integers")
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadExt(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- order under the real embedding ------------------------------------------

    def sign(self) -> int:
        """Sign of a + b*sqrt(3), decided exactly.

        Mixed-sign components compare a^2 with 3 b^2; the tie a^2 = 3 b^2 is
        impossible for nonzero rationals since sqrt(3) is irrational.
        """
        a, b = self.a, self.b
        if not b:
            return -1 if a < 0 else (1 if a > 0 else 0)
        if not a:
            return -1 if b < 0 else 1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        bigger_a = a * a > 3 * b * b
        if a > 0:  # b < 0
            return 1 if bigger_a else -1
        return -1 if bigger_a else 1

    def __lt__(self, other):
        return (self - QuadExt.coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - QuadExt.coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - QuadExt.coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - QuadExt.coerce(other)).sign() >= 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadExt):
            return self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.a, self.b))
            self._hash = h
        return h

    # -- numeric embedding ---------------------------------------------------------

    def to_real(self, precision_bits: int = 64) -> mpmath.mpf:
        """The real value at `precision_bits` of working precision.

        Computed with 64 guard bits and rounded once at the end, which keeps
        the result within 2 ulp of the true value.
        """
        if precision_bits < 64:
            raise ValueError("precision_bits must be at least 64")
        with mpmath.workprec(precision_bits + 64):
            v = (mpmath.mpf(self.a.numerator) / self.a.denominator
                 + mpmath.mpf(self.b.numerator) / self.b.denominator * mpmath.sqrt(3))
        with mpmath.workprec(precision_bits):
            return +v

    # -- display ----------------------------------------------------------------------

    def __str__(self):
        a, b = self.a, self.b
        if not b:
            return str(a)
        if b == 1:
            bs = "r3"
        elif b == -1:
            bs = "-r3"
        else:
            bs = f"{b}*r3"
        if not a:
            return bs
        return f"{a}+{bs}" if b > 0 else f"{a}{bs}"

    def __repr__(self):
        return f"QuadExt({self.a!r}, {self.b!r})"


def quad(a, b=0) -> QuadExt:
    return QuadExt(a, b)


QZERO = QuadExt(0)
QONE = QuadExt(1)
SQRT3 = QuadExt(0, 1)
