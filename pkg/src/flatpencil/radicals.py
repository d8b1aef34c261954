"""Closed coefficient ring for constants such as 2^(1-s*n) * 3^((s*n+1)/2), s = sqrt(3).

A `RadicalUnit` is a finite product of prime powers whose exponents live in
Q(sqrt 3); the empty product is 1.  A `RadicalConstant` is a finite
Q(sqrt3)-linear combination of units.  Addition merges like units and drops
zero coefficients, so the zero constant is the empty combination and
structural equality is semantic equality.

Zero testing treats distinct normalized units as linearly independent over
Q(sqrt 3).  This requires a genuine normal form: p^m for integer m is a
plain rational, and 3^(1/2) is sqrt(3) itself, so constants fold those
overlaps into the coefficient.  Concretely, every stored exponent has its
rational part reduced to [0, 1) -- to [0, 1/2) for the prime 3 -- with the
extracted power multiplied into the Q(sqrt3) coefficient.  After that
reduction, a quotient of distinct units is a rational power product that is
irrational (degree > 2 or transcendental), so distinct units really are
independent over Q(sqrt 3); the numeric oracle re-confirms every zero
verdict the verification pipeline consumes anyway.

Only positive rationals may be raised to irrational exponents (the prime
factorization is what gets exponentiated); negative bases with non-integer
exponents are a hard error so that branch cuts can never enter silently.
"""

from __future__ import annotations

from fractions import Fraction

from .quadfield import QONE, QZERO, SQRT3, QuadExt


def _prime_factors(m: int):
    """Yield (prime, multiplicity) for m >= 1 by trial division."""
    if m < 1:
        raise ValueError("can only factor positive integers")
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            yield p, e
        p += 1 if p == 2 else 2
    if m > 1:
        yield m, 1


class RadicalUnit:
    """A product prod_i p_i^(q_i) with p_i prime and q_i in Q(sqrt 3)."""

    __slots__ = ("exps", "_hash")

    def __init__(self, exps):
        # exps: iterable of (prime, QuadExt); zero exponents dropped, sorted by prime
        cleaned = tuple(sorted((p, q) for p, q in exps if not q.is_zero))
        self.exps = cleaned
        self._hash = None

    @property
    def is_one(self) -> bool:
        return not self.exps

    @staticmethod
    def one() -> "RadicalUnit":
        return _UNIT_ONE

    @staticmethod
    def of_rational(c, q: QuadExt) -> "RadicalUnit":
        """The unit c^q for a positive rational c."""
        c = Fraction(c)
        if c <= 0:
            raise ValueError(f"cannot raise non-positive base {c} to exponent {q}")
        exps: dict[int, QuadExt] = {}
        for p, e in _prime_factors(c.numerator):
            exps[p] = exps.get(p, QZERO) + q * e
        for p, e in _prime_factors(c.denominator):
            exps[p] = exps.get(p, QZERO) - q * e
        return RadicalUnit(exps.items())

    def __mul__(self, other: "RadicalUnit") -> "RadicalUnit":
        if self.is_one:
            return other
        if other.is_one:
            return self
        exps = dict(self.exps)
        for p, q in other.exps:
            cur = exps.get(p)
            exps[p] = q if cur is None else cur + q
        return RadicalUnit(exps.items())

    def pow_quad(self, q: QuadExt) -> "RadicalUnit":
        if q.is_zero:
            return _UNIT_ONE
        if q.is_one:
            return self
        return RadicalUnit((p, e * q) for p, e in self.exps)

    def inverse(self) -> "RadicalUnit":
        return RadicalUnit((p, -e) for p, e in self.exps)

    def sort_key(self):
        return tuple((p, e.a, e.b) for p, e in self.exps)

    def __eq__(self, other):
        return isinstance(other, RadicalUnit) and self.exps == other.exps

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.exps)
            self._hash = h
        return h

    def __str__(self):
        if not self.exps:
            return "1"
        parts = []
        for p, q in self.exps:
            if q.is_integer and q.a >= 0:
                parts.append(f"{p}^{q.as_int()}")
            else:
                parts.append(f"{p}^({q})")
        return "*".join(parts)

    def __repr__(self):
        return f"RadicalUnit({self})"


_UNIT_ONE = RadicalUnit(())


def _canonical_pair(u: RadicalUnit, c: QuadExt) -> tuple[RadicalUnit, QuadExt]:
    """Fold the rational-valued part of a unit into the coefficient.

    Exponent rational parts are reduced into [0, 1), and into [0, 1/2) for
    the prime 3 because 3^(1/2) = sqrt(3) already lives in the coefficient
    field.  This is what makes distinct stored units linearly independent.
    """
    extra = QONE
    newexps = None
    for idx, (p, q) in enumerate(u.exps):
        if p == 3:
            k = (2 * q.a).__floor__()
            if k:
                shift = QuadExt(Fraction(3) ** (k // 2)) * (SQRT3 if k % 2 else QONE)
                extra = extra * shift
                if newexps is None:
                    newexps = list(u.exps)
                newexps[idx] = (p, QuadExt(q.a - Fraction(k, 2), q.b))
        else:
            k = q.a.__floor__()
            if k:
                extra = extra * Fraction(p) ** k
                if newexps is None:
                    newexps = list(u.exps)
                newexps[idx] = (p, QuadExt(q.a - k, q.b))
    if newexps is None:
        return u, c
    return RadicalUnit(newexps), c * extra


class RadicalConstant:
    """A finite sum sum_u coeff_u * u over distinct canonical units, coeff_u in Q(sqrt 3)."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms):
        # terms: iterable of (RadicalUnit, QuadExt); pairs are canonicalized,
        # like units merged, zeros dropped
        merged: dict[RadicalUnit, QuadExt] = {}
        for u, c in terms:
            u, c = _canonical_pair(u, c)
            cur = merged.get(u)
            c = c if cur is None else cur + c
            if c.is_zero:
                merged.pop(u, None)
            else:
                merged[u] = c
        self.terms = merged
        self._hash = None

    # -- constructors ------------------------------------------------------------

    @staticmethod
    def zero() -> "RadicalConstant":
        return _CONST_ZERO

    @staticmethod
    def one() -> "RadicalConstant":
        return _CONST_ONE

    @staticmethod
    def from_quad(q) -> "RadicalConstant":
        q = QuadExt.coerce(q)
        if q.is_zero:
            return _CONST_ZERO
        return RadicalConstant([(_UNIT_ONE, q)])

    @staticmethod
    def from_unit(u: RadicalUnit, coeff=QONE) -> "RadicalConstant":
        return RadicalConstant([(u, QuadExt.coerce(coeff))])

    @staticmethod
    def rational_power(c, q: QuadExt) -> "RadicalConstant":
        """c^q for a positive rational c, kept exact via prime factorization."""
        return RadicalConstant.from_unit(RadicalUnit.of_rational(c, q))

    @staticmethod
    def coerce(x) -> "RadicalConstant":
        if isinstance(x, RadicalConstant):
            return x
        if isinstance(x, (int, Fraction, QuadExt)):
            return RadicalConstant.from_quad(QuadExt.coerce(x))
        raise TypeError(f"cannot interpret {type(x).__name__} as RadicalConstant")

    # -- predicates ----------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms.get(_UNIT_ONE, QZERO).is_one

    def single_term(self):
        """The (unit, coeff) pair if this constant has exactly one term, else None."""
        if len(self.terms) != 1:
            return None
        return next(iter(self.terms.items()))

    def as_quad(self) -> QuadExt | None:
        """The value as a plain Q(sqrt3) scalar, or None if a nontrivial unit occurs."""
        if not self.terms:
            return QZERO
        if len(self.terms) == 1 and _UNIT_ONE in self.terms:
            return self.terms[_UNIT_ONE]
        return None

    # -- ring arithmetic --------------------------------------------------------------

    def __add__(self, other):
        o = RadicalConstant.coerce(other)
        if self.is_zero:
            return o
        if o.is_zero:
            return self
        out = list(self.terms.items())
        out.extend(o.terms.items())
        return RadicalConstant(out)

    __radd__ = __add__

    def __neg__(self):
        return RadicalConstant([(u, -c) for u, c in self.terms.items()])

    def __sub__(self, other):
        return self + (-RadicalConstant.coerce(other))

    def __rsub__(self, other):
        return RadicalConstant.coerce(other) + (-self)

    def __mul__(self, other):
        o = RadicalConstant.coerce(other)
        if self.is_zero or o.is_zero:
            return _CONST_ZERO
        out = []
        for u1, c1 in self.terms.items():
            for u2, c2 in o.terms.items():
                out.append((u1 * u2, c1 * c2))
        return RadicalConstant(out)

    __rmul__ = __mul__

    def scale(self, q) -> "RadicalConstant":
        q = QuadExt.coerce(q)
        if q.is_zero:
            return _CONST_ZERO
        if q.is_one:
            return self
        return RadicalConstant([(u, c * q) for u, c in self.terms.items()])

    def div_quad(self, q) -> "RadicalConstant":
        return self.scale(QuadExt.coerce(q).inverse())

    def div_unit(self, u: RadicalUnit) -> "RadicalConstant":
        inv = u.inverse()
        return RadicalConstant([(t * inv, c) for t, c in self.terms.items()])

    def inverse_single(self) -> "RadicalConstant":
        """Inverse of a single-term constant; general sums are not invertible here."""
        st = self.single_term()
        if st is None:
            raise ValueError("only single-term radical constants can be inverted")
        u, c = st
        return RadicalConstant.from_unit(u.inverse(), c.inverse())

    def pow_quad(self, q: QuadExt) -> "RadicalConstant":
        """(coeff*unit)^q for a single-term constant.

        Integer q works for any coefficient; otherwise the coefficient must
        be a positive rational or a positive rational multiple of sqrt(3)
        (the latter turns into 3^(q/2) times a rational power), which is
        exactly what canonical positive constants look like.
        """
        st = self.single_term()
        if st is None:
            raise ValueError("only single-term radical constants can be exponentiated")
        u, c = st
        if q.is_zero:
            return _CONST_ONE
        if q.is_integer:
            return RadicalConstant.from_unit(u.pow_quad(q), c ** q.as_int())
        if c.is_rational and c.a > 0:
            return RadicalConstant.from_unit(u.pow_quad(q) * RadicalUnit.of_rational(c.a, q))
        if c.a == 0 and c.b > 0:
            unit = (u.pow_quad(q) * RadicalUnit.of_rational(c.b, q)
                    * RadicalUnit.of_rational(3, q / 2))
            return RadicalConstant.from_unit(unit)
        raise ValueError(f"cannot raise coefficient {c} to non-integer exponent {q}")

    # -- structure ------------------------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: t[0].sort_key())

    def leading_term(self):
        """Deterministically chosen term (largest unit key); None for zero."""
        if not self.terms:
            return None
        return max(self.terms.items(), key=lambda t: t[0].sort_key())

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadExt)):
            other = RadicalConstant.coerce(other)
        if not isinstance(other, RadicalConstant):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(frozenset((u, c) for u, c in self.terms.items()))
            self._hash = h
        return h

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for u, c in self.sorted_terms():
            if u.is_one:
                parts.append(str(c))
            elif c.is_one:
                parts.append(str(u))
            else:
                parts.append(f"({c})*{u}")
        return " + ".join(parts)

    def __repr__(self):
        return f"RadicalConstant({self})"


_CONST_ZERO = RadicalConstant(())
_CONST_ONE = RadicalConstant([(_UNIT_ONE, QONE)])


def try_quad_ratio(x: RadicalConstant, y: RadicalConstant) -> QuadExt | None:
    """The scalar q with x = q*y, if one exists in Q(sqrt 3)."""
    if y.is_zero:
        return None
    if x.is_zero:
        return QZERO
    if set(x.terms) != set(y.terms):
        return None
    ratio = None
    for u, cy in y.terms.items():
        r = x.terms[u] / cy
        if ratio is None:
            ratio = r
        elif ratio != r:
            return None
    return ratio
