"""Canonical generalized polynomials with exponents in Q(sqrt 3).

`GenExpr` is a finite sum of terms  coeff * prod_v v^(e_v)  where the
coefficients are `RadicalConstant`s and the exponents are `QuadExt`s.  Terms
with equal exponent tuples are merged and zero coefficients dropped, so
structural equality of the term maps is semantic equality.  `RatExpr` is a
quotient of two such expressions, compared by cross-multiplication.

Variables live in a `VarTable` which records, per variable:

* a positivity flag -- only positivity-flagged variables may carry
  non-integer exponents (the chart is restricted to the region where the
  variable is positive, so irrational powers are single-valued);
* a kind -- ordinary chart variable, jet variable, or pencil parameter.

Jet variables form a chain f, fp, fpp attached to a designated chart
variable and represent an unknown function of it together with its first
two derivatives: differentiation maps f -> fp -> fpp and refuses to go
deeper.  The pencil parameter behaves like an ordinary sign-indefinite
variable (integer exponents only) and is never differentiated.

Only monomial substitutions are supported for irrational exponents;
polynomial images are allowed when every occurrence of the replaced
variable has a small integer exponent.  This covers every coordinate change
the construction needs; general composition with irrational exponents has
no closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .quadfield import QONE, QZERO, QuadExt
from .radicals import RadicalConstant

CHART = "chart"
JET = "jet"
PENCIL = "pencil"


class LogarithmicIntegral(ValueError):
    """Raised when term-wise integration hits an exponent of -1."""


class JetDepthExceeded(ValueError):
    """Raised when differentiation would need a jet variable beyond order 2."""


@dataclass(frozen=True)
class Var:
    name: str
    positive: bool = False
    kind: str = CHART
    base: str | None = None  # jet variables: the chart variable they depend on
    order: int = 0           # jet variables: derivative order


@dataclass(frozen=True)
class VarTable:
    vars: tuple[Var, ...]

    def __post_init__(self):
        index = {v.name: i for i, v in enumerate(self.vars)}
        if len(index) != len(self.vars):
            raise ValueError("duplicate variable names")
        object.__setattr__(self, "_index", index)

    @staticmethod
    def chart(*names: str, positive: tuple[str, ...] = ()) -> "VarTable":
        return VarTable(tuple(Var(n, positive=(n in positive)) for n in names))

    def extended(self, *extra: Var) -> "VarTable":
        return VarTable(self.vars + tuple(extra))

    def with_jets(self, base: str, names: tuple[str, str, str] = ("f", "fp", "fpp")) -> "VarTable":
        self.index(base)
        jets = tuple(Var(n, kind=JET, base=base, order=k) for k, n in enumerate(names))
        return self.extended(*jets)

    def with_pencil(self, name: str = "lam") -> "VarTable":
        return self.extended(Var(name, kind=PENCIL))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.vars)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"no variable {name!r} in chart {self.names}") from None

    def var(self, name: str) -> Var:
        return self.vars[self.index(name)]

    def jet_successor(self, v: Var) -> Var | None:
        for w in self.vars:
            if w.kind == JET and w.base == v.base and w.order == v.order + 1:
                return w
        return None

    def chart_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.vars if v.kind == CHART)

    def __len__(self):
        return len(self.vars)


def _exp_sort_key(exps):
    return tuple((e.a, e.b) for e in exps)


class GenExpr:
    """A canonical sum of (RadicalConstant coefficient) * monomial terms."""

    __slots__ = ("table", "terms")

    def __init__(self, table: VarTable, terms: dict):
        self.table = table
        self.terms = terms

    # -- constructors ----------------------------------------------------------

    @classmethod
    def _collect(cls, table, items) -> "GenExpr":
        merged: dict[tuple, RadicalConstant] = {}
        for exps, coeff in items:
            cur = merged.get(exps)
            coeff = coeff if cur is None else cur + coeff
            if coeff.is_zero:
                merged.pop(exps, None)
            else:
                merged[exps] = coeff
        return cls(table, merged)

    @classmethod
    def zero(cls, table: VarTable) -> "GenExpr":
        return cls(table, {})

    @classmethod
    def const(cls, table: VarTable, c) -> "GenExpr":
        c = RadicalConstant.coerce(c)
        if c.is_zero:
            return cls.zero(table)
        return cls(table, {(QZERO,) * len(table): c})

    @classmethod
    def monomial(cls, table: VarTable, coeff, exps: dict[str, QuadExt]) -> "GenExpr":
        coeff = RadicalConstant.coerce(coeff)
        if coeff.is_zero:
            return cls.zero(table)
        vec = [QZERO] * len(table)
        for name, e in exps.items():
            e = QuadExt.coerce(e)
            i = table.index(name)
            v = table.vars[i]
            if not v.positive and not e.is_integer:
                raise ValueError(
                    f"variable {name!r} is not positivity-flagged; exponent {e} must be an integer")
            vec[i] = e
        return cls(table, {tuple(vec): coeff})

    @classmethod
    def variable(cls, table: VarTable, name: str, exp=QONE) -> "GenExpr":
        return cls.monomial(table, 1, {name: QuadExt.coerce(exp)})

    def _coerce_operand(self, other):
        if isinstance(other, GenExpr):
            if other.table != self.table:
                raise ValueError("operands live on different charts")
            return other
        if isinstance(other, (int, Fraction, QuadExt, RadicalConstant)):
            return GenExpr.const(self.table, other)
        return None

    # -- predicates and structure ------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        if not self.terms:
            return True
        if len(self.terms) != 1:
            return False
        exps = next(iter(self.terms))
        return all(e.is_zero for e in exps)

    def constant_value(self) -> RadicalConstant:
        if not self.terms:
            return RadicalConstant.zero()
        if not self.is_constant():
            raise ValueError("expression is not constant")
        return next(iter(self.terms.values()))

    def single_term(self):
        if len(self.terms) != 1:
            return None
        return next(iter(self.terms.items()))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _exp_sort_key(t[0]), reverse=True)

    def leading_term(self):
        if not self.terms:
            return None
        return max(self.terms.items(), key=lambda t: _exp_sort_key(t[0]))

    def min_exponents(self) -> list[QuadExt]:
        if not self.terms:
            raise ValueError("zero expression has no exponent range")
        mins = None
        for exps in self.terms:
            if mins is None:
                mins = list(exps)
            else:
                for i, e in enumerate(exps):
                    if e < mins[i]:
                        mins[i] = e
        return mins

    def exponents_of(self, name: str) -> set[QuadExt]:
        i = self.table.index(name)
        return {exps[i] for exps in self.terms}

    # -- arithmetic ---------------------------------------------------------------------

    def __add__(self, other):
        o = self._coerce_operand(other)
        if o is None:
            return NotImplemented
        if not o.terms:
            return self
        if not self.terms:
            return o
        out = dict(self.terms)
        for exps, c in o.terms.items():
            cur = out.get(exps)
            c = c if cur is None else cur + c
            if c.is_zero:
                out.pop(exps, None)
            else:
                out[exps] = c
        return GenExpr(self.table, out)

    __radd__ = __add__

    def __neg__(self):
        return GenExpr(self.table, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce_operand(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce_operand(other)
        if o is None:
            return NotImplemented
        if not self.terms or not o.terms:
            return GenExpr.zero(self.table)
        out: dict[tuple, RadicalConstant] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                cur = out.get(exps)
                c = c if cur is None else cur + c
                if c.is_zero:
                    out.pop(exps, None)
                else:
                    out[exps] = c
        return GenExpr(self.table, out)

    __rmul__ = __mul__

    def scale(self, c) -> "GenExpr":
        c = RadicalConstant.coerce(c)
        if c.is_zero:
            return GenExpr.zero(self.table)
        if c.is_one:
            return self
        return GenExpr._collect(self.table, ((e, k * c) for e, k in self.terms.items()))

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("GenExpr powers must be integers")
        if k < 0:
            st = self.single_term()
            if st is None:
                raise ValueError("negative powers require a single-term expression")
            exps, c = st
            inv = GenExpr(self.table, {tuple(-e for e in exps): c.inverse_single()})
            return inv ** (-k)
        out = GenExpr.const(self.table, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadExt, RadicalConstant)):
            other = GenExpr.const(self.table, other)
        if not isinstance(other, GenExpr):
            return NotImplemented
        return self.table == other.table and self.terms == other.terms

    __hash__ = None

    # -- calculus --------------------------------------------------------------------------

    def diff(self, name: str) -> "GenExpr":
        """Partial derivative; jet variables obey f -> fp -> fpp chain rule."""
        i = self.table.index(name)
        v = self.table.vars[i]
        if v.kind != CHART:
            raise ValueError(f"cannot differentiate with respect to {v.kind} variable {name!r}")
        jet_cols = [(j, w) for j, w in enumerate(self.table.vars)
                    if w.kind == JET and w.base == name]
        items = []
        for exps, c in self.terms.items():
            e = exps[i]
            if not e.is_zero:
                newe = list(exps)
                newe[i] = e - QONE
                items.append((tuple(newe), c.scale(e)))
            for j, w in jet_cols:
                m = exps[j]
                if m.is_zero:
                    continue
                succ = self.table.jet_successor(w)
                if succ is None:
                    raise JetDepthExceeded(
                        f"derivative of jet variable {w.name!r} exceeds the stored chain")
                k = self.table.index(succ.name)
                newe = list(exps)
                newe[j] = m - QONE
                newe[k] = newe[k] + QONE
                items.append((tuple(newe), c.scale(m)))
        return GenExpr._collect(self.table, items)

    def integrate(self, name: str) -> "GenExpr":
        """Term-wise antiderivative with zero constant of integration."""
        i = self.table.index(name)
        v = self.table.vars[i]
        if v.kind != CHART:
            raise ValueError(f"cannot integrate with respect to {v.kind} variable {name!r}")
        jet_cols = [j for j, w in enumerate(self.table.vars)
                    if w.kind == JET and w.base == name]
        items = []
        minus_one = QuadExt(-1)
        for exps, c in self.terms.items():
            if any(not exps[j].is_zero for j in jet_cols):
                raise ValueError(
                    f"cannot integrate a term containing jet symbols of {name!r}")
            e = exps[i]
            if e == minus_one:
                raise LogarithmicIntegral(
                    f"term with exponent -1 in {name!r} has no power-law antiderivative: "
                    f"{self._term_str(exps, c)}")
            newe = list(exps)
            newe[i] = e + QONE
            items.append((tuple(newe), c.div_quad(e + QONE)))
        return GenExpr._collect(self.table, items)

    # -- substitution -------------------------------------------------------------------------

    def subst_monomial(self, target: VarTable, mapping: dict) -> "GenExpr":
        """Simultaneously replace variables by constant*monomial images.

        `mapping` sends a variable name to `(coeff, {target_name: exponent})`.
        Unmapped variables pass through to the same-named target variable.
        A non-integer occurrence of a replaced variable requires a positive
        (single-term, positive-rational-coefficient) image so the power stays
        exact and single-valued.
        """
        n_t = len(target)
        images: list = [None] * len(self.table)

        def image(i: int):
            # resolved lazily so that vacuous variables need no target slot
            if images[i] is None:
                v = self.table.vars[i]
                if v.name in mapping:
                    coeff, mono = mapping[v.name]
                    coeff = RadicalConstant.coerce(coeff)
                    vec = [QZERO] * n_t
                    img_positive = True
                    for name, e in mono.items():
                        j = target.index(name)
                        vec[j] = QuadExt.coerce(e)
                        img_positive = img_positive and target.vars[j].positive
                    images[i] = (coeff if not coeff.is_one else None,
                                 tuple(vec), img_positive)
                else:
                    vec = [QZERO] * n_t
                    vec[target.index(v.name)] = QONE
                    images[i] = (None, tuple(vec), True)
            return images[i]

        items = []
        for exps, c in self.terms.items():
            vec = [QZERO] * n_t
            coeff = c
            for i, e in enumerate(exps):
                if e.is_zero:
                    continue
                img_coeff, img_vec, img_positive = image(i)
                if not e.is_integer and not img_positive:
                    raise ValueError(
                        f"variable {self.table.vars[i].name!r} carries non-integer exponent {e}; "
                        "its image must consist of positivity-flagged variables")
                for j, m in enumerate(img_vec):
                    if not m.is_zero:
                        vec[j] = vec[j] + m * e
                if img_coeff is not None and not img_coeff.is_one:
                    coeff = coeff * img_coeff.pow_quad(e)
            for j, e in enumerate(vec):
                if not target.vars[j].positive and not e.is_integer:
                    raise ValueError(
                        f"substitution produced non-integer exponent {e} on "
                        f"sign-indefinite variable {target.vars[j].name!r}")
            items.append((tuple(vec), coeff))
        return GenExpr._collect(target, items)

    def subst_poly(self, name: str, value: "GenExpr") -> "GenExpr":
        """Replace `name` (integer exponents only) by an arbitrary expression.

        Negative powers are allowed only when the image is an invertible
        monomial.  All other variables must exist on the image's chart.
        """
        target = value.table
        i = self.table.index(name)
        pows: dict[int, GenExpr] = {0: GenExpr.const(target, 1), 1: value}

        def power(k: int) -> GenExpr:
            if k not in pows:
                pows[k] = value ** k
            return pows[k]

        identity = {v.name: (RadicalConstant.one(), {v.name: QONE})
                    for v in self.table.vars if v.name != name}
        out = GenExpr.zero(target)
        for exps, c in self.terms.items():
            e = exps[i]
            if not e.is_integer:
                raise ValueError(
                    f"polynomial substitution needs integer exponents on {name!r}, got {e}")
            rest = GenExpr(self.table, {exps[:i] + (QZERO,) + exps[i + 1:]: c})
            moved = rest.subst_monomial(target, identity)
            out = out + moved * power(e.as_int())
        return out

    def lift(self, target: VarTable) -> "GenExpr":
        """Reinterpret on a larger chart containing all current variables."""
        return self.subst_monomial(target, {})

    # -- display ----------------------------------------------------------------------------------

    def _term_str(self, exps, coeff) -> str:
        factors = [f"({coeff})"]
        for v, e in zip(self.table.vars, exps):
            if e.is_zero:
                continue
            if e.is_one:
                factors.append(v.name)
            elif e.is_integer and e.a >= 0:
                factors.append(f"{v.name}^{e.as_int()}")
            else:
                factors.append(f"{v.name}^({e})")
        return "*".join(factors)

    def serialize(self) -> str:
        """Deterministic plain-text form (terms in descending exponent order)."""
        if not self.terms:
            return "0"
        return " + ".join(self._term_str(e, c) for e, c in self.sorted_terms())

    __str__ = serialize

    def __repr__(self):
        return f"GenExpr[{self.serialize()}]"


class RatExpr:
    """A quotient of GenExprs, normalized by common-monomial extraction.

    The denominator's leading coefficient is scaled towards 1 (exactly 1
    whenever that coefficient is a single radical term, which covers every
    denominator the pipeline produces).  Equality is decided by
    cross-multiplication, which is complete because the term ring is an
    integral domain.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: GenExpr, den: GenExpr | None = None, _normalized=False):
        if den is None:
            den = GenExpr.const(num.table, 1)
        if num.table != den.table:
            raise ValueError("numerator and denominator live on different charts")
        if den.is_zero:
            raise ZeroDivisionError("identically zero denominator")
        if not _normalized:
            num, den = self._normalize(num, den)
        self.num = num
        self.den = den

    @staticmethod
    def _normalize(num: GenExpr, den: GenExpr):
        table = num.table
        if num.is_zero:
            return num, GenExpr.const(table, 1)
        nmin = num.min_exponents()
        dmin = den.min_exponents()
        common = tuple(a if a < b else b for a, b in zip(nmin, dmin))
        if any(not e.is_zero for e in common):
            shift = {tuple(-e for e in common): RadicalConstant.one()}
            mono = GenExpr(table, shift)
            num = num * mono
            den = den * mono
        lead_unit, lead_coeff = den.leading_term()[1].leading_term()
        scale = RadicalConstant.from_unit(lead_unit.inverse(), lead_coeff.inverse())
        if not scale.is_one:
            num = num.scale(scale)
            den = den.scale(scale)
        return num, den

    @classmethod
    def of(cls, x) -> "RatExpr":
        if isinstance(x, RatExpr):
            return x
        if isinstance(x, GenExpr):
            return cls(x)
        raise TypeError(f"cannot interpret {type(x).__name__} as RatExpr")

    @property
    def table(self) -> VarTable:
        return self.num.table

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def _coerce(self, other):
        if isinstance(other, RatExpr):
            return other
        if isinstance(other, GenExpr):
            return RatExpr(other)
        if isinstance(other, (int, Fraction, QuadExt, RadicalConstant)):
            return RatExpr(GenExpr.const(self.table, other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RatExpr(self.num + o.num, self.den)
        return RatExpr(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatExpr(-self.num, self.den, _normalized=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero or o.is_zero:
            return RatExpr(GenExpr.zero(self.table))
        return RatExpr(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero:
            raise ZeroDivisionError("division by the zero expression")
        return RatExpr(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o / self

    def diff(self, name: str) -> "RatExpr":
        if self.den.is_constant():
            return RatExpr(self.num.diff(name), self.den)
        dn = self.num.diff(name) * self.den - self.num * self.den.diff(name)
        return RatExpr(dn, self.den * self.den)

    def subst_monomial(self, target: VarTable, mapping: dict) -> "RatExpr":
        return RatExpr(self.num.subst_monomial(target, mapping),
                       self.den.subst_monomial(target, mapping))

    def subst_poly(self, name: str, value: GenExpr) -> "RatExpr":
        return RatExpr(self.num.subst_poly(name, value),
                       self.den.subst_poly(name, value))

    def lift(self, target: VarTable) -> "RatExpr":
        return RatExpr(self.num.lift(target), self.den.lift(target))

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero

    __hash__ = None

    def as_genexpr(self) -> GenExpr:
        """Clear a single-term denominator; error if the quotient is not polynomial-like."""
        if self.den.is_constant():
            c = self.den.constant_value()
            if c.is_one:
                return self.num
            return self.num.scale(c.inverse_single())
        st = self.den.single_term()
        if st is None:
            raise ValueError(f"denominator {self.den} is not a monomial")
        exps, c = st
        mono = GenExpr(self.table, {tuple(-e for e in exps): c.inverse_single()})
        return self.num * mono

    def as_quad_constant(self) -> QuadExt | None:
        """The value as a constant in Q(sqrt 3), or None."""
        from .radicals import try_quad_ratio
        if self.num.is_zero:
            return QZERO
        if set(self.num.terms) != set(self.den.terms):
            return None
        ratio = None
        for exps, dc in self.den.terms.items():
            r = try_quad_ratio(self.num.terms[exps], dc)
            if r is None or (ratio is not None and r != ratio):
                return None
            ratio = r
        return ratio

    def serialize(self) -> str:
        if self.den.is_constant() and self.den.constant_value().is_one:
            return self.num.serialize()
        return f"({self.num.serialize()}) / ({self.den.serialize()})"

    __str__ = serialize

    def __repr__(self):
        return f"RatExpr[{self.serialize()}]"


def try_monomial_multiple(lhs: RatExpr, rhs: RatExpr) -> GenExpr | None:
    """The monomial m with lhs = m * rhs, if one exists.

    The candidate is read off the leading terms (leading term of a product is
    the product of leading terms, since exponent tuples are totally ordered)
    and then verified exactly by cross-multiplication.
    """
    table = lhs.table
    if rhs.is_zero:
        return GenExpr.zero(table) if lhs.is_zero else None
    if lhs.is_zero:
        return GenExpr.zero(table)
    le_n, lc_n = lhs.num.leading_term()
    le_d, lc_d = lhs.den.leading_term()
    re_n, rc_n = rhs.num.leading_term()
    re_d, rc_d = rhs.den.leading_term()
    exps = tuple(a + b - c - d for a, b, c, d in zip(le_n, re_d, le_d, re_n))
    divisor = lc_d * rc_n
    if divisor.single_term() is None:
        return None
    coeff = lc_n * rc_d * divisor.inverse_single()
    for e, v in zip(exps, table.vars):
        if not v.positive and not e.is_integer:
            return None
    m = GenExpr(table, {exps: coeff})
    if lhs == rhs * RatExpr(m):
        return m
    return None
