"""High-precision numeric oracle.

Everything here is an independent backstop for the exact kernel: expressions
are evaluated through mpmath exp/log arithmetic at a working precision of
`precision_bits + 64` guard bits, symbolic zero verdicts are re-checked at
seeded random rational sample points, and Christoffel symbols are re-derived
by central finite differences.

Sample points are drawn from closed rational boxes that keep every
positivity-flagged variable at least 1/4 away from zero, so singular loci of
the charts are never touched.  With the defaults (256 bits, 10 samples,
tolerance 1e-60) a true zero evaluates around 1e-70 while a generic nonzero
expression of this size is many orders of magnitude above the tolerance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .expressions import GenExpr, RatExpr, VarTable
from .quadfield import QuadExt

DEFAULT_PRECISION_BITS = 256
DEFAULT_SAMPLES = 10
DEFAULT_SEED = 0
DEFAULT_TOLERANCE = Fraction(1, 10 ** 60)

_GRID = 1 << 16


def _mpf_fraction(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


def quad_value(q: QuadExt) -> mpmath.mpf:
    return _mpf_fraction(q.a) + _mpf_fraction(q.b) * mpmath.sqrt(3)


def const_value(c) -> mpmath.mpf:
    total = mpmath.mpf(0)
    for unit, coeff in c.terms.items():
        v = quad_value(coeff)
        for p, e in unit.exps:
            v *= mpmath.power(p, quad_value(e))
        total += v
    return total


def eval_genexpr(expr: GenExpr, point: dict[str, Fraction],
                 precision_bits: int = DEFAULT_PRECISION_BITS) -> mpmath.mpf:
    """Evaluate at a rational point; positive-flagged variables must be positive."""
    table = expr.table
    with mpmath.workprec(precision_bits + 64):
        values = []
        for v in table.vars:
            x = Fraction(point[v.name])
            if v.positive and x <= 0:
                raise ValueError(f"variable {v.name!r} must be positive, got {x}")
            values.append(_mpf_fraction(x))
        total = mpmath.mpf(0)
        for exps, coeff in expr.terms.items():
            term = const_value(coeff)
            for x, e in zip(values, exps):
                if e.is_zero:
                    continue
                if e.is_integer:
                    term *= x ** e.as_int()
                else:
                    term *= mpmath.power(x, quad_value(e))
            total += term
    with mpmath.workprec(precision_bits):
        return +total


def eval_ratexpr(expr: RatExpr, point: dict[str, Fraction],
                 precision_bits: int = DEFAULT_PRECISION_BITS) -> mpmath.mpf:
    num = eval_genexpr(expr.num, point, precision_bits + 32)
    den = eval_genexpr(expr.den, point, precision_bits + 32)
    if den == 0:
        raise ZeroDivisionError("denominator vanishes at the sample point")
    with mpmath.workprec(precision_bits):
        return num / den


@dataclass(frozen=True)
class SampleDomain:
    """Closed rational box per variable; positive variables stay >= 1/4."""

    table: VarTable
    intervals: dict[str, tuple[Fraction, Fraction]]

    def __post_init__(self):
        for v in self.table.vars:
            lo, hi = self.intervals[v.name]
            if lo > hi:
                raise ValueError(f"empty interval for {v.name!r}")
            if v.positive and lo < Fraction(1, 4):
                raise ValueError(
                    f"positive variable {v.name!r} must be sampled at >= 1/4, got {lo}")

    @staticmethod
    def box(table: VarTable, lo=Fraction(1, 4), hi=Fraction(4)) -> "SampleDomain":
        lo, hi = Fraction(lo), Fraction(hi)
        return SampleDomain(table, {v.name: (lo, hi) for v in table.vars})

    def draw(self, rng: random.Random) -> dict[str, Fraction]:
        point = {}
        for v in self.table.vars:
            lo, hi = self.intervals[v.name]
            point[v.name] = lo + (hi - lo) * Fraction(rng.randint(0, _GRID), _GRID)
        return point


@dataclass
class ZeroCheck:
    """Outcome of a randomized numeric zero confirmation."""

    name: str
    passed: bool
    max_abs: mpmath.mpf
    samples: int
    expressions: int


def zero_check_random(exprs, domain: SampleDomain, samples: int = DEFAULT_SAMPLES,
                      precision_bits: int = DEFAULT_PRECISION_BITS,
                      tolerance=DEFAULT_TOLERANCE, seed: int = DEFAULT_SEED,
                      name: str = "zero") -> ZeroCheck:
    """Check that every expression is below tolerance at seeded random points."""
    if samples < 1:
        raise ValueError("need at least one sample")
    if isinstance(exprs, (GenExpr, RatExpr)):
        exprs = [exprs]
    flat: list[GenExpr] = []
    for e in exprs:
        flat.append(e.num if isinstance(e, RatExpr) else e)
    rng = random.Random(seed)
    points = [domain.draw(rng) for _ in range(samples)]
    tol = _mpf_fraction(Fraction(tolerance))
    max_abs = mpmath.mpf(0)
    for expr in flat:
        if expr.is_zero:
            continue
        for point in points:
            v = abs(eval_genexpr(expr, point, precision_bits))
            if v > max_abs:
                max_abs = v
    return ZeroCheck(name, max_abs < tol, max_abs, samples, len(flat))


class BackstopLog:
    """Accumulates the numeric confirmations attached to a pipeline run.

    Equality claims are confirmed by evaluating both sides independently and
    comparing the floating values; this keeps the confirmation meaningful
    even when the symbolic difference has already cancelled to the zero
    expression inside the exact kernel.
    """

    def __init__(self, precision_bits=DEFAULT_PRECISION_BITS, samples=DEFAULT_SAMPLES,
                 tolerance=DEFAULT_TOLERANCE, seed=DEFAULT_SEED):
        self.precision_bits = precision_bits
        self.samples = samples
        self.tolerance = Fraction(tolerance)
        self.seed = seed
        self.checks: list[ZeroCheck] = []

    def confirm_zero(self, name: str, exprs, domain: SampleDomain) -> ZeroCheck:
        check = zero_check_random(exprs, domain, self.samples, self.precision_bits,
                                  self.tolerance, self.seed, name)
        self.checks.append(check)
        return check

    def confirm_equal(self, name: str, lhs, rhs, domain: SampleDomain) -> ZeroCheck:
        """|eval(lhs) - eval(rhs)| < tolerance at every seeded sample point."""
        left = _flatten(lhs)
        right = _flatten(rhs)
        if len(left) != len(right):
            raise ValueError("mismatched shapes in numeric comparison")
        rng = random.Random(self.seed)
        points = [domain.draw(rng) for _ in range(self.samples)]
        with mpmath.workprec(self.precision_bits):
            tol = _mpf_fraction(self.tolerance)
            max_abs = mpmath.mpf(0)
            for a, b in zip(left, right):
                ra, rb = RatExpr.of(a), RatExpr.of(b)
                for point in points:
                    va = eval_ratexpr(ra, point, self.precision_bits)
                    vb = eval_ratexpr(rb, point, self.precision_bits)
                    d = abs(va - vb)
                    if d > max_abs:
                        max_abs = d
        check = ZeroCheck(name, max_abs < tol, max_abs, self.samples, len(left))
        self.checks.append(check)
        return check

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_abs(self) -> mpmath.mpf:
        return max((c.max_abs for c in self.checks), default=mpmath.mpf(0))


def _flatten(obj):
    if isinstance(obj, (GenExpr, RatExpr)):
        return [obj]
    out = []
    for row in obj:
        if isinstance(row, (GenExpr, RatExpr)):
            out.append(row)
        else:
            out.extend(row)
    return out


def compare_christoffels(metric, chris, point: dict[str, Fraction], step: Fraction,
                         precision_bits: int = DEFAULT_PRECISION_BITS) -> mpmath.mpf:
    """Max relative deviation between symbolic and finite-difference symbols."""
    numeric = fd_christoffels(metric, point, step, precision_bits)
    r = len(numeric)
    worst = mpmath.mpf(0)
    with mpmath.workprec(precision_bits):
        for j in range(r):
            for s in range(r):
                for k in range(r):
                    sym = eval_ratexpr(chris.covariant[j][s][k], point, precision_bits)
                    ref = max(abs(sym), mpmath.mpf(1))
                    err = abs(sym - numeric[j][s][k]) / ref
                    if err > worst:
                        worst = err
    return worst


def fd_riemann_check(chris, point: dict[str, Fraction], step: Fraction,
                     precision_bits: int = DEFAULT_PRECISION_BITS) -> mpmath.mpf:
    """Numeric curvature residual: finite-difference the symbolic symbols.

    Combines central differences of the exact Christoffel symbols with the
    exactly evaluated quadratic terms; for a flat metric the result is zero
    up to the O(step^2) differentiation error.
    """
    table = chris.metric.table
    names = [v.name for v in table.vars if v.kind == "chart"]
    r = chris.metric.dim
    step = Fraction(step)
    gamma = chris.covariant

    def gamma_at(pt):
        return [[[eval_ratexpr(gamma[l][i][j], pt, precision_bits + 64)
                  for j in range(r)] for i in range(r)] for l in range(r)]

    with mpmath.workprec(precision_bits + 64):
        g0 = gamma_at(point)
        h = _mpf_fraction(step)
        dgamma = []
        for k in range(r):
            plus = dict(point)
            plus[names[k]] = point[names[k]] + step
            minus = dict(point)
            minus[names[k]] = point[names[k]] - step
            gp, gm = gamma_at(plus), gamma_at(minus)
            dgamma.append([[[(gp[l][i][j] - gm[l][i][j]) / (2 * h)
                             for j in range(r)] for i in range(r)] for l in range(r)])
        worst = mpmath.mpf(0)
        for i in range(r):
            for j in range(i + 1, r):
                for l in range(r):
                    for k in range(r):
                        val = dgamma[i][l][j][k] - dgamma[j][l][i][k]
                        for s in range(r):
                            val += g0[l][i][s] * g0[s][j][k] - g0[l][j][s] * g0[s][i][k]
                        if abs(val) > worst:
                            worst = abs(val)
    with mpmath.workprec(precision_bits):
        return +worst


def fd_christoffels(metric, point: dict[str, Fraction], step: Fraction,
                    precision_bits: int = DEFAULT_PRECISION_BITS):
    """Levi-Civita symbols of the covariant metric by central differences.

    `metric` is a contravariant matrix of Rat/GenExprs; the covariant metric
    is inverted numerically, differentiated with symmetric steps, and
    assembled into Gamma^j_{sk}.  Accuracy is O(step^2).
    """
    table = metric.table
    names = [v.name for v in table.vars]
    r = len(names)
    step = Fraction(step)

    def covariant_at(pt):
        with mpmath.workprec(precision_bits + 64):
            m = mpmath.matrix(r, r)
            for i in range(r):
                for j in range(r):
                    m[i, j] = eval_ratexpr(metric.mat[i][j], pt, precision_bits + 64)
            return m ** -1

    with mpmath.workprec(precision_bits + 64):
        g0_inv = mpmath.matrix(r, r)
        for i in range(r):
            for j in range(r):
                g0_inv[i, j] = eval_ratexpr(metric.mat[i][j], point, precision_bits + 64)
        dg = []
        for k in range(r):
            plus = dict(point)
            plus[names[k]] = point[names[k]] + step
            minus = dict(point)
            minus[names[k]] = point[names[k]] - step
            gp, gm = covariant_at(plus), covariant_at(minus)
            h = _mpf_fraction(step)
            dg.append([[(gp[i, j] - gm[i, j]) / (2 * h) for j in range(r)] for i in range(r)])
        gamma = [[[mpmath.mpf(0)] * r for _ in range(r)] for _ in range(r)]
        for j in range(r):
            for s in range(r):
                for k in range(r):
                    total = mpmath.mpf(0)
                    for l in range(r):
                        total += g0_inv[j, l] * (dg[s][l][k] + dg[k][l][s] - dg[l][s][k])
                    gamma[j][s][k] = total / 2
    return gamma
