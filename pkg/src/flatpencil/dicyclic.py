"""Dicyclic group of order 4n acting monomially on the (x1, x2) chart.

The group is generated by a diagonal element `s` sending x1 -> w*x1,
x2 -> w^(2n-1)*x2 (w a primitive 2n-th root of unity) and an antidiagonal
element `a` sending x1 -> x2, x2 -> w^n*x1 = -x1.  Every element acts as
x_i -> w^(c_i) * x_{perm(i)}, so only the permutation and the two phase
exponents mod 2n are stored; w itself is never represented as a complex
number.  A transformed polynomial term picks up the phase w^(c1*e1 + c2*e2);
the reduction w^n = -1 maps phases 0 and n back into the rational world and
any other residue marks the term as leaving the ring, which decides the
invariance verdicts used here (each source term maps to a single target
term, so no deeper cyclotomic cancellation can occur for these actions).

The invariant generators, their syzygy, and the Hessian-of-u1 pushforward
metric on the quotient chart (u1, u2) live here as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expressions import GenExpr, RatExpr, VarTable
from .geometry import ContraMetric, mat_inverse
from .quadfield import QZERO, QuadExt
from .radicals import RadicalConstant

X_CHART = VarTable.chart("x1", "x2", positive=("x1", "x2"))
U_CHART = VarTable.chart("u1", "u2", positive=("u1",))


@dataclass(frozen=True)
class GroupElement:
    """x_i -> w^(phases[i]) * x_(perm[i]), phases mod 2n."""

    n: int
    perm: tuple[int, int]
    phases: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(p % (2 * self.n) for p in self.phases))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        """Composite substitution: apply `other` first, then `self`."""
        if self.n != other.n:
            raise ValueError("elements of different groups")
        perm = tuple(self.perm[other.perm[i]] for i in range(2))
        phases = tuple(other.phases[i] + self.phases[other.perm[i]] for i in range(2))
        return GroupElement(self.n, perm, phases)

    def inverse(self) -> "GroupElement":
        inv_perm = tuple(self.perm.index(i) for i in range(2))
        phases = tuple(-self.phases[inv_perm[i]] for i in range(2))
        return GroupElement(self.n, inv_perm, phases)

    def __pow__(self, k: int) -> "GroupElement":
        if k < 0:
            return self.inverse() ** (-k)
        out = identity(self.n)
        for _ in range(k):
            out = out * self
        return out


def identity(n: int) -> GroupElement:
    return GroupElement(n, (0, 1), (0, 0))


def sigma(n: int) -> GroupElement:
    return GroupElement(n, (0, 1), (1, 2 * n - 1))


def alpha(n: int) -> GroupElement:
    return GroupElement(n, (1, 0), (0, n))


def generate_group(n: int) -> set[GroupElement]:
    gens = (sigma(n), alpha(n))
    seen = {identity(n)}
    frontier = [identity(n)]
    while frontier:
        g = frontier.pop()
        for h in gens:
            k = g * h
            if k not in seen:
                seen.add(k)
                frontier.append(k)
    return seen


@dataclass(frozen=True)
class GroupReport:
    n: int
    order: int
    sigma_order_ok: bool    # sigma^(2n) = 1
    alpha_square_ok: bool   # alpha^2 = sigma^n
    conjugation_ok: bool    # alpha^-1 sigma alpha = sigma^-1
    order_ok: bool          # closure has exactly 4n elements

    @property
    def passed(self) -> bool:
        return (self.sigma_order_ok and self.alpha_square_ok
                and self.conjugation_ok and self.order_ok)


def group_relations_check(n: int) -> GroupReport:
    if n < 2:
        raise ValueError("the construction needs n >= 2")
    s, a = sigma(n), alpha(n)
    e = identity(n)
    return GroupReport(
        n=n,
        order=len(generate_group(n)),
        sigma_order_ok=s ** (2 * n) == e,
        alpha_square_ok=a * a == s ** n,
        conjugation_ok=a.inverse() * s * a == s.inverse(),
        order_ok=len(generate_group(n)) == 4 * n,
    )


# -- action on polynomials ----------------------------------------------------------


def transform_terms(expr: GenExpr, g: GroupElement):
    """The transformed terms as {(exponents, phase residue): coefficient}.

    Phases are reduced with w^n = -1; residue 0 means the term stayed
    rational, any other residue means it left the ring.
    """
    if expr.table != X_CHART:
        raise ValueError("group action is defined on the (x1, x2) chart")
    n = g.n
    out: dict[tuple, RadicalConstant] = {}
    for exps, coeff in expr.terms.items():
        ints = []
        for e in exps:
            if not e.is_integer:
                raise ValueError("group action needs integer exponents")
            ints.append(e.as_int())
        phase = (g.phases[0] * ints[0] + g.phases[1] * ints[1]) % (2 * n)
        if phase >= n:
            phase -= n
            coeff = -coeff
        new_exps = [QZERO, QZERO]
        for i in range(2):
            new_exps[g.perm[i]] = exps[i]
        key = (tuple(new_exps), phase)
        cur = out.get(key)
        coeff = coeff if cur is None else cur + coeff
        if coeff.is_zero:
            out.pop(key, None)
        else:
            out[key] = coeff
    return out


def invariance_check(expr: GenExpr, g: GroupElement) -> bool:
    transformed = transform_terms(expr, g)
    if any(phase != 0 for (_, phase) in transformed):
        return False
    collected = {exps: c for (exps, _), c in transformed.items()}
    return collected == expr.terms


# -- invariants and syzygy -------------------------------------------------------------


@dataclass(frozen=True)
class InvariantSet:
    n: int
    u1: GenExpr
    u2: GenExpr
    u3: GenExpr


def invariants(n: int) -> InvariantSet:
    """u1 = x1^2 x2^2, u2 = x1^(2n) + x2^(2n), u3 = x1 x2 (x1^(2n) - x2^(2n))."""
    x1 = GenExpr.variable(X_CHART, "x1")
    x2 = GenExpr.variable(X_CHART, "x2")
    u1 = x1 ** 2 * x2 ** 2
    u2 = x1 ** (2 * n) + x2 ** (2 * n)
    u3 = x1 * x2 * (x1 ** (2 * n) - x2 ** (2 * n))
    return InvariantSet(n, u1, u2, u3)


def homogeneous_degree(expr: GenExpr) -> int | None:
    """Total degree if the expression is homogeneous, else None."""
    degs = {sum((e.as_int() for e in exps), 0) for exps in expr.terms}
    return degs.pop() if len(degs) == 1 else None


def syzygy_expression(n: int) -> GenExpr:
    """u3^2 - u1 u2^2 + 4 u1^(n+1), expanded on the (x1, x2) chart."""
    inv = invariants(n)
    return inv.u3 ** 2 - inv.u1 * inv.u2 ** 2 + 4 * inv.u1 ** (n + 1)


def syzygy_check(n: int) -> bool:
    return syzygy_expression(n).is_zero


# -- Hessian pushforward metric -----------------------------------------------------------


def quotient_metric(n: int) -> ContraMetric:
    """The claimed second metric on the (u1, u2) chart.

    Entries: (du1,du1) = 4 u1 / 3, (du1,du2) = 2n u2 / 3,
    (du2,du2) = -(2 n^2 / (3 u1)) (u2^2 - 6 u1^n).
    """
    u1 = GenExpr.variable(U_CHART, "u1")
    u2 = GenExpr.variable(U_CHART, "u2")
    third = Fraction(1, 3)
    e11 = u1.scale(4 * third)
    e12 = u2.scale(2 * n * third)
    e22 = RatExpr((u2 ** 2 - 6 * u1 ** n).scale(-2 * n * n * third), u1)
    return ContraMetric.build(U_CHART, ((e11, e12), (e12, e22)))


@dataclass(frozen=True)
class PushforwardReport:
    n: int
    metric: ContraMetric           # on the (u1, u2) chart
    pushforward_x: tuple           # J h^-1 J^T on the (x1, x2) chart
    matches_claim: bool
    witnesses: tuple

    @property
    def passed(self) -> bool:
        return self.matches_claim


def hessian_pushforward(n: int) -> PushforwardReport:
    """Push the inverse Hessian of u1 to the (u1, u2) chart and verify it.

    The pushforward J h^-1 J^T (J the Jacobian of (u1, u2) in x, h the
    Hessian of u1) is compared entrywise with the claimed quotient metric
    after substituting the invariants for u1, u2; the comparison happens on
    the x-chart, which avoids rewriting x-polynomials in the invariants.
    """
    inv = invariants(n)
    xs = ("x1", "x2")
    h = tuple(tuple(RatExpr(inv.u1.diff(a).diff(b)) for b in xs) for a in xs)
    h_inv = mat_inverse(h)
    jac = tuple(tuple(RatExpr(u.diff(a)) for a in xs) for u in (inv.u1, inv.u2))
    push = [[None] * 2 for _ in range(2)]
    for i in range(2):
        for j in range(2):
            total = None
            for k in range(2):
                for l in range(2):
                    term = jac[i][k] * h_inv[k][l] * jac[j][l]
                    total = term if total is None else total + term
            push[i][j] = total
    claimed = quotient_metric(n)
    # substitute u1 (a monomial image, so negative powers are fine) first,
    # landing on a mixed chart, then expand the binomial u2
    mixed = VarTable.chart("x1", "x2", "u2", positive=("x1", "x2"))
    u1_map = {"u1": (1, {"x1": QuadExt(2), "x2": QuadExt(2)})}
    witnesses = []
    for i in range(2):
        for j in range(2):
            entry = claimed.mat[i][j].subst_monomial(mixed, u1_map).subst_poly("u2", inv.u2)
            if not (entry == push[i][j]):
                witnesses.append((i, j))
    return PushforwardReport(n, claimed, tuple(tuple(r) for r in push),
                             not witnesses, tuple(witnesses))
