"""Flat coordinates, potential reconstruction, and the Frobenius axioms.

Both branches of the construction share one flat chart (w1, t2) with w1
positive.  The first flat coordinate of the quotient construction is
t1 = -(sqrt3/2n) u1 on the plus branch (negative where u1 > 0) and
t1 = +(sqrt3/2n) u1 on the minus branch, so internally we work with
w1 = sign * t1, sign = -1 (plus) / +1 (minus), and every base raised to an
irrational power stays positive.  Reports unwind the sign at render time.

With eta the constant flat metric and Omega2(t) the second metric in flat
coordinates, the potential is rebuilt from its Hessian

    d_i d_j F = sum_{k,l} eta_ik eta_jl Omega2^{kl}(t) / (d - 1 + d_k + d_l),

integrated term by term (integration constants zero), and then verified
against the remaining reconstruction identities

    d_i F = sum_k d_k t^k d_k d_i F / (3 - d - d_i),
    F     = sum_k d_k t^k d_k F / (3 - d),

the unity normalization  d_r d_i d_j F = eta_ij,  the Euler scaling
sum d_i t^i d_i F = (3-d) F,  the full WDVV residual, and commutativity and
unity of the structure constants  C_ij^k = sum_p eta^kp d_p d_i d_j F.

The two-term potentials are finally scaled onto the classical normal form
z1^k + z2^2 z1 / 2 with k = (3-d)/(1-d) by diagonal scalings of the
coordinates and an overall scaling of F.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expressions import GenExpr, RatExpr, VarTable
from .geometry import (ContraMetric, VectorField, coordinate_names, euler_fields,
                       mat_equal, mat_inverse, transform_metric, transform_vector)
from .quadfield import QONE, QZERO, QuadExt, SQRT3
from .radicals import RadicalConstant, RadicalUnit

PLUS = "plus"
MINUS = "minus"
BRANCHES = (PLUS, MINUS)

FLAT_CHART = VarTable.chart("w1", "t2", positive=("w1",))
NORMAL_CHART = VarTable.chart("z1", "z2", positive=("z1",))


class ResonanceError(ValueError):
    """A reconstruction denominator vanishes exactly."""


@dataclass(frozen=True)
class FlatChart:
    """The substitution data of one branch's flat coordinates."""

    branch: str
    n: int
    sign: QuadExt              # t1 = sign * w1
    exponent: QuadExt          # p with t2 = u2 * u1^(-p)
    table: VarTable
    forward: tuple             # (w1, t2) as expressions on the (u1, u2) chart
    back_subst: dict           # monomial substitution u -> flat chart
    tau_flat: GenExpr          # tau on the flat chart, = sign * w1


def branch_sign(branch: str) -> QuadExt:
    if branch == PLUS:
        return QuadExt(-1)
    if branch == MINUS:
        return QONE
    raise ValueError(f"unknown branch {branch!r}")


def branch_root(branch: str) -> QuadExt:
    """The signed sqrt(3) of the branch: +sqrt3 on plus, -sqrt3 on minus."""
    return SQRT3 if branch == PLUS else -SQRT3


def flat_chart(branch: str, n: int, u_chart: VarTable) -> FlatChart:
    sign = branch_sign(branch)
    root = branch_root(branch)
    p = QuadExt(Fraction(n, 2)) * (QONE + root)
    # w1 = (sqrt3 / 2n) u1 on both branches; t2 = u2 u1^(-p)
    w1_of_u = GenExpr.variable(u_chart, "u1").scale(SQRT3 / (2 * n))
    t2_of_u = GenExpr.monomial(u_chart, 1, {"u2": QONE, "u1": -p})
    c_u1 = RadicalConstant.from_unit(
        RadicalUnit.of_rational(2 * n, QONE) * RadicalUnit.of_rational(3, QuadExt(Fraction(-1, 2))))
    back = {
        "u1": (c_u1, {"w1": QONE}),
        "u2": (c_u1.pow_quad(p), {"t2": QONE, "w1": p}),
    }
    tau_flat = GenExpr.variable(FLAT_CHART, "w1").scale(sign)
    return FlatChart(branch, n, sign, p, FLAT_CHART, (w1_of_u, t2_of_u), back, tau_flat)


@dataclass(frozen=True)
class FlatCoordinatesReport:
    chart: FlatChart
    g1_flat: ContraMetric
    g2_flat: ContraMetric
    eta_expected: tuple
    eta_ok: bool

    @property
    def passed(self) -> bool:
        return self.eta_ok


def flat_coordinates(chart: FlatChart, g1: ContraMetric, g2: ContraMetric) -> FlatCoordinatesReport:
    """Transform both metrics; the first must become the constant antidiagonal.

    On the internal chart the antidiagonal entry is the branch sign (the
    rendered t-chart value is +1 once t1 = sign*w1 is unwound).
    """
    g1_flat = transform_metric(g1, chart.table, list(chart.forward), chart.back_subst)
    g2_flat = transform_metric(g2, chart.table, list(chart.forward), chart.back_subst)
    s = RatExpr(GenExpr.const(chart.table, chart.sign))
    zero = RatExpr(GenExpr.zero(chart.table))
    eta_expected = ((zero, s), (s, zero))
    eta_ok = mat_equal(g1_flat.mat, eta_expected)
    return FlatCoordinatesReport(chart, g1_flat, g2_flat, eta_expected, eta_ok)


def closed_form_flat_metric(branch: str, n: int) -> ContraMetric:
    """The known closed form of the second metric on the flat chart.

    Internal w-form: [[2/(sqrt3 n) w1, s*t2], [s*t2, B]] with
    B = 2^(1 -+ sqrt3 n) 3^((1 +- sqrt3 n)/2) n^(1 -+ sqrt3 n) w1^(-+ sqrt3 n - 1)
    (upper signs on the plus branch).
    """
    s = branch_sign(branch)
    root = branch_root(branch)
    rn = root * n
    e11 = GenExpr.variable(FLAT_CHART, "w1").scale(QuadExt(2) / (SQRT3 * n))
    e12 = GenExpr.variable(FLAT_CHART, "t2").scale(s)
    coeff = (RadicalConstant.rational_power(2, QONE - rn)
             * RadicalConstant.rational_power(3, (rn + 1) / 2)
             * RadicalConstant.rational_power(n, QONE - rn))
    e22 = GenExpr.monomial(FLAT_CHART, coeff, {"w1": -rn - 1})
    return ContraMetric.build(FLAT_CHART, ((e11, e12), (e12, e22)))


def closed_form_potential(branch: str, n: int) -> GenExpr:
    """The known closed form of the potential, on the internal w-chart.

    t-chart form:  c * (-+ n t1)^(1 -+ sqrt3 n) / (3 n^2 - 1) + t1 t2^2 / 2
    with c = 2^(-+ sqrt3 n) 3^((1 +- sqrt3 n)/2)  (upper signs: plus branch).
    """
    s = branch_sign(branch)
    root = branch_root(branch)
    rn = root * n
    k = QONE - rn
    coeff = (RadicalConstant.rational_power(2, -rn)
             * RadicalConstant.rational_power(3, (rn + 1) / 2)
             * RadicalConstant.rational_power(n, k)
             * RadicalConstant.rational_power(3 * n * n - 1, QuadExt(-1)))
    lead = GenExpr.monomial(FLAT_CHART, coeff, {"w1": k})
    tail = GenExpr.monomial(FLAT_CHART, QuadExt(Fraction(1, 2)) * s,
                            {"w1": QONE, "t2": QuadExt(2)})
    return lead + tail


# -- degrees -------------------------------------------------------------------------


@dataclass(frozen=True)
class DegreesReport:
    degrees: tuple | None      # (d_1, ..., d_r) with d_r = 1
    charge: QuadExt | None
    rescaled: bool
    witness: int | None        # offending component if E is not diagonal-linear

    @property
    def passed(self) -> bool:
        return self.degrees is not None


def degrees_and_charge(E_flat: VectorField, charge: QuadExt) -> DegreesReport:
    """Read the degrees off a diagonal-linear Euler field, normalizing d_r = 1.

    If the last degree is not 1 the field and the charge are rescaled
    compatibly (E -> kappa E scales d - 1 by kappa).
    """
    names = coordinate_names(E_flat.table, E_flat.dim)
    raw = []
    for i, name in enumerate(names):
        var = RatExpr(GenExpr.variable(E_flat.table, name))
        c = (E_flat.comps[i] / var).as_quad_constant()
        if c is None:
            return DegreesReport(None, None, False, i)
        raw.append(c)
    last = raw[-1]
    if last.is_one:
        return DegreesReport(tuple(raw), charge, False, None)
    if last.is_zero:
        return DegreesReport(None, None, False, len(raw) - 1)
    kappa = last.inverse()
    degrees = tuple(c * kappa for c in raw)
    return DegreesReport(degrees, QONE + kappa * (charge - QONE), True, None)


# -- potential reconstruction -------------------------------------------------------------


def potential_of_closed_oneform(comps: list[GenExpr], table: VarTable) -> GenExpr:
    """The potential F with dF = comps, integration constants all zero."""
    names = coordinate_names(table, len(comps))
    F = GenExpr.zero(table)
    rem = list(comps)
    for i, name in enumerate(names):
        if rem[i].is_zero:
            continue
        piece = rem[i].integrate(name)
        F = F + piece
        rem = [r - piece.diff(nm) for r, nm in zip(rem, names)]
    for r in rem:
        if not r.is_zero:
            raise ValueError("the form is not exact; a nonzero remainder survived")
    return F


@dataclass(frozen=True)
class ReconstructionReport:
    potential: GenExpr | None
    hessian: tuple | None
    integrability_ok: bool
    hessian_ok: bool
    gradient_ok: bool
    scaling_ok: bool

    @property
    def passed(self) -> bool:
        return (self.potential is not None and self.integrability_ok
                and self.hessian_ok and self.gradient_ok and self.scaling_ok)


def reconstruct_potential(g2_flat: ContraMetric, eta_contra: tuple,
                          degrees: tuple, charge: QuadExt) -> ReconstructionReport:
    """Rebuild F from the Hessian equation and verify all three identities.

    `eta_contra` is the constant contravariant flat metric (matrix of
    QuadExt); resonance denominators are checked exactly before dividing.
    """
    table = g2_flat.table
    r = g2_flat.dim
    names = coordinate_names(table, r)
    d = charge
    for k in range(r):
        for l in range(r):
            if (d - 1 + degrees[k] + degrees[l]).is_zero:
                raise ResonanceError(f"d - 1 + d_{k+1} + d_{l+1} vanishes")
    for i in range(r):
        if (QuadExt(3) - d - degrees[i]).is_zero:
            raise ResonanceError(f"3 - d - d_{i+1} vanishes")
    if (QuadExt(3) - d).is_zero:
        raise ResonanceError("3 - d vanishes")

    eta_cov = mat_inverse(tuple(tuple(RatExpr(GenExpr.const(table, e)) for e in row)
                                for row in eta_contra))
    eta_cov = tuple(tuple(e.num.constant_value().as_quad() / e.den.constant_value().as_quad()
                          for e in row) for row in eta_cov)
    hessian = [[None] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            total = GenExpr.zero(table)
            for k in range(r):
                for l in range(r):
                    if eta_cov[i][k].is_zero or eta_cov[j][l].is_zero:
                        continue
                    factor = eta_cov[i][k] * eta_cov[j][l] / (d - 1 + degrees[k] + degrees[l])
                    total = total + g2_flat.mat[k][l].as_genexpr().scale(factor)
            hessian[i][j] = total
    integrability_ok = all(hessian[i][j] == hessian[j][i] for i in range(r) for j in range(r))
    integrability_ok = integrability_ok and all(
        hessian[i][j].diff(names[k]) == hessian[i][k].diff(names[j])
        for i in range(r) for j in range(r) for k in range(j + 1, r))
    if not integrability_ok:
        return ReconstructionReport(None, tuple(map(tuple, hessian)), False, False, False, False)

    gradient = [potential_of_closed_oneform(list(hessian[i]), table) for i in range(r)]
    F = potential_of_closed_oneform(gradient, table)

    hessian_ok = all(F.diff(names[i]).diff(names[j]) == hessian[i][j]
                     for i in range(r) for j in range(r))
    coords = [GenExpr.variable(table, nm) for nm in names]
    gradient_ok = True
    for i in range(r):
        total = GenExpr.zero(table)
        for k in range(r):
            total = total + (coords[k] * hessian[k][i]).scale(degrees[k])
        gradient_ok = gradient_ok and (
            F.diff(names[i]) == total.scale((QuadExt(3) - d - degrees[i]).inverse()))
    euler = GenExpr.zero(table)
    for k in range(r):
        euler = euler + (coords[k] * F.diff(names[k])).scale(degrees[k])
    scaling_ok = F == euler.scale((QuadExt(3) - d).inverse())
    return ReconstructionReport(F, tuple(map(tuple, hessian)), True,
                                hessian_ok, gradient_ok, scaling_ok)


# -- Frobenius axioms ------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    unity_ok: bool
    euler_ok: bool
    wdvv_ok: bool
    commutative_ok: bool
    unity_field_ok: bool
    witnesses: tuple

    @property
    def passed(self) -> bool:
        return (self.unity_ok and self.euler_ok and self.wdvv_ok
                and self.commutative_ok and self.unity_field_ok)


def third_derivatives(F: GenExpr, names) -> dict:
    """All third partials of F, indexed by every permutation of (i, j, k)."""
    r = len(names)
    first = {nm: F.diff(nm) for nm in names}
    second = {}
    for i, ni in enumerate(names):
        for j, nj in enumerate(names[i:], start=i):
            second[(i, j)] = second[(j, i)] = first[ni].diff(nj)
    third = {}
    for i in range(r):
        for j in range(i, r):
            for k in range(j, r):
                v = second[(i, j)].diff(names[k])
                for perm in ((i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)):
                    third[perm] = v
    return third


def wdvv_residuals(F: GenExpr, eta_contra: tuple) -> dict:
    """The associativity residuals, one GenExpr per index choice (i, j, q, m)."""
    table = F.table
    r = len(eta_contra)
    names = coordinate_names(table, r)
    third = third_derivatives(F, names)
    out = {}
    for i in range(r):
        for j in range(r):
            for q in range(r):
                for m in range(r):
                    lhs = GenExpr.zero(table)
                    rhs = GenExpr.zero(table)
                    for k in range(r):
                        for p in range(r):
                            if eta_contra[k][p].is_zero:
                                continue
                            lhs = lhs + (third[(i, j, k)] * third[(p, q, m)]).scale(eta_contra[k][p])
                            rhs = rhs + (third[(m, j, k)] * third[(p, q, i)]).scale(eta_contra[k][p])
                    out[(i, j, q, m)] = lhs - rhs
    return out


def verify_potential(F: GenExpr, eta_contra: tuple, degrees: tuple,
                     charge: QuadExt) -> AxiomReport:
    """Check unity, Euler scaling, WDVV, and the structure-constant axioms."""
    table = F.table
    r = len(degrees)
    names = coordinate_names(table, r)
    eta_cov_rat = mat_inverse(tuple(tuple(RatExpr(GenExpr.const(table, e)) for e in row)
                                    for row in eta_contra))
    eta_cov = tuple(tuple(e.num.constant_value().as_quad() / e.den.constant_value().as_quad()
                          for e in row) for row in eta_cov_rat)
    first = {nm: F.diff(nm) for nm in names}
    third = third_derivatives(F, names)
    witnesses = []

    unity_ok = True
    last = r - 1
    for i in range(r):
        for j in range(r):
            if not (third[(last, i, j)] == GenExpr.const(table, eta_cov[i][j])):
                unity_ok = False
                witnesses.append(("unity", i, j))

    coords = [GenExpr.variable(table, nm) for nm in names]
    euler = GenExpr.zero(table)
    for k in range(r):
        euler = euler + (coords[k] * first[names[k]]).scale(degrees[k])
    euler_ok = euler == F.scale(QuadExt(3) - charge)
    if not euler_ok:
        witnesses.append(("euler",))

    wdvv_ok = True
    for idx, residual in wdvv_residuals(F, eta_contra).items():
        if not residual.is_zero:
            wdvv_ok = False
            witnesses.append(("wdvv",) + idx)

    struct = {}
    for i in range(r):
        for j in range(r):
            for k in range(r):
                c = GenExpr.zero(table)
                for p in range(r):
                    if not eta_contra[k][p].is_zero:
                        c = c + third[(p, i, j)].scale(eta_contra[k][p])
                struct[(i, j, k)] = c
    commutative_ok = all(struct[(i, j, k)] == struct[(j, i, k)]
                         for i in range(r) for j in range(r) for k in range(r))
    if not commutative_ok:
        witnesses.append(("commutativity",))
    unity_field_ok = True
    for j in range(r):
        for k in range(r):
            expected = GenExpr.const(table, 1 if j == k else 0)
            if not (struct[(last, j, k)] == expected):
                unity_field_ok = False
                witnesses.append(("unity-field", j, k))

    return AxiomReport(unity_ok, euler_ok, wdvv_ok, commutative_ok,
                       unity_field_ok, tuple(witnesses))


@dataclass(frozen=True)
class FrobeniusData:
    """Everything that pins down one branch's Frobenius structure."""

    branch: str
    n: int
    chart: FlatChart
    eta: tuple                    # constant contravariant flat metric (QuadExt entries)
    g2_flat: ContraMetric
    degrees: tuple
    charge: QuadExt
    potential: GenExpr
    reconstruction: "ReconstructionReport"
    axioms: "AxiomReport"


# -- normal form -------------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalFormReport:
    exponent: QuadExt | None          # k
    exponent_matches_charge: bool     # k = (3-d)/(1-d)
    epsilon: int                      # sign of the z1 z2^2/2 term on the internal chart
    scale_w1: RadicalConstant | None
    scale_t2: RadicalConstant | None
    scale_potential: RadicalConstant | None
    display_form_ok: bool             # +z1 z2^2/2 after unwinding t1 = sign*w1
    normalized_ok: bool
    shape_ok: bool

    @property
    def passed(self) -> bool:
        return (self.shape_ok and self.normalized_ok
                and self.exponent_matches_charge and self.display_form_ok)


def normal_form(F: GenExpr, charge: QuadExt, sign: QuadExt) -> NormalFormReport:
    """Scale a two-term potential onto z1^k + z2^2 z1 / 2.

    Admissible transformations are diagonal scalings z1 = w1 / a, z2 = t2 / b
    together with an overall scaling of F.  The exponent must satisfy
    k = (3-d)/(1-d) exactly.  On the internal chart the second term carries
    the branch sign; `display_form_ok` records that it unwinds to
    +z1 z2^2/2 in the rendered coordinates.
    """
    failed = NormalFormReport(None, False, 0, None, None, None, False, False, False)
    if (QONE - charge).is_zero:
        return failed
    terms = F.sorted_terms()
    if len(terms) != 2:
        return failed
    lead = tail = None
    for exps, coeff in terms:
        if exps[1].is_zero:
            lead = (exps, coeff)
        elif exps[1] == QuadExt(2) and exps[0].is_one:
            tail = (exps, coeff)
    if lead is None or tail is None:
        return failed
    k = lead[0][0]
    k_expected = (QuadExt(3) - charge) / (QONE - charge)
    exponent_ok = k == k_expected

    c1, c2 = lead[1], tail[1]
    if c1.single_term() is None:
        return failed
    scale_f = c1.inverse_single()
    twice = (scale_f * c2).scale(QuadExt(2))
    st = twice.single_term()
    if st is None:
        return failed
    epsilon = st[1].sign()
    positive = twice.scale(QuadExt(epsilon))
    try:
        scale_t2 = positive.pow_quad(QuadExt(Fraction(-1, 2)))
    except ValueError:
        return failed
    scale_w1 = RadicalConstant.one()

    shifted = F.subst_monomial(NORMAL_CHART, {
        "w1": (scale_w1, {"z1": QONE}),
        "t2": (scale_t2, {"z2": QONE}),
    }).scale(scale_f)
    target = (GenExpr.monomial(NORMAL_CHART, 1, {"z1": k})
              + GenExpr.monomial(NORMAL_CHART, QuadExt(Fraction(epsilon, 2)),
                                 {"z1": QONE, "z2": QuadExt(2)}))
    normalized_ok = shifted == target
    display_ok = (QuadExt(epsilon) * sign).is_one
    return NormalFormReport(k, exponent_ok, epsilon, scale_w1, scale_t2,
                            scale_f, display_ok, normalized_ok, True)
