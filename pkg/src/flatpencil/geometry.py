"""Contravariant differential geometry over the exact expression kernel.

A contravariant metric is the symmetric matrix Omega^{ij} = (dx^i, dx^j) of
rational expressions on a chart.  From it we derive:

* Levi-Civita Christoffel symbols of the covariant (inverse) metric and the
  associated contravariant symbols  Gamma^{ij}_k = -sum_s Omega^{is} Gamma^j_{sk};
* the full Riemann tensor, whose identical vanishing is the flatness verdict;
* Lie derivatives of contravariant metrics along vector fields,
  (Lie_X g)^{ij} = X^k d_k g^{ij} - g^{kj} d_k X^i - g^{ik} d_k X^j;
* the flat-pencil test: g2 + lam*g1 must be flat identically in the formal
  parameter lam and its contravariant symbols must equal Gamma2 + lam*Gamma1
  entrywise;
* the quasihomogeneity relations for the pair of fields obtained from a
  potential tau ( E = g2 grad tau, e = g1 grad tau ):
      [e, E] = e,   Lie_E g2 = (d-1) g2,   Lie_e g2 = g1,   Lie_e g1 = 0,
  with the degree d extracted as an exact scalar ratio;
* the regularity matrix (d-1)/2 * I + dE.  The primary matrix uses the plain
  coordinate Jacobian of E, which is the convention the reference results
  are stated in; the connection-corrected variant (adding Gamma^j_{is} E^s of
  metric 1) is computed alongside and both nondegeneracy verdicts are
  reported.

Everything is exact; flatness and all identities are decided on the generic
chart, never numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .expressions import GenExpr, RatExpr, VarTable
from .quadfield import QONE, QuadExt


def coordinate_names(table: VarTable, dim: int) -> tuple[str, ...]:
    """The chart coordinates of a table; jets and pencil parameters are not coordinates."""
    names = table.chart_names()
    if len(names) != dim:
        raise ValueError(f"expected {dim} chart coordinates on {table.names}, got {names}")
    return names


def _rat(x, table=None) -> RatExpr:
    if isinstance(x, RatExpr):
        return x
    if isinstance(x, GenExpr):
        return RatExpr(x)
    if table is not None:
        return RatExpr(GenExpr.const(table, x))
    raise TypeError(f"cannot interpret {type(x).__name__} as RatExpr")


@dataclass(frozen=True)
class ContraMetric:
    table: VarTable
    mat: tuple

    @staticmethod
    def build(table: VarTable, entries) -> "ContraMetric":
        r = len(entries)
        mat = tuple(tuple(_rat(entries[i][j], table) for j in range(r)) for i in range(r))
        for i in range(r):
            for j in range(i + 1, r):
                if not (mat[i][j] == mat[j][i]):
                    raise ValueError(f"metric is not symmetric at entry ({i},{j})")
        return ContraMetric(table, mat)

    @property
    def dim(self) -> int:
        return len(self.mat)

    def det(self) -> RatExpr:
        return mat_det(self.mat)

    def lift(self, target: VarTable) -> "ContraMetric":
        return ContraMetric(target, tuple(tuple(e.lift(target) for e in row)
                                          for row in self.mat))


@dataclass(frozen=True)
class VectorField:
    table: VarTable
    comps: tuple

    @staticmethod
    def build(table: VarTable, comps) -> "VectorField":
        return VectorField(table, tuple(_rat(c, table) for c in comps))

    @property
    def dim(self) -> int:
        return len(self.comps)


# -- small exact matrix helpers ---------------------------------------------------


def mat_det(m) -> RatExpr:
    r = len(m)
    if r == 1:
        return m[0][0]
    if r == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(r):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * mat_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def mat_inverse(m):
    """Inverse via the adjugate; fine for the small charts used here."""
    r = len(m)
    det = mat_det(m)
    if det.is_zero:
        raise ZeroDivisionError("metric is identically degenerate")
    if r == 1:
        return ((_rat(1, m[0][0].table) / det,),)
    cof = [[None] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(m) if k != i]
            c = mat_det(minor)
            if (i + j) % 2:
                c = -c
            cof[i][j] = c / det
    return tuple(tuple(cof[j][i] for j in range(r)) for i in range(r))


def mat_equal(a, b) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a, s):
    return tuple(tuple(x * s for x in row) for row in a)


# -- Christoffel symbols and curvature ------------------------------------------------
#
# The heavy computations run on polynomial numerators over one shared
# denominator: clearing the entry denominators gives g = N / D0 with N a
# matrix of GenExprs, the covariant metric is adj(N) * D0 / det(N), and every
# Christoffel symbol is a GenExpr over the common denominator D0 * det(N)^2.
# Sums then never cross-multiply, which keeps the Riemann tensor cheap.


@dataclass(frozen=True)
class _ChristoffelCore:
    nums: tuple        # N[i][j], contravariant numerators
    den0: GenExpr      # D0
    det: GenExpr       # det(N)
    gamma: tuple       # Gamma^k_{ij} numerators, shared denominator gden
    gden: GenExpr      # D0 * det(N)^2


@dataclass(frozen=True)
class ChristoffelData:
    metric: ContraMetric
    covariant_metric: tuple
    covariant: tuple      # Gamma^k_{ij} indexed [k][i][j]
    contravariant: tuple  # Gamma^{ij}_k indexed [i][j][k]
    core: _ChristoffelCore


def _det_poly(m):
    r = len(m)
    if r == 1:
        return m[0][0]
    if r == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(r):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det_poly(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def _adjugate_poly(m, table):
    r = len(m)
    if r == 1:
        return ((GenExpr.const(table, 1),),)
    adj = [[None] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(m) if k != i]
            c = _det_poly(minor)
            if (i + j) % 2:
                c = -c
            adj[j][i] = c
    return tuple(tuple(row) for row in adj)


def _christoffel_core(g: ContraMetric) -> _ChristoffelCore:
    table = g.table
    r = g.dim
    names = coordinate_names(table, r)
    dens: list[GenExpr] = []
    which = [[None] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            d = g.mat[i][j].den
            for t, seen in enumerate(dens):
                if seen == d:
                    which[i][j] = t
                    break
            else:
                which[i][j] = len(dens)
                dens.append(d)
    mult = []
    for t in range(len(dens)):
        m = GenExpr.const(table, 1)
        for s, d in enumerate(dens):
            if s != t:
                m = m * d
        mult.append(m)
    den0 = mult[0] * dens[0] if dens else GenExpr.const(table, 1)
    nums = tuple(tuple(g.mat[i][j].num * mult[which[i][j]] for j in range(r))
                 for i in range(r))
    det = _det_poly(nums)
    if det.is_zero:
        raise ZeroDivisionError("metric is identically degenerate")
    adj = _adjugate_poly(nums, table)
    # covariant metric entries: C[i][j] / det  with C = adj * D0
    cov = [[adj[i][j] * den0 for j in range(r)] for i in range(r)]
    dcov = [[[cov[i][j].diff(nm) for j in range(r)] for i in range(r)] for nm in names]
    ddet = [det.diff(nm) for nm in names]
    # d(cov_ij) = T[k][i][j] / det^2,  T = dC*det - C*ddet
    T = [[[dcov[k][i][j] * det - cov[i][j] * ddet[k] for j in range(r)] for i in range(r)]
         for k in range(r)]
    half = QuadExt(1) / 2
    gamma = [[[None] * r for _ in range(r)] for _ in range(r)]
    for k in range(r):
        for i in range(r):
            for j in range(i, r):
                total = None
                for s in range(r):
                    term = nums[k][s] * (T[i][s][j] + T[j][s][i] - T[s][i][j])
                    total = term if total is None else total + term
                val = total.scale(half)
                gamma[k][i][j] = val
                gamma[k][j][i] = val
    gden = den0 * det * det
    freeze = tuple(tuple(tuple(x for x in row) for row in plane) for plane in gamma)
    return _ChristoffelCore(nums, den0, det, freeze, gden)


def christoffels(g: ContraMetric) -> ChristoffelData:
    core = _christoffel_core(g)
    r = g.dim
    cov = tuple(tuple(RatExpr(_cov_num(core, i, j), core.det) for j in range(r))
                for i in range(r))
    gamma = tuple(tuple(tuple(RatExpr(core.gamma[k][i][j], core.gden)
                              for j in range(r)) for i in range(r)) for k in range(r))
    cden = core.den0 * core.gden
    contra = []
    for i in range(r):
        plane = []
        for j in range(r):
            row = []
            for k in range(r):
                total = None
                for s in range(r):
                    term = core.nums[i][s] * core.gamma[j][s][k]
                    total = term if total is None else total + term
                row.append(RatExpr(-total, cden))
            plane.append(tuple(row))
        contra.append(tuple(plane))
    return ChristoffelData(g, cov, gamma, tuple(contra), core)


def _cov_num(core: _ChristoffelCore, i, j):
    # adj(N)*D0 recomputed cheaply from nums; r is small
    r = len(core.nums)
    minor = [[core.nums[a][b] for b in range(r) if b != i] for a in range(r) if a != j]
    c = _det_poly(minor) if r > 1 else GenExpr.const(core.den0.table, 1)
    if (i + j) % 2:
        c = -c
    return c * core.den0


@dataclass(frozen=True)
class CurvatureReport:
    flat: bool
    witnesses: tuple  # ((l, k, i, j), RatExpr) for nonzero Riemann components


def riemann_components(g: ContraMetric, chris: ChristoffelData | None = None):
    """All independent components R^l_{k i j} with i < j (others follow by antisymmetry)."""
    core = chris.core if chris is not None else _christoffel_core(g)
    names = coordinate_names(g.table, g.dim)
    r = g.dim
    G, Q = core.gamma, core.gden
    dQ = [Q.diff(nm) for nm in names]
    out = {}
    for i in range(r):
        for j in range(i + 1, r):
            for l in range(r):
                for k in range(r):
                    num = (G[l][j][k].diff(names[i]) * Q - G[l][j][k] * dQ[i]
                           - G[l][i][k].diff(names[j]) * Q + G[l][i][k] * dQ[j])
                    for s in range(r):
                        num = num + G[l][i][s] * G[s][j][k]
                        num = num - G[l][j][s] * G[s][i][k]
                    out[(l, k, i, j)] = num
    return out, Q * Q


def is_flat(g: ContraMetric, chris: ChristoffelData | None = None) -> CurvatureReport:
    comps, den = riemann_components(g, chris)
    witnesses = tuple((idx, RatExpr(c, den)) for idx, c in comps.items() if not c.is_zero)
    return CurvatureReport(not witnesses, witnesses)


# -- Lie derivatives and brackets -------------------------------------------------------


def lie_metric(g: ContraMetric, x: VectorField):
    """(Lie_X g)^{ij}; the result is a symmetric matrix of RatExprs."""
    names = coordinate_names(g.table, g.dim)
    r = g.dim
    out = [[None] * r for _ in range(r)]
    dX = [[x.comps[i].diff(names[k]) for i in range(r)] for k in range(r)]
    for i in range(r):
        for j in range(i, r):
            total = None
            for k in range(r):
                term = x.comps[k] * g.mat[i][j].diff(names[k])
                term = term - g.mat[k][j] * dX[k][i]
                term = term - g.mat[i][k] * dX[k][j]
                total = term if total is None else total + term
            out[i][j] = total
            out[j][i] = total
    return tuple(tuple(row) for row in out)


def lie_metric_split(g: ContraMetric, x: VectorField):
    """The transport and deformation halves of the Lie derivative.

    Returns (A, B) with Lie_X g = A - B: A^{ij} = X^k d_k g^{ij} and
    B^{ij} = g^{kj} d_k X^i + g^{ik} d_k X^j.  Used by the numeric backstop,
    which wants two independently evaluable sides for an identity that the
    exact kernel has already cancelled.
    """
    names = coordinate_names(g.table, g.dim)
    r = g.dim
    zero = RatExpr(GenExpr.zero(g.table))
    dX = [[x.comps[i].diff(names[k]) for i in range(r)] for k in range(r)]
    A = [[zero] * r for _ in range(r)]
    B = [[zero] * r for _ in range(r)]
    for i in range(r):
        for j in range(i, r):
            a = b = None
            for k in range(r):
                ta = x.comps[k] * g.mat[i][j].diff(names[k])
                tb = g.mat[k][j] * dX[k][i] + g.mat[i][k] * dX[k][j]
                a = ta if a is None else a + ta
                b = tb if b is None else b + tb
            A[i][j] = A[j][i] = a
            B[i][j] = B[j][i] = b
    return tuple(map(tuple, A)), tuple(map(tuple, B))


def bracket(x: VectorField, y: VectorField) -> VectorField:
    names = coordinate_names(x.table, x.dim)
    r = x.dim
    comps = []
    for i in range(r):
        total = None
        for k in range(r):
            term = x.comps[k] * y.comps[i].diff(names[k])
            term = term - y.comps[k] * x.comps[i].diff(names[k])
            total = term if total is None else total + term
        comps.append(total)
    return VectorField(x.table, tuple(comps))


def bracket_split(x: VectorField, y: VectorField):
    """[x, y] as a pair (A, B) with bracket = A - B, for numeric cross-checks."""
    names = coordinate_names(x.table, x.dim)
    r = x.dim
    A, B = [], []
    for i in range(r):
        a = b = None
        for k in range(r):
            ta = x.comps[k] * y.comps[i].diff(names[k])
            tb = y.comps[k] * x.comps[i].diff(names[k])
            a = ta if a is None else a + ta
            b = tb if b is None else b + tb
        A.append(a)
        B.append(b)
    return tuple(A), tuple(B)


# -- flat pencils ------------------------------------------------------------------------


@dataclass(frozen=True)
class PencilReport:
    flat_g1: CurvatureReport
    flat_g2: CurvatureReport
    pencil_flat: CurvatureReport
    christoffels_additive: bool
    additivity_witnesses: tuple

    @property
    def passed(self) -> bool:
        return (self.flat_g1.flat and self.flat_g2.flat
                and self.pencil_flat.flat and self.christoffels_additive)


def pencil_check(g1: ContraMetric, g2: ContraMetric,
                 pencil_var: str = "lam") -> PencilReport:
    """Verify that g2 + lam*g1 is flat in lam with additive contravariant symbols."""
    not_flat = CurvatureReport(False, ())

    def flatness(g, chris=None):
        try:
            return is_flat(g, chris)
        except ZeroDivisionError:  # identically degenerate: not a flat metric
            return not_flat

    flat1 = flatness(g1)
    flat2 = flatness(g2)
    lam_table = g1.table.with_pencil(pencil_var)
    lam = RatExpr(GenExpr.variable(lam_table, pencil_var))
    g1l = g1.lift(lam_table)
    g2l = g2.lift(lam_table)
    r = g1.dim
    pencil = ContraMetric(lam_table, tuple(
        tuple(g2l.mat[i][j] + lam * g1l.mat[i][j] for j in range(r)) for i in range(r)))
    try:
        chris_p = christoffels(pencil)
    except ZeroDivisionError:
        return PencilReport(flat1, flat2, not_flat, False, ())
    flat_p = is_flat(pencil, chris_p)
    if not (flat1.flat and flat2.flat):
        return PencilReport(flat1, flat2, flat_p, False, ())
    c1 = christoffels(g1).contravariant
    c2 = christoffels(g2).contravariant
    witnesses = []
    for i in range(r):
        for j in range(r):
            for k in range(r):
                expected = c2[i][j][k].lift(lam_table) + lam * c1[i][j][k].lift(lam_table)
                if not (chris_p.contravariant[i][j][k] == expected):
                    witnesses.append((i, j, k))
    return PencilReport(flat1, flat2, flat_p, not witnesses, tuple(witnesses))


# -- quasihomogeneity ---------------------------------------------------------------------


def euler_fields(g1: ContraMetric, g2: ContraMetric, tau) -> tuple[VectorField, VectorField]:
    """The pair (e, E) = (g1 grad tau, g2 grad tau)."""
    names = coordinate_names(g1.table, g1.dim)
    r = g1.dim
    tau = _rat(tau, g1.table)
    grad = [tau.diff(n) for n in names]
    def contract(g):
        comps = []
        for i in range(r):
            total = None
            for s in range(r):
                term = g.mat[i][s] * grad[s]
                total = term if total is None else total + term
            comps.append(total)
        return VectorField(g.table, tuple(comps))
    return contract(g1), contract(g2)


def extract_scalar_ratio(lhs, rhs):
    """The constant c in Q(sqrt3) with lhs = c * rhs entrywise, else a witness.

    Returns (c, None) on success, (None, (i, j)) on the first failing entry.
    """
    ratio = None
    for i, (ra, rb) in enumerate(zip(lhs, rhs)):
        for j, (a, b) in enumerate(zip(ra, rb)):
            if b.is_zero:
                if not a.is_zero:
                    return None, (i, j)
                continue
            r = (a / b).as_quad_constant()
            if r is None or (ratio is not None and r != ratio):
                return None, (i, j)
            ratio = r
    return ratio, None


@dataclass(frozen=True)
class QuasiHomReport:
    e: VectorField
    E: VectorField
    bracket_ok: bool
    scaling_ok: bool
    lie_e_g2_is_g1: bool
    lie_e_g1_is_zero: bool
    charge: QuadExt | None
    witness: tuple | None = None

    @property
    def passed(self) -> bool:
        return (self.bracket_ok and self.scaling_ok
                and self.lie_e_g2_is_g1 and self.lie_e_g1_is_zero)


def quasihom_check(g1: ContraMetric, g2: ContraMetric, tau) -> QuasiHomReport:
    e, E = euler_fields(g1, g2, tau)
    br = bracket(e, E)
    bracket_ok = all(a == b for a, b in zip(br.comps, e.comps))
    lie_E_g2 = lie_metric(g2, E)
    ratio, witness = extract_scalar_ratio(lie_E_g2, g2.mat)
    charge = None if ratio is None else ratio + QONE
    lie_e_g2 = lie_metric(g2, e)
    match_g1 = mat_equal(lie_e_g2, g1.mat)
    lie_e_g1 = lie_metric(g1, e)
    zero_ok = all(entry.is_zero for row in lie_e_g1 for entry in row)
    return QuasiHomReport(e, E, bracket_ok, ratio is not None, match_g1, zero_ok,
                          charge, witness)


# -- regularity -----------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    matrix: tuple             # (d-1)/2 I + coordinate Jacobian of E
    covariant_matrix: tuple   # same with the metric-1 connection correction
    determinant: RatExpr
    nondegenerate: bool
    covariant_nondegenerate: bool
    conventions_agree: bool


def regularity(g1: ContraMetric, E: VectorField, d: QuadExt) -> RegularityReport:
    names = coordinate_names(g1.table, g1.dim)
    r = g1.dim
    half_shift = (d - QONE) / 2
    shift = RatExpr(GenExpr.const(g1.table, half_shift))
    jac = [[E.comps[j].diff(names[i]) for j in range(r)] for i in range(r)]
    plain = [[jac[i][j] + shift if i == j else jac[i][j] for j in range(r)] for i in range(r)]
    gamma = christoffels(g1).covariant
    corrected = []
    for i in range(r):
        row = []
        for j in range(r):
            corr = plain[i][j]
            for s in range(r):
                corr = corr + gamma[j][i][s] * E.comps[s]
            row.append(corr)
        corrected.append(row)
    plain = tuple(tuple(row) for row in plain)
    corrected = tuple(tuple(row) for row in corrected)
    det = mat_det(plain)
    det_cov = mat_det(corrected)
    return RegularityReport(plain, corrected, det, not det.is_zero,
                            not det_cov.is_zero, mat_equal(plain, corrected))


# -- chart changes ----------------------------------------------------------------------------


def transform_metric(g: ContraMetric, target: VarTable, forward: list[GenExpr],
                     back_subst: dict) -> ContraMetric:
    """Push a contravariant metric through a chart change.

    `forward` lists the new coordinates as expressions on the old chart;
    `back_subst` is a monomial substitution expressing the old coordinates in
    the new ones.  The result is Omega'^{ij} = A^i_k A^j_l Omega^{kl} with
    A = d(new)/d(old), rewritten on the new chart.
    """
    names = coordinate_names(g.table, g.dim)
    r = g.dim
    A = [[RatExpr(forward[i].diff(names[k])) for k in range(r)] for i in range(r)]
    out = [[None] * r for _ in range(r)]
    for i in range(r):
        for j in range(i, r):
            total = None
            for k in range(r):
                for l in range(r):
                    term = A[i][k] * A[j][l] * g.mat[k][l]
                    total = term if total is None else total + term
            moved = total.subst_monomial(target, back_subst)
            out[i][j] = moved
            out[j][i] = moved
    return ContraMetric(target, tuple(tuple(row) for row in out))


def transform_vector(x: VectorField, target: VarTable, forward: list[GenExpr],
                     back_subst: dict) -> VectorField:
    names = coordinate_names(x.table, x.dim)
    r = x.dim
    comps = []
    for i in range(r):
        total = None
        for k in range(r):
            term = RatExpr(forward[i].diff(names[k])) * x.comps[k]
            total = term if total is None else total + term
        comps.append(total.subst_monomial(target, back_subst))
    return VectorField(target, tuple(comps))
