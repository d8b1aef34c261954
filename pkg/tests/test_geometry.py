import random
from fractions import Fraction

import pytest

from flatpencil.dicyclic import U_CHART, quotient_metric
from flatpencil.expressions import GenExpr, RatExpr, VarTable
from flatpencil.geometry import (ContraMetric, VectorField, bracket, christoffels,
                                 euler_fields, is_flat, lie_metric, lie_metric_split,
                                 mat_equal, pencil_check, quasihom_check, regularity,
                                 transform_metric)
from flatpencil.quadfield import QONE, SQRT3, QuadExt

AB = VarTable.chart("a", "b")


def const_metric(table, entries):
    return ContraMetric.build(table, [[GenExpr.const(table, e) for e in row]
                                      for row in entries])


def antidiag(table):
    return const_metric(table, [[0, 1], [1, 0]])


def u_var(name, exp=QONE):
    return GenExpr.variable(U_CHART, name, exp)


def first_metric(n, root_sign=1):
    root = SQRT3 if root_sign > 0 else -SQRT3
    p = QuadExt(Fraction(n, 2)) * (QONE + root)
    f = GenExpr.variable(U_CHART, "u1", p)
    e = VectorField.build(U_CHART, (GenExpr.zero(U_CHART), f))
    return ContraMetric(U_CHART, lie_metric(quotient_metric(n), e))


def test_constant_metric_has_zero_symbols():
    chris = christoffels(antidiag(AB))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                assert chris.covariant[k][i][j].is_zero
                assert chris.contravariant[k][i][j].is_zero


def test_quotient_metric_is_flat():
    assert is_flat(quotient_metric(2)).flat
    assert is_flat(quotient_metric(5)).flat


def test_nonflat_witness():
    g = ContraMetric.build(U_CHART, [[GenExpr.const(U_CHART, 1), GenExpr.zero(U_CHART)],
                                     [GenExpr.zero(U_CHART), u_var("u1")]])
    rep = is_flat(g)
    assert not rep.flat and rep.witnesses


def test_lie_derivative_of_zero_field():
    X = VectorField.build(U_CHART, (GenExpr.zero(U_CHART), GenExpr.zero(U_CHART)))
    lie = lie_metric(quotient_metric(3), X)
    assert all(entry.is_zero for row in lie for entry in row)


def test_lie_derivative_scaling_field():
    n = 2
    g2 = quotient_metric(n)
    tau = u_var("u1").scale(-SQRT3 / (2 * n))
    _, E = euler_fields(ContraMetric(U_CHART, lie_metric(g2, VectorField.build(
        U_CHART, (GenExpr.zero(U_CHART), u_var("u1", QuadExt(1, 1)))))), g2, tau)
    lie = lie_metric(g2, E)
    factor = RatExpr(GenExpr.const(U_CHART, QuadExt(2) / (SQRT3 * n)))
    expected = [[g2.mat[i][j] * factor for j in range(2)] for i in range(2)]
    assert mat_equal(lie, expected)


def test_lie_derivative_is_linear():
    rng = random.Random(9)
    g = quotient_metric(2)

    def rand_field():
        comps = []
        for _ in range(2):
            comps.append(GenExpr.monomial(
                U_CHART, QuadExt(rng.randint(-4, 4), rng.randint(-2, 2)),
                {"u1": QuadExt(rng.randint(0, 2)), "u2": QuadExt(rng.randint(0, 2))}))
        return VectorField.build(U_CHART, comps)

    for _ in range(10):
        X, Y = rand_field(), rand_field()
        XY = VectorField.build(U_CHART, [x + y for x, y in zip(X.comps, Y.comps)])
        lhs = lie_metric(g, XY)
        a, b = lie_metric(g, X), lie_metric(g, Y)
        rhs = [[a[i][j] + b[i][j] for j in range(2)] for i in range(2)]
        assert mat_equal(lhs, rhs)


def test_lie_split_recombines():
    g = quotient_metric(3)
    X = VectorField.build(U_CHART, (u_var("u1"), u_var("u2")))
    A, B = lie_metric_split(g, X)
    lie = lie_metric(g, X)
    assert mat_equal(lie, [[A[i][j] - B[i][j] for j in range(2)] for i in range(2)])


def test_pencil_trivial_pair():
    rep = pencil_check(antidiag(AB), antidiag(AB))
    assert rep.passed


def test_pencil_paper_pair():
    assert pencil_check(first_metric(2), quotient_metric(2)).passed


def test_pencil_rejects_nonflat_pair():
    g1 = const_metric(U_CHART, [[1, 0], [0, 0]])
    g2 = ContraMetric.build(U_CHART, [[GenExpr.const(U_CHART, 1), GenExpr.zero(U_CHART)],
                                      [GenExpr.zero(U_CHART), u_var("u1")]])
    rep = pencil_check(g1, g2)
    assert not rep.passed
    assert not rep.flat_g2.flat


def test_euler_fields_examples():
    n = 2
    g2 = quotient_metric(n)
    g1 = first_metric(n)
    tau = u_var("u1").scale(-SQRT3 / (2 * n))
    e, E = euler_fields(g1, g2, tau)
    p = QuadExt(Fraction(n, 2)) * (QONE + SQRT3)
    assert e.comps[0].is_zero
    assert e.comps[1] == RatExpr(u_var("u1", p))
    assert E.comps[0] == RatExpr(u_var("u1").scale(QuadExt(-2) / (SQRT3 * n)))
    assert E.comps[1] == RatExpr(u_var("u2").scale(QuadExt(-1) / SQRT3))
    e0, E0 = euler_fields(g1, g2, GenExpr.zero(U_CHART))
    assert all(c.is_zero for c in e0.comps) and all(c.is_zero for c in E0.comps)


def test_quasihom_paper_branches():
    for n in (2, 3):
        for sgn in (1, -1):
            g2 = quotient_metric(n)
            g1 = first_metric(n, sgn)
            # plus branch: tau = -(sqrt3/2n) u1; minus branch: +(sqrt3/2n) u1
            tau = u_var("u1").scale((SQRT3 * (-sgn)) / (2 * n))
            rep = quasihom_check(g1, g2, tau)
            assert rep.passed
            expected = (QuadExt(2) + SQRT3 * n * sgn) / (SQRT3 * n * sgn)
            assert rep.charge == expected


def test_quasihom_failure_witness():
    g2 = quotient_metric(2)
    rep = quasihom_check(g2, g2, u_var("u1"))
    assert not rep.bracket_ok  # e = E, so [e, E] = 0 != e
    assert not rep.passed


def test_bracket_antisymmetry():
    X = VectorField.build(U_CHART, (u_var("u1", QuadExt(2)), u_var("u2")))
    Y = VectorField.build(U_CHART, (u_var("u2", QuadExt(2)), u_var("u1")))
    XY = bracket(X, Y)
    YX = bracket(Y, X)
    assert all((a + b).is_zero for a, b in zip(XY.comps, YX.comps))


def test_regularity_paper_matrix():
    n = 2
    g2 = quotient_metric(n)
    g1 = first_metric(n)
    tau = u_var("u1").scale(-SQRT3 / (2 * n))
    quasi = quasihom_check(g1, g2, tau)
    rep = regularity(g1, quasi.E, quasi.charge)
    root_n = SQRT3 * n
    expected = ((RatExpr(GenExpr.const(U_CHART, -QONE / root_n)),
                 RatExpr(GenExpr.zero(U_CHART))),
                (RatExpr(GenExpr.zero(U_CHART)),
                 RatExpr(GenExpr.const(U_CHART, (QONE - QuadExt(n)) / root_n))))
    assert mat_equal(rep.matrix, expected)
    assert rep.nondegenerate and rep.covariant_nondegenerate
    assert not rep.conventions_agree  # the connection correction is nonzero here


def test_regularity_degenerate_case():
    g = antidiag(AB)
    E = VectorField.build(AB, (GenExpr.zero(AB), GenExpr.zero(AB)))
    rep = regularity(g, E, QONE)
    assert all(entry.is_zero for row in rep.matrix for entry in row)
    assert not rep.nondegenerate


def test_regularity_minus_branch_nondegenerate():
    n = 2
    g2 = quotient_metric(n)
    g1 = first_metric(n, -1)
    tau = u_var("u1").scale(SQRT3 / (2 * n))
    quasi = quasihom_check(g1, g2, tau)
    rep = regularity(g1, quasi.E, quasi.charge)
    assert rep.nondegenerate and rep.covariant_nondegenerate


def test_flatness_preserved_by_scaling_chart_change():
    g = quotient_metric(2)
    target = VarTable.chart("v1", "v2", positive=("v1",))
    forward = [u_var("u1").scale(Fraction(2, 1)), u_var("u2").scale(Fraction(5, 3))]
    back = {"u1": (Fraction(1, 2), {"v1": QONE}), "u2": (Fraction(3, 5), {"v2": QONE})}
    moved = transform_metric(g, target, forward, back)
    assert is_flat(moved).flat


def test_flatness_preserved_by_constant_linear_change():
    g = antidiag(AB)
    # new coordinates (a + 2b, a - b): constant invertible linear change
    a, b = GenExpr.variable(AB, "a"), GenExpr.variable(AB, "b")
    target = VarTable.chart("p", "q")
    forward = [a + b.scale(2), a - b]
    moved_entries = [[None] * 2 for _ in range(2)]
    names = ("a", "b")
    for i in range(2):
        for j in range(2):
            total = RatExpr(GenExpr.zero(AB))
            for k in range(2):
                for l in range(2):
                    total = total + RatExpr(forward[i].diff(names[k])) * \
                        RatExpr(forward[j].diff(names[l])) * g.mat[k][l]
            # entries are constants, so the chart swap is a relabeling
            moved_entries[i][j] = GenExpr.const(target, total.num.constant_value())
    moved = ContraMetric.build(target, moved_entries)
    assert is_flat(moved).flat
