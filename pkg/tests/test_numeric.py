from fractions import Fraction

import mpmath
import pytest

from flatpencil.dicyclic import U_CHART, X_CHART, invariants, quotient_metric
from flatpencil.expressions import GenExpr, VarTable
from flatpencil.geometry import christoffels
from flatpencil.numeric import (BackstopLog, SampleDomain, compare_christoffels,
                                eval_genexpr, eval_ratexpr, fd_christoffels,
                                fd_riemann_check, zero_check_random)
from flatpencil.quadfield import QONE, SQRT3, QuadExt


def test_eval_invariant():
    u1 = invariants(2).u1
    assert eval_genexpr(u1, {"x1": Fraction(1), "x2": Fraction(2)}, 128) == 4


def test_eval_metric_entry():
    g = quotient_metric(2)
    pt = {"u1": Fraction(4), "u2": Fraction(1)}
    with mpmath.workprec(128):
        assert abs(eval_ratexpr(g.mat[0][0], pt, 128) - mpmath.mpf(16) / 3) < mpmath.mpf(2) ** -100


def test_eval_irrational_power():
    n = 2
    p = QuadExt(Fraction(n, 2)) * (QONE + SQRT3)
    f = GenExpr.variable(U_CHART, "u1", p)
    value = eval_genexpr(f, {"u1": Fraction(2), "u2": Fraction(1)}, 128)
    with mpmath.workprec(128):
        assert abs(value - mpmath.power(2, 1 + mpmath.sqrt(3))) < mpmath.mpf(2) ** -96
        assert abs(value - mpmath.mpf("6.64399417")) < 1e-8


def test_eval_respects_positivity():
    f = GenExpr.variable(U_CHART, "u1", SQRT3)
    with pytest.raises(ValueError):
        eval_genexpr(f, {"u1": Fraction(-1), "u2": Fraction(1)}, 128)


def test_zero_check_syzygy_sides():
    n = 3
    inv = invariants(n)
    log = BackstopLog()
    check = log.confirm_equal("syzygy", [inv.u3 ** 2 + 4 * inv.u1 ** (n + 1)],
                              [inv.u1 * inv.u2 ** 2], SampleDomain.box(X_CHART))
    assert check.passed
    assert check.samples == 10


def _ode_residual(n, p):
    jt = U_CHART.with_jets("u1")
    u1 = GenExpr.variable(jt, "u1")
    f = GenExpr.variable(jt, "f")
    fp = GenExpr.variable(jt, "fp")
    ode = (u1 * f * fp).scale(2 * n) - (u1 ** 2 * fp ** 2).scale(2) + (f ** 2).scale(n * n)
    return ode.subst_monomial(U_CHART, {
        "f": (1, {"u1": p}), "fp": (p, {"u1": p - 1}), "fpp": (p * (p - 1), {"u1": p - 2})})


def test_zero_check_ode_solution_passes():
    n = 4
    p = QuadExt(Fraction(n, 2)) * (QONE - SQRT3)
    residual = _ode_residual(n, p)
    assert residual.is_zero
    check = zero_check_random(residual, SampleDomain.box(U_CHART))
    assert check.passed


def test_zero_check_rejects_non_solution():
    n = 2
    residual = _ode_residual(n, QuadExt(n))
    assert not residual.is_zero
    check = zero_check_random(residual, SampleDomain.box(U_CHART))
    assert not check.passed


def test_fd_christoffels_constant_metric():
    table = VarTable.chart("a", "b")
    from flatpencil.geometry import ContraMetric
    g = ContraMetric.build(table, [[GenExpr.const(table, 0), GenExpr.const(table, 1)],
                                   [GenExpr.const(table, 1), GenExpr.const(table, 0)]])
    gamma = fd_christoffels(g, {"a": Fraction(1), "b": Fraction(2)}, Fraction(1, 2 ** 20), 256)
    with mpmath.workprec(256):
        worst = max(abs(gamma[j][s][k]) for j in range(2) for s in range(2) for k in range(2))
        assert worst < mpmath.mpf(1) / 10 ** 30


def test_fd_matches_symbolic_christoffels():
    g = quotient_metric(2)
    chris = christoffels(g)
    err = compare_christoffels(g, chris, {"u1": Fraction(2), "u2": Fraction(3)},
                               Fraction(1, 2 ** 20), 256)
    assert err < mpmath.mpf(1) / 10 ** 8


def test_fd_high_precision_small_step():
    # tighter step pushes the agreement to ~1e-30 without roundoff trouble at 256 bits
    g = quotient_metric(2)
    chris = christoffels(g)
    err = compare_christoffels(g, chris, {"u1": Fraction(2), "u2": Fraction(3)},
                               Fraction(1, 2 ** 52), 256)
    assert err < mpmath.mpf(1) / 10 ** 30


def test_fd_second_order_convergence():
    g = quotient_metric(2)
    chris = christoffels(g)
    pt = {"u1": Fraction(2), "u2": Fraction(3)}
    e1 = compare_christoffels(g, chris, pt, Fraction(1, 2 ** 16), 256)
    e2 = compare_christoffels(g, chris, pt, Fraction(1, 2 ** 17), 256)
    ratio = e1 / e2
    assert 3 < ratio < 5  # halving the step shrinks the error about 4x


def test_fd_riemann_residual_small_for_flat_metric():
    g = quotient_metric(3)
    chris = christoffels(g)
    res = fd_riemann_check(chris, {"u1": Fraction(2), "u2": Fraction(3)},
                           Fraction(1, 2 ** 20), 256)
    assert res < mpmath.mpf(1) / 10 ** 8


def test_sampling_is_deterministic():
    import random
    dom = SampleDomain.box(U_CHART)
    pts1 = [dom.draw(random.Random(0)) for _ in range(3)]
    pts2 = [dom.draw(random.Random(0)) for _ in range(3)]
    assert pts1[0] == pts2[0]
    inv = invariants(2)
    c1 = zero_check_random(GenExpr.zero(X_CHART) + (inv.u1 - inv.u1), SampleDomain.box(X_CHART))
    c2 = zero_check_random(inv.u1 - inv.u1, SampleDomain.box(X_CHART))
    assert c1.passed == c2.passed == True


def test_domain_guards_positive_variables():
    with pytest.raises(ValueError):
        SampleDomain(U_CHART, {"u1": (Fraction(0), Fraction(1)),
                               "u2": (Fraction(1, 4), Fraction(4))})
    with pytest.raises(ValueError):
        SampleDomain(U_CHART, {"u1": (Fraction(1), Fraction(1, 2)),
                               "u2": (Fraction(1, 4), Fraction(4))})
