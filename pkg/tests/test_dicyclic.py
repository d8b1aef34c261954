from fractions import Fraction

import mpmath
import pytest

from flatpencil.dicyclic import (X_CHART, GroupElement, alpha, generate_group,
                                 group_relations_check, hessian_pushforward,
                                 homogeneous_degree, identity, invariance_check,
                                 invariants, quotient_metric, sigma, syzygy_check,
                                 syzygy_expression, transform_terms)
from flatpencil.expressions import GenExpr
from flatpencil.numeric import eval_ratexpr
from flatpencil.quadfield import QuadExt


@pytest.mark.parametrize("n", [2, 3, 5])
def test_group_relations(n):
    rep = group_relations_check(n)
    assert rep.passed
    assert rep.order == 4 * n


def test_sigma_order_n2():
    assert sigma(2) ** 4 == identity(2)


def test_alpha_square_acts_as_minus_one():
    n = 2
    sq = alpha(n) * alpha(n)
    assert sq == sigma(n) ** n
    # x_i -> -x_i on both coordinates
    assert sq.perm == (0, 1) and sq.phases == (n, n)


def test_group_order_n3_by_brute_closure():
    assert len(generate_group(3)) == 12


def test_rejects_n_below_two():
    with pytest.raises(ValueError):
        group_relations_check(1)


@pytest.mark.parametrize("n", range(2, 9))
def test_invariance_of_generators(n):
    inv = invariants(n)
    for g in (sigma(n), alpha(n)):
        for u in (inv.u1, inv.u2, inv.u3):
            assert invariance_check(u, g)


def test_u3_under_alpha():
    inv = invariants(3)
    assert invariance_check(inv.u3, alpha(3))


def test_phase_bookkeeping():
    x1x2 = GenExpr.monomial(X_CHART, 1, {"x1": QuadExt(1), "x2": QuadExt(1)})
    x1sq = GenExpr.monomial(X_CHART, 1, {"x1": QuadExt(2)})
    for n in (2, 3, 4):
        assert invariance_check(x1x2, sigma(n))
        assert not invariance_check(x1sq, sigma(n))
    # the transformed x1^2 carries phase 2 (reduced mod w^n = -1)
    terms = transform_terms(x1sq, sigma(3))
    assert list(terms) == [((QuadExt(2), QuadExt(0)), 2)]


def test_invariant_degrees():
    inv = invariants(4)
    assert homogeneous_degree(inv.u1) == 4
    assert homogeneous_degree(inv.u2) == 8
    assert homogeneous_degree(inv.u3) == 10


@pytest.mark.parametrize("n", range(2, 9))
def test_syzygy(n):
    assert syzygy_check(n)


def test_perturbed_syzygy_fails():
    n = 3
    inv = invariants(n)
    wrong = inv.u3 ** 2 - inv.u1 * inv.u2 ** 2 + 5 * inv.u1 ** (n + 1)
    assert not wrong.is_zero


@pytest.mark.parametrize("n", range(2, 9))
def test_hessian_pushforward_matches_claim(n):
    rep = hessian_pushforward(n)
    assert rep.passed


def test_quotient_metric_entries():
    g = quotient_metric(2)
    u1 = GenExpr.variable(g.table, "u1")
    u2 = GenExpr.variable(g.table, "u2")
    assert g.mat[0][0] == u1.scale(Fraction(4, 3))
    assert g.mat[0][1] == u2.scale(Fraction(4, 3))  # 2n/3 with n = 2


def test_pushforward_numeric_spot_check():
    rep = hessian_pushforward(2)
    pt = {"x1": Fraction(1), "x2": Fraction(2)}
    with mpmath.workprec(128):
        value = eval_ratexpr(rep.pushforward_x[0][0], pt, 128)
        # u1 = x1^2 x2^2 = 4 there, and (du1, du1) = 4 u1 / 3 = 16/3
        assert abs(value - mpmath.mpf(16) / 3) < mpmath.mpf(2) ** -100


def test_composition_convention_is_consistent():
    n = 3
    g = sigma(n) * alpha(n)
    h = g.inverse()
    assert g * h == identity(n)
    assert h * g == identity(n)
    assert isinstance(g, GroupElement)
