import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatpencil.numeric import const_value
from flatpencil.quadfield import QONE, SQRT3, QuadExt
from flatpencil.radicals import (RadicalConstant, RadicalUnit, try_quad_ratio)

R = RadicalConstant.rational_power


def small_quads():
    f = st.fractions(min_value=-10, max_value=10, max_denominator=4)
    return st.builds(QuadExt, f, f)


def small_constants():
    def build(items):
        total = RadicalConstant.zero()
        for p, e, c in items:
            total = total + RadicalConstant.from_unit(RadicalUnit.of_rational(p, e), c)
        return total
    item = st.tuples(st.sampled_from([2, 3, 5, 7, 11, 13]), small_quads(), small_quads())
    return st.builds(build, st.lists(item, max_size=4))


def test_exponents_summing_to_one():
    n = 2
    a = R(2, QONE - SQRT3 * n)
    b = R(2, SQRT3 * n)
    assert a * b == RadicalConstant.coerce(2)


def test_additive_cancellation():
    u = RadicalConstant.from_unit(RadicalUnit.of_rational(2, SQRT3))
    assert (u - u).is_zero


def test_leading_coefficient_times_reciprocal():
    n = 2
    c = R(2, -SQRT3 * n) * R(3, (SQRT3 * n + 1) / 2)
    recip = R(2, SQRT3 * n) * R(3, -(SQRT3 * n + 1) / 2)
    assert c * recip == RadicalConstant.one()


def test_rational_power_factors_primes():
    u = RadicalUnit.of_rational(Fraction(2, 3), SQRT3)
    assert u.exps == ((2, SQRT3), (3, -SQRT3))


def test_identity_unit_power():
    assert RadicalUnit.one().pow_quad(SQRT3).is_one


def test_power_of_composite_base():
    # (4/sqrt3)^(1+sqrt3) = 4^(1+sqrt3) * 3^(-(1+sqrt3)/2)
    base = RadicalConstant.from_unit(
        RadicalUnit.of_rational(4, QONE) * RadicalUnit.of_rational(3, QuadExt(Fraction(-1, 2))))
    got = base.pow_quad(QONE + SQRT3)
    expected = R(4, QONE + SQRT3) * R(3, -(QONE + SQRT3) / 2)
    assert got == expected
    with mpmath.workprec(128):
        direct = mpmath.power(4 / mpmath.sqrt(3), 1 + mpmath.sqrt(3))
        assert abs(const_value(got) - direct) < mpmath.mpf(2) ** -100


def test_zero_predicates():
    assert RadicalConstant.zero().is_zero
    u = RadicalConstant.from_unit(RadicalUnit.of_rational(2, SQRT3))
    assert (u + (-1) * u).is_zero
    v = RadicalConstant.from_unit(RadicalUnit.of_rational(3, SQRT3))
    assert not (u - v).is_zero


def test_distinct_units_numerically_separated():
    u = RadicalConstant.from_unit(RadicalUnit.of_rational(2, SQRT3))
    v = RadicalConstant.from_unit(RadicalUnit.of_rational(3, SQRT3))
    with mpmath.workprec(256):
        assert abs(const_value(u - v)) > mpmath.mpf(1) / 10 ** 6


def test_canonical_form_merges_rational_overlap():
    # 2^2 * 3^(-1/2) and the coefficient (4 sqrt3 / 3) denote the same number
    a = R(2, QuadExt(2)) * R(3, QuadExt(Fraction(-1, 2)))
    b = RadicalConstant.from_quad(QuadExt(0, Fraction(4, 3)))
    assert a == b
    # and half-integer exponents of 3 reduce into [0, 1/2)
    c = R(3, QuadExt(Fraction(5, 2)))
    assert c == RadicalConstant.from_quad(QuadExt(0, 9))


@given(small_constants(), small_constants(), small_constants())
@settings(max_examples=40, deadline=None)
def test_ring_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z


@given(small_constants(), small_constants())
@settings(max_examples=30, deadline=None)
def test_zero_verdicts_match_numerics(x, y):
    diff = (x + y) - (y + x)
    assert diff.is_zero
    with mpmath.workprec(256):
        assert const_value(diff) == 0
        prod_diff = x * y - y * x
        assert const_value(prod_diff) == 0


def test_numeric_consistency_of_random_zeros():
    rng = random.Random(3)
    primes = [2, 3, 5, 7, 11, 13]
    for _ in range(25):
        total = RadicalConstant.zero()
        pieces = []
        for _ in range(rng.randint(1, 4)):
            q = QuadExt(Fraction(rng.randint(-10, 10), rng.randint(1, 3)),
                        Fraction(rng.randint(-10, 10), rng.randint(1, 3)))
            c = RadicalConstant.from_unit(
                RadicalUnit.of_rational(rng.choice(primes), q),
                QuadExt(rng.randint(-5, 5), rng.randint(-5, 5)))
            pieces.append(c)
            total = total + c
        for c in pieces:
            total = total - c
        assert total.is_zero
        with mpmath.workprec(256):
            assert abs(const_value(total)) < mpmath.mpf(2) ** -128


def test_division_restrictions():
    u = RadicalConstant.from_unit(RadicalUnit.of_rational(2, SQRT3), QuadExt(3))
    assert u * u.inverse_single() == RadicalConstant.one()
    two_terms = u + RadicalConstant.one()
    with pytest.raises(ValueError):
        two_terms.inverse_single()
    with pytest.raises(ValueError):
        two_terms.pow_quad(SQRT3)


def test_negative_base_rejected():
    with pytest.raises(ValueError):
        RadicalUnit.of_rational(-2, SQRT3)
    neg = RadicalConstant.from_quad(QuadExt(-2))
    with pytest.raises(ValueError):
        neg.pow_quad(SQRT3)
    # integer exponents of negative coefficients are fine
    assert neg.pow_quad(QuadExt(2)) == RadicalConstant.coerce(4)


def test_sqrt3_coefficient_power():
    # canonical positive constants may carry a sqrt(3) coefficient
    c = RadicalConstant.from_quad(QuadExt(0, 2))  # 2 sqrt(3)
    got = c.pow_quad(QuadExt(Fraction(-1, 2)))
    with mpmath.workprec(128):
        direct = mpmath.power(2 * mpmath.sqrt(3), mpmath.mpf(-0.5))
        assert abs(const_value(got) - direct) < mpmath.mpf(2) ** -100


def test_quad_ratio():
    u = RadicalConstant.from_unit(RadicalUnit.of_rational(2, SQRT3), QuadExt(2))
    assert try_quad_ratio(u.scale(SQRT3), u) == SQRT3
    v = RadicalConstant.from_unit(RadicalUnit.of_rational(3, SQRT3))
    assert try_quad_ratio(u, v) is None
    mixed = u + v
    assert try_quad_ratio(mixed.scale(QuadExt(5)), mixed) == QuadExt(5)
