import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatpencil.quadfield import QONE, QZERO, SQRT3, QuadExt, quad


def fracs(max_num=10 ** 6, max_den=10 ** 3):
    return st.fractions(min_value=-max_num, max_value=max_num, max_denominator=max_den)


quads = st.builds(QuadExt, fracs(), fracs())


def test_field_norm():
    assert (QONE + SQRT3) * (QONE - SQRT3) == QuadExt(-2)


def test_conjugate_division():
    assert SQRT3.inverse() == QuadExt(0, Fraction(1, 3))
    assert QuadExt(1) / SQRT3 == QuadExt(0, Fraction(1, 3))


def test_conjugate_exponents_sum_to_n():
    n = 2
    plus = QuadExt(Fraction(n, 2)) * (QONE + SQRT3)
    minus = QuadExt(Fraction(n, 2)) * (QONE - SQRT3)
    assert plus + minus == QuadExt(n) == QuadExt(2)


@pytest.mark.parametrize("a,b,expected", [
    (1, -1, -1),   # 1 < sqrt(3)
    (2, -1, 1),    # 4 > 3
    (0, 0, 0),
    (0, 1, 1),
    (0, -1, -1),
    (-1, 1, 1),    # sqrt(3) > 1
    (-2, 1, -1),
])
def test_sign_cases(a, b, expected):
    assert QuadExt(a, b).sign() == expected


def _sqrt3_oracle(bits):
    # integer square root of 3 * 4^bits: an independent digit-by-digit oracle
    import math
    scaled = math.isqrt(3 << (2 * bits))
    return scaled, bits


def test_to_real_sqrt3_against_integer_sqrt_oracle():
    value = SQRT3.to_real(64)
    scaled, bits = _sqrt3_oracle(80)
    with mpmath.workprec(160):
        oracle = mpmath.mpf(scaled) / (1 << bits)
        # 2 ulp at 64 significant bits of a number near 1.73
        assert abs(value - oracle) < mpmath.mpf(2) ** -62


def test_to_real_exact_rational():
    assert QuadExt(1).to_real(64) == 1


def test_to_real_charge_value():
    n = 2
    d = (QuadExt(2) + SQRT3 * n) / (SQRT3 * n)
    assert abs(d.to_real(64) - mpmath.mpf("1.57735")) < 1e-4


def test_to_real_requires_64_bits():
    with pytest.raises(ValueError):
        SQRT3.to_real(32)


@given(quads)
def test_mul_inverse_is_one(x):
    if not x.is_zero:
        assert x * (QuadExt(1) / x) == QONE


@given(quads, quads, quads)
@settings(max_examples=60)
def test_ring_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


def test_sign_compatible_with_embedding():
    rng = random.Random(7)
    for _ in range(200):
        a = Fraction(rng.randint(-2 ** 32, 2 ** 32), rng.randint(1, 2 ** 16))
        b = Fraction(rng.randint(-2 ** 32, 2 ** 32), rng.randint(1, 2 ** 16))
        x = QuadExt(a, b)
        v = x.to_real(128)
        if x.sign() == 0:
            assert v == 0
        else:
            assert (v > 0) == (x.sign() > 0)


def test_order_and_hash():
    assert SQRT3 > 1
    assert QuadExt(2) > SQRT3
    assert QuadExt(1, -1) < 0
    assert hash(QuadExt(1, 2)) == hash(QuadExt(Fraction(1), Fraction(2)))
    assert len({QuadExt(1), QuadExt(1, 0), quad(1)}) == 1


def test_integer_powers():
    assert SQRT3 ** 2 == QuadExt(3)
    assert (QONE + SQRT3) ** -1 == QuadExt(1) / (QONE + SQRT3)
    with pytest.raises(TypeError):
        SQRT3 ** Fraction(1, 2)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        QONE / QZERO
