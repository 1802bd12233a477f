"""Field arithmetic, literals and 2x2 matrices."""

import random
from fractions import Fraction

import pytest

from holantc.algebra import (
    I,
    MAT_IDENTITY,
    MAT_K,
    MAT_T,
    MAT_X,
    MINUS_ONE,
    Mat2,
    ONE,
    Scalar,
    ZERO,
    ZETA,
    format_scalar,
    monomial_cbrt,
    parse_scalar,
    sqrt_in_field,
)
from holantc.errors import DivisionByZero, SingularMatrix


def random_scalar(rng, allow_zero=True):
    while True:
        s = Scalar(*(Fraction(rng.randint(-4, 4), rng.randint(1, 4)) for _ in range(4)))
        if allow_zero or not s.is_zero():
            return s


def test_zeta_squared_is_i():
    assert ZETA * ZETA == I
    assert I == Scalar(0, 0, 1, 0)


def test_zeta_is_eighth_root():
    assert ZETA ** 4 == MINUS_ONE
    assert ZETA ** 8 == ONE


def test_inverse_of_one_plus_i():
    s = ONE + I
    assert s.inverse() == Scalar(Fraction(1, 2), 0, Fraction(-1, 2), 0)
    assert s * s.inverse() == ONE


def test_conjugate_of_zeta():
    assert ZETA.conjugate() * ZETA == ONE
    assert I.conjugate() == -I


def test_invert_zero_raises():
    with pytest.raises(DivisionByZero):
        ZERO.inverse()


def test_field_axioms_random():
    rng = random.Random(20240811)
    for _ in range(10_000):
        a = random_scalar(rng)
        b = random_scalar(rng)
        c = random_scalar(rng)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
    for _ in range(200):
        a = random_scalar(rng, allow_zero=False)
        assert a * a.inverse() == ONE


def test_scalar_literals_round_trip():
    rng = random.Random(7)
    for _ in range(300):
        s = random_scalar(rng)
        assert parse_scalar(format_scalar(s)) == s


def test_literal_examples():
    assert parse_scalar("1/2 + 1/2*i") == Scalar(Fraction(1, 2), 0, Fraction(1, 2), 0)
    assert parse_scalar("-w^3") == Scalar(0, 0, 0, -1)
    assert parse_scalar("(1+i)*(1-i)") == Scalar(2)
    assert parse_scalar("w*w") == I
    assert format_scalar(ZERO) == "0"


def test_sqrt_in_field():
    rng = random.Random(99)
    for _ in range(200):
        s = random_scalar(rng)
        r = sqrt_in_field(s * s)
        assert r is not None and r * r == s * s
    assert sqrt_in_field(Scalar(2)) == ZETA - ZETA ** 3  # sqrt(2) = w - w^3
    assert sqrt_in_field(Scalar(3)) is None
    assert sqrt_in_field(I) is not None


def test_monomial_cbrt():
    assert monomial_cbrt(Scalar(8)) == Scalar(2)
    assert monomial_cbrt(-ONE) == -ONE
    r = monomial_cbrt(ZETA ** 3)
    assert r is not None and r ** 3 == ZETA ** 3
    assert monomial_cbrt(Scalar(2)) is None


def test_invert_k():
    k_inv = MAT_K.inverse()
    half = Scalar(Fraction(1, 2))
    expected = Mat2(half, half * -I, half, half * I)
    assert k_inv == expected
    assert k_inv * MAT_K == MAT_IDENTITY


def test_tensor_power_of_x():
    xx = MAT_X.tensor_power(2)
    # X swaps basis states: column (0,0) has its 1 in row (1,1)
    assert xx[3][0] == ONE
    assert xx[0][0] == ZERO


def test_singular_matrix_raises():
    with pytest.raises(SingularMatrix):
        Mat2(ONE, ZERO, ZERO, ZERO).inverse()


def test_matrix_inverse_involution_random():
    rng = random.Random(5)
    count = 0
    while count < 50:
        m = Mat2(*(random_scalar(rng) for _ in range(4)))
        if not m.is_invertible():
            continue
        count += 1
        assert m.inverse().inverse() == m
        assert m.transpose().inverse() == m.inverse().transpose()


def test_named_matrix_entries():
    assert MAT_T.entry(1, 1) == ZETA
    assert MAT_K.entry(1, 0) == I
    assert MAT_K.entry(1, 1) == -I
