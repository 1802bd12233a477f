"""Signature operations: pinning, loops, transforms, factorisation."""

import itertools
import random

import pytest

from holantc.algebra import I, MAT_K, MAT_T, MAT_X, Mat2, ONE, Scalar, ZERO, ZETA
from holantc.errors import ArityLimit, InvalidLoop, ZeroSignature
from holantc.signature import (
    DELTA_0,
    DELTA_1,
    GHZ,
    MINUS,
    PLUS,
    Signature,
    W_STATE,
    equality,
    exact_one,
    reassemble,
)

ENTRY_POOL = [ZERO, ONE, -ONE, I]


def random_signature(rng, arity, pool=ENTRY_POOL, allow_zero=False):
    while True:
        sig = Signature(arity, [rng.choice(pool) for _ in range(1 << arity)])
        if allow_zero or not sig.is_zero():
            return sig


def random_invertible(rng):
    pool = [ZERO, ONE, -ONE, I, -I, ZETA]
    while True:
        m = Mat2(*(rng.choice(pool) for _ in range(4)))
        if m.is_invertible():
            return m


def test_tensor_basics():
    zero_zero = DELTA_0.tensor(DELTA_0)
    assert zero_zero == Signature.from_support(2, {0b00: ONE})
    assert PLUS.tensor(DELTA_1) == Signature.from_support(2, {0b01: ONE, 0b11: ONE})
    assert DELTA_0.tensor(DELTA_1) == Signature.from_support(2, {0b01: ONE})


def test_tensor_arity_cap():
    big = equality(10)
    with pytest.raises(ArityLimit):
        big.tensor(big)


def test_apply_unary_pins():
    assert GHZ.pin(2, 0) == Signature.from_support(2, {0b00: ONE})
    assert W_STATE.pin(0, 1) == Signature.from_support(2, {0b00: ONE})
    expected = Signature(2, [ONE, ONE, ONE, ZERO])
    assert W_STATE.apply_unary(0, PLUS) == expected


def test_pin_commutes_across_slots():
    rng = random.Random(3)
    for _ in range(30):
        sig = random_signature(rng, 4)
        for i, j in itertools.combinations(range(4), 2):
            for bi, bj in itertools.product((0, 1), repeat=2):
                a = sig.pin(i, bi).pin(j - 1, bj)
                b = sig.pin(j, bj).pin(i, bi)
                assert a == b


def test_self_loop():
    assert GHZ.self_loop(0, 1) == Signature(1, [ONE, ONE])
    assert W_STATE.self_loop(0, 1) == Signature(1, [ZERO, ONE])
    eq2 = equality(2)
    assert eq2.self_loop(0, 1) == Signature.constant(Scalar(2))
    with pytest.raises(InvalidLoop):
        GHZ.self_loop(1, 1)


def test_holographic_transform():
    swapped = Signature.from_support(2, {0b01: ONE, 0b10: ONE})
    doubled = equality(2).scale(Scalar(2))
    assert swapped.transform(MAT_K) == doubled

    flipped = W_STATE.transform(MAT_X)
    assert flipped == Signature.from_support(3, {0b110: ONE, 0b101: ONE, 0b011: ONE})

    t_ghz = GHZ.transform(MAT_T)
    assert t_ghz == Signature.from_support(3, {0: ONE, 7: ZETA ** 3})


def test_transform_composes():
    rng = random.Random(11)
    for _ in range(25):
        sig = random_signature(rng, 3)
        m1 = random_invertible(rng)
        m2 = random_invertible(rng)
        assert sig.transform(m2).transform(m1) == sig.transform(m1 * m2)


def test_permute():
    pair = Signature.from_support(2, {0b01: ONE})
    assert pair.permute([1, 0]) == Signature.from_support(2, {0b10: ONE})
    rng = random.Random(1)
    sig = random_signature(rng, 3)
    assert W_STATE.permute([2, 0, 1]) == W_STATE
    asym = Signature.from_support(3, {0b001: ONE, 0b010: Scalar(2)})
    swapped = asym.permute([0, 2, 1])
    assert swapped == Signature.from_support(3, {0b010: ONE, 0b001: Scalar(2)})
    # round trip
    perm = [2, 0, 1]
    inverse = [perm.index(k) for k in range(3)]
    assert sig.permute(perm).permute(inverse) == sig


def test_symmetric_shorthand():
    assert GHZ.symmetric_shorthand() == [ONE, ZERO, ZERO, ONE]
    assert W_STATE.symmetric_shorthand() == [ZERO, ONE, ZERO, ZERO]
    asym = Signature.from_support(2, {0b01: ONE, 0b10: Scalar(2)})
    assert asym.symmetric_shorthand() is None


def test_factorize_examples():
    bell = equality(2)
    sig = DELTA_0.tensor(bell)
    factors = sig.factorize()
    assert [slots for _, slots in factors] == [(0,), (1, 2)]
    assert factors[0][0] == DELTA_0
    assert factors[1][0] == bell

    assert len(GHZ.factorize()) == 1

    cube = PLUS.tensor(PLUS).tensor(PLUS)
    assert [f.arity for f, _ in cube.factorize()] == [1, 1, 1]

    with pytest.raises(ZeroSignature):
        Signature(2, [ZERO] * 4).factorize()


def test_is_degenerate():
    sym = Signature.from_symmetric([ONE, Scalar(2), Scalar(4)])
    assert sym.is_degenerate()
    assert not equality(2).is_degenerate()
    assert DELTA_0.is_degenerate()


def test_factorize_round_trip_exhaustive_arity3():
    pool = [ZERO, ONE, -ONE, I]
    rng = random.Random(17)
    # exhaustive at arity 2 over a smaller pool, randomized at arity 3..5
    small = [ZERO, ONE, -ONE]
    for values in itertools.product(small, repeat=4):
        sig = Signature(2, values)
        if sig.is_zero():
            continue
        assert reassemble(sig.factorize()) == sig
    for arity in (3, 4, 5):
        for _ in range(60):
            sig = random_signature(rng, arity, pool)
            assert reassemble(sig.factorize()) == sig


def test_factorize_scale_on_first_factor():
    sig = DELTA_0.scale(Scalar(3)).tensor(DELTA_1.scale(Scalar(5)))
    factors = sig.factorize()
    assert factors[0][0] == DELTA_0.scale(Scalar(15))
    assert factors[1][0] == DELTA_1


def test_exact_one_support():
    sig = exact_one(3)
    assert sorted(sig.support()) == [0b001, 0b010, 0b100]
    assert sig == W_STATE


def test_minus_is_zero_minus_one():
    assert MINUS.values == (ONE, -ONE)
    assert DELTA_1.values == (ZERO, ONE)
