"""GHZ/W classification, projections and distance profiles."""

import itertools
import random

import pytest

from helpers import random_invertible_mat2
from holantc.algebra import ONE, Scalar, ZERO
from holantc.entanglement import (
    DistanceProfile,
    binary_entangled,
    distance_profile,
    find_entangling_projection,
    ghz_polynomial,
    is_genuinely_entangled,
    ternary_class,
)
from holantc.errors import ProfileUndefined
from holantc.signature import (
    DELTA_0,
    GHZ,
    PLUS,
    Signature,
    W_STATE,
    equality,
)


def test_ghz_class():
    result = ternary_class(GHZ)
    assert result.tag == "GHZ"
    assert ghz_polynomial(GHZ) == ONE


def test_w_class():
    result = ternary_class(W_STATE)
    assert result.tag == "W"
    assert ghz_polynomial(W_STATE) == ZERO


def test_product_class_with_witness():
    sig = DELTA_0.tensor(equality(2))
    result = ternary_class(sig)
    assert result.tag == "NotGenuine"
    assert [slots for _, slots in result.witness] == [(0,), (1, 2)]


def test_classification_matches_factorization_sample():
    """Polynomial + clause criterion vs the factorisation oracle."""
    rng = random.Random(6561)
    pool = [ZERO, ONE, -ONE]
    for _ in range(800):
        values = [rng.choice(pool) for _ in range(8)]
        sig = Signature(3, values)
        if sig.is_zero():
            continue
        by_poly = ternary_class(sig).tag
        genuinely = is_genuinely_entangled(sig)
        assert (by_poly in ("GHZ", "W")) == genuinely


def test_local_transform_stability():
    rng = random.Random(42)
    for _ in range(20):
        mats = [random_invertible_mat2(rng) for _ in range(3)]
        ghz_t = GHZ
        w_t = W_STATE
        for slot, m in enumerate(mats):
            ghz_t = ghz_t.transform_slot(slot, m)
            w_t = w_t.transform_slot(slot, m)
        assert ternary_class(ghz_t).tag == "GHZ"
        assert ternary_class(w_t).tag == "W"


def test_is_genuinely_entangled():
    assert is_genuinely_entangled(equality(4))
    assert not is_genuinely_entangled(Signature.from_support(2, {0b00: ONE, 0b01: ONE}))
    assert is_genuinely_entangled(
        Signature.from_support(4, {0b0011: ONE, 0b1100: ONE}))


def test_find_entangling_projection_examples():
    assert find_entangling_projection(GHZ, 0, 1) == ["+"]
    assert find_entangling_projection(W_STATE, 0, 1) == ["0"]
    assert find_entangling_projection(equality(4), 0, 1) == ["+", "+"]


def test_projection_residual_entangled_exhaustive_arity3():
    pool = [ZERO, ONE]
    for values in itertools.product(pool, repeat=8):
        sig = Signature(3, values)
        if sig.is_zero() or not is_genuinely_entangled(sig):
            continue
        for j, k in itertools.combinations(range(3), 2):
            labels = find_entangling_projection(sig, j, k)
            assert len(labels) == 1


def test_projection_residual_entangled_random_arity45():
    rng = random.Random(5150)
    pool = [ZERO, ONE]
    found = 0
    while found < 60:
        arity = rng.choice([4, 5])
        values = [rng.choice(pool) for _ in range(1 << arity)]
        sig = Signature(arity, values)
        if sig.is_zero() or not is_genuinely_entangled(sig):
            continue
        found += 1
        j, k = sorted(rng.sample(range(arity), 2))
        labels = find_entangling_projection(sig, j, k)
        assert len(labels) == arity - 2


def test_distance_profile_level0():
    two_string = Signature.from_support(4, {0b0000: ONE, 0b1111: Scalar(2)})
    profile = distance_profile(two_string, 0)
    assert profile.value == 4
    assert profile.witness == ((0, 0, 0, 0), (1, 1, 1, 1))

    even = Signature.from_support(
        3, {0b000: ONE, 0b011: ONE, 0b101: ONE, 0b110: ONE})
    assert distance_profile(even, 0).value == 2

    mixed = Signature.from_support(4, {0b0000: ONE, 0b0011: ONE, 0b1111: ONE})
    profile = distance_profile(mixed, 0)
    assert profile.value == 2
    assert profile.witness == ((0, 0, 0, 0), (0, 0, 1, 1))


def test_distance_profile_level1():
    anchor = equality(2)
    tail = Signature.from_support(2, {0b01: ONE, 0b10: ONE})
    # f = anchor (x) |00> + tail (x) |11>
    f = Signature(4, [ZERO] * 16)
    values = [ZERO] * 16
    for idx, v in enumerate(anchor.values):
        values[(idx << 2) | 0b00] = v
    for idx, v in enumerate(tail.values):
        values[(idx << 2) | 0b11] = values[(idx << 2) | 0b11] + v
    f = Signature(4, values)
    profile = distance_profile(f, 1, anchor=anchor, anchor_slots=(0, 1))
    assert profile.value == 2
    assert profile.set_a == ((0, 0),)
    assert profile.set_b == ((1, 1),)
    assert profile.witness == ((0, 0), (1, 1))


def test_distance_profile_scaled_anchor_counts_as_a():
    anchor = Signature.unary(ONE, Scalar(2))
    # f = anchor (x) |0> + 3*anchor (x) |1>
    values = []
    for x0 in (0, 1):
        for x1 in (0, 1):
            coeff = anchor.values[x0] * (ONE if x1 == 0 else Scalar(3))
            values.append(coeff)
    f = Signature(2, values)
    with pytest.raises(ProfileUndefined):
        distance_profile(f, 2, anchor=anchor, anchor_slots=(0,))


def test_distance_profile_empty_a_raises():
    with pytest.raises(ProfileUndefined):
        distance_profile(equality(4), 1, anchor=equality(2), anchor_slots=(0, 1))
