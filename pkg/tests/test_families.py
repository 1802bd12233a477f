"""Family membership: support patterns, transforms, affine forms, candidates."""

import itertools
import random
from fractions import Fraction

import pytest

from holantc.algebra import (
    I,
    MAT_IDENTITY,
    MAT_K,
    MAT_T,
    MAT_X,
    Mat2,
    ONE,
    Scalar,
    ZERO,
    ZETA,
)
from holantc.entanglement import ternary_class
from holantc.families import (
    AffineForm,
    _binary_anti_condition,
    _binary_diag_condition,
    exists_S_in_cS,
    exists_orthogonal_O,
    holant_star_tractable,
    in_E,
    in_L,
    in_M,
    in_T_closure,
    in_transformed_closure,
    is_affine,
    is_in_cS,
    omega_normalise,
)
from holantc.signature import (
    DELTA_0,
    GHZ,
    PLUS,
    Signature,
    W_STATE,
    equality,
)

ONE_TWO_ONE = Signature.from_symmetric([ONE, Scalar(2), ONE])


def test_in_E():
    assert in_E(equality(3))
    assert in_E(Signature.from_support(3, {0b001: ONE, 0b110: ONE}))
    assert not in_E(W_STATE)
    assert in_E(DELTA_0)


def test_in_M():
    assert in_M(W_STATE)
    assert in_M(Signature.from_support(3, {0b000: Scalar(5), 0b010: ONE}))
    assert not in_M(equality(2))


def test_in_T_closure():
    cube = PLUS.tensor(Signature.unary(ONE, Scalar(2))).tensor(PLUS)
    verdict = in_T_closure([ONE_TWO_ONE, cube])
    assert verdict.member is True

    verdict = in_T_closure([GHZ])
    assert verdict.member is False
    assert "entangled factor" in verdict.reason

    assert in_T_closure([]).member is True


def test_in_transformed_closure():
    verdict = in_transformed_closure([equality(2)], MAT_K, "E")
    assert verdict.member is True

    kw = W_STATE.transform(MAT_K)
    assert in_transformed_closure([kw], MAT_K, "M").member is True
    assert in_transformed_closure([W_STATE], MAT_K, "M").member is False


def test_transform_consistency_invariant():
    rng = random.Random(8)
    from helpers import random_invertible_mat2, random_scalar_pool_signature

    for _ in range(15):
        sigs = [random_scalar_pool_signature(rng, rng.randint(1, 3)) for _ in range(2)]
        m = random_invertible_mat2(rng)
        direct = in_transformed_closure(sigs, m, "E").member
        pulled = in_transformed_closure(
            [s.transform(m.inverse()) for s in sigs], MAT_IDENTITY, "E").member
        assert direct == pulled


# -- orthogonal-transform decision --------------------------------------------


def _pair_signature(rng, d, dp, arity):
    """A random two-term product over the direction pair (d, dp)."""
    coeffs = [ONE + ONE, Scalar(3), I, ONE - I, Scalar(2) * I]
    a, b = rng.choice(coeffs), rng.choice(coeffs)
    pattern = [rng.randint(0, 1) for _ in range(arity)]
    total = Signature.constant(a)
    other = Signature.constant(b)
    for bit in pattern:
        total = total.tensor(Signature.unary(*(d if bit == 0 else dp)))
        other = other.tensor(Signature.unary(*(dp if bit == 0 else d)))
    return Signature(arity, [x + y for x, y in zip(total.values, other.values)])


def test_exists_orthogonal_trivial_members():
    assert exists_orthogonal_O([equality(2), equality(3)]).member is True
    swap = Signature.from_support(2, {0b01: ONE, 0b10: ONE})
    assert exists_orthogonal_O([equality(2), swap]).member is True


def test_exists_orthogonal_symmetric_binary_member():
    # [1,2,1] = O . diag(3,-1) . O^T for orthogonal O built on (1,1), (1,-1)
    verdict = exists_orthogonal_O([ONE_TWO_ONE])
    assert verdict.member is True
    quad, ortho = verdict.witness
    assert ortho is not None
    pulled = ONE_TWO_ONE.transform(ortho.inverse())
    assert in_E(pulled)


def test_exists_orthogonal_consistency_failure():
    verdict = exists_orthogonal_O([equality(3), ONE_TWO_ONE])
    assert verdict.member is False


def test_exists_orthogonal_w_not_member():
    assert exists_orthogonal_O([W_STATE]).member is False
    kw = W_STATE.transform(MAT_K)
    assert exists_orthogonal_O([kw]).member is False


def test_exists_orthogonal_random_members():
    rng = random.Random(77)
    for _ in range(25):
        # a bilinear-orthogonal pair: (p, q) and (-q, p)
        while True:
            p = rng.choice([ONE, Scalar(2), I, ONE + I])
            q = rng.choice([ZERO, ONE, Scalar(3), I - ONE])
            norm = p * p + q * q
            if not norm.is_zero():
                break
        d = (p, q)
        dp = (-q, p)
        sigs = [_pair_signature(rng, d, dp, rng.randint(2, 4)) for _ in range(2)]
        sigs = [s for s in sigs if not s.is_zero()]
        if not sigs:
            continue
        verdict = exists_orthogonal_O(sigs)
        assert verdict.member is True, f"pair {p},{q} rejected: {verdict.reason}"


def test_exists_orthogonal_isotropic_rejected():
    # direction (1, i) is isotropic: 1 + i^2 = 0, so no orthogonal matrix
    d = (ONE, I)
    dp = (ONE, -I)
    sig = Signature(3, [ZERO] * 8)
    values = [ZERO] * 8
    for x in range(8):
        bits = [(x >> (2 - s)) & 1 for s in range(3)]
        term1 = ONE
        term2 = ONE
        for b in bits:
            term1 = term1 * (d[b])
            term2 = term2 * (dp[b])
        values[x] = term1 + term2
    sig = Signature(3, values)
    verdict = exists_orthogonal_O([sig])
    assert verdict.member is False


def test_binary_route_conditions_oracle():
    """The decomposition conditions hold exactly on constructed instances."""
    rng = random.Random(13)
    roots = [ZERO, ONE, -ONE, Scalar(2), I, ONE + I]
    for _ in range(80):
        r1, r2 = rng.sample(roots, 2)
        quad = (ONE, -(r1 + r2), r1 * r2)
        d = (-r1, ONE)
        dp = (-r2, ONE)
        a, b = Scalar(rng.randint(1, 4)), Scalar(rng.randint(1, 4)) * I
        diag = [a * d[i] * d[j] + b * dp[i] * dp[j] for i in range(2) for j in range(2)]
        anti = [a * d[i] * dp[j] + b * dp[i] * d[j] for i in range(2) for j in range(2)]
        assert _binary_diag_condition(quad, Signature(2, diag))
        assert _binary_anti_condition(quad, Signature(2, anti))


# -- affine forms --------------------------------------------------------------


def test_equalities_are_affine():
    for n in range(1, 9):
        form = is_affine(equality(n))
        assert form is not None
        assert form.dimension() == 1
        assert form.evaluate() == equality(n)


def test_quadratic_phase_affine():
    sig = Signature(2, [ONE, ONE, ONE, -ONE])  # (-1)^(x1 x2)
    form = is_affine(sig)
    assert form is not None
    assert form.quadratic == frozenset({(0, 1)})
    assert form.evaluate() == sig


def test_one_two_one_not_affine():
    assert is_affine(ONE_TWO_ONE) is None


def test_affine_round_trip_random():
    rng = random.Random(500)
    prefactors = [ONE, Scalar(2), I, ZETA, ONE + I, Scalar(Fraction(1, 3))]
    for _ in range(500):
        arity = rng.randint(1, 6)
        dim = rng.randint(0, arity)
        vectors = [rng.randrange(1, 1 << arity) for _ in range(dim)]
        from holantc.families import _gf2_rref

        basis = tuple(_gf2_rref(vectors))
        k = len(basis)
        offset = rng.randrange(1 << arity)
        linear = tuple(rng.randrange(4) for _ in range(k))
        quadratic = frozenset(
            pair for pair in itertools.combinations(range(k), 2) if rng.random() < 0.4)
        form = AffineForm(arity, offset, basis, linear, quadratic, rng.choice(prefactors))
        sig = form.evaluate()
        recovered = is_affine(sig)
        assert recovered is not None
        assert recovered.evaluate() == sig


def test_affine_tensor_closure():
    rng = random.Random(12)
    from holantc.families import _gf2_rref

    def random_affine(arity):
        dim = rng.randint(0, arity)
        basis = tuple(_gf2_rref([rng.randrange(1, 1 << arity) for _ in range(dim)]))
        k = len(basis)
        return AffineForm(
            arity, rng.randrange(1 << arity), basis,
            tuple(rng.randrange(4) for _ in range(k)),
            frozenset(p for p in itertools.combinations(range(k), 2)
                      if rng.random() < 0.3),
            ONE).evaluate()

    for _ in range(40):
        f = random_affine(rng.randint(1, 3))
        g = random_affine(rng.randint(1, 3))
        assert is_affine(f.tensor(g)) is not None
        if in_L(f) and in_L(g):
            assert in_L(f.tensor(g))


def test_in_L():
    assert in_L(equality(2))
    assert in_L(DELTA_0.tensor(DELTA_0))
    assert not in_L(ONE_TWO_ONE)


def test_is_in_cS():
    assert is_in_cS(MAT_IDENTITY)
    assert is_in_cS(MAT_T)
    assert not is_in_cS(Mat2(ONE, ZERO, ZERO, Scalar(2)))


def test_no_ternary_affine_state_is_w_type():
    """Every entangled ternary affine signature is GHZ type."""
    from holantc.families import _gf2_rref

    seen = set()
    for dim in range(4):
        for vectors in itertools.combinations(range(1, 8), dim):
            basis = tuple(_gf2_rref(list(vectors)))
            if len(basis) != dim:
                continue
            for offset in range(8):
                reduced = offset
                for b in basis:
                    if reduced ^ b < reduced:
                        reduced ^= b
                key = (basis, reduced)
                if key in seen:
                    continue
                seen.add(key)
                pairs = list(itertools.combinations(range(dim), 2))
                for linear in itertools.product(range(4), repeat=dim):
                    for qbits in range(1 << len(pairs)):
                        quad = frozenset(p for i, p in enumerate(pairs)
                                         if (qbits >> i) & 1)
                        sig = AffineForm(3, reduced, basis, linear, quad, ONE).evaluate()
                        assert ternary_class(sig).tag != "W"


# -- transformed-affine candidates ---------------------------------------------


def test_exists_S_identity():
    verdict = exists_S_in_cS([equality(3)])
    assert verdict.member is True
    assert verdict.witness.is_proportional(MAT_IDENTITY)


def test_exists_S_twist():
    twisted = GHZ.transform(MAT_T)  # |000> + w^3 |111>
    verdict = exists_S_in_cS([twisted])
    assert verdict.member is True
    assert verdict.witness.is_proportional(MAT_T)


def test_exists_S_unknown_for_plain_binary():
    verdict = exists_S_in_cS([ONE_TWO_ONE])
    assert verdict.member is None


def test_exists_S_conclusive_failure_with_anchor():
    verdict = exists_S_in_cS([equality(3), ONE_TWO_ONE])
    assert verdict.member is False
    assert "exhaustive" in verdict.reason


def test_exists_S_conclusive_failure_with_w():
    verdict = exists_S_in_cS([W_STATE])
    assert verdict.member is False
    assert "W-type" in verdict.reason


def test_exists_S_scalar_invariance():
    for scale in (Scalar(3), I, ZETA):
        scaled = [equality(3).scale(scale), ONE_TWO_ONE]
        assert exists_S_in_cS(scaled).member is False
        assert exists_S_in_cS([GHZ.transform(MAT_T).scale(scale)]).member is True


# -- the unary-closure screen ---------------------------------------------------


def test_holant_star_km():
    kw = W_STATE.transform(MAT_K)
    verdict = holant_star_tractable([kw])
    assert verdict.member is True
    assert verdict.family == "KM"


def test_holant_star_failure():
    verdict = holant_star_tractable([equality(3), ONE_TWO_ONE])
    assert verdict.member is False


def test_holant_star_unaries():
    verdict = holant_star_tractable([DELTA_0, PLUS, Signature.unary(I, ONE)])
    assert verdict.member is True
    assert verdict.family == "T"


def test_omega_normalise():
    for sig in (Signature.from_symmetric([ONE, ZERO, ONE]),
                Signature.from_symmetric([ZERO, ONE, ZERO]),
                Signature.unary(ONE, ONE)):
        out, mat = omega_normalise(sig)
        assert out == sig
        assert mat == MAT_IDENTITY
