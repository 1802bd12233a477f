"""Family evaluators against the brute-force oracle."""

import itertools
import random

import pytest

from helpers import random_closed_grid
from holantc.algebra import I, MAT_K, ONE, Scalar, ZERO
from holantc.errors import NotInFamily
from holantc.families import AffineForm, _gf2_rref, is_in_cS
from holantc.grid import SignatureGrid, holant_bruteforce, make_bipartite, transform_bipartite
from holantc.signature import DELTA_0, DELTA_1, Signature, equality, exact_one
from holantc.tractable_eval import (
    Z4Form,
    eval_E_closure,
    eval_T_closure,
    eval_affine,
    eval_family_auto,
    gauss_sum,
)


def cycle_grid(sig, k):
    vertices = [sig] * k
    edges = [((v, 1), ((v + 1) % k, 0)) for v in range(k)]
    return SignatureGrid(vertices, edges)


def test_cycle_of_one_two_one():
    sig = Signature.from_symmetric([ONE, Scalar(2), ONE])
    # trace(M^k) for M = [[1,2],[2,1]]: eigenvalues 3, -1
    for k in (1, 2, 3, 5):
        expected = Scalar(3 ** k + (-1) ** k)
        grid = cycle_grid(sig, k)
        assert eval_T_closure(grid) == expected
        assert holant_bruteforce(grid) == expected
    assert eval_T_closure(cycle_grid(sig, 3)) == Scalar(26)


def test_path_zero_eq_one():
    eq2 = equality(2)
    grid = SignatureGrid(
        [DELTA_0, eq2, DELTA_1],
        [((0, 0), (1, 0)), ((1, 1), (2, 0))],
    )
    assert eval_T_closure(grid) == ZERO


def test_eq2_self_loop():
    grid = SignatureGrid([equality(2)], [((0, 0), (0, 1))])
    assert eval_T_closure(grid) == Scalar(2)


def test_T_rejects_entangled_ternary():
    grid = SignatureGrid(
        [equality(3), DELTA_0, DELTA_0, DELTA_0],
        [((0, 0), (1, 0)), ((0, 1), (2, 0)), ((0, 2), (3, 0))],
    )
    with pytest.raises(NotInFamily):
        eval_T_closure(grid)


def random_arity2_grid(rng):
    """Closed grid of random unary/binary signatures (possibly degenerate)."""
    from helpers import random_scalar_pool_signature

    while True:
        arities = [rng.randint(1, 2) for _ in range(rng.randint(2, 6))]
        if sum(arities) % 2 == 0:
            break
    vertices = [random_scalar_pool_signature(rng, a) for a in arities]
    endpoints = [(v, s) for v, sig in enumerate(vertices) for s in range(sig.arity)]
    rng.shuffle(endpoints)
    edges = [(endpoints[2 * k], endpoints[2 * k + 1]) for k in range(len(endpoints) // 2)]
    return SignatureGrid(vertices, edges)


def test_T_closure_random_oracle():
    rng = random.Random(314)
    checked = 0
    while checked < 30:
        grid = random_arity2_grid(rng)
        try:
            value = eval_T_closure(grid)
        except Exception:
            continue
        checked += 1
        assert value == holant_bruteforce(grid)


def random_generalized_equality(rng, arity):
    x = rng.randrange(1 << arity)
    pool = [ONE, -ONE, I, Scalar(2), ONE + I]
    entries = {x: rng.choice(pool)}
    if rng.random() < 0.85:
        entries[x ^ ((1 << arity) - 1)] = rng.choice(pool)
    return Signature.from_support(arity, entries)


def random_E_grid(rng):
    while True:
        arities = [rng.randint(1, 3) for _ in range(rng.randint(2, 5))]
        if sum(arities) % 2 == 0 and sum(arities) <= 20:
            break
    vertices = [random_generalized_equality(rng, a) for a in arities]
    endpoints = [(v, s) for v, sig in enumerate(vertices) for s in range(sig.arity)]
    rng.shuffle(endpoints)
    edges = [(endpoints[2 * k], endpoints[2 * k + 1]) for k in range(len(endpoints) // 2)]
    return SignatureGrid(vertices, edges)


def test_E_closure_triangle():
    assert eval_E_closure(cycle_grid(equality(2), 3)) == Scalar(2)


def test_E_closure_alternating_cycle():
    swap = Signature.from_support(2, {0b01: ONE, 0b10: ONE})
    assert eval_E_closure(cycle_grid(swap, 4)) == Scalar(2)
    assert holant_bruteforce(cycle_grid(swap, 4)) == Scalar(2)


def test_E_closure_disjoint_loops():
    eq2 = equality(2)
    grid = SignatureGrid([eq2, eq2], [((0, 0), (0, 1)), ((1, 0), (1, 1))])
    assert eval_E_closure(grid) == Scalar(4)


def test_E_closure_random_oracle():
    rng = random.Random(2020)
    for _ in range(30):
        grid = random_E_grid(rng)
        assert eval_E_closure(grid) == holant_bruteforce(grid)


def test_E_closure_with_K_transform():
    rng = random.Random(55)
    for _ in range(10):
        base = random_E_grid(rng)
        # K-transformed grid: vertices are K o f, evaluated via the transform path
        vertices = [sig.transform(MAT_K) for sig in base.vertices]
        grid = SignatureGrid(vertices, base.edges)
        assert eval_E_closure(grid, MAT_K) == holant_bruteforce(grid)


def test_gauss_sum_two_variables():
    form = Z4Form()
    form.add_linear(0, 1)
    form.add_linear(1, 1)
    assert gauss_sum(form, 2) == Scalar(2) * I  # (1+i)^2


def test_gauss_sum_oracle_random():
    rng = random.Random(4040)
    for _ in range(60):
        nvars = rng.randint(0, 6)
        form = Z4Form()
        for v in range(nvars):
            form.add_linear(v, rng.randrange(4))
        for a, b in itertools.combinations(range(nvars), 2):
            if rng.random() < 0.4:
                form.toggle_quad(a, b)
        form.add_const(rng.randrange(4))
        # brute-force oracle over all assignments
        expected = ZERO
        for bits in itertools.product((0, 1), repeat=nvars):
            assignment = dict(enumerate(bits))
            expected = expected + Scalar.i_power(form.evaluate(assignment))
        # gauss_sum mutates the form; evaluate on a copy
        copy = Z4Form()
        copy.const = form.const
        copy.lin = dict(form.lin)
        copy.quad = set(form.quad)
        assert gauss_sum(copy, nvars) == expected


def test_affine_single_edge_i_phase():
    u = Signature.unary(ONE, I)
    grid = SignatureGrid([u, u], [((0, 0), (1, 0))])
    assert eval_affine(grid) == ZERO
    assert holant_bruteforce(grid) == ZERO


def test_affine_star():
    eq2 = equality(2)
    eq3 = equality(3)
    grid = SignatureGrid(
        [eq3, eq2, eq2, eq2, eq3],
        [((0, 0), (1, 0)), ((0, 1), (2, 0)), ((0, 2), (3, 0)),
         ((4, 0), (1, 1)), ((4, 1), (2, 1)), ((4, 2), (3, 1))],
    )
    assert eval_affine(grid) == holant_bruteforce(grid) == Scalar(2)


def random_affine_signature(rng, arity):
    dim = rng.randint(0, arity)
    basis = tuple(_gf2_rref([rng.randrange(1, 1 << arity) for _ in range(dim)]))
    k = len(basis)
    prefactors = [ONE, Scalar(2), I, ONE + I]
    return AffineForm(
        arity, rng.randrange(1 << arity), basis,
        tuple(rng.randrange(4) for _ in range(k)),
        frozenset(p for p in itertools.combinations(range(k), 2) if rng.random() < 0.35),
        rng.choice(prefactors),
    ).evaluate()


def random_affine_grid(rng):
    while True:
        arities = [rng.randint(1, 3) for _ in range(rng.randint(2, 5))]
        if sum(arities) % 2 == 0 and sum(arities) <= 20:
            break
    vertices = [random_affine_signature(rng, a) for a in arities]
    if any(v.is_zero() for v in vertices):
        return None
    endpoints = [(v, s) for v, sig in enumerate(vertices) for s in range(sig.arity)]
    rng.shuffle(endpoints)
    edges = [(endpoints[2 * k], endpoints[2 * k + 1]) for k in range(len(endpoints) // 2)]
    return SignatureGrid(vertices, edges)


def test_affine_random_oracle():
    rng = random.Random(616)
    checked = 0
    while checked < 30:
        grid = random_affine_grid(rng)
        if grid is None:
            continue
        checked += 1
        assert eval_affine(grid) == holant_bruteforce(grid)


def test_affine_respects_valiant_invariance():
    """A twisted-affine grid pulls back to a fully affine bipartite grid whose
    Gauss-sum value equals the original Holant."""
    from holantc.algebra import MAT_T

    rng = random.Random(99)
    assert is_in_cS(MAT_T)
    checked = 0
    while checked < 10:
        grid = random_affine_grid(rng)
        if grid is None:
            continue
        checked += 1
        twisted = SignatureGrid(
            [sig.transform(MAT_T) for sig in grid.vertices], grid.edges)
        bip = make_bipartite(twisted)
        pulled = transform_bipartite(bip, MAT_T.inverse())
        # left side is affine again, right side carries T^T applied to the
        # binary equality, which stays affine; the value is preserved
        assert eval_affine(pulled) == holant_bruteforce(twisted)


def test_scaling_linearity():
    rng = random.Random(321)
    lam = ONE + I
    for make, evaluate in ((random_E_grid, eval_E_closure),
                           (random_affine_grid, eval_affine)):
        grid = None
        while grid is None:
            grid = make(rng)
        scaled = SignatureGrid(
            [grid.vertices[0].scale(lam)] + list(grid.vertices[1:]), grid.edges)
        assert evaluate(scaled) == lam * evaluate(grid)


def test_family_auto_detection():
    sig = Signature.from_symmetric([ONE, Scalar(2), ONE])
    value, family = eval_family_auto(cycle_grid(sig, 3))
    assert family == "T" and value == Scalar(26)

    grid = SignatureGrid(
        [equality(3), DELTA_0, DELTA_0, DELTA_0],
        [((0, 0), (1, 0)), ((0, 1), (2, 0)), ((0, 2), (3, 0))],
    )
    value, family = eval_family_auto(grid)
    assert family == "E" and value == ONE

    parity = Signature.from_support(
        3, {0b000: ONE, 0b011: ONE, 0b101: ONE, 0b110: ONE})
    grid = SignatureGrid(
        [parity, parity],
        [((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))],
    )
    value, family = eval_family_auto(grid)
    assert family == "A"
    assert value == holant_bruteforce(grid) == Scalar(4)
