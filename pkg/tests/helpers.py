"""Shared generators for randomized tests."""

from holantc.algebra import I, Mat2, ONE, Scalar, ZERO, ZETA
from holantc.signature import Signature
from holantc.grid import SignatureGrid

GRID_ENTRY_POOL = [ZERO, ONE, -ONE, I, -I, ZETA]


def random_scalar_pool_signature(rng, arity, pool=GRID_ENTRY_POOL, allow_zero=False):
    while True:
        sig = Signature(arity, [rng.choice(pool) for _ in range(1 << arity)])
        if allow_zero or not sig.is_zero():
            return sig


def random_invertible_mat2(rng, pool=GRID_ENTRY_POOL):
    while True:
        m = Mat2(*(rng.choice(pool) for _ in range(4)))
        if m.is_invertible():
            return m


def random_closed_grid(rng, max_edges=10, pool=GRID_ENTRY_POOL):
    """A random closed grid with at most max_edges edges."""
    while True:
        n_vertices = rng.randint(1, 5)
        arities = [rng.randint(1, 3) for _ in range(n_vertices)]
        if sum(arities) % 2 == 0 and sum(arities) // 2 <= max_edges:
            break
    vertices = [random_scalar_pool_signature(rng, a) for a in arities]
    endpoints = [(v, s) for v, sig in enumerate(vertices) for s in range(sig.arity)]
    rng.shuffle(endpoints)
    edges = [(endpoints[2 * k], endpoints[2 * k + 1]) for k in range(len(endpoints) // 2)]
    return SignatureGrid(vertices, edges)
