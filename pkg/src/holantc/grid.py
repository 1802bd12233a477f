"""Signature grids and their evaluation.

A grid is a multigraph whose vertices carry signatures; each edge occupies one
input slot at each of its two endpoints (self loops are allowed and occupy two
slots of one vertex).  Unmatched slots are dangling and give the grid an
effective signature of its own.  The Holant is the sum over all 0/1 edge
assignments of the product of vertex values.
"""

from __future__ import annotations

from .algebra import Mat2, ONE, Scalar, ZERO
from .errors import ContractionOverflow, HolantError
from .signature import ARITY_CAP, Signature, equality

BRUTE_FORCE_EDGE_CAP = 24
DANGLING_CAP = 16

Endpoint = tuple[int, int]  # (vertex, slot)


class SignatureGrid:
    """An immutable signature grid."""

    __slots__ = ("vertices", "edges", "dangling", "sides")

    def __init__(self, vertices, edges, dangling=(), sides=None):
        self.vertices = tuple(vertices)
        self.edges = tuple((tuple(e[0]), tuple(e[1])) for e in edges)
        self.dangling = tuple(tuple(d) for d in dangling)
        self.sides = tuple(sides) if sides is not None else None
        self._validate()

    def _validate(self) -> None:
        seen: set[Endpoint] = set()
        for end_a, end_b in self.edges:
            for v, s in (end_a, end_b):
                self._check_endpoint(v, s)
                if (v, s) in seen:
                    raise HolantError(f"endpoint {(v, s)} used twice")
                seen.add((v, s))
        for v, s in self.dangling:
            self._check_endpoint(v, s)
            if (v, s) in seen:
                raise HolantError(f"endpoint {(v, s)} used twice")
            seen.add((v, s))
        for v, sig in enumerate(self.vertices):
            for s in range(sig.arity):
                if (v, s) not in seen:
                    raise HolantError(f"slot {(v, s)} is neither wired nor dangling")
        if self.sides is not None:
            if len(self.sides) != len(self.vertices):
                raise HolantError("side tags must cover every vertex")
            for tag in self.sides:
                if tag not in ("L", "R"):
                    raise HolantError(f"bad side tag {tag!r}")
            for end_a, end_b in self.edges:
                if self.sides[end_a[0]] == self.sides[end_b[0]]:
                    raise HolantError("edge joins two vertices on the same side")

    def _check_endpoint(self, v: int, s: int) -> None:
        if not 0 <= v < len(self.vertices):
            raise HolantError(f"vertex {v} out of range")
        if not 0 <= s < self.vertices[v].arity:
            raise HolantError(f"slot {s} out of range for vertex {v}")

    def is_closed(self) -> bool:
        return not self.dangling


def holant_bruteforce(grid: SignatureGrid) -> Scalar:
    """Exact Holant by enumerating all 2^|E| edge assignments."""
    if grid.dangling:
        raise HolantError("brute force needs a closed grid")
    m = len(grid.edges)
    if m > BRUTE_FORCE_EDGE_CAP:
        raise HolantError(f"{m} edges exceeds the brute-force cap {BRUTE_FORCE_EDGE_CAP}")
    # per-vertex: list of (edge index, bit position within the vertex index)
    wiring: list[list[tuple[int, int]]] = [[] for _ in grid.vertices]
    for e, (end_a, end_b) in enumerate(grid.edges):
        for v, s in (end_a, end_b):
            wiring[v].append((e, grid.vertices[v].arity - 1 - s))
    total = ZERO
    for assignment in range(1 << m):
        product = ONE
        for v, sig in enumerate(grid.vertices):
            index = 0
            for e, pos in wiring[v]:
                if (assignment >> e) & 1:
                    index |= 1 << pos
            value = sig.values[index]
            if value.is_zero():
                product = ZERO
                break
            product = product * value
        if not product.is_zero():
            total = total + product
    return total


class _Tensor:
    """A vertex tensor during contraction: leg labels plus a dense signature."""

    __slots__ = ("legs", "sig", "key")

    def __init__(self, legs: tuple[int, ...], sig: Signature, key: int):
        self.legs = legs
        self.sig = sig
        self.key = key  # smallest original vertex id, for deterministic ties

    def contract_internal(self) -> "_Tensor":
        """Collapse repeated legs (self loops) one pair at a time."""
        tensor = self
        while True:
            legs = tensor.legs
            dup = None
            for i in range(len(legs)):
                for j in range(i + 1, len(legs)):
                    if legs[i] == legs[j]:
                        dup = (i, j)
                        break
                if dup:
                    break
            if dup is None:
                return tensor
            i, j = dup
            sig = tensor.sig.self_loop(i, j)
            new_legs = tuple(l for k, l in enumerate(legs) if k not in (i, j))
            tensor = _Tensor(new_legs, sig, tensor.key)


def _join(t1: _Tensor, t2: _Tensor) -> _Tensor:
    """Tensor two nodes and contract their shared legs."""
    if t1.sig.arity + t2.sig.arity > ARITY_CAP:
        raise ContractionOverflow(
            f"intermediate arity {t1.sig.arity + t2.sig.arity} exceeds {ARITY_CAP}")
    combined = _Tensor(t1.legs + t2.legs, t1.sig.tensor(t2.sig), min(t1.key, t2.key))
    return combined.contract_internal()


def _contract_all(grid: SignatureGrid) -> Signature:
    """Greedy pairwise contraction; returns the signature on the dangling legs."""
    # leg labels: edge index e -> label e; dangling index k -> label m + k
    m = len(grid.edges)
    leg_of: dict[Endpoint, int] = {}
    for e, (end_a, end_b) in enumerate(grid.edges):
        leg_of[end_a] = e
        leg_of[end_b] = e
    for k, endpoint in enumerate(grid.dangling):
        leg_of[endpoint] = m + k

    tensors: list[_Tensor] = []
    for v, sig in enumerate(grid.vertices):
        legs = tuple(leg_of[(v, s)] for s in range(sig.arity))
        tensors.append(_Tensor(legs, sig, v).contract_internal())

    while True:
        best = None
        for i in range(len(tensors)):
            for j in range(i + 1, len(tensors)):
                shared = set(tensors[i].legs) & set(tensors[j].legs)
                if not shared:
                    continue
                result_arity = (len(tensors[i].legs) + len(tensors[j].legs)
                                - 2 * len(shared))
                rank = (result_arity,
                        min(tensors[i].key, tensors[j].key),
                        max(tensors[i].key, tensors[j].key))
                if best is None or rank < best[0]:
                    best = (rank, i, j)
        if best is None:
            break
        _, i, j = best
        merged = _join(tensors[i], tensors[j])
        tensors = [t for k, t in enumerate(tensors) if k not in (i, j)]
        tensors.append(merged)

    # remaining tensors are disconnected: tensor them in vertex order
    tensors.sort(key=lambda t: t.key)
    result = _Tensor((), Signature.constant(ONE), -1)
    for t in tensors:
        result = _join(result, t) if set(result.legs) & set(t.legs) else _Tensor(
            result.legs + t.legs, result.sig.tensor(t.sig), min(result.key, t.key))

    # order the open legs by the dangling list
    want = [m + k for k in range(len(grid.dangling))]
    assert sorted(result.legs) == sorted(want)
    perm = [want.index(leg) for leg in result.legs]
    return result.sig.permute(perm)


def holant_contract(grid: SignatureGrid) -> Scalar:
    """Holant via greedy tensor contraction; exact, equals brute force."""
    if grid.dangling:
        raise HolantError("holant_contract needs a closed grid")
    return _contract_all(grid).values[0]


def holant(grid: SignatureGrid, method: str = "auto") -> Scalar:
    if method == "brute":
        return holant_bruteforce(grid)
    if method == "contract":
        return holant_contract(grid)
    if method == "auto":
        try:
            return holant_contract(grid)
        except ContractionOverflow:
            return holant_bruteforce(grid)
    raise ValueError(f"unknown method {method!r}")


def gadget_signature(grid: SignatureGrid) -> Signature:
    """Effective signature on the dangling edges, in dangling-list order."""
    if not grid.dangling:
        raise HolantError("gadget_signature needs dangling edges")
    if len(grid.dangling) > DANGLING_CAP:
        raise HolantError(f"{len(grid.dangling)} dangling edges exceeds {DANGLING_CAP}")
    return _contract_all(grid)


def make_bipartite(grid: SignatureGrid) -> SignatureGrid:
    """Subdivide every edge with a binary-equality vertex; Holant unchanged.

    Original vertices become the left side, the fresh equality vertices the
    right side.  Dangling edges stay on their original vertex.
    """
    vertices = list(grid.vertices)
    sides = ["L"] * len(vertices)
    eq2 = equality(2)
    edges = []
    for end_a, end_b in grid.edges:
        mid = len(vertices)
        vertices.append(eq2)
        sides.append("R")
        edges.append((end_a, (mid, 0)))
        edges.append(((mid, 1), end_b))
    return SignatureGrid(vertices, edges, grid.dangling, sides)


def transform_bipartite(grid: SignatureGrid, m: Mat2) -> SignatureGrid:
    """Valiant transform: left vertices by m, right by inverse-transpose."""
    if grid.sides is None:
        raise HolantError("transform_bipartite needs a bipartitioned grid")
    m_right = m.inverse().transpose()
    vertices = []
    for sig, side in zip(grid.vertices, grid.sides):
        vertices.append(sig.transform(m if side == "L" else m_right))
    return SignatureGrid(vertices, grid.edges, grid.dangling, grid.sides)
