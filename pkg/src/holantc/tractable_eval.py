"""Polynomial-time Holant evaluation for three tractable families.

eval_T_closure   splits vertices into unary/binary factors and evaluates the
                 resulting paths and cycles with 2x2 matrix chains.
eval_E_closure   propagates forced edge bits through generalized-equality
                 factors, component by component.
eval_affine      composes all vertex affine forms into one global exponential
                 sum over GF(2) and evaluates it by Gauss-sum elimination.

Each evaluator is exact and agrees with brute force on its family.
"""

from __future__ import annotations

from .algebra import I, Mat2, ONE, Scalar, ZERO
from .errors import HolantError, NotInFamily
from .families import in_E, is_affine
from .grid import SignatureGrid, make_bipartite, transform_bipartite
from .signature import Signature

Endpoint = tuple[int, int]


def _factor_nodes(grid: SignatureGrid):
    """Split every vertex into its tensor factors.

    Returns (nodes, node_edges, constant) where nodes are the factor
    signatures of arity >= 1, node_edges are the grid edges re-pointed at
    (node, local slot) endpoints, and constant collects arity-0 factors.
    """
    nodes: list[Signature] = []
    endpoint_map: dict[Endpoint, Endpoint] = {}
    constant = ONE
    for v, sig in enumerate(grid.vertices):
        for factor, slots in sig.factorize():
            if factor.arity == 0:
                constant = constant * factor.values[0]
                continue
            node = len(nodes)
            nodes.append(factor)
            for local, original_slot in enumerate(slots):
                endpoint_map[(v, original_slot)] = (node, local)
    node_edges = [(endpoint_map[tuple(a)], endpoint_map[tuple(b)])
                  for a, b in grid.edges]
    return nodes, node_edges, constant


def eval_T_closure(grid: SignatureGrid) -> Scalar:
    """Holant of a grid whose signatures all factor into arity <= 2 pieces."""
    if grid.dangling:
        raise HolantError("eval_T_closure needs a closed grid")
    nodes, edges, constant = _factor_nodes(grid)
    if any(n.arity > 2 for n in nodes):
        raise NotInFamily("a tensor factor has arity above 2")

    # adjacency: per (node, slot) endpoint, the opposite endpoint
    partner: dict[Endpoint, Endpoint] = {}
    for a, b in edges:
        partner[a] = b
        partner[b] = a

    total = constant
    visited: set[int] = set()

    def node_vector(node: int) -> tuple[Scalar, Scalar]:
        return (nodes[node].values[0], nodes[node].values[1])

    def node_matrix(node: int, entry_slot: int) -> Mat2:
        v = nodes[node].values
        m = Mat2(v[0], v[1], v[2], v[3])
        return m if entry_slot == 0 else m.transpose()

    for start in range(len(nodes)):
        if start in visited or nodes[start].arity != 1:
            continue
        # walk a path from this unary endpoint
        visited.add(start)
        row = node_vector(start)
        here = partner[(start, 0)]
        while True:
            node, slot = here
            visited.add(node)
            if nodes[node].arity == 1:
                total = total * (row[0] * node_vector(node)[0]
                                 + row[1] * node_vector(node)[1])
                break
            m = node_matrix(node, slot)
            row = (row[0] * m.a + row[1] * m.c, row[0] * m.b + row[1] * m.d)
            here = partner[(node, 1 - slot)]

    for start in range(len(nodes)):
        if start in visited:
            continue
        # remaining components are cycles of binary factors
        assert nodes[start].arity == 2
        visited.add(start)
        acc = node_matrix(start, 0)
        here = partner[(start, 1)]
        while here[0] != start:
            node, slot = here
            visited.add(node)
            acc = acc * node_matrix(node, slot)
            here = partner[(node, 1 - slot)]
        # the cycle re-enters the start node at its slot 0, so the closing
        # contraction is the trace
        total = total * (acc.a + acc.d)
    return total


def eval_E_closure(grid: SignatureGrid, m: Mat2 | None = None) -> Scalar:
    """Holant of a grid whose factors are generalized equalities, possibly
    after one holographic transform applied via the bipartite form."""
    if grid.dangling:
        raise HolantError("eval_E_closure needs a closed grid")
    if m is not None:
        working = transform_bipartite(make_bipartite(grid), m.inverse())
    else:
        working = grid
    nodes, edges, constant = _factor_nodes(working)
    for node in nodes:
        if not in_E(node):
            raise NotInFamily("a tensor factor is not a generalized equality")

    incident: dict[int, list[tuple[int, int]]] = {n: [] for n in range(len(nodes))}
    for e, (a, b) in enumerate(edges):
        incident[a[0]].append((e, a[1]))
        incident[b[0]].append((e, b[1]))

    # connected components over shared edges
    component_of: dict[int, int] = {}
    components: list[list[int]] = []
    for n in range(len(nodes)):
        if n in component_of:
            continue
        comp = len(components)
        stack = [n]
        members = []
        component_of[n] = comp
        while stack:
            cur = stack.pop()
            members.append(cur)
            for e, _ in incident[cur]:
                for endpoint in edges[e]:
                    if endpoint[0] not in component_of:
                        component_of[endpoint[0]] = comp
                        stack.append(endpoint[0])
        components.append(members)

    total = constant
    for members in components:
        if not incident[members[0]]:
            # isolated node: impossible in a closed grid (arity >= 1 slots
            # must be wired), kept for safety
            raise HolantError("unwired factor slot")
        root_edge = incident[members[0]][0][0]
        comp_value = ZERO
        for root_bit in (0, 1):
            edge_bits: dict[int, int] = {root_edge: root_bit}
            queue = [root_edge]
            dead = False
            value = ONE
            settled: set[int] = set()
            while queue and not dead:
                e = queue.pop()
                for node, slot in (edges[e][0], edges[e][1]):
                    if node in settled:
                        continue
                    assignment = _forced_assignment(nodes[node], slot, edge_bits[e])
                    if assignment is None:
                        dead = True
                        break
                    settled.add(node)
                    value = value * nodes[node].value(assignment)
                    for e2, s2 in incident[node]:
                        b2 = assignment[s2]
                        if e2 in edge_bits:
                            if edge_bits[e2] != b2:
                                dead = True
                                break
                        else:
                            edge_bits[e2] = b2
                            queue.append(e2)
                    if dead:
                        break
            if not dead:
                assert len(settled) == len(members)
                comp_value = comp_value + value
        total = total * comp_value
    return total


def _forced_assignment(sig: Signature, slot: int, bit: int) -> tuple[int, ...] | None:
    """The unique support string of a generalized equality matching bit at
    slot, or None when no support string matches."""
    for bits in sig.support_bits():
        if bits[slot] == bit:
            return bits
    return None


# ---------------------------------------------------------------------------
# affine grids: one global Gauss sum
# ---------------------------------------------------------------------------


class Z4Form:
    """c + sum l_j u_j + 2 * sum_{(j,k)} u_j u_k over Z4, u in GF(2)^n.

    Linear coefficients live in Z4; quadratic cross terms carry an implicit
    coefficient 2, so only their presence is tracked (a set of pairs).
    """

    __slots__ = ("const", "lin", "quad")

    def __init__(self):
        self.const = 0
        self.lin: dict[int, int] = {}
        self.quad: set[frozenset[int]] = set()

    def add_const(self, c: int) -> None:
        self.const = (self.const + c) % 4

    def add_linear(self, var: int, coeff: int) -> None:
        value = (self.lin.get(var, 0) + coeff) % 4
        if value:
            self.lin[var] = value
        else:
            self.lin.pop(var, None)

    def toggle_quad(self, a: int, b: int) -> None:
        if a == b:
            self.add_linear(a, 2)
            return
        pair = frozenset((a, b))
        if pair in self.quad:
            self.quad.remove(pair)
        else:
            self.quad.add(pair)

    def add_scaled_xor(self, coeff: int, variables, constant_bit: int = 0) -> None:
        """Add coeff * (xor of variables, offset by constant_bit), expanded
        over Z4: xor(u) = sum u_i - 2 * sum_{i<j} u_i u_j (mod 4)."""
        coeff %= 4
        if coeff == 0:
            return
        variables = list(variables)
        if constant_bit:
            # c*(1 xor X) = c + (-c)*X
            self.add_const(coeff)
            coeff = (-coeff) % 4
        for v in variables:
            self.add_linear(v, coeff)
        if coeff % 2 == 1 or coeff == 2:
            # -2*coeff = 2*coeff (mod 4); vanishes exactly when coeff is even
            if coeff % 2 == 1:
                for i in range(len(variables)):
                    for j in range(i + 1, len(variables)):
                        self.toggle_quad(variables[i], variables[j])

    def add_two_times_product(self, expr_a, expr_b) -> None:
        """Add 2 * (A * B) where A, B are GF(2) affine expressions given as
        (variables, constant_bit)."""
        vars_a, const_a = expr_a
        vars_b, const_b = expr_b
        for a in vars_a:
            for b in vars_b:
                self.toggle_quad(a, b)
        if const_b:
            for a in vars_a:
                self.add_linear(a, 2)
        if const_a:
            for b in vars_b:
                self.add_linear(b, 2)
        if const_a and const_b:
            self.add_const(2)

    def evaluate(self, bits: dict[int, int]) -> int:
        acc = self.const
        for v, c in self.lin.items():
            acc += c * bits[v]
        for pair in self.quad:
            a, b = tuple(pair)
            acc += 2 * bits[a] * bits[b]
        return acc % 4

    def variables(self) -> set[int]:
        out = set(self.lin)
        for pair in self.quad:
            out |= pair
        return out

    def substitute(self, var: int, variables, constant_bit: int) -> None:
        """Replace var by the GF(2) affine expression (xor of variables,
        offset constant_bit).  var must not occur in the expression."""
        variables = list(variables)
        assert var not in variables
        coeff = self.lin.pop(var, 0)
        partners = sorted(next(iter(p - {var})) for p in self.quad if var in p)
        self.quad = {p for p in self.quad if var not in p}
        if coeff:
            self.add_scaled_xor(coeff, variables, constant_bit)
        for z in partners:
            self.add_two_times_product((variables, constant_bit), ([z], 0))


def gauss_sum(form: Z4Form, nvars: int) -> Scalar:
    """Sum of i^form(u) over all u in GF(2)^nvars, by variable elimination."""
    acc = ONE
    form_const_factor = ONE
    alive = sorted(set(range(nvars)) | form.variables())
    while alive:
        v = alive[0]
        partners = sorted(next(iter(p - {v})) for p in form.quad if v in p)
        lam = form.lin.get(v, 0)
        if not partners:
            # closed factor 1 + i^lam
            if lam == 0:
                acc = acc * Scalar(2)
            elif lam == 1:
                acc = acc * (ONE + I)
            elif lam == 2:
                return ZERO
            else:
                acc = acc * (ONE - I)
            form.lin.pop(v, None)
            alive.remove(v)
            continue
        if lam % 2 == 0:
            # the sum over v forces parity(partners) = lam/2; substitute the
            # smallest partner away and gain a factor 2
            pivot = partners[0]
            rest = [z for z in partners if z != pivot]
            target_bit = (lam // 2) % 2
            form.lin.pop(v, None)
            form.quad = {p for p in form.quad if v not in p}
            form.substitute(pivot, rest, target_bit)
            acc = acc * Scalar(2)
            alive.remove(v)
            alive.remove(pivot)
        else:
            # sum over v gives (1 +/- i) times a phase depending on the parity
            if lam == 1:
                acc = acc * (ONE + I)
                form.add_scaled_xor(3, partners)
            else:
                acc = acc * (ONE - I)
                form.add_scaled_xor(1, partners)
            form.lin.pop(v, None)
            form.quad = {p for p in form.quad if v not in p}
            alive.remove(v)
    return acc * Scalar.i_power(form.const)


def _gf2_nullspace(basis: list[int], width: int) -> list[int]:
    """All-h basis with h . b = 0 for every b, bit conventions shared with
    the affine forms (mask bit width-1-s for slot s)."""
    pivots = []
    rows = []
    for b in basis:
        rows.append(b)
        pivots.append(b.bit_length() - 1)
    out = []
    for col in range(width):
        if col in pivots:
            continue
        h = 1 << col
        for b, p in zip(rows, pivots):
            if (b >> col) & 1:
                h ^= 1 << p
        out.append(h)
    # verify orthogonality
    for h in out:
        for b in basis:
            assert bin(h & b).count("1") % 2 == 0
    return out


def eval_affine(grid: SignatureGrid) -> Scalar:
    """Holant of a grid of affine signatures, as one exact Gauss sum."""
    if grid.dangling:
        raise HolantError("eval_affine needs a closed grid")
    forms = []
    for v, sig in enumerate(grid.vertices):
        form = is_affine(sig)
        if form is None:
            raise NotInFamily(f"vertex {v} is not affine")
        forms.append(form)

    n_edges = len(grid.edges)
    edge_of: dict[Endpoint, int] = {}
    for e, (a, b) in enumerate(grid.edges):
        edge_of[a] = e
        edge_of[b] = e

    # global linear system over the edge bits: rows are (mask, rhs)
    rows: list[tuple[int, int]] = []
    for v, form in enumerate(forms):
        arity = grid.vertices[v].arity
        for h in _gf2_nullspace(list(form.basis), arity):
            mask = 0
            for local_bit in range(arity):
                if (h >> local_bit) & 1:
                    slot = arity - 1 - local_bit
                    mask ^= 1 << edge_of[(v, slot)]
            rhs = bin(h & form.offset).count("1") % 2
            rows.append((mask, rhs))

    # RREF of the system; unsatisfiable -> Holant 0
    pivot_rows: list[tuple[int, int]] = []  # (mask, rhs), mask's top bit is the pivot
    for mask, rhs in rows:
        for pmask, prhs in pivot_rows:
            if (mask >> (pmask.bit_length() - 1)) & 1:
                mask ^= pmask
                rhs ^= prhs
        if mask == 0:
            if rhs:
                return ZERO
            continue
        pivot_rows.append((mask, rhs))
        pivot_rows.sort(key=lambda r: -r[0])
        # full reduction
        changed = True
        while changed:
            changed = False
            for i in range(len(pivot_rows)):
                for j in range(len(pivot_rows)):
                    if i == j:
                        continue
                    mi, ri = pivot_rows[i]
                    mj, rj = pivot_rows[j]
                    if (mi >> (mj.bit_length() - 1)) & 1:
                        pivot_rows[i] = (mi ^ mj, ri ^ rj)
                        changed = True
            pivot_rows = [r for r in pivot_rows if r[0]]
            pivot_rows.sort(key=lambda r: -r[0])

    pivot_cols = {mask.bit_length() - 1 for mask, _ in pivot_rows}
    free_cols = [c for c in range(n_edges) if c not in pivot_cols]
    var_index = {c: i for i, c in enumerate(free_cols)}

    # every edge bit as (xor of free vars, constant)
    edge_expr: list[tuple[list[int], int]] = [None] * n_edges  # type: ignore
    for c in free_cols:
        edge_expr[c] = ([var_index[c]], 0)
    for mask, rhs in pivot_rows:
        pivot = mask.bit_length() - 1
        vs = [var_index[c] for c in free_cols if (mask >> c) & 1]
        edge_expr[pivot] = (vs, rhs)

    total_form = Z4Form()
    prefactor = ONE
    for v, form in enumerate(forms):
        prefactor = prefactor * form.prefactor
        arity = grid.vertices[v].arity
        # free-variable expressions for this vertex: t_j = x[pivot_j] ^ x0[pivot_j]
        t_exprs = []
        for j, b in enumerate(form.basis):
            local_bit = b.bit_length() - 1
            slot = arity - 1 - local_bit
            vs, const = edge_expr[edge_of[(v, slot)]]
            const ^= (form.offset >> local_bit) & 1
            t_exprs.append((vs, const))
        for j, coeff in enumerate(form.linear):
            total_form.add_scaled_xor(coeff, t_exprs[j][0], t_exprs[j][1])
        for (j, k) in sorted(form.quadratic):
            total_form.add_two_times_product(t_exprs[j], t_exprs[k])

    return prefactor * gauss_sum(total_form, len(free_cols))


def eval_family_auto(grid: SignatureGrid) -> tuple[Scalar, str]:
    """Detect the family (unary/binary, equality, affine, in that order) and
    evaluate with the matching algorithm."""
    try:
        return eval_T_closure(grid), "T"
    except NotInFamily:
        pass
    try:
        return eval_E_closure(grid), "E"
    except NotInFamily:
        pass
    try:
        return eval_affine(grid), "A"
    except NotInFamily:
        raise NotInFamily("grid fits none of the implemented tractable families")
