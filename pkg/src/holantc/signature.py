"""Dense signatures: n-ary functions {0,1}^n -> Q(zeta_8) as length-2^n vectors.

Index convention: slot 0 is the most significant bit, so the value on the
bit string (x_0, ..., x_{n-1}) sits at index sum(x_s << (n-1-s)).  All slot
arguments throughout the package are 0-based.
"""

from __future__ import annotations

import itertools

from .algebra import Mat2, ONE, Scalar, ZERO
from .errors import ArityLimit, InvalidLoop, ZeroSignature

ARITY_CAP = 16


def _bit(index: int, arity: int, slot: int) -> int:
    return (index >> (arity - 1 - slot)) & 1


class Signature:
    """An immutable dense signature."""

    __slots__ = ("arity", "values")

    def __init__(self, arity: int, values):
        values = tuple(values)
        if arity < 0 or arity > ARITY_CAP:
            raise ArityLimit(f"arity {arity} outside [0, {ARITY_CAP}]")
        if len(values) != 1 << arity:
            raise ValueError(f"need {1 << arity} values for arity {arity}, got {len(values)}")
        self.arity = arity
        self.values = values

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, value: Scalar) -> "Signature":
        return cls(0, (value,))

    @classmethod
    def unary(cls, v0, v1) -> "Signature":
        return cls(1, (v0, v1))

    @classmethod
    def from_support(cls, arity: int, entries: dict[int, Scalar]) -> "Signature":
        values = [ZERO] * (1 << arity)
        for index, value in entries.items():
            values[index] = value
        return cls(arity, values)

    @classmethod
    def from_symmetric(cls, by_weight) -> "Signature":
        """Build from the Hamming-weight value list [f_0, ..., f_n]."""
        by_weight = list(by_weight)
        arity = len(by_weight) - 1
        values = [by_weight[bin(x).count("1")] for x in range(1 << arity)]
        return cls(arity, values)

    # -- basics --------------------------------------------------------------

    def value(self, bits) -> Scalar:
        index = 0
        for b in bits:
            index = (index << 1) | b
        return self.values[index]

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values)

    def support(self) -> list[int]:
        return [x for x, v in enumerate(self.values) if not v.is_zero()]

    def support_bits(self) -> list[tuple[int, ...]]:
        return [tuple(_bit(x, self.arity, s) for s in range(self.arity))
                for x in self.support()]

    def scale(self, s: Scalar) -> "Signature":
        return Signature(self.arity, tuple(s * v for v in self.values))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signature):
            return NotImplemented
        return self.arity == other.arity and self.values == other.values

    def __hash__(self) -> int:
        return hash((self.arity, self.values))

    def is_proportional(self, other: "Signature") -> bool:
        """True if self = s * other for some non-zero field element s."""
        if self.arity != other.arity:
            return False
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        for x, y in zip(self.values, other.values):
            if x.is_zero() != y.is_zero():
                return False
        n = len(self.values)
        for i in range(n):
            for j in range(i + 1, n):
                if self.values[i] * other.values[j] != self.values[j] * other.values[i]:
                    return False
        return True

    def proportionality(self, other: "Signature") -> Scalar | None:
        """The scalar s with self = s * other, or None."""
        if not self.is_proportional(other):
            return None
        for x, y in zip(self.values, other.values):
            if not y.is_zero():
                return x / y
        return None

    def __repr__(self) -> str:
        return f"Signature(arity={self.arity}, [{', '.join(str(v) for v in self.values)}])"

    # -- operations ----------------------------------------------------------

    def tensor(self, other: "Signature") -> "Signature":
        arity = self.arity + other.arity
        if arity > ARITY_CAP:
            raise ArityLimit(f"tensor product arity {arity} exceeds {ARITY_CAP}")
        m = other.arity
        values = []
        for x in self.values:
            if x.is_zero():
                values.extend([ZERO] * (1 << m))
            else:
                values.extend(x * y for y in other.values)
        return Signature(arity, values)

    def apply_unary(self, slot: int, g: "Signature") -> "Signature":
        """Contract input `slot` with the unary signature g."""
        if g.arity != 1:
            raise ValueError("apply_unary needs a unary signature")
        if not 0 <= slot < self.arity:
            raise ValueError(f"slot {slot} out of range for arity {self.arity}")
        n = self.arity
        shift = n - 1 - slot
        values = []
        for x in range(1 << (n - 1)):
            high = (x >> shift) << (shift + 1)
            low = x & ((1 << shift) - 1)
            base = high | low
            acc = g.values[0] * self.values[base]
            acc = acc + g.values[1] * self.values[base | (1 << shift)]
            values.append(acc)
        return Signature(n - 1, values)

    def pin(self, slot: int, bit: int) -> "Signature":
        return self.apply_unary(slot, DELTA[bit])

    def self_loop(self, i: int, j: int) -> "Signature":
        """Join inputs i and j, summing over their shared value."""
        if i == j:
            raise InvalidLoop("self loop needs two distinct slots")
        if not (0 <= i < self.arity and 0 <= j < self.arity):
            raise ValueError("loop slot out of range")
        if self.arity < 2:
            raise ValueError("self loop needs arity >= 2")
        i, j = sorted((i, j))
        n = self.arity
        values = []
        remaining = [s for s in range(n) if s not in (i, j)]
        for x in range(1 << (n - 2)):
            bits = [0] * n
            for pos, s in enumerate(remaining):
                bits[s] = (x >> (n - 3 - pos)) & 1
            acc = ZERO
            for b in (0, 1):
                bits[i] = bits[j] = b
                acc = acc + self.value(bits)
            values.append(acc)
        return Signature(n - 2, values)

    def transform(self, m: Mat2) -> "Signature":
        """Apply m to every input: the vector becomes m^(x)arity |f>."""
        sig = self
        for slot in range(self.arity):
            sig = sig.transform_slot(slot, m)
        return sig

    def transform_slot(self, slot: int, m: Mat2) -> "Signature":
        """Apply m to a single input slot only."""
        if not 0 <= slot < self.arity:
            raise ValueError(f"slot {slot} out of range")
        n = self.arity
        shift = n - 1 - slot
        new = [ZERO] * len(self.values)
        for x, v in enumerate(self.values):
            if v.is_zero():
                continue
            bit = (x >> shift) & 1
            base = x & ~(1 << shift)
            new[base] = new[base] + m.entry(0, bit) * v
            new[base | (1 << shift)] = new[base | (1 << shift)] + m.entry(1, bit) * v
        return Signature(n, new)

    def permute(self, perm) -> "Signature":
        """Relabel inputs: new slot perm[s] carries what old slot s carried."""
        perm = list(perm)
        n = self.arity
        if sorted(perm) != list(range(n)):
            raise ValueError(f"{perm} is not a permutation of range({n})")
        values = [ZERO] * len(self.values)
        for x, v in enumerate(self.values):
            y = 0
            for s in range(n):
                y |= _bit(x, n, s) << (n - 1 - perm[s])
            values[y] = v
        return Signature(n, values)

    def symmetric_shorthand(self) -> list[Scalar] | None:
        """[f_0, ..., f_n] if permutation-invariant, else None."""
        n = self.arity
        by_weight: list[Scalar | None] = [None] * (n + 1)
        for x, v in enumerate(self.values):
            w = bin(x).count("1")
            if by_weight[w] is None:
                by_weight[w] = v
            elif by_weight[w] != v:
                return None
        return list(by_weight)

    def is_symmetric(self) -> bool:
        return self.symmetric_shorthand() is not None

    # -- tensor factorisation -------------------------------------------------

    def _separable(self, subset: tuple[int, ...]) -> tuple[list[Scalar], list[Scalar]] | None:
        """Split f = g (x) h across (subset, complement), or None.

        Returns the dense value lists of g (on subset slots, in order) and h
        (on the complement).  The split is exact: g carries the full scale.
        """
        n = self.arity
        rest = [s for s in range(n) if s not in subset]
        rows = 1 << len(subset)
        cols = 1 << len(rest)

        def index_of(a: int, b: int) -> int:
            x = 0
            for pos, s in enumerate(subset):
                x |= ((a >> (len(subset) - 1 - pos)) & 1) << (n - 1 - s)
            for pos, s in enumerate(rest):
                x |= ((b >> (len(rest) - 1 - pos)) & 1) << (n - 1 - s)
            return x

        pivot = None
        for a in range(rows):
            for b in range(cols):
                if not self.values[index_of(a, b)].is_zero():
                    pivot = (a, b)
                    break
            if pivot:
                break
        if pivot is None:
            return None
        pa, pb = pivot
        pivot_value = self.values[index_of(pa, pb)]
        # rank-1 test: all 2x2 minors against the pivot row/column vanish
        for a in range(rows):
            for b in range(cols):
                lhs = self.values[index_of(a, b)] * pivot_value
                rhs = self.values[index_of(a, pb)] * self.values[index_of(pa, b)]
                if lhs != rhs:
                    return None
        g = [self.values[index_of(a, pb)] for a in range(rows)]
        h = [self.values[index_of(pa, b)] / pivot_value for b in range(cols)]
        return g, h

    def factorize(self) -> list[tuple["Signature", tuple[int, ...]]]:
        """The unique finest tensor factorisation into entangled factors.

        Returns (factor, slots) pairs sorted by smallest slot.  The product of
        the factors over their slot sets reproduces the signature exactly; the
        overall scale is carried by the first factor, every later factor has
        its first non-zero entry equal to 1.
        """
        if self.is_zero():
            raise ZeroSignature("cannot factorize the zero signature")
        factors: list[tuple[Signature, tuple[int, ...]]] = []
        current = self
        slots = tuple(range(self.arity))
        while True:
            n = current.arity
            if n <= 1:
                factors.append((current, slots))
                break
            found = None
            for size in range(1, n // 2 + 1):
                for subset in itertools.combinations(range(n), size):
                    split = current._separable(subset)
                    if split is not None:
                        found = (subset, split)
                        break
                if found:
                    break
            if found is None:
                factors.append((current, slots))
                break
            subset, (g_vals, h_vals) = found
            g_slots = tuple(slots[s] for s in subset)
            h_slots = tuple(slots[s] for s in range(n) if s not in subset)
            factors.append((Signature(len(subset), g_vals), g_slots))
            current = Signature(n - len(subset), h_vals)
            slots = h_slots
        factors.sort(key=lambda pair: pair[1][0] if pair[1] else -1)
        # normalise: scale lives on the first factor
        scale = ONE
        normalised = []
        for pos, (factor, fslots) in enumerate(factors):
            if pos == 0:
                normalised.append((factor, fslots))
                continue
            lead = next(v for v in factor.values if not v.is_zero())
            scale = scale * lead
            normalised.append((factor.scale(lead.inverse()), fslots))
        if not scale == ONE:
            head, head_slots = normalised[0]
            normalised[0] = (head.scale(scale), head_slots)
        return normalised

    def is_degenerate(self) -> bool:
        """True when the signature is a tensor product of unary signatures."""
        return all(f.arity <= 1 for f, _ in self.factorize())


def reassemble(factors: list[tuple[Signature, tuple[int, ...]]]) -> Signature:
    """Tensor the factors back together on their original slots."""
    arity = sum(f.arity for f, _ in factors)
    order: list[int] = []
    combined: Signature | None = None
    for factor, slots in factors:
        order.extend(slots)
        combined = factor if combined is None else combined.tensor(factor)
    assert combined is not None and combined.arity == arity
    perm = [0] * arity
    for pos, slot in enumerate(order):
        perm[pos] = slot
    return combined.permute(perm)


# -- named signatures ---------------------------------------------------------

DELTA_0 = Signature.unary(ONE, ZERO)
DELTA_1 = Signature.unary(ZERO, ONE)
PLUS = Signature.unary(ONE, ONE)
MINUS = Signature.unary(ONE, -ONE)
DELTA = (DELTA_0, DELTA_1)


def equality(n: int) -> Signature:
    """|0...0> + |1...1>."""
    if n < 1:
        raise ValueError("equality needs arity >= 1")
    return Signature.from_support(n, {0: ONE, (1 << n) - 1: ONE})


def exact_one(n: int) -> Signature:
    """1 on Hamming-weight-1 inputs, 0 elsewhere."""
    return Signature.from_support(n, {1 << k: ONE for k in range(n)})


GHZ = equality(3)
W_STATE = exact_one(3)
