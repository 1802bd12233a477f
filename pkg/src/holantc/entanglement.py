"""Entanglement predicates: GHZ/W classification, entangling projections and
the support-distance machinery used by the dichotomy's case analysis."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .algebra import Scalar
from .errors import ExhaustionFailure, ProfileUndefined, ZeroSignature
from .signature import DELTA_0, DELTA_1, MINUS, PLUS, Signature


@dataclass(frozen=True)
class TernaryClass:
    """Classification of a ternary signature: GHZ, W or a product witness."""

    tag: str  # "GHZ" | "W" | "NotGenuine"
    witness: tuple[tuple[Signature, tuple[int, ...]], ...] | None = None

    def __post_init__(self):
        assert self.tag in ("GHZ", "W", "NotGenuine")
        assert (self.witness is not None) == (self.tag == "NotGenuine")


def ghz_polynomial(f: Signature) -> Scalar:
    """The degree-4 coefficient polynomial separating GHZ from W type."""
    if f.arity != 3:
        raise ValueError("ghz_polynomial needs arity 3")
    a = f.values
    head = a[0] * a[7] - a[2] * a[5] + a[1] * a[6] - a[3] * a[4]
    tail = (a[2] * a[4] - a[0] * a[6]) * (a[3] * a[5] - a[1] * a[7])
    return head * head - Scalar(4) * tail


def w_clauses(f: Signature) -> bool:
    """Three-clause product criterion distinguishing W type from products."""
    a = f.values
    return (
        (a[0] * a[3] != a[1] * a[2] or a[5] * a[6] != a[4] * a[7])
        and (a[1] * a[4] != a[0] * a[5] or a[3] * a[6] != a[2] * a[7])
        and (a[3] * a[5] != a[1] * a[7] or a[2] * a[4] != a[0] * a[6])
    )


def ternary_class(f: Signature) -> TernaryClass:
    if f.arity != 3:
        raise ValueError("ternary_class needs arity 3")
    if f.is_zero():
        raise ZeroSignature("ternary_class needs a non-zero signature")
    if not ghz_polynomial(f).is_zero():
        return TernaryClass("GHZ")
    if w_clauses(f):
        return TernaryClass("W")
    return TernaryClass("NotGenuine", tuple(f.factorize()))


def is_genuinely_entangled(f: Signature) -> bool:
    if f.is_zero():
        raise ZeroSignature("entanglement test needs a non-zero signature")
    factors = f.factorize()
    return len(factors) == 1 and factors[0][0].arity == f.arity and f.arity >= 2


def binary_entangled(f: Signature) -> bool:
    """Arity-2 entanglement = non-vanishing determinant of the 2x2 reshape."""
    if f.arity != 2:
        raise ValueError("binary_entangled needs arity 2")
    return not (f.values[0] * f.values[3] - f.values[1] * f.values[2]).is_zero()


PROJECTION_BASIS = (("0", DELTA_0), ("1", DELTA_1), ("+", PLUS), ("-", MINUS))


def find_entangling_projection(f: Signature, j: int, k: int) -> list[str]:
    """Unary labels from {0,1,+,-} for every slot but j, k leaving an
    entangled binary residue.  Exhaustive lexicographic search, first hit."""
    n = f.arity
    if j == k or not (0 <= j < n and 0 <= k < n):
        raise ValueError("need two distinct in-range slots")
    others = [s for s in range(n) if s not in (j, k)]
    for combo in itertools.product(PROJECTION_BASIS, repeat=len(others)):
        residual = f
        # pin from the highest slot down so earlier slot numbers stay valid
        for (label, unary), slot in sorted(zip(combo, others), key=lambda p: -p[1]):
            residual = residual.apply_unary(slot, unary)
        if binary_entangled(residual):
            return [label for label, _ in combo]
    raise ExhaustionFailure("no entangling projection found; precondition violated")


def project_except(f: Signature, keep: tuple[int, ...], bits: tuple[int, ...]) -> Signature:
    """Pin every slot outside `keep` to the corresponding bit of `bits`."""
    others = [s for s in range(f.arity) if s not in keep]
    assert len(others) == len(bits)
    residual = f
    for slot, bit in sorted(zip(others, bits), key=lambda p: -p[0]):
        residual = residual.pin(slot, bit)
    return residual


@dataclass(frozen=True)
class DistanceProfile:
    """Minimum support distance at one level of the case analysis.

    level 0: distance between distinct support strings of the signature.
    level 1-3: distance between pinning patterns that reproduce the anchor
    up to a scalar (set A) and patterns giving some other non-zero signature
    (set B).  Witnesses are the lexicographically smallest minimising pair.
    """

    level: int
    value: int
    witness: tuple[tuple[int, ...], tuple[int, ...]]
    set_a: tuple[tuple[int, ...], ...] | None = None
    set_b: tuple[tuple[int, ...], ...] | None = None


def hamming(x: tuple[int, ...], y: tuple[int, ...]) -> int:
    return sum(a != b for a, b in zip(x, y))


def distance_profile(
    f: Signature,
    level: int,
    anchor: Signature | None = None,
    anchor_slots: tuple[int, ...] | None = None,
) -> DistanceProfile:
    if level == 0:
        support = f.support_bits()
        if len(support) < 2:
            raise ProfileUndefined("level-0 profile needs two support strings")
        best: tuple[int, tuple, tuple] | None = None
        for x, y in itertools.combinations(sorted(support), 2):
            d = hamming(x, y)
            cand = (d, x, y)
            if best is None or cand < best:
                best = cand
        return DistanceProfile(0, best[0], (best[1], best[2]))

    if anchor is None or anchor_slots is None:
        raise ValueError("levels 1-3 need an anchor signature and its slots")
    assert anchor.arity == len(anchor_slots)
    n = f.arity
    pinned = [s for s in range(n) if s not in anchor_slots]
    set_a: list[tuple[int, ...]] = []
    set_b: list[tuple[int, ...]] = []
    for bits in itertools.product((0, 1), repeat=len(pinned)):
        residual = project_except(f, tuple(anchor_slots), bits)
        # pinning leaves the kept slots in increasing order; realign with the
        # anchor's declared slot order
        order = sorted(anchor_slots)
        perm = [anchor_slots.index(s) for s in order]
        if perm != list(range(len(perm))):
            residual = residual.permute(perm)
        if residual.is_zero():
            continue
        if residual.is_proportional(anchor):
            set_a.append(bits)
        else:
            set_b.append(bits)
    if not set_a or not set_b:
        raise ProfileUndefined(f"level-{level} profile has an empty side")
    best = None
    for x in sorted(set_a):
        for y in sorted(set_b):
            cand = (hamming(x, y), x, y)
            if best is None or cand < best:
                best = cand
    return DistanceProfile(level, best[0], (best[1], best[2]),
                           tuple(sorted(set_a)), tuple(sorted(set_b)))
