"""Membership tests for the tractable signature families.

Families covered: unary/binary tensor closures, generalized equalities and
their orthogonal / K / KX transforms, perfect-matchings-style signatures,
affine (stabilizer) signatures with their canonical forms, the lambda-twisted
affine family, and transformed-affine sets via a 2x2 candidate search.

The orthogonal-transform decision never extracts square roots.  An unordered
pair of candidate matrix columns is represented projectively by a quadratic
g2*x^2 + g1*x + g0 whose roots r map to directions (-r, 1) (the root at
infinity, when g2 = 0, maps to (1, 0)).  All membership conditions are
polynomial identities in the quadratic's coefficients.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    I,
    MAT_HADAMARD_LIKE,
    MAT_IDENTITY,
    MAT_K,
    MAT_KX,
    MAT_T,
    Mat2,
    ONE,
    Scalar,
    ZERO,
    ZETA,
    monomial_cbrt,
    sqrt_in_field,
)
from .entanglement import ternary_class
from .errors import SingularMatrix, ZeroSignature
from .signature import DELTA_0, DELTA_1, Signature, equality

# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyVerdict:
    """Outcome of a family membership test.

    member is True, False, or None for Unknown.  A witness (transform matrix,
    factor layout, ...) is present exactly when member is True; a reason
    string accompanies False/Unknown results.
    """

    member: bool | None
    family: str | None = None
    witness: object | None = None
    reason: str | None = None

    def __post_init__(self):
        assert (self.witness is not None) == (self.member is True)


# ---------------------------------------------------------------------------
# support-pattern families
# ---------------------------------------------------------------------------


def in_E(f: Signature) -> bool:
    """Support contained in one complementary string pair {x, xbar}."""
    if f.is_zero():
        raise ZeroSignature("in_E needs a non-zero signature")
    support = f.support()
    if len(support) == 1:
        return True
    if len(support) == 2:
        full = (1 << f.arity) - 1
        return support[0] ^ support[1] == full
    return False


def in_M(f: Signature) -> bool:
    """Support contained in the Hamming-weight-at-most-1 strings."""
    if f.is_zero():
        raise ZeroSignature("in_M needs a non-zero signature")
    return all(bin(x).count("1") <= 1 for x in f.support())


def in_T_closure(sigs: list[Signature]) -> FamilyVerdict:
    """Tensor closure of unary and binary signatures."""
    layouts = []
    for pos, f in enumerate(sigs):
        factors = f.factorize()
        for factor, slots in factors:
            if factor.arity > 2:
                return FamilyVerdict(
                    False, "T",
                    reason=f"signature {pos} has an entangled factor on slots {slots}")
        layouts.append(tuple(slots for _, slots in factors))
    return FamilyVerdict(True, "T", witness=tuple(layouts))


def in_transformed_closure(sigs: list[Signature], m: Mat2, family: str) -> FamilyVerdict:
    """Membership in the tensor closure of m∘E or m∘M."""
    if family not in ("E", "M"):
        raise ValueError("family must be 'E' or 'M'")
    if not m.is_invertible():
        raise SingularMatrix("transform must be invertible")
    check = in_E if family == "E" else in_M
    m_inv = m.inverse()
    for pos, f in enumerate(sigs):
        for factor, slots in f.factorize():
            if factor.arity == 0:
                continue
            if not check(factor.transform(m_inv)):
                return FamilyVerdict(
                    False, family,
                    reason=f"signature {pos}, factor on slots {slots}, "
                           f"is not a transformed-{family} signature")
    return FamilyVerdict(True, family, witness=m)


# ---------------------------------------------------------------------------
# direction-pair quadratics
# ---------------------------------------------------------------------------

Quadratic = tuple[Scalar, Scalar, Scalar]  # (g2, g1, g0)


def _quad_is_zero(q: Quadratic) -> bool:
    return all(c.is_zero() for c in q)


def _quad_proportional(q1: Quadratic, q2: Quadratic) -> bool:
    for i in range(3):
        for j in range(i + 1, 3):
            if q1[i] * q2[j] != q1[j] * q2[i]:
                return False
    return True


def _quad_canonical(q: Quadratic) -> Quadratic:
    lead = next(c for c in q if not c.is_zero())
    inv = lead.inverse()
    return tuple(c * inv for c in q)


def quad_discriminant(q: Quadratic) -> Scalar:
    g2, g1, g0 = q
    return g1 * g1 - Scalar(4) * g2 * g0


def quad_orthogonality(q: Quadratic) -> bool:
    """Bilinear dot product of the two encoded directions vanishes."""
    g2, g1, g0 = q
    return (g0 + g2).is_zero()


def quad_norms_nonzero(q: Quadratic) -> bool:
    """Neither encoded direction is isotropic for the bilinear form."""
    g2, g1, g0 = q
    diff = g0 - g2
    return not (diff * diff + g1 * g1).is_zero()


class _NotTwoTerm(Exception):
    pass


class _DegenerateExtraction(Exception):
    pass


def _slot_pencil_quadratic(f: Signature, slot: int) -> Quadratic:
    """Direction-pair quadratic of a two-term product tensor at one slot.

    Sliced along `slot`, a combination F0 + x*F1 of the two slices is a full
    product tensor exactly at the two roots.  Every 2x2 minor of every mode
    matricization of the pencil is then a multiple of one canonical quadratic;
    a non-proportional pair of minors certifies the tensor is not a two-term
    product at this slot.
    """
    n = f.arity
    m = n - 1
    shift = n - 1 - slot
    f0 = []
    f1 = []
    for y in range(1 << m):
        hi = (y >> shift) << (shift + 1)
        lo = y & ((1 << shift) - 1)
        base = hi | lo
        f0.append(f.values[base])
        f1.append(f.values[base | (1 << shift)])

    def insert_bit(z: int, pos: int, b: int) -> int:
        pshift = m - 1 - pos
        hi = (z >> pshift) << (pshift + 1)
        lo = z & ((1 << pshift) - 1)
        return hi | lo | (b << pshift)

    canonical: Quadratic | None = None
    for pos in range(m):
        for z1, z2 in itertools.combinations(range(1 << (m - 1)), 2):
            i00 = insert_bit(z1, pos, 0)
            i10 = insert_bit(z1, pos, 1)
            i01 = insert_bit(z2, pos, 0)
            i11 = insert_bit(z2, pos, 1)
            c2 = f1[i00] * f1[i11] - f1[i01] * f1[i10]
            c1 = (f0[i00] * f1[i11] + f1[i00] * f0[i11]
                  - f0[i01] * f1[i10] - f1[i01] * f0[i10])
            c0 = f0[i00] * f0[i11] - f0[i01] * f0[i10]
            q = (c2, c1, c0)
            if _quad_is_zero(q):
                continue
            if canonical is None:
                canonical = q
            elif not _quad_proportional(canonical, q):
                raise _NotTwoTerm(f"slot {slot} pencil has inconsistent minors")
    if canonical is None:
        raise _DegenerateExtraction(f"slot {slot} pencil has no non-zero minor")
    return _quad_canonical(canonical)


def two_term_quadratic(f: Signature) -> Quadratic:
    """The common direction-pair quadratic of an entangled two-term tensor.

    Raises _NotTwoTerm when the tensor provably is not of the form
    a*(w_1 x ... x w_n) + b*(w_1' x ... x w_n') with one global direction
    pair, and _DegenerateExtraction when extraction finds nothing to work
    with (not expected for genuinely entangled inputs).
    """
    assert f.arity >= 3
    canonical = None
    for slot in range(f.arity):
        q = _slot_pencil_quadratic(f, slot)
        if canonical is None:
            canonical = q
        elif not _quad_proportional(canonical, q):
            raise _NotTwoTerm("direction pairs differ between slots")
    if quad_discriminant(canonical).is_zero():
        raise _NotTwoTerm("direction pair is degenerate (double root)")
    return canonical


def _binary_diag_condition(q: Quadratic, g: Signature) -> bool:
    """G decomposes over the pair with both terms on matching columns."""
    g00, g01, g10, g11 = g.values
    if g01 != g10:
        return False
    g2, g1, g0 = q
    return (g2 * g00 - g1 * g01 + g0 * g11).is_zero()


def _binary_anti_condition(q: Quadratic, g: Signature) -> bool:
    """G decomposes over the pair with the terms on crossed columns."""
    g00, g01, g10, g11 = g.values
    g2, g1, g0 = q
    mixed = g01 + g10
    return ((g2 * g00 - g0 * g11).is_zero()
            and (g2 * mixed - g1 * g11).is_zero()
            and (g0 * mixed - g1 * g00).is_zero())


def _binary_fits_pair(q: Quadratic, g: Signature) -> bool:
    return _binary_diag_condition(q, g) or _binary_anti_condition(q, g)


def _pair_conditions(q: Quadratic) -> bool:
    return (not quad_discriminant(q).is_zero()
            and quad_orthogonality(q)
            and quad_norms_nonzero(q))


def quad_directions(q: Quadratic) -> tuple[tuple[Scalar, Scalar], tuple[Scalar, Scalar]] | None:
    """Explicit directions for the pair if the roots live in the field."""
    g2, g1, g0 = q
    if g2.is_zero():
        if g1.is_zero():
            return None
        return ((ONE, ZERO), (-(g0 / g1), ONE))
    root = sqrt_in_field(quad_discriminant(q))
    if root is None:
        return None
    half = Scalar(Fraction(1, 2))
    r1 = (-g1 + root) * half / g2
    r2 = (-g1 - root) * half / g2
    return ((-r1, ONE), (-r2, ONE))


def orthogonal_from_quadratic(q: Quadratic) -> Mat2 | None:
    """An explicit orthogonal matrix with columns on the pair, when the
    required roots exist inside the field."""
    dirs = quad_directions(q)
    if dirs is None:
        return None
    cols = []
    for d in dirs:
        norm = d[0] * d[0] + d[1] * d[1]
        root = sqrt_in_field(norm)
        if root is None or root.is_zero():
            return None
        cols.append((d[0] / root, d[1] / root))
    o = Mat2(cols[0][0], cols[1][0], cols[0][1], cols[1][1])
    if o.transpose() * o == MAT_IDENTITY:
        return o
    return None


def exists_orthogonal_O(sigs: list[Signature]) -> FamilyVerdict:
    """Is there one complex orthogonal O with every tensor factor in O∘E?

    Factors of arity >= 3 pin the candidate pair down exactly; binary factors
    contribute polynomial conditions on it.  With no higher-arity factor the
    remaining linear system over the quadratic's coefficients is solved
    directly, so the answer is conclusive in every reachable case.
    """
    big: list[Signature] = []
    bins: list[Signature] = []
    for pos, f in enumerate(sigs):
        for factor, _ in f.factorize():
            if factor.arity >= 3:
                big.append(factor)
            elif factor.arity == 2:
                bins.append(factor)

    if big:
        canonical = None
        for factor in big:
            try:
                q = two_term_quadratic(factor)
            except _NotTwoTerm as exc:
                return FamilyVerdict(False, "OE", reason=str(exc))
            except _DegenerateExtraction as exc:
                return FamilyVerdict(None, "OE", reason=str(exc))
            if canonical is None:
                canonical = q
            elif not _quad_proportional(canonical, q):
                return FamilyVerdict(False, "OE",
                                     reason="factors need different column pairs")
        if not _pair_conditions(canonical):
            return FamilyVerdict(False, "OE",
                                 reason="column pair cannot be orthonormalised")
        for g in bins:
            if not _binary_fits_pair(canonical, g):
                return FamilyVerdict(False, "OE",
                                     reason="a binary factor does not fit the column pair")
        return FamilyVerdict(True, "OE",
                             witness=(canonical, orthogonal_from_quadratic(canonical)))

    if not bins:
        identity_pair: Quadratic = (ZERO, ONE, ZERO)
        return FamilyVerdict(True, "OE",
                             witness=(identity_pair, MAT_IDENTITY))

    # binary-only: each factor constrains the pair linearly through one of its
    # two decomposition shapes; branch over the shapes and solve.
    for routes in itertools.product(("diag", "anti"), repeat=len(bins)):
        rows: list[tuple[Scalar, Scalar, Scalar]] = [(ONE, ZERO, ONE)]  # g0 + g2 = 0
        feasible = True
        for route, g in zip(routes, bins):
            g00, g01, g10, g11 = g.values
            if route == "diag":
                if g01 != g10:
                    feasible = False
                    break
                rows.append((g00, -g01, g11))
            else:
                rows.append((g00, ZERO, -g11))
                rows.append((g01 + g10, -g11, ZERO))
                rows.append((ZERO, -g00, g01 + g10))
        if not feasible:
            continue
        solution = _solve_projective(rows)
        for q in solution:
            if _pair_conditions(q) and all(_binary_fits_pair(q, g) for g in bins):
                return FamilyVerdict(True, "OE",
                                     witness=(q, orthogonal_from_quadratic(q)))
    return FamilyVerdict(False, "OE",
                         reason="no orthogonal column pair fits all binary factors")


def _solve_projective(rows) -> list[Quadratic]:
    """Candidate non-zero solutions (g2, g1, g0) of a homogeneous system.

    Returns a small deterministic sample of the solution space, enough to hit
    a point off any two exceptional lines when one exists.
    """
    # Gaussian elimination over the field on a 3-column system
    matrix = [list(r) for r in rows]
    pivots = []
    row = 0
    for col in range(3):
        pivot = None
        for r in range(row, len(matrix)):
            if not matrix[r][col].is_zero():
                pivot = r
                break
        if pivot is None:
            continue
        matrix[row], matrix[pivot] = matrix[pivot], matrix[row]
        inv = matrix[row][col].inverse()
        matrix[row] = [v * inv for v in matrix[row]]
        for r in range(len(matrix)):
            if r != row and not matrix[r][col].is_zero():
                coeff = matrix[r][col]
                matrix[r] = [a - coeff * b for a, b in zip(matrix[r], matrix[row])]
        pivots.append(col)
        row += 1
        if row == len(matrix):
            break
    free = [c for c in range(3) if c not in pivots]
    if not free:
        return []
    basis = []
    for fc in free:
        vec = [ZERO, ZERO, ZERO]
        vec[fc] = ONE
        for r, pc in enumerate(pivots):
            vec[pc] = -matrix[r][fc]
        basis.append(tuple(vec))
    if len(basis) == 1:
        return [basis[0]]
    combos = []
    small = [Scalar(0), ONE, -ONE, Scalar(2), I]
    for coeffs in itertools.product(small, repeat=len(basis)):
        if all(c.is_zero() for c in coeffs):
            continue
        vec = [ZERO, ZERO, ZERO]
        for c, b in zip(coeffs, basis):
            for k in range(3):
                vec[k] = vec[k] + c * b[k]
        if not all(v.is_zero() for v in vec):
            combos.append(tuple(vec))
        if len(combos) >= 40:
            break
    return combos


# ---------------------------------------------------------------------------
# affine signatures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineForm:
    """Canonical form of an affine signature.

    The support is the affine space {offset xor span(basis)}; basis vectors
    are bit masks in reduced row-echelon form, most significant pivot first.
    On the free-variable parametrisation t the value is
    prefactor * i^(sum linear_j t_j) * (-1)^(sum_{(j,k) in quadratic} t_j t_k).
    """

    arity: int
    offset: int
    basis: tuple[int, ...]
    linear: tuple[int, ...]
    quadratic: frozenset[tuple[int, int]]
    prefactor: Scalar

    def dimension(self) -> int:
        return len(self.basis)

    def evaluate(self) -> Signature:
        values = [ZERO] * (1 << self.arity)
        k = len(self.basis)
        for t in range(1 << k):
            x = self.offset
            exponent = 0
            for j in range(k):
                if (t >> (k - 1 - j)) & 1:
                    x ^= self.basis[j]
                    exponent += self.linear[j]
            for (j, l) in self.quadratic:
                if (t >> (k - 1 - j)) & 1 and (t >> (k - 1 - l)) & 1:
                    exponent += 2
            values[x] = self.prefactor * Scalar.i_power(exponent)
        return Signature(self.arity, values)


def _gf2_rref(vectors: list[int]) -> list[int]:
    basis: list[int] = []
    for v in vectors:
        cur = v
        for b in basis:
            if cur ^ b < cur:
                cur ^= b
        if not cur:
            continue
        basis.append(cur)
        basis.sort(reverse=True)
        changed = True
        while changed:
            changed = False
            for i in range(len(basis)):
                for j in range(len(basis)):
                    if i != j and basis[i] ^ basis[j] < basis[i]:
                        basis[i] ^= basis[j]
                        changed = True
            basis = [b for b in basis if b]
            basis.sort(reverse=True)
    return basis


def _in_span(v: int, basis: list[int]) -> bool:
    for b in basis:
        if v ^ b < v:
            v ^= b
    return v == 0


def is_affine(f: Signature) -> AffineForm | None:
    """The affine canonical form of f, or None when f is not affine.

    Checks that the support is an affine space and that the phase exponent,
    as a Z4-valued function of the free variables, is linear plus twice a
    GF(2)-quadratic: its Moebius coefficients vanish above degree 2 and are
    even in degree 2.
    """
    if f.is_zero():
        raise ZeroSignature("is_affine needs a non-zero signature")
    support = f.support()
    x0 = support[0]
    vectors = [x ^ x0 for x in support]
    basis = _gf2_rref(vectors)
    k = len(basis)
    if len(support) != (1 << k):
        return None
    if any(not _in_span(v, basis) for v in vectors):
        return None
    base_value = f.values[x0]
    exponents = [0] * (1 << k)
    for t in range(1 << k):
        x = x0
        for j in range(k):
            if (t >> (k - 1 - j)) & 1:
                x ^= basis[j]
        ratio = f.values[x] / base_value
        for e in range(4):
            if ratio == Scalar.i_power(e):
                exponents[t] = e
                break
        else:
            return None
    # Moebius transform over Z4: coefficients of the multilinear expansion
    coeffs = list(exponents)
    for j in range(k):
        bit = 1 << (k - 1 - j)
        for t in range(1 << k):
            if t & bit:
                coeffs[t] = (coeffs[t] - coeffs[t ^ bit]) % 4
    linear = [0] * k
    quadratic = set()
    for t in range(1, 1 << k):
        weight = bin(t).count("1")
        if weight == 1:
            linear[k - t.bit_length()] = coeffs[t]
        elif weight == 2:
            if coeffs[t] % 2 != 0:
                return None
            if coeffs[t] != 0:
                positions = [k - 1 - p for p in range(k) if t & (1 << p)]
                quadratic.add((min(positions), max(positions)))
        elif coeffs[t] != 0:
            return None
    return AffineForm(f.arity, x0, tuple(basis), tuple(linear),
                      frozenset(quadratic), base_value)


def in_L(f: Signature) -> bool:
    """Every support string's T-twist of f is affine."""
    if f.is_zero():
        raise ZeroSignature("in_L needs a non-zero signature")
    for bits in f.support_bits():
        twisted = f
        for slot, b in enumerate(bits):
            if b:
                twisted = twisted.transform_slot(slot, MAT_T)
        if is_affine(twisted) is None:
            return False
    return True


def is_in_cS(s: Mat2) -> bool:
    """Does s keep the binary equality and both pins affine under transpose?"""
    if not s.is_invertible():
        raise SingularMatrix("is_in_cS needs an invertible matrix")
    st = s.transpose()
    return (is_affine(equality(2).transform(st)) is not None
            and is_affine(DELTA_0.transform(st)) is not None
            and is_affine(DELTA_1.transform(st)) is not None)



# ---------------------------------------------------------------------------
# the transformed-affine family
# ---------------------------------------------------------------------------
#
# A 2x2 matrix S belongs to the transform set when S-transpose keeps both
# pins and the binary equality affine.  The pin conditions force each ROW of
# S to be a scalar multiple of an affine unary, of which there are only six
# up to scale; the equality condition then pins the relative row scale down
# to finitely many values through linear equations.  This yields a complete
# enumeration of the transform set over the ground field, up to the overall
# scalar (which never matters for membership questions).

_AFFINE_UNARY_DIRS = (
    (ONE, ZERO),
    (ZERO, ONE),
    (ONE, ONE),
    (ONE, I),
    (ONE, -ONE),
    (ONE, -I),
)

_cS_cache: list[Mat2] | None = None


def enumerate_cS() -> list[Mat2]:
    """Every ground-field member of the transform set, up to scalar."""
    global _cS_cache
    if _cS_cache is not None:
        return _cS_cache
    found: list[Mat2] = []
    for a in _AFFINE_UNARY_DIRS:
        for b in _AFFINE_UNARY_DIRS:
            if (a[0] * b[1] - a[1] * b[0]).is_zero():
                continue
            # S = [[a0, a1], [t*b0, t*b1]] with t^2 =: tau; the Gram matrix
            # S^T S has entries linear in tau
            e00 = (a[0] * a[0], b[0] * b[0])
            e01 = (a[0] * a[1], b[0] * b[1])
            e11 = (a[1] * a[1], b[1] * b[1])
            taus: list[Scalar] = []

            def linear_roots(c0: Scalar, c1: Scalar) -> None:
                # roots of c0 + c1*tau = 0
                if not c1.is_zero():
                    taus.append(-(c0 / c1))

            for k in range(4):
                phase = Scalar.i_power(k)
                linear_roots(e01[0] - phase * e00[0], e01[1] - phase * e00[1])
                linear_roots(e11[0] - phase * e00[0], e11[1] - phase * e00[1])
            linear_roots(*e01)
            linear_roots(*e00)
            linear_roots(*e11)
            for tau in taus:
                if tau.is_zero():
                    continue
                beta = sqrt_in_field(tau)
                if beta is None:
                    continue
                for sign in (ONE, -ONE):
                    s = Mat2(a[0], a[1], sign * beta * b[0], sign * beta * b[1])
                    if s.is_invertible() and is_in_cS(s):
                        found.append(s)
    _cS_cache = _dedup_proportional(found)
    return _cS_cache


def _proportional_key(m: Mat2) -> tuple:
    entries = (m.a, m.b, m.c, m.d)
    lead = next((e for e in entries if not e.is_zero()), None)
    if lead is None:
        return ((0,),)
    inv = lead.inverse()
    return tuple((e * inv).coeffs() for e in entries)


def _dedup_proportional(mats: list[Mat2]) -> list[Mat2]:
    kept: list[Mat2] = []
    seen: set = set()
    for m in mats:
        key = _proportional_key(m)
        if key not in seen:
            seen.add(key)
            kept.append(m)
    return kept


# Polynomials in one variable over the field, as coefficient lists with the
# constant term first.  Used to harvest the finitely many diagonal scales
# that could make an anchored signature affine.

def _poly_trim(p: list[Scalar]) -> list[Scalar]:
    while p and p[-1].is_zero():
        p.pop()
    return p


_TRIAL_ROOTS = tuple(
    [Scalar.zeta_power(k) for k in range(8)]
    + [-Scalar.zeta_power(k) for k in range(8)]
    + [Scalar(2), Scalar(-2), Scalar(Fraction(1, 2)), Scalar(Fraction(-1, 2)),
       ONE + I, ONE - I]
)


def _poly_eval(p: list[Scalar], x: Scalar) -> Scalar:
    acc = ZERO
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_roots_in_field(p: list[Scalar]) -> tuple[list[Scalar], bool]:
    """Ground-field roots of p, plus a flag for exhaustiveness in the field."""
    p = _poly_trim(list(p))
    if not p:
        return [], True  # identically zero: no information, handled by caller
    degree = len(p) - 1
    if degree == 0:
        return [], True
    if degree == 1:
        return [-(p[0] / p[1])], True
    if degree == 2:
        c, b, a = p[0], p[1], p[2]
        disc = b * b - Scalar(4) * a * c
        root = sqrt_in_field(disc)
        if root is None:
            return [], True  # irreducible over the field
        half = (Scalar(2) * a).inverse()
        return [(-b + root) * half, (-b - root) * half], True
    if degree == 3:
        if p[1].is_zero() and p[2].is_zero():
            target = -(p[0] / p[3])
            root = monomial_cbrt(target)
            if root is not None:
                return [root], True  # other cube roots differ by a unit outside the field
            return [], target.is_zero() or _is_monomial(target)
        for guess in _TRIAL_ROOTS:
            if _poly_eval(p, guess).is_zero():
                # deflate and recurse on the quadratic factor
                a3 = p[3]
                b2 = p[2] + a3 * guess
                b1 = p[1] + b2 * guess
                roots, complete = _poly_roots_in_field([b1, b2, a3])
                return [guess] + roots, complete
        return [], False
    return [], False


def _is_monomial(s: Scalar) -> bool:
    for k in range(8):
        if (s * Scalar.zeta_power(-k)).is_rational():
            return True
    return False


_MUB_BASES = (
    MAT_IDENTITY,
    MAT_HADAMARD_LIKE,
    MAT_K,  # columns (1, i) and (1, -i)
)


def _anchored_s_candidates(anchor: Signature) -> tuple[list[Mat2], bool]:
    """Transforms that could make a GHZ-type ternary anchor affine.

    Any single matrix sending the anchor into the affine family must map the
    anchor's slot-0 direction pair onto one of the three stabilizer bases, up
    to column scales; the remaining diagonal freedom is harvested as the
    ground-field roots of the entry-ratio polynomials.  The flag reports
    whether that harvest was exhaustive over the field.
    """
    try:
        q0 = _slot_pencil_quadratic(anchor, 0)
    except (_NotTwoTerm, _DegenerateExtraction):
        return [], False
    dirs = quad_directions(q0)
    if dirs is None:
        return [], False
    candidates: list[Mat2] = []
    complete = True
    for swap in (False, True):
        d, dp = dirs if not swap else (dirs[1], dirs[0])
        p = Mat2(d[0], dp[0], d[1], dp[1])
        if not p.is_invertible():
            return [], False
        pulled = anchor.transform(p.inverse())
        for base in _MUB_BASES:
            tensor = base.tensor_power(3)
            # entries of (base . diag(nu,1) . p^-1) applied to the anchor are
            # polynomials in nu: sum_y tensor[x][y] * pulled[y] * nu^(3-w(y))
            polys: list[list[Scalar]] = []
            for x in range(8):
                coeffs = [ZERO, ZERO, ZERO, ZERO]
                for y in range(8):
                    if tensor[x][y].is_zero() or pulled.values[y].is_zero():
                        continue
                    coeffs[3 - bin(y).count("1")] = (
                        coeffs[3 - bin(y).count("1")] + tensor[x][y] * pulled.values[y])
                polys.append(coeffs)
            nus: list[Scalar] = []
            saw_identity = False
            for x in range(8):
                for y in range(x + 1, 8):
                    for k in range(4):
                        phase = Scalar.i_power(k)
                        diff = [cx - phase * cy for cx, cy in zip(polys[x], polys[y])]
                        if not _poly_trim(list(diff)):
                            saw_identity = True
                            continue
                        roots, ok = _poly_roots_in_field(diff)
                        complete = complete and ok
                        nus.extend(roots)
            if saw_identity:
                nus.extend((ONE, I, ZETA))
            seen: set = set()
            for nu in nus:
                if nu.is_zero() or nu.coeffs() in seen:
                    continue
                seen.add(nu.coeffs())
                m = base * Mat2(nu, ZERO, ZERO, ONE) * p.inverse()
                if m.is_invertible():
                    candidates.append(m.inverse())
    return _dedup_proportional(candidates), complete


def exists_S_in_cS(sigs: list[Signature], candidates: list[Mat2] | None = None) -> FamilyVerdict:
    """Is there a transform-set matrix S whose inverse makes every signature
    affine?

    Member verdicts are certified by a concrete S.  Non-member verdicts are
    conclusive when a W-type ternary factor is present (no transform of those
    is ever affine) or when a GHZ-type ternary factor pins the compatible
    transforms down to an exhaustively searched finite set.  With a
    user-supplied candidate list, exhaustion is not claimed and the fallback
    is Unknown.
    """
    user_supplied = candidates is not None
    pool = list(candidates) if user_supplied else list(enumerate_cS())

    anchor: Signature | None = None
    w_witness = None
    for pos, f in enumerate(sigs):
        for factor, slots in f.factorize():
            if factor.arity == 3:
                tag = ternary_class(factor).tag
                if tag == "W" and w_witness is None:
                    w_witness = (pos, slots)
                elif tag == "GHZ" and anchor is None:
                    anchor = factor

    anchored_complete = False
    if anchor is not None and not user_supplied:
        derived, anchored_complete = _anchored_s_candidates(anchor)
        pool.extend(derived)

    pool = _dedup_proportional(pool)
    for s in pool:
        try:
            if not is_in_cS(s):
                continue
        except SingularMatrix:
            continue
        s_inv = s.inverse()
        if all(is_affine(f.transform(s_inv)) is not None for f in sigs):
            return FamilyVerdict(True, "SA", witness=s)

    if w_witness is not None:
        return FamilyVerdict(False, "SA",
                             reason=f"signature {w_witness[0]} has a W-type ternary "
                                    f"factor on slots {w_witness[1]}; no transform of "
                                    "it is affine")
    if anchor is not None and anchored_complete:
        return FamilyVerdict(False, "SA",
                             reason="exhaustive over transforms compatible with the "
                                    "GHZ-type ternary factor; none works")
    return FamilyVerdict(None, "SA",
                         reason="candidate transforms exhausted without a "
                                "certificate of impossibility")


# ---------------------------------------------------------------------------
# the full unary-closure screen
# ---------------------------------------------------------------------------


def holant_star_tractable(sigs: list[Signature]) -> FamilyVerdict:
    """Screen against the four free-unary tractable families in order."""
    verdict = in_T_closure(sigs)
    if verdict.member:
        return verdict
    unknown: FamilyVerdict | None = None
    verdict = exists_orthogonal_O(sigs)
    if verdict.member:
        return verdict
    if verdict.member is None:
        unknown = verdict
    for m, name in ((MAT_K, "KE"),):
        verdict = in_transformed_closure(sigs, m, "E")
        if verdict.member:
            return FamilyVerdict(True, name, witness=m)
    for m, name in ((MAT_K, "KM"), (MAT_KX, "KXM")):
        verdict = in_transformed_closure(sigs, m, "M")
        if verdict.member:
            return FamilyVerdict(True, name, witness=m)
    if unknown is not None:
        return unknown
    return FamilyVerdict(False, None,
                         reason="not in the unary-closure, orthogonal-equality, "
                                "K-equality or (K/KX)-matching families")


def omega_normalise(f: Signature) -> tuple[Signature, Mat2]:
    """Remove the cube-root-of-unity freedom from a symmetric binary or unary.

    Within this field no root of unity has order divisible by three, so every
    signature is already normalised and the transform is the identity; the
    shape check and the root-of-unity analysis are still performed.
    """
    if f.arity == 1:
        a, b = f.values
        ratio_defined = not a.is_zero()
        ratio = (b / a) if ratio_defined else None
    elif f.arity == 2:
        shorthand = f.symmetric_shorthand()
        if shorthand is None:
            raise ValueError("omega_normalise needs a symmetric binary or a unary")
        y0, _, y2 = shorthand
        ratio_defined = not y0.is_zero()
        ratio = (y2 / y0) if ratio_defined else None
    else:
        raise ValueError("omega_normalise needs arity 1 or 2")
    if ratio_defined and ratio is not None:
        order = _root_of_unity_order(ratio)
        # orders divisible by 3 cannot occur among the field's roots of unity
        assert order is None or order % 3 != 0
    return (f, MAT_IDENTITY)


def _root_of_unity_order(s: Scalar) -> int | None:
    power = s
    for order in range(1, 9):
        if power == ONE:
            return order
        power = power * s
    return None
