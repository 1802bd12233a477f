"""Exact arithmetic in the cyclotomic field Q(zeta_8) and 2x2 matrices over it.

Elements are stored as c0 + c1*w + c2*w^2 + c3*w^3 with rational coefficients,
where w = e^{i*pi/4} is a primitive eighth root of unity (w^4 = -1, w^2 = i).
Every value the workbench manipulates lives in this field, so equality tests,
zero tests and inversion are exact.  There is no floating point anywhere.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import DivisionByZero, FormatError, SingularMatrix

_ZERO = Fraction(0)
_ONE = Fraction(1)


class Scalar:
    """An element of Q(zeta_8) in the power basis 1, w, w^2, w^3."""

    __slots__ = ("c0", "c1", "c2", "c3")

    def __init__(self, c0=0, c1=0, c2=0, c3=0):
        self.c0 = Fraction(c0)
        self.c1 = Fraction(c1)
        self.c2 = Fraction(c2)
        self.c3 = Fraction(c3)

    @classmethod
    def from_int(cls, n: int) -> "Scalar":
        return cls(n, 0, 0, 0)

    @classmethod
    def zeta_power(cls, k: int) -> "Scalar":
        """w^k, reduced via w^4 = -1."""
        k %= 8
        sign = 1 if k < 4 else -1
        coeffs = [0, 0, 0, 0]
        coeffs[k % 4] = sign
        return cls(*coeffs)

    @classmethod
    def i_power(cls, k: int) -> "Scalar":
        """i^k for any integer k."""
        return cls.zeta_power(2 * k)

    def coeffs(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.c0, self.c1, self.c2, self.c3)

    def is_zero(self) -> bool:
        return self.c0 == 0 and self.c1 == 0 and self.c2 == 0 and self.c3 == 0

    def is_rational(self) -> bool:
        return self.c1 == 0 and self.c2 == 0 and self.c3 == 0

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.c0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Scalar.from_int(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.coeffs() == other.coeffs()

    def __hash__(self) -> int:
        return hash(self.coeffs())

    def __add__(self, other: "Scalar") -> "Scalar":
        if isinstance(other, int):
            other = Scalar.from_int(other)
        return Scalar(self.c0 + other.c0, self.c1 + other.c1,
                      self.c2 + other.c2, self.c3 + other.c3)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar(-self.c0, -self.c1, -self.c2, -self.c3)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return self + (-other)

    def __mul__(self, other: "Scalar") -> "Scalar":
        if isinstance(other, int):
            other = Scalar.from_int(other)
        a = self.coeffs()
        b = other.coeffs()
        # products of basis powers, reduced by w^4 = -1
        out = [_ZERO, _ZERO, _ZERO, _ZERO]
        for j in range(4):
            if a[j] == 0:
                continue
            for k in range(4):
                if b[k] == 0:
                    continue
                m = j + k
                if m < 4:
                    out[m] += a[j] * b[k]
                else:
                    out[m - 4] -= a[j] * b[k]
        return Scalar(*out)

    __rmul__ = __mul__

    def conjugate(self) -> "Scalar":
        """Complex conjugation: w -> w^7 = -w^3."""
        return Scalar(self.c0, -self.c3, -self.c2, -self.c1)

    def _galois(self, k: int) -> "Scalar":
        """The automorphism w -> w^k for odd k."""
        out = [_ZERO, _ZERO, _ZERO, _ZERO]
        for j, c in enumerate(self.coeffs()):
            if c == 0:
                continue
            m = (j * k) % 8
            if m < 4:
                out[m] += c
            else:
                out[m - 4] -= c
        return Scalar(*out)

    def inverse(self) -> "Scalar":
        """Exact inverse via the product of Galois conjugates."""
        if self.is_zero():
            raise DivisionByZero("cannot invert 0")
        aux = self._galois(3) * self._galois(5) * self._galois(7)
        norm = self * aux
        assert norm.is_rational() and norm.c0 != 0
        inv_norm = 1 / norm.c0
        return Scalar(aux.c0 * inv_norm, aux.c1 * inv_norm,
                      aux.c2 * inv_norm, aux.c3 * inv_norm)

    def __truediv__(self, other: "Scalar") -> "Scalar":
        if isinstance(other, int):
            other = Scalar.from_int(other)
        return self * other.inverse()

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __repr__(self) -> str:
        return f"Scalar({format_scalar(self)!r})"

    def __str__(self) -> str:
        return format_scalar(self)


ZERO = Scalar(0)
ONE = Scalar(1)
MINUS_ONE = Scalar(-1)
I = Scalar(0, 0, 1, 0)
ZETA = Scalar(0, 1, 0, 0)


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Square root of a non-negative rational, if it is rational."""
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def _sqrt_gaussian(x: Fraction, y: Fraction) -> tuple[Fraction, Fraction] | None:
    """Square root of x + y*i inside Q(i), as a coefficient pair."""
    if y == 0:
        r = rational_sqrt(x)
        if r is not None:
            return (r, _ZERO)
        r = rational_sqrt(-x)
        if r is not None:
            return (_ZERO, r)
        return None
    n = rational_sqrt(x * x + y * y)
    if n is None:
        return None
    u2 = (x + n) / 2
    u = rational_sqrt(u2)
    if u is None or u == 0:
        return None
    return (u, y / (2 * u))


def sqrt_in_field(s: Scalar) -> Scalar | None:
    """A square root of s within Q(zeta_8), or None if none exists there.

    Decomposes s = A + B*sqrt(2) with A, B in Q(i), using sqrt(2) = w - w^3,
    and reduces to rational square-root tests.  When a root exists, the one
    returned is deterministic.
    """
    if s.is_zero():
        return ZERO
    # coefficients of the Q(i)-parts: A = a0 + a1*i, B = b0 + b1*i
    a0, a1 = s.c0, s.c2
    b0 = (s.c1 - s.c3) / 2
    b1 = (s.c1 + s.c3) / 2

    def build(av, bv):
        # a + b*sqrt(2) with a, b in Q(i) back to the power basis
        (x0, x1), (y0, y1) = av, bv
        return Scalar(x0, y0 + y1, x1, y1 - y0)

    candidates = []
    if b0 == 0 and b1 == 0:
        g = _sqrt_gaussian(a0, a1)
        if g is not None:
            candidates.append(build(g, (_ZERO, _ZERO)))
        g = _sqrt_gaussian(a0 / 2, a1 / 2)
        if g is not None:
            candidates.append(build((_ZERO, _ZERO), g))
    else:
        # s = (a + b*sqrt2)^2 needs a^2 + 2b^2 = A and 2ab = B
        da = a0 * a0 - a1 * a1 - 2 * (b0 * b0 - b1 * b1)
        db = 2 * a0 * a1 - 4 * b0 * b1
        r = _sqrt_gaussian(da, db)
        if r is not None:
            for sign in (1, -1):
                x = ((a0 + sign * r[0]) / 2, (a1 + sign * r[1]) / 2)
                g = _sqrt_gaussian(*x)
                if g is None:
                    continue
                u0, u1 = g
                if u0 == 0 and u1 == 0:
                    continue
                # b = B / (2a) over Q(i)
                den = 2 * (u0 * u0 + u1 * u1)
                v0 = (b0 * u0 + b1 * u1) / den
                v1 = (b1 * u0 - b0 * u1) / den
                candidates.append(build((u0, u1), (v0, v1)))
    for c in candidates:
        if c * c == s:
            return c
    return None


def monomial_cbrt(s: Scalar) -> Scalar | None:
    """A cube root of s when s = q * w^k with q rational, else None.

    Cube roots of eighth roots of unity stay in the field because 3 is
    invertible mod 8: (w^{3k})^3 = w^k.
    """
    if s.is_zero():
        return ZERO
    for k in range(8):
        t = s * Scalar.zeta_power(-k)
        if t.is_rational():
            q = t.as_rational()
            neg = q < 0
            q = abs(q)
            num, den = q.numerator, q.denominator
            rn = round(num ** (1 / 3))
            rd = round(den ** (1 / 3))
            for dn in (rn - 1, rn, rn + 1):
                for dd in (rd - 1, rd, rd + 1):
                    if dn <= 0 or dd <= 0:
                        continue
                    if dn ** 3 == num and dd ** 3 == den:
                        root = Scalar(Fraction(dn, dd)) * Scalar.zeta_power(3 * k)
                        if neg:
                            root = -root
                        if root * root * root == s:
                            return root
            return None
    return None


# ---------------------------------------------------------------------------
# Scalar literal grammar
#
#   expr   := term (('+'|'-') term)*
#   term   := factor ('*' factor)*
#   factor := '-' factor | atom ('^' int)?
#   atom   := rational | 'i' | 'w' | '(' expr ')'
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(\d+/\d+|\d+|[iw()+\-*^])")


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise FormatError(f"bad scalar literal near {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise FormatError("unexpected end of scalar literal")
        self.pos += 1
        return tok

    def parse_expr(self) -> Scalar:
        value = self.parse_term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.parse_term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def parse_term(self) -> Scalar:
        value = self.parse_factor()
        while self.peek() == "*":
            self.take()
            value = value * self.parse_factor()
        return value

    def parse_factor(self) -> Scalar:
        if self.peek() == "-":
            self.take()
            return -self.parse_factor()
        value = self.parse_atom()
        if self.peek() == "^":
            self.take()
            tok = self.take()
            neg = False
            if tok == "-":
                neg = True
                tok = self.take()
            if not tok.isdigit():
                raise FormatError(f"bad exponent {tok!r}")
            exp = int(tok)
            value = value ** (-exp if neg else exp)
        return value

    def parse_atom(self) -> Scalar:
        tok = self.take()
        if tok == "(":
            value = self.parse_expr()
            if self.take() != ")":
                raise FormatError("missing ')' in scalar literal")
            return value
        if tok == "i":
            return I
        if tok == "w":
            return ZETA
        if "/" in tok:
            num, den = tok.split("/")
            if int(den) == 0:
                raise FormatError("zero denominator")
            return Scalar(Fraction(int(num), int(den)))
        if tok.isdigit():
            return Scalar(int(tok))
        raise FormatError(f"unexpected token {tok!r}")


def parse_scalar(text: str) -> Scalar:
    """Parse the literal grammar: rationals, 'i', 'w', sums, products, powers."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormatError("empty scalar literal")
    parser = _Parser(tokens)
    value = parser.parse_expr()
    if parser.peek() is not None:
        raise FormatError(f"trailing input in scalar literal: {parser.tokens[parser.pos:]}")
    return value


def _format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(s: Scalar) -> str:
    """Canonical literal: coefficients on the basis 1, w, i, w^3, in that order."""
    parts = []
    for coeff, symbol in zip(s.coeffs(), (None, "w", "i", "w^3")):
        if coeff == 0:
            continue
        mag = _format_rational(abs(coeff))
        if symbol is None:
            body = mag
        elif abs(coeff) == 1:
            body = symbol
        else:
            body = f"{mag}*{symbol}"
        sign = "-" if coeff < 0 else "+"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first_body = parts[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


class Mat2:
    """A 2x2 matrix over Q(zeta_8), row-major entries a, b, c, d."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: Scalar, b: Scalar, c: Scalar, d: Scalar):
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def from_rows(cls, rows) -> "Mat2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    def rows(self) -> tuple[tuple[Scalar, Scalar], tuple[Scalar, Scalar]]:
        return ((self.a, self.b), (self.c, self.d))

    def entry(self, i: int, j: int) -> Scalar:
        return self.rows()[i][j]

    def column(self, j: int) -> tuple[Scalar, Scalar]:
        return (self.rows()[0][j], self.rows()[1][j])

    def det(self) -> Scalar:
        return self.a * self.d - self.b * self.c

    def is_invertible(self) -> bool:
        return not self.det().is_zero()

    def inverse(self) -> "Mat2":
        det = self.det()
        if det.is_zero():
            raise SingularMatrix(f"matrix {self} is singular")
        inv = det.inverse()
        return Mat2(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv)

    def transpose(self) -> "Mat2":
        return Mat2(self.a, self.c, self.b, self.d)

    def __mul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def scale(self, s: Scalar) -> "Mat2":
        return Mat2(s * self.a, s * self.b, s * self.c, s * self.d)

    def apply(self, v: tuple[Scalar, Scalar]) -> tuple[Scalar, Scalar]:
        return (self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1])

    def tensor_power(self, k: int) -> list[list[Scalar]]:
        """The 2^k x 2^k matrix M^(x)k as nested lists (row index first)."""
        if k < 1:
            raise ValueError("tensor power needs k >= 1")
        size = 1
        result = [[ONE]]
        for _ in range(k):
            new_size = size * 2
            new = [[ZERO] * new_size for _ in range(new_size)]
            for r in range(size):
                for c in range(size):
                    if result[r][c].is_zero():
                        continue
                    for i in range(2):
                        for j in range(2):
                            new[r * 2 + i][c * 2 + j] = result[r][c] * self.entry(i, j)
            result = new
            size = new_size
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat2):
            return NotImplemented
        return self.rows() == other.rows()

    def __hash__(self) -> int:
        return hash(self.rows())

    def is_proportional(self, other: "Mat2") -> bool:
        """True if self = s * other for some non-zero scalar s."""
        mine = (self.a, self.b, self.c, self.d)
        theirs = (other.a, other.b, other.c, other.d)
        if all(x.is_zero() for x in mine) or all(x.is_zero() for x in theirs):
            return all(x.is_zero() for x in mine) and all(x.is_zero() for x in theirs)
        for x, y in zip(mine, theirs):
            if x.is_zero() != y.is_zero():
                return False
        for i in range(4):
            for j in range(i + 1, 4):
                if mine[i] * theirs[j] != mine[j] * theirs[i]:
                    return False
        return True

    def __repr__(self) -> str:
        return (f"Mat2[[{format_scalar(self.a)}, {format_scalar(self.b)}], "
                f"[{format_scalar(self.c)}, {format_scalar(self.d)}]]")


MAT_IDENTITY = Mat2(ONE, ZERO, ZERO, ONE)
MAT_X = Mat2(ZERO, ONE, ONE, ZERO)
MAT_T = Mat2(ONE, ZERO, ZERO, ZETA)
MAT_K = Mat2(ONE, ONE, I, -I)
MAT_KX = MAT_K * MAT_X
MAT_HADAMARD_LIKE = Mat2(ONE, ONE, ONE, MINUS_ONE)
MAT_PHASE = Mat2(ONE, ZERO, ZERO, I)

NAMED_MATRICES = {
    "I": MAT_IDENTITY,
    "X": MAT_X,
    "T": MAT_T,
    "K": MAT_K,
    "KX": MAT_KX,
    "H": MAT_HADAMARD_LIKE,
    "S": MAT_PHASE,
}
