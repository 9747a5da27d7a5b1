"""Exact linear algebra: rationals, prime fields, row reduction, kernels, SNF.

Every routine here is exact; nothing ever touches floating point.  Rational
scalars are `fractions.Fraction` (always in lowest terms, denominator >= 1),
and the small prime fields used by the brute-force oracles are handled by
`PrimeScalar`.  Row reduction, kernels and span tests are generic over both
scalar kinds: they rely only on field arithmetic and truthiness of entries.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

ExactScalar = Fraction

_RATIONAL = re.compile(r"[+-]?\d+(?:/\d+)?")

QQ_ZERO = Fraction(0)
QQ_ONE = Fraction(1)


def parse_rational(text: str) -> Fraction:
    """Parse a rational literal: optional sign, integer, optional '/denominator'."""
    s = text.strip()
    if not _RATIONAL.fullmatch(s):
        raise ValueError(f"not a rational literal: {text!r}")
    try:
        return Fraction(s)
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in rational literal: {text!r}") from None


def format_rational(value: Fraction) -> str:
    return str(value)


@lru_cache(maxsize=None)
def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PrimeScalar:
    """Residue in the field of integers modulo a small prime."""

    residue: int
    modulus: int

    def __post_init__(self):
        if not _is_prime(self.modulus):
            raise ValueError(f"modulus {self.modulus} is not prime")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    def _coerce(self, other) -> "PrimeScalar":
        if isinstance(other, PrimeScalar):
            if other.modulus != self.modulus:
                raise ValueError("mixed moduli")
            return other
        if isinstance(other, int):
            return PrimeScalar(other, self.modulus)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return PrimeScalar(self.residue + other.residue, self.modulus)

    __radd__ = __add__

    def __neg__(self):
        return PrimeScalar(-self.residue, self.modulus)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return PrimeScalar(self.residue - other.residue, self.modulus)

    def __rsub__(self, other):
        other = self._coerce(other)
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return PrimeScalar(self.residue * other.residue, self.modulus)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.residue:
            raise ZeroDivisionError("division by zero residue")
        inv = pow(other.residue, self.modulus - 2, self.modulus)
        return PrimeScalar(self.residue * inv, self.modulus)

    def __bool__(self):
        return self.residue != 0


def prime_scalar_from_rational(value: Fraction, p: int) -> PrimeScalar:
    """Reduce a rational mod p.  Raises if the denominator vanishes mod p."""
    den = value.denominator % p
    if den == 0:
        raise ValueError(f"denominator of {value} vanishes mod {p}")
    return PrimeScalar(value.numerator, p) / PrimeScalar(den, p)


class Matrix:
    """Dense matrix with exact scalar entries (rationals or prime residues)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        entries = tuple(tuple(row) for row in entries)
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else 0
        if any(len(row) != self.cols for row in entries):
            raise ValueError("ragged matrix")
        self.entries = entries

    @classmethod
    def identity(cls, n: int, one=QQ_ONE, zero=QQ_ZERO) -> "Matrix":
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    def row_lists(self):
        return [list(row) for row in self.entries]

    def column(self, j):
        return [row[j] for row in self.entries]

    def mul_vector(self, v):
        out = []
        for row in self.entries:
            acc = None
            for a, x in zip(row, v):
                term = a * x
                acc = term if acc is None else acc + term
            out.append(acc)
        return out

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"Matrix({[list(r) for r in self.entries]})"


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row-echelon form and the (strictly increasing) pivot columns.

    Row space is preserved; pivot entries are normalized to 1 and pivot
    columns are cleared above and below.
    """
    a = m.row_lists()
    rows, cols = m.rows, m.cols
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pr = next((i for i in range(r, rows) if a[i][c]), None)
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        lead = a[r][c]
        if lead != lead / lead:  # normalize pivot to one
            a[r] = [x / lead for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return Matrix(a), pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def kernel_basis(m: Matrix, one=QQ_ONE) -> list[list]:
    """Basis of the right null space {v : m.v = 0}, one vector per free column."""
    reduced, pivots = rref(m)
    zero = one - one
    free = [j for j in range(m.cols) if j not in pivots]
    basis = []
    for j in free:
        v = [zero] * m.cols
        v[j] = one
        for r, pc in enumerate(pivots):
            v[pc] = -reduced.entries[r][j]
        basis.append(v)
    return basis


def is_in_span(basis: list[list], v: list) -> bool:
    """True iff v lies in the span of the given vectors (all of equal length)."""
    if not basis:
        return not any(v)
    if any(len(b) != len(v) for b in basis):
        raise ValueError("vector lengths differ")
    return rank(Matrix(basis)) == rank(Matrix(list(basis) + [v]))


def _as_int(x) -> int:
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    raise ValueError(f"matrix entry {x!r} is not an integer")


def smith_normal_form(m: Matrix) -> list[int]:
    """Nonzero invariant factors d1 | d2 | ... of an integer matrix.

    Trailing zero factors are dropped, so the zero matrix yields [].  The
    divisibility chain is verified before returning.
    """
    a = [[_as_int(x) for x in row] for row in m.entries]
    rows, cols = m.rows, m.cols
    diag: list[int] = []
    t = 0
    while t < min(rows, cols):
        # pick the least nonzero magnitude in the active block as pivot
        pi = pj = -1
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = abs(a[i][j])
                if v and (best is None or v < best):
                    pi, pj, best = i, j, v
        if best is None:
            break
        a[t], a[pi] = a[pi], a[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        while True:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    for j in range(t, cols):
                        a[i][j] -= q * a[t][j]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    for i in range(t, rows):
                        a[i][j] -= q * a[i][t]
                    if a[t][j]:
                        for row in a:
                            row[t], row[j] = row[j], row[t]
                        dirty = True
            if dirty:
                continue
            # pivot must divide the rest of the block
            offender = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if a[i][j] % a[t][t]:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            for j in range(t, cols):
                a[t][j] += a[offender][j]
        diag.append(abs(a[t][t]))
        t += 1
    factors = [d for d in diag if d]
    for d1, d2 in zip(factors, factors[1:]):
        assert d2 % d1 == 0, f"divisibility chain broken: {factors}"
    return factors


def minor_gcd_invariant_factors(m: Matrix) -> list[int]:
    """Invariant factors via gcds of k x k minors; brute force, small matrices only."""
    a = [[_as_int(x) for x in row] for row in m.entries]
    rows, cols = m.rows, m.cols

    def det(rs, cs):
        if len(rs) == 1:
            return a[rs[0]][cs[0]]
        total = 0
        sign = 1
        for k, c in enumerate(cs):
            total += sign * a[rs[0]][c] * det(rs[1:], cs[:k] + cs[k + 1:])
            sign = -sign
        return total

    from math import gcd

    gcds = []
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in combinations(range(rows), k):
            for cs in combinations(range(cols), k):
                g = gcd(g, det(rs, cs))
        if g == 0:
            break
        gcds.append(g)
    factors = []
    prev = 1
    for g in gcds:
        factors.append(g // prev)
        prev = g
    return factors
