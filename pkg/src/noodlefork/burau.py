"""The reduced Burau representation over three coefficient rings.

Matrices are (n-1) x (n-1). A generator acts on the basis by

    sigma_i:  e_{i-1} -> e_{i-1} + e_i,   e_i -> -q e_i,   e_{i+1} -> q e_i + e_{i+1}

(indices outside 1..n-1 dropped), with columns holding the images, and the
word "uv" maps to M(u) M(v). Entries live in Z[q, q^-1] (generic), in Q
(q specialized to a nonzero rational), or in Z/M (q specialized to a unit).
"""

from __future__ import annotations

import dataclasses
import functools
import math
from fractions import Fraction
from typing import Any

from . import laurent
from .braids import BraidWord
from .laurent import LaurentPoly, NonUnit, ZeroPoint


@dataclasses.dataclass(frozen=True)
class GenericRing:
    """Entries are integer Laurent polynomials in q."""

    @property
    def zero(self) -> LaurentPoly:
        return laurent.ZERO

    @property
    def one(self) -> LaurentPoly:
        return laurent.ONE

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def qpow(self, s: int) -> LaurentPoly:
        return laurent.qpow(s)

    def of_poly(self, p: LaurentPoly) -> LaurentPoly:
        return p


@dataclasses.dataclass(frozen=True)
class RationalRing:
    """Entries are exact rationals; q is sent to the nonzero point q0."""

    q0: Fraction

    def __post_init__(self):
        object.__setattr__(self, "q0", Fraction(self.q0))
        if self.q0 == 0:
            raise ZeroPoint("q must be specialized to a nonzero rational")

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def qpow(self, s: int) -> Fraction:
        return self.q0**s

    def of_poly(self, p: LaurentPoly) -> Fraction:
        return p.evaluate(self.q0)


@dataclasses.dataclass(frozen=True)
class ModRing:
    """Entries are residues mod modulus; q is sent to the unit q0."""

    q0: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError("modulus must be at least 2")
        if math.gcd(self.q0, self.modulus) != 1:
            raise NonUnit(f"{self.q0} is not a unit mod {self.modulus}")
        object.__setattr__(self, "q0", self.q0 % self.modulus)

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1 % self.modulus

    def add(self, a, b):
        return (a + b) % self.modulus

    def mul(self, a, b):
        return a * b % self.modulus

    def neg(self, a):
        return -a % self.modulus

    def qpow(self, s: int) -> int:
        return pow(self.q0, s, self.modulus)

    def of_poly(self, p: LaurentPoly) -> int:
        return p.eval_mod(self.q0, self.modulus)


GENERIC = GenericRing()

Ring = GenericRing | RationalRing | ModRing


@dataclasses.dataclass(frozen=True)
class BurauMatrix:
    """A square matrix of ring entries with exact predicates."""

    ring: Ring
    rows: tuple[tuple[Any, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        size = len(self.rows)
        if any(len(r) != size for r in self.rows):
            raise ValueError("matrix must be square")

    @property
    def size(self) -> int:
        return len(self.rows)

    def __getitem__(self, rc: tuple[int, int]):
        return self.rows[rc[0]][rc[1]]

    def __mul__(self, other: BurauMatrix) -> BurauMatrix:
        if self.ring != other.ring or self.size != other.size:
            raise ValueError("mismatched rings or sizes")
        R = self.ring
        cols = tuple(zip(*other.rows))
        return BurauMatrix(
            R,
            tuple(
                tuple(
                    functools.reduce(R.add, (R.mul(a, b) for a, b in zip(row, col)))
                    for col in cols
                )
                for row in self.rows
            ),
        )

    def is_identity(self) -> bool:
        R = self.ring
        return all(
            e == (R.one if i == j else R.zero)
            for i, row in enumerate(self.rows)
            for j, e in enumerate(row)
        )

    def scalar(self):
        """The scalar c with self = c*I, or None."""
        R = self.ring
        c = self.rows[0][0]
        ok = all(
            e == (c if i == j else R.zero)
            for i, row in enumerate(self.rows)
            for j, e in enumerate(row)
        )
        return c if ok else None

    def is_scalar(self) -> bool:
        return self.scalar() is not None

    def det(self):
        return _det(self.ring, self.rows)

    def specialize(self, ring: Ring) -> BurauMatrix:
        """Map generic entries through q -> q0 of the target ring."""
        if not isinstance(self.ring, GenericRing):
            raise ValueError("can only specialize a generic matrix")
        return BurauMatrix(
            ring, tuple(tuple(ring.of_poly(e) for e in row) for row in self.rows)
        )

    def to_json(self) -> dict:
        if isinstance(self.ring, GenericRing):
            return {"entries": [[e.to_json() for e in row] for row in self.rows]}
        return {"entries": [[str(e) for e in row] for row in self.rows]}


def _det(ring: Ring, rows) -> Any:
    size = len(rows)
    if size == 1:
        return rows[0][0]
    # Cofactor expansion along the first row; sizes here are at most n-1.
    total = ring.zero
    for j in range(size):
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        term = ring.mul(rows[0][j], _det(ring, minor))
        total = ring.add(total, term if j % 2 == 0 else ring.neg(term))
    return total


def identity_matrix(ring: Ring, size: int) -> BurauMatrix:
    return BurauMatrix(
        ring,
        tuple(
            tuple(ring.one if i == j else ring.zero for j in range(size))
            for i in range(size)
        ),
    )


@functools.lru_cache(maxsize=None)
def generator_matrix(ring: Ring, n: int, letter: int) -> BurauMatrix:
    """Reduced Burau image of one signed generator on n strands."""
    size = n - 1
    i = abs(letter)
    cols = [
        [ring.one if r == c else ring.zero for r in range(1, n)]
        for c in range(1, n)
    ]

    def put(col: int, row: int, value):
        if 1 <= col <= size and 1 <= row <= size:
            cols[col - 1][row - 1] = value

    if letter > 0:
        put(i - 1, i, ring.one)          # e_{i-1} -> e_{i-1} + e_i
        put(i, i, ring.neg(ring.qpow(1)))  # e_i -> -q e_i
        put(i + 1, i, ring.qpow(1))      # e_{i+1} -> q e_i + e_{i+1}
    else:
        put(i - 1, i, ring.qpow(-1))     # e_{i-1} -> e_{i-1} + q^-1 e_i
        put(i, i, ring.neg(ring.qpow(-1)))
        put(i + 1, i, ring.one)          # e_{i+1} -> e_i + e_{i+1}
    return BurauMatrix(ring, tuple(zip(*(tuple(c) for c in cols))))


def burau(word: BraidWord, ring: Ring = GENERIC) -> BurauMatrix:
    """
    Fold the word into its reduced Burau matrix, letters applied right to
    left so that burau(u * v) = burau(u) * burau(v).
    """
    m = identity_matrix(ring, word.n - 1)
    for letter in word.letters:
        m = m * generator_matrix(ring, word.n, letter)
    return m
