"""Exact arithmetic for integer-coefficient Laurent polynomials in q.

Values are canonically trimmed on construction, so structural equality
coincides with ring equality. No floating point is used anywhere.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction
from typing import Sequence


class ZeroPoint(ValueError):
    """Evaluation of a Laurent polynomial at 0 is undefined."""


class NonUnit(ValueError):
    """The evaluation point q0 is not invertible mod M."""


class ZeroPolynomial(ValueError):
    """The operation requires a nonzero polynomial."""


@dataclasses.dataclass(init=False, eq=True, unsafe_hash=True)
class LaurentPoly:
    """
    An integer Laurent polynomial, stored as the lowest exponent min_deg and
    a dense coefficient tuple whose index i entry multiplies q^(min_deg+i).
    The zero polynomial is uniquely (min_deg=0, coeffs=()).

    >>> LaurentPoly(0, (1, -1))
    LaurentPoly('-q + 1')
    >>> LaurentPoly(-1, (0, 0, 3))
    LaurentPoly('3q')
    >>> LaurentPoly(2, (0,))
    LaurentPoly('0')
    """

    min_deg: int
    coeffs: tuple[int, ...]

    def __init__(self, min_deg: int = 0, coeffs: Sequence[int] = ()):
        # Trim leading and trailing zeros so the representation is canonical.
        lo, hi = 0, len(coeffs)
        while lo < hi and coeffs[lo] == 0:
            lo += 1
        while lo < hi and coeffs[hi - 1] == 0:
            hi -= 1

        if lo == hi:
            self.min_deg = 0
            self.coeffs = ()
        else:
            self.min_deg = min_deg + lo
            self.coeffs = tuple(coeffs[lo:hi])

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.min_deg == 0 and self.coeffs == (1,)

    @property
    def max_deg(self) -> int:
        """Highest exponent with a nonzero coefficient (garbage -1 for 0)."""
        return self.min_deg + len(self.coeffs) - 1

    def coefficient(self, degree: int) -> int:
        """
        Coefficient of q^degree.

        >>> LaurentPoly(-2, (5, 0, 7)).coefficient(0)
        7
        >>> LaurentPoly(-2, (5, 0, 7)).coefficient(3)
        0
        """
        i = degree - self.min_deg
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: int | LaurentPoly) -> LaurentPoly:
        if isinstance(other, int):
            other = LaurentPoly(0, (other,))
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        if not self.coeffs:
            return other
        if not other.coeffs:
            return self
        lo = min(self.min_deg, other.min_deg)
        hi = max(self.max_deg, other.max_deg) + 1
        out = [0] * (hi - lo)
        for i, c in enumerate(self.coeffs):
            out[self.min_deg + i - lo] += c
        for i, c in enumerate(other.coeffs):
            out[other.min_deg + i - lo] += c
        return LaurentPoly(lo, out)

    __radd__ = __add__

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly(self.min_deg, tuple(-c for c in self.coeffs))

    def __sub__(self, other: int | LaurentPoly) -> LaurentPoly:
        return self + (-other)

    def __rsub__(self, other: int | LaurentPoly) -> LaurentPoly:
        return (-self) + other

    def __mul__(self, other: int | LaurentPoly) -> LaurentPoly:
        if isinstance(other, int):
            return LaurentPoly(self.min_deg, tuple(c * other for c in self.coeffs))
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return ZERO
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for (i, c), (j, d) in itertools.product(
            enumerate(self.coeffs), enumerate(other.coeffs)
        ):
            out[i + j] += c * d
        return LaurentPoly(self.min_deg + other.min_deg, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> LaurentPoly:
        if n < 0:
            # Only unit monomials +-q^s are invertible in this ring.
            if len(self.coeffs) == 1 and self.coeffs[0] in (1, -1):
                return LaurentPoly(-self.min_deg, self.coeffs) ** (-n)
            raise ValueError("cannot invert a non-monomial Laurent polynomial")
        if n == 0:
            return ONE
        half = self ** (n // 2)
        return half * half if n % 2 == 0 else half * half * self

    def shift(self, s: int) -> LaurentPoly:
        """Multiply by q^s."""
        return LaurentPoly(self.min_deg + s, self.coeffs)

    # -- canonical form and symmetry ---------------------------------------

    def normalize(self) -> LaurentPoly:
        """
        The canonical representative of the orbit of P under multiplication
        by +-q^s: shifted to min_deg 0 with a positive constant coefficient.

        >>> LaurentPoly(3, (-1, 2)).normalize()
        LaurentPoly('-2q + 1')
        >>> LaurentPoly(5, (1,)).normalize()
        LaurentPoly('1')
        >>> LaurentPoly().normalize()
        LaurentPoly('0')
        """
        if not self.coeffs:
            return ZERO
        sign = 1 if self.coeffs[0] > 0 else -1
        return LaurentPoly(0, tuple(sign * c for c in self.coeffs))

    def mirror(self) -> LaurentPoly:
        """
        Substitute q^-1 for q.

        >>> LaurentPoly(0, (1, -1)).mirror()
        LaurentPoly('1 - q^-1')
        """
        return LaurentPoly(-self.max_deg, tuple(reversed(self.coeffs)))

    # -- evaluation homomorphisms ------------------------------------------

    def evaluate(self, point: int | Fraction) -> Fraction:
        """
        Exact value at a nonzero rational point.

        >>> LaurentPoly(0, (1, -1)).evaluate(3)
        Fraction(-2, 1)
        >>> LaurentPoly(-1, (1,)).evaluate(Fraction(2, 3))
        Fraction(3, 2)
        """
        x = Fraction(point)
        if x == 0:
            raise ZeroPoint("cannot evaluate a Laurent polynomial at 0")
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc * x**self.min_deg

    def eval_mod(self, q0: int, modulus: int) -> int:
        """
        Image under q -> q0 in Z/modulus, negative exponents via the modular
        inverse of q0.

        >>> LaurentPoly(0, (1, -1)).eval_mod(2, 101)
        100
        """
        if math.gcd(q0, modulus) != 1:
            raise NonUnit(f"{q0} is not a unit mod {modulus}")
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * q0 + c) % modulus
        return acc * pow(q0, self.min_deg, modulus) % modulus

    # -- root extraction ----------------------------------------------------

    def rational_roots(self) -> RootScan:
        """
        All rational roots, found with the rational-root theorem applied to
        the normalized polynomial and confirmed by exact evaluation. The
        reciprocal_closed subset keeps the roots x with 1/x also a root,
        dropping 0 and roots of unity (the only rational ones are +-1).
        """
        if not self.coeffs:
            raise ZeroPolynomial("the zero polynomial vanishes everywhere")
        base = self.normalize()
        roots: set[Fraction] = set()
        if len(base.coeffs) > 1:
            for p in _divisors(base.coeffs[0]):
                for s in _divisors(base.coeffs[-1]):
                    for cand in (Fraction(p, s), Fraction(-p, s)):
                        if cand not in roots and base.evaluate(cand) == 0:
                            roots.add(cand)
        closed = frozenset(
            x for x in roots if 1 / x in roots and x not in (1, -1)
        )
        return RootScan(frozenset(roots), closed)

    # -- serialization and formatting ----------------------------------------

    def to_json(self) -> dict:
        return {"min_deg": self.min_deg, "coeffs": list(self.coeffs)}

    @classmethod
    def from_json(cls, obj: dict) -> LaurentPoly:
        return cls(int(obj["min_deg"]), tuple(int(c) for c in obj["coeffs"]))

    def __repr__(self) -> str:
        return f"LaurentPoly('{self}')"

    def __str__(self) -> str:
        """
        >>> print(LaurentPoly(-1, (1, -1, 2)))
        2q - 1 + q^-1
        >>> print(LaurentPoly())
        0
        """
        if not self.coeffs:
            return "0"
        parts: list[str] = []
        for i, c in reversed(list(enumerate(self.coeffs, self.min_deg))):
            if c == 0:
                continue
            sign = ("" if c > 0 else "-") if not parts else (" + " if c > 0 else " - ")
            mag = abs(c)
            term = "" if i == 0 else "q" if i == 1 else f"q^{i}"
            coeff = str(mag) if (i == 0 or mag != 1) else ""
            parts.append(sign + coeff + term)
        return "".join(parts)


@dataclasses.dataclass(frozen=True)
class RootScan:
    """Result of rational_roots: every rational root, and the subset that is
    closed under x -> 1/x with 0 and roots of unity removed."""

    roots: frozenset[Fraction]
    reciprocal_closed: frozenset[Fraction]


@dataclasses.dataclass(frozen=True)
class ModEval:
    """A specialization q -> q0 into Z/modulus together with the resulting
    residue. gcd(q0, modulus) must be 1 so negative exponents make sense."""

    modulus: int
    q0: int
    value: int

    def __post_init__(self):
        if math.gcd(self.q0, self.modulus) != 1:
            raise NonUnit(f"{self.q0} is not a unit mod {self.modulus}")

    def to_json(self) -> dict:
        return {
            "modulus": str(self.modulus),
            "q0": str(self.q0),
            "value": str(self.value),
        }

    @classmethod
    def from_json(cls, obj: dict) -> ModEval:
        return cls(int(obj["modulus"]), int(obj["q0"]), int(obj["value"]))


def _divisors(n: int) -> list[int]:
    """Positive divisors of |n| (n nonzero)."""
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


ZERO = LaurentPoly()
ONE = LaurentPoly(0, (1,))
Q = LaurentPoly(1, (1,))


def qpow(s: int) -> LaurentPoly:
    """The monomial q^s."""
    return LaurentPoly(s, (1,))


def const(c: int) -> LaurentPoly:
    """The constant polynomial c."""
    return LaurentPoly(0, (c,))
