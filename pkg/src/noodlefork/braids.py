"""Braid words on n strands and their action on the free group.

Convention used everywhere in this package: the written word "uv" means v is
applied first and u second. Folding a word left to right therefore produces
M(u)M(v) for matrices and phi_u composed-after phi_v for automorphisms, and
both assignments are homomorphisms for the * operator defined here.
"""

from __future__ import annotations

import dataclasses
import functools
import random
import re
from typing import Iterable, Sequence


class BadSyntax(ValueError):
    """The word text cannot be parsed."""


class IndexOutOfRange(ValueError):
    """A generator index does not exist on this many strands."""


class StrandMismatch(ValueError):
    """Two words on different strand counts cannot be combined."""


@dataclasses.dataclass(frozen=True)
class BraidWord:
    """
    A word in the braid generators, stored as signed indices: letter +i is
    the i-th generator, -i its inverse. The empty word is the identity.

    >>> BraidWord(4, (1, -2)) * BraidWord(4, (2,))
    BraidWord(4, 'a B b')
    >>> (BraidWord(4, (1, -2)) * BraidWord(4, (2,))).free_reduce()
    BraidWord(4, 'a')
    """

    n: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise IndexOutOfRange(f"need at least 2 strands, got {self.n}")
        object.__setattr__(self, "letters", tuple(self.letters))
        for s in self.letters:
            if not isinstance(s, int) or s == 0 or abs(s) > self.n - 1:
                raise IndexOutOfRange(
                    f"letter {s!r} is not a generator index on {self.n} strands"
                )

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: BraidWord) -> BraidWord:
        if not isinstance(other, BraidWord):
            return NotImplemented
        if self.n != other.n:
            raise StrandMismatch(f"{self.n} strands vs {other.n}")
        return BraidWord(self.n, self.letters + other.letters)

    def inverse(self) -> BraidWord:
        return BraidWord(self.n, tuple(-s for s in reversed(self.letters)))

    def __pow__(self, k: int) -> BraidWord:
        base = self if k >= 0 else self.inverse()
        return BraidWord(self.n, base.letters * abs(k))

    def conjugated_by(self, w: BraidWord) -> BraidWord:
        """The word w * self * w^-1."""
        return w * self * w.inverse()

    def free_reduce(self) -> BraidWord:
        """Cancel adjacent inverse pairs only (no braid relations)."""
        out: list[int] = []
        for s in self.letters:
            if out and out[-1] == -s:
                out.pop()
            else:
                out.append(s)
        return BraidWord(self.n, tuple(out))

    @property
    def exponent_sum(self) -> int:
        return sum(1 if s > 0 else -1 for s in self.letters)

    def to_text(self) -> str:
        """
        Letter syntax when every index fits in a-z, else numeric syntax.
        Runs of one signed letter are collapsed with ^k.

        >>> BraidWord(4, (-1, -1, -1, 2, 2)).to_text()
        'a^-3 b^2'
        """
        if not self.letters:
            return ""
        if self.n - 1 > 26:
            return " ".join(str(s) for s in self.letters)
        parts = []
        run, count = self.letters[0], 0
        for s in (*self.letters, 0):
            if s == run:
                count += 1
                continue
            name = chr(ord("a") + abs(run) - 1)
            exp = count if run > 0 else -count
            parts.append(name if exp == 1 else f"{name}^{exp}")
            run, count = s, 1
        return " ".join(parts)

    def __str__(self) -> str:
        return " ".join(
            chr(ord("a" if s > 0 else "A") + abs(s) - 1) for s in self.letters
        ) if self.n - 1 <= 26 else self.to_text()

    def __repr__(self) -> str:
        return f"BraidWord({self.n}, {str(self) !r})"


def identity_word(n: int) -> BraidWord:
    return BraidWord(n, ())


def commutator(u: BraidWord, v: BraidWord) -> BraidWord:
    """The word u v u^-1 v^-1."""
    return u * v * u.inverse() * v.inverse()


_TOKEN = re.compile(r"\s*([a-zA-Z])(?:\s*\^\s*([+-]?\d+))?")
_NUMERIC = re.compile(r"[+-]?\d+(?:\s+[+-]?\d+)*\s*$")


def parse_word(text: str, n: int) -> BraidWord:
    """
    Parse either letter syntax (a..z positive, A..Z inverse, optional ^k)
    or numeric syntax (whitespace-separated signed indices).

    >>> parse_word("a B^2", 4)
    BraidWord(4, 'a B B')
    >>> parse_word("1 -2", 4)
    BraidWord(4, 'a B')
    >>> parse_word("", 4)
    BraidWord(4, '')
    """
    text = text.strip()
    if not text:
        return BraidWord(n, ())
    if _NUMERIC.match(text):
        return BraidWord(n, tuple(int(t) for t in text.split()))

    letters: list[int] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise BadSyntax(f"cannot read a braid letter at {text[pos:]!r}")
            break
        pos = m.end()
        char, exp = m.group(1), int(m.group(2) or 1)
        index = ord(char.lower()) - ord("a") + 1
        if index > n - 1:
            raise IndexOutOfRange(f"generator {char!r} needs more than {n} strands")
        signed = index if char.islower() else -index
        if exp < 0:
            signed, exp = -signed, -exp
        letters.extend([signed] * exp)
    return BraidWord(n, tuple(letters))


# -- action on the free group -------------------------------------------------


def _inv(word: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-s for s in reversed(word))


def _concat(*words: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for w in words:
        for s in w:
            if out and out[-1] == -s:
                out.pop()
            else:
                out.append(s)
    return tuple(out)


def _substitute(
    images: Sequence[tuple[int, ...]], word: Iterable[int], cap: int | None = None
) -> tuple[int, ...]:
    """Image of a word under generator images, freely reduced on the fly.
    Raises OverflowError once the reduced result exceeds cap letters."""
    out: list[int] = []
    for s in word:
        img = images[s - 1] if s > 0 else _inv(images[-s - 1])
        for t in img:
            if out and out[-1] == -t:
                out.pop()
            else:
                out.append(t)
                if cap is not None and len(out) > cap:
                    raise OverflowError(
                        f"free group image exceeds {cap} letters"
                    )
    return tuple(out)


@dataclasses.dataclass(frozen=True)
class FreeGroupAutomorphism:
    """
    An automorphism of the free group on x_1..x_n, given by the images of the
    generators as freely reduced words (signed indices, like braid letters).
    Instances must fix the product x_1 x_2 ... x_n, which pins down exactly
    the automorphisms induced by braids together with inner ones.
    """

    n: int
    images: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(tuple(w) for w in self.images))
        if len(self.images) != self.n:
            raise ValueError(f"need {self.n} images, got {len(self.images)}")
        for w in self.images:
            if _concat(w) != tuple(w):
                raise ValueError(f"image {w} is not freely reduced")
        boundary = tuple(range(1, self.n + 1))
        if self.apply(boundary) != boundary:
            raise ValueError("automorphism does not fix x_1 x_2 ... x_n")

    @classmethod
    def identity(cls, n: int) -> FreeGroupAutomorphism:
        return cls(n, tuple((i,) for i in range(1, n + 1)))

    def is_identity(self) -> bool:
        return all(w == (i + 1,) for i, w in enumerate(self.images))

    def apply(self, word: Sequence[int]) -> tuple[int, ...]:
        """Image of a word in x_1..x_n, freely reduced."""
        return _substitute(self.images, word)

    def __mul__(self, other: FreeGroupAutomorphism) -> FreeGroupAutomorphism:
        """Composition (self * other)(x) = self(other(x)): other acts first."""
        if self.n != other.n:
            raise StrandMismatch(f"{self.n} generators vs {other.n}")
        return FreeGroupAutomorphism(
            self.n, tuple(self.apply(w) for w in other.images)
        )


@functools.lru_cache(maxsize=None)
def _letter_images(n: int, letter: int) -> tuple[tuple[int, ...], ...]:
    images = [(k,) for k in range(1, n + 1)]
    i = abs(letter)  # acts on x_i, x_{i+1}; the list is 0-based
    if letter > 0:
        images[i - 1], images[i] = (i, i + 1, -i), (i,)
    else:
        images[i - 1], images[i] = (i + 1,), (-(i + 1), i, i + 1)
    return tuple(images)


def _auto_images(
    n: int, letters: tuple[int, ...], cap: int | None
) -> tuple[tuple[int, ...], ...]:
    # Balanced composition keeps every intermediate equal to the honest
    # automorphism of a subword, so the cap measures real image growth
    # rather than an artifact of left-to-right folding.
    if len(letters) == 1:
        return _letter_images(n, letters[0])
    mid = len(letters) // 2
    f = _auto_images(n, letters[:mid], cap)
    g = _auto_images(n, letters[mid:], cap)
    return tuple(_substitute(f, w, cap) for w in g)


def artin_action(
    word: BraidWord, max_image_len: int = 1_000_000
) -> FreeGroupAutomorphism:
    """
    The automorphism induced by a braid word under the action

        sigma_i:  x_i -> x_i x_{i+1} x_i^-1,   x_{i+1} -> x_i

    (inverses accordingly), folded in the "uv applies v first" convention.
    Raises OverflowError when any image exceeds max_image_len letters;
    some short braid words (commutators of twists) genuinely have images
    of hundreds of millions of letters, so the cap is load-bearing.
    """
    if not word.letters:
        return FreeGroupAutomorphism.identity(word.n)
    images = _auto_images(word.n, word.letters, max_image_len)
    return FreeGroupAutomorphism(word.n, images)


def strand_permutation(word: BraidWord) -> tuple[int, ...]:
    """Image of each strand index 1..n under the underlying permutation,
    composed in the same "uv applies v first" convention."""
    perm = list(range(word.n + 1))  # 1-based
    for letter in word.letters:
        i = abs(letter)
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
    return tuple(perm[1:])


_PROBE_COUNT = 8
_PROBE_DEGREE = 9


@functools.lru_cache(maxsize=None)
def _probes(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    # Fixed-seed homomorphisms from the free group on n generators into a
    # symmetric group: each probe lists the image permutation of every x_i.
    rng = random.Random(0x6E666B * n)
    probes = []
    for _ in range(_PROBE_COUNT):
        probes.append(
            tuple(
                tuple(rng.sample(range(_PROBE_DEGREE), _PROBE_DEGREE))
                for _ in range(n)
            )
        )
    return tuple(probes)


def _perm_mul(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(p[x] for x in q)


def _perm_inv(p: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def _shadow(
    probe: tuple[tuple[int, ...], ...], word: BraidWord
) -> tuple[tuple[int, ...], ...]:
    """The homomorphism probe composed with the word's automorphism.

    Folding eta <- eta . A(letter) needs only the finite images, never the
    free group words, so it runs in O(len(word)) regardless of how large
    the true automorphism images are.
    """
    eta = list(probe)
    for letter in word.letters:
        i = abs(letter)
        pi, pj = eta[i - 1], eta[i]
        if letter > 0:
            eta[i - 1] = _perm_mul(_perm_mul(pi, pj), _perm_inv(pi))
            eta[i] = pi
        else:
            eta[i - 1] = pj
            eta[i] = _perm_mul(_perm_mul(_perm_inv(pj), pi), pj)
    return tuple(eta)


def is_trivial(word: BraidWord, max_image_len: int = 1_000_000) -> bool:
    """
    Exact braid triviality test via the free group action.

    Cheap certificates of non-triviality run first: the strand permutation,
    the exponent sum, and finite permutation shadows of the automorphism.
    Each is a homomorphic image of the free-group action, so a difference
    there proves the action is not the identity. Only when every shadow
    looks trivial are the honest images computed and compared; a word whose
    images overflow max_image_len and whose shadows all look trivial raises
    OverflowError rather than guessing.
    """
    reduced = word.free_reduce()
    if not reduced.letters:
        return True
    if strand_permutation(reduced) != tuple(range(1, word.n + 1)):
        return False
    if reduced.exponent_sum != 0:
        return False
    for probe in _probes(word.n):
        if _shadow(probe, reduced) != probe:
            return False
    return artin_action(reduced, max_image_len).is_identity()
