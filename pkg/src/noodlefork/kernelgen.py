"""Turning fork specs into explicit braid words and verifying them.

An arc between two punctures is tracked through the boundary curve of its
regular neighbourhood, stored as a cyclically reduced word in the loops
x_1..x_n around the punctures (canonical up to rotation and inversion, so
equality means isotopy). Braids act on these coordinates through the free
group action; intersection numbers with the vertical walls between the
punctures are derived from the word and their sum is the complexity that
drives conjugator synthesis. Candidates are commutators of a full twist
with a conjugated band twist, and every candidate is judged solely by its
verification report.
"""

from __future__ import annotations

import dataclasses
import functools
from fractions import Fraction
from typing import Iterable, Sequence

from .braids import BraidWord, StrandMismatch, artin_action, commutator, is_trivial
from .burau import GENERIC, RationalRing, burau
from .forkpair import ForkSpec, build_diagram, pairing_exact


class BadRange(ValueError):
    """A twist was requested on an impossible strand range."""


class Unreachable(RuntimeError):
    """Complexity descent exhausted its budget without reaching a standard arc."""


class SynthesisFailed(RuntimeError):
    """No conjugator word could be synthesized for the spec."""


class VerificationFailed(RuntimeError):
    """No twist exponent produced the required Burau identity."""


# -- cyclic words --------------------------------------------------------------


def _inv_word(w: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-s for s in reversed(w))


def _cyclic_reduce(w: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for s in w:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    lo, hi = 0, len(out)
    while hi - lo >= 2 and out[lo] == -out[hi - 1]:
        lo, hi = lo + 1, hi - 1
    return tuple(out[lo:hi])


def _least_rotation(w: Sequence[int]) -> int:
    # Booth's algorithm: index of the lexicographically least rotation.
    s = tuple(w) + tuple(w)
    f = [-1] * len(s)
    k = 0
    for j in range(1, len(s)):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def _canonical_cycle(word: Iterable[int]) -> tuple[int, ...]:
    """Cyclic reduction followed by the least representative over all
    rotations of the word and of its inverse (curve orientation is not
    part of the isotopy class)."""
    w = _cyclic_reduce(word)
    if len(w) <= 1:
        return min(w, _inv_word(w)) if w else ()
    best = None
    for cand in (w, _inv_word(w)):
        k = _least_rotation(cand)
        rot = cand[k:] + cand[:k]
        if best is None or rot < best:
            best = rot
    return best


@functools.lru_cache(maxsize=65536)
def _wall_vector(n: int, curve: tuple[int, ...]) -> tuple[int, ...]:
    idx = tuple(abs(s) for s in curve)
    pairs = tuple(zip(idx, idx[1:] + idx[:1]))
    return tuple(
        sum(1 for a, b in pairs if (a <= i) != (b <= i)) for i in range(n + 1)
    )


# -- arc coordinates -----------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class ArcCoords:
    """
    Coordinates of an embedded arc between two punctures: the canonical
    cyclic word of its doubled curve plus the endpoint pair. The derived
    wall vector counts minimal intersections with the n+1 verticals left
    of, between, and right of the punctures; its sum is the complexity.

    >>> ArcCoords.standard(4, 2).complexity
    2
    >>> ArcCoords.standard(4, 2).walls
    (0, 0, 2, 0, 0)
    """

    n: int
    endpoints: tuple[int, int]
    curve: tuple[int, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 punctures, got {self.n}")
        ends = tuple(sorted(self.endpoints))
        object.__setattr__(self, "endpoints", ends)
        if len(ends) != 2 or ends[0] == ends[1] or not all(
            1 <= e <= self.n for e in ends
        ):
            raise ValueError(f"endpoints must be two distinct punctures, got {ends}")
        curve = _canonical_cycle(self.curve)
        if not curve or any(s == 0 or abs(s) > self.n for s in curve):
            raise ValueError(f"curve letters must be nonzero with index <= {self.n}")
        object.__setattr__(self, "curve", curve)
        # The doubled curve of an arc winds once around each endpoint (with
        # one global sign, since inversion is quotiented out) and has zero
        # net winding around every other puncture.
        sums = [0] * (self.n + 1)
        for s in curve:
            sums[abs(s)] += 1 if s > 0 else -1
        hot = {j for j in range(1, self.n + 1) if sums[j]}
        if hot != set(ends) or {sums[e] for e in ends} not in ({1}, {-1}):
            raise ValueError(f"curve {curve} does not double an arc joining {ends}")

    @property
    def walls(self) -> tuple[int, ...]:
        return _wall_vector(self.n, self.curve)

    @property
    def complexity(self) -> int:
        return sum(self.walls)

    @classmethod
    def standard(cls, n: int, i: int) -> ArcCoords:
        """The straight arc joining the adjacent punctures i and i+1."""
        if not 1 <= i <= n - 1:
            raise BadRange(f"no adjacent pair ({i}, {i + 1}) on {n} punctures")
        return cls(n, (i, i + 1), (i, i + 1))

    def standard_index(self) -> int | None:
        """i if this is the standard arc between punctures i and i+1."""
        i = self.endpoints[0]
        if self.endpoints[1] == i + 1 and self == ArcCoords.standard(self.n, i):
            return i
        return None

    @classmethod
    def from_spec(cls, spec: ForkSpec) -> ArcCoords:
        """Coordinates of the spec's tine edge, read from the layout."""
        w = _arc_reading(spec)
        e1, e2 = spec.ends
        return cls(spec.n, (e1, e2), w + (e2,) + _inv_word(w) + (e1,))


def _gap_positions(spec: ForkSpec) -> dict[int, int]:
    """Number of crossing slots strictly left of each above puncture (the
    puncture sits between slot g and slot g+1)."""
    t = {i: 1 if i in spec.ends else 0 for i in range(1, spec.n)}
    if spec.n == 4:
        c1, c2, c3, c12 = spec.counts
        return {
            1: c12 + c1 + t[1],
            2: c12 + 2 * c1 + c2 + t[1] + t[2],
            3: 2 * c12 + 2 * c1 + 2 * c2 + c3 + t[1] + t[2] + t[3],
        }
    c1, c2 = spec.counts
    return {1: c1 + t[1], 2: 2 * c1 + c2 + t[1] + t[2]}


def _arc_reading(spec: ForkSpec) -> tuple[int, ...]:
    """
    The tine edge as a free group word: one signed letter per reading-ray
    crossing, in traversal order. Above punctures carry upward rays (a
    rightward crossing reads +j), the below puncture a downward ray (a
    leftward crossing reads +n). Lower arcs pass below puncture n and
    read exactly one letter; upper arcs read the punctures they span.
    """
    if spec.is_degenerate:
        return ()  # the edge runs directly between its endpoints, above N
    gaps = _gap_positions(spec)
    visits = build_diagram(spec).traversal
    letters: list[int] = []
    winding = 0
    for t, (a, b) in enumerate(zip(visits, visits[1:])):
        u, v = a.position, b.position
        if t % 2 == 0:  # below N, one crossing of its downward ray
            chunk = [-spec.n if v > u else spec.n]
        else:
            lo, hi = min(u, v), max(u, v)
            crossed = [j for j in range(1, spec.n) if lo <= gaps[j] < hi]
            chunk = [-j for j in reversed(crossed)] if v < u else list(crossed)
        letters.extend(chunk)
        # Signed letter count retraces the diagram's winding bookkeeping.
        winding += sum(1 if s < 0 else -1 for s in chunk)
        assert winding == b.exponent, (spec, t, winding, b.exponent)
    return tuple(letters)


# -- the braid action ----------------------------------------------------------


def _puncture_image(auto, e: int) -> int:
    # Braid automorphisms send each generator to a conjugate u x_f u^-1 of
    # a positive generator; the image puncture is the middle letter.
    img = auto.apply((e,))
    mid = img[len(img) // 2]
    assert mid > 0 and len(img) % 2 == 1, img
    return mid


def coords_action(word: BraidWord, c: ArcCoords) -> ArcCoords:
    """
    Image of the arc under the braid, acting through the free group:
    action(u * v, c) = action(u, action(v, c)).

    >>> std = ArcCoords.standard(4, 1)
    >>> coords_action(BraidWord(4, ()), std) == std
    True
    """
    if word.n != c.n:
        raise StrandMismatch(f"{word.n} strands vs {c.n} punctures")
    auto = artin_action(word)
    ends = tuple(_puncture_image(auto, e) for e in c.endpoints)
    return ArcCoords(c.n, ends, auto.apply(c.curve))


def _apply_letter(letter: int, c: ArcCoords) -> ArcCoords:
    return coords_action(BraidWord(c.n, (letter,)), c)


# -- conjugator synthesis ------------------------------------------------------


def _state_key(c: ArcCoords):
    return (c.complexity, len(c.curve), c.curve, c.endpoints)


def _descend(start: ArcCoords, budget: int, beam: int):
    """Greedy complexity descent with a bounded equal-complexity search
    when no single generator strictly improves. Returns (moves, band)
    where applying the moves in order carries start to standard(band)."""
    gens = tuple(g for i in range(1, start.n) for g in (i, -i))
    cur, moves, spent = start, [], 0

    while True:
        band = cur.standard_index()
        if band is not None:
            return moves, band

        best = None
        for g in gens:
            spent += 1
            nxt = _apply_letter(g, cur)
            if nxt.complexity < cur.complexity:
                key = _state_key(nxt)
                if best is None or key < best[0]:
                    best = (key, g, nxt)
        if spent > budget:
            raise Unreachable(
                f"move budget {budget} exhausted at complexity {cur.complexity}"
            )
        if best is not None:
            moves.append(best[1])
            cur = best[2]
            continue

        # Plateau: breadth-first through states of equal complexity.
        level = cur.complexity
        frontier = [(cur, ())]
        seen = {cur}
        improved = None
        while frontier and improved is None:
            grown = []
            for state, path in frontier:
                for g in gens:
                    spent += 1
                    if spent > budget:
                        raise Unreachable(
                            f"move budget {budget} exhausted on a plateau "
                            f"at complexity {level}"
                        )
                    child = _apply_letter(g, state)
                    if child in seen:
                        continue
                    seen.add(child)
                    if child.complexity < level:
                        cand = (path + (g,), child)
                        if improved is None or _state_key(child) < _state_key(
                            improved[1]
                        ):
                            improved = cand
                    elif child.complexity == level:
                        grown.append((child, path + (g,)))
            grown.sort(key=lambda item: _state_key(item[0]))
            frontier = grown[:beam]
        if improved is None:
            raise Unreachable(
                f"no descent from the complexity-{level} plateau "
                f"within beam {beam}"
            )
        moves.extend(improved[0])
        cur = improved[1]


def _synthesize(target: ArcCoords, budget: int, beam: int):
    moves, band = _descend(target, budget, beam)
    # The moves map target to standard, so their reversed inverse maps the
    # standard arc back to the target; verify before handing it out.
    w = BraidWord(target.n, tuple(-g for g in moves)).free_reduce()
    if coords_action(w, ArcCoords.standard(target.n, band)) != target:
        raise Unreachable("descent result failed the defining equation")
    return w, band


def synthesize_conjugator(
    target: ForkSpec | ArcCoords, *, budget: int = 10_000, beam: int = 512
) -> BraidWord:
    """
    A braid word w with coords_action(w, standard arc) equal to the target
    arc, found by complexity descent. Best effort: raises Unreachable when
    the budget or plateau beam is exhausted.
    """
    coords = ArcCoords.from_spec(target) if isinstance(target, ForkSpec) else target
    return _synthesize(coords, budget, beam)[0]


# -- candidates ----------------------------------------------------------------


def full_twist_word(n: int, m: int) -> BraidWord:
    """
    The full twist on the first m of n strands, as the word
    (sigma_1 ... sigma_{m-1})^m.

    >>> full_twist_word(4, 3).to_text()
    'a b a b a b'
    """
    if not 2 <= m <= n:
        raise BadRange(f"full twist needs 2 <= m <= {n}, got {m}")
    return BraidWord(n, tuple(range(1, m)) * m)


@dataclasses.dataclass(frozen=True)
class VerificationReport:
    """Outcome of the braid-level and Burau-level identity tests."""

    artin_trivial: bool
    generic_identity: bool | None
    q0_identity: tuple[tuple[str, bool], ...]

    def identity_at(self, q0) -> bool | None:
        key = str(Fraction(q0))
        for point, ok in self.q0_identity:
            if point == key:
                return ok
        return None

    def kernel_points(self) -> tuple[str, ...]:
        """Points where the word is a non-trivial braid with identity image."""
        if self.artin_trivial:
            return ()
        return tuple(point for point, ok in self.q0_identity if ok)

    def to_json(self) -> dict:
        return {
            "artin_trivial": self.artin_trivial,
            "generic_identity": self.generic_identity,
            "per_q0": dict(self.q0_identity),
        }


def verify_candidate(word: BraidWord, targets: Iterable) -> VerificationReport:
    """
    Ground truth for every constructed element: exact braid triviality via
    the free group action, then the reduced Burau identity test generically
    (target "generic") and at each exact rational point in targets.
    """
    trivial = is_trivial(word)
    generic: bool | None = None
    per: list[tuple[str, bool]] = []
    for t in targets:
        if t == "generic" or t is None:
            generic = burau(word, GENERIC).is_identity()
        else:
            q0 = Fraction(t)
            per.append((str(q0), burau(word, RationalRing(q0)).is_identity()))
    return VerificationReport(trivial, generic, tuple(per))


@dataclasses.dataclass(frozen=True)
class KernelCandidate:
    """A constructed commutator with its provenance and verification."""

    word: BraidWord
    spec: ForkSpec
    conjugator: BraidWord
    band: int
    twist_exponent: int
    twist_strands: int
    report: VerificationReport

    def __post_init__(self):
        if self.word.exponent_sum != 0:
            raise ValueError("candidate words are commutators with zero exponent sum")

    def to_json(self) -> dict:
        return {
            "word": self.word.to_text(),
            "provenance": {
                "spec": self.spec.to_text(),
                "conjugator": self.conjugator.to_text(),
                "band": self.band,
                "twist_exponent": self.twist_exponent,
                "twist_strands": self.twist_strands,
            },
            "checks": self.report.to_json(),
        }


def build_candidate(
    spec: ForkSpec,
    q0=None,
    *,
    budget: int = 10_000,
    beam: int = 512,
) -> KernelCandidate:
    """
    Commutator candidate for a spec whose pairing vanishes: the full twist
    on the above punctures against the tine edge's band twist, conjugated
    into place by a synthesized word. The half twist is tried before the
    full band twist, and the returned candidate carries the verification
    report that justified it.
    """
    value = pairing_exact(spec).exact
    if q0 is None:
        if not value.is_zero() or spec.k == 0:
            raise ValueError(
                "generic candidates need an exactly zero pairing and crossings"
            )
        points: tuple = ()
    else:
        q0 = Fraction(q0)
        if q0 == 0:
            raise ValueError("the Burau parameter cannot be specialized to 0")
        if value.evaluate(q0) != 0 or value.evaluate(1 / q0) != 0:
            raise ValueError(
                f"pairing of {spec} does not vanish at {q0} and {1 / q0}"
            )
        points = (q0, 1 / q0)

    try:
        w, band = _synthesize(ArcCoords.from_spec(spec), budget, beam)
    except Unreachable as exc:
        raise SynthesisFailed(f"{spec}: {exc}") from exc

    t1 = full_twist_word(spec.n, spec.n - 1)
    for e in (1, 2):
        x = BraidWord(spec.n, (band,) * e).conjugated_by(w)
        cand = commutator(t1, x).free_reduce()
        report = verify_candidate(cand, ("generic", *points))
        if report.artin_trivial:
            continue
        ok = report.generic_identity if q0 is None else report.identity_at(q0)
        if ok:
            return KernelCandidate(cand, spec, w, band, e, spec.n - 1, report)
    raise VerificationFailed(
        f"{spec}: neither twist exponent produced the Burau identity"
    )
