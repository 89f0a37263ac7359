"""Standard-form fork specifications and their pairing with the noodle.

The noodle is the horizontal line N. Punctures p_1..p_{n-1} sit above N in
order and p_n sits below it. A standard-form tine edge is described by arc
counts above N (around p_1, p_2, and for n=4 around p_3 and around the pair
{p_1, p_2}) plus the two endpoint punctures; below N the edge forms a single
nested rainbow, with a central terminal when p_n is an endpoint. The pairing
is the Laurent polynomial sum of signed powers q^(a_i) over the k crossings,
where a_i tracks the total winding around the punctures along the edge.
"""

from __future__ import annotations

import dataclasses
import itertools
import re

from .laurent import LaurentPoly, ModEval


class ParityViolation(ValueError):
    """The crossing counts above and below N cannot both be realized."""


class Disconnected(ValueError):
    """The matchings close up into extra loops instead of a single arc."""


class BadSpecText(ValueError):
    """The fork spec text form cannot be parsed."""


@dataclasses.dataclass(frozen=True)
class ForkSpec:
    """
    Combinatorial data of a standard-form tine edge: n = 3 or 4, the arc
    counts above N ((c1, c2) for n=3, (c1, c2, c3, c12) for n=4), and the
    unordered endpoint pair. Stored with ends sorted ascending.

    >>> ForkSpec(4, (24, 18, 11, 0), (3, 1)).to_text()
    'n=4;c=24,18,11,0;ends=1,3'
    """

    n: int
    counts: tuple[int, ...]
    ends: tuple[int, int]

    def __post_init__(self):
        if self.n not in (3, 4):
            raise ValueError(f"n must be 3 or 4, got {self.n}")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        want = 4 if self.n == 4 else 2
        if len(self.counts) != want or any(c < 0 for c in self.counts):
            raise ValueError(f"need {want} non-negative counts, got {self.counts}")
        e = tuple(sorted(int(x) for x in self.ends))
        object.__setattr__(self, "ends", e)
        if len(e) != 2 or e[0] == e[1] or not all(1 <= x <= self.n for x in e):
            raise ValueError(f"ends must be two distinct punctures, got {e}")

    @property
    def is_degenerate(self) -> bool:
        """All-zero counts with both endpoints above N: the tine edge can
        stay entirely above the noodle, so it has no crossings at all."""
        return not any(self.counts) and self.n not in self.ends

    @property
    def k(self) -> int:
        """Crossing count with N (0 for the degenerate disjoint case)."""
        if self.is_degenerate:
            return 0
        above = sum(1 for e in self.ends if e != self.n)
        return 2 * sum(self.counts) + above

    @property
    def lower_arcs(self) -> int:
        """Number of arcs below N, derived from the parity balance."""
        below_terminal = 1 if self.n in self.ends else 0
        if (self.k - below_terminal) % 2:
            raise ParityViolation(f"{self} admits no integer lower arc count")
        return (self.k - below_terminal) // 2

    def mirrored(self) -> ForkSpec:
        """The left-right mirror image (only defined without pair arcs,
        whose mirror would need arcs around the two rightmost punctures)."""
        if self.n == 4:
            c1, c2, c3, c12 = self.counts
            if c12:
                raise ValueError("mirror of a spec with pair arcs is not encoded")
            counts = (c3, c2, c1, 0)
        else:
            counts = (self.counts[1], self.counts[0])
        ends = tuple(e if e == self.n else self.n - e for e in self.ends)
        return ForkSpec(self.n, counts, tuple(sorted(ends)))  # type: ignore[arg-type]

    def to_text(self) -> str:
        c = ",".join(str(x) for x in self.counts)
        return f"n={self.n};c={c};ends={self.ends[0]},{self.ends[1]}"

    _TEXT = re.compile(r"n=(\d+);c=([\d,]+);ends=(\d+),(\d+)$")

    @classmethod
    def from_text(cls, text: str) -> ForkSpec:
        m = cls._TEXT.match(text.strip())
        if not m:
            raise BadSpecText(f"cannot parse fork spec {text!r}")
        counts = tuple(int(x) for x in m.group(2).split(","))
        return cls(int(m.group(1)), counts, (int(m.group(3)), int(m.group(4))))

    def __str__(self) -> str:
        return self.to_text()


@dataclasses.dataclass(frozen=True)
class Visit:
    """One crossing along the traversal: its left-to-right position on N
    (1-based), the alternating sign, and the winding exponent."""

    position: int
    sign: int
    exponent: int


@dataclasses.dataclass(frozen=True)
class Crossing:
    """A crossing position with the upper and lower features through it.
    Feature ids are ("arc", family, index) or ("terminal", puncture)."""

    position: int
    upper: tuple
    lower: tuple


@dataclasses.dataclass(frozen=True)
class CurveDiagram:
    k: int
    crossings: tuple[Crossing, ...]
    traversal: tuple[Visit, ...]


@dataclasses.dataclass(frozen=True)
class PairingValue:
    """Either the exact normalized pairing polynomial or its images under
    mod-M filters (residues of the same normalized representative)."""

    exact: LaurentPoly | None = None
    filtered: tuple[ModEval, ...] | None = None


# -- layout -------------------------------------------------------------------


def _layout(spec: ForkSpec):
    """
    Left-to-right crossing layout on N.

    Returns (upper_partner, upper_enclosed, lower_partner, upper_id,
    lower_id, term_pos): partner arrays are 1-based with 0 marking a
    terminal attachment on that side; upper_enclosed[p] is the number of
    punctures under the upper arc through p; term_pos maps each endpoint
    puncture to its crossing position.
    """
    if spec.n == 4:
        c1, c2, c3, c12 = spec.counts
    else:
        c1, c2 = spec.counts
        c3 = c12 = 0
    k = spec.k

    up_partner = [0] * (k + 1)
    up_enclosed = [0] * (k + 1)
    low_partner = [0] * (k + 1)
    upper_id: list[tuple] = [()] * (k + 1)
    lower_id: list[tuple] = [()] * (k + 1)
    term_pos: dict[int, int] = {}

    pos = itertools.count(1)
    blocks: dict[str, list[int]] = {}

    def emit(name: str, count: int) -> None:
        blocks[name] = [next(pos) for _ in range(count)]

    emit("c12L", c12)
    emit("c1L", c1)
    emit("t1", 1 if 1 in spec.ends else 0)
    emit("c1R", c1)
    emit("c2L", c2)
    emit("t2", 1 if 2 in spec.ends else 0)
    emit("c2R", c2)
    emit("c12R", c12)
    emit("c3L", c3)
    emit("t3", 1 if (spec.n == 4 and 3 in spec.ends) else 0)
    emit("c3R", c3)

    families = [("c1", 1), ("c2", 1), ("c3", 1), ("c12", 2)]
    for fam, enclosed in families:
        left, right = blocks[fam + "L"], blocks[fam + "R"]
        for j, lp in enumerate(left):
            rp = right[len(right) - 1 - j]  # nested: outer left to outer right
            up_partner[lp], up_partner[rp] = rp, lp
            up_enclosed[lp] = up_enclosed[rp] = enclosed
            upper_id[lp] = upper_id[rp] = ("arc", fam, j)
    for i in (1, 2, 3):
        if blocks[f"t{i}"]:
            p = blocks[f"t{i}"][0]
            term_pos[i] = p
            upper_id[p] = ("terminal", i)

    # Below N: a single rainbow, with the p_n terminal foot at the centre
    # when p_n is an endpoint (k is odd exactly in that case).
    centre = (k + 1) // 2 if spec.n in spec.ends else 0
    if centre:
        term_pos[spec.n] = centre
        lower_id[centre] = ("terminal", spec.n)
    depth = 0
    for p in range(1, k + 1):
        q = k + 1 - p
        if p == centre:
            continue
        if p < q:
            low_partner[p], low_partner[q] = q, p
            lower_id[p] = lower_id[q] = ("arc", "low", depth)
            depth += 1

    return up_partner, up_enclosed, low_partner, upper_id, lower_id, term_pos


def build_diagram(spec: ForkSpec) -> CurveDiagram:
    """
    Reconstruct the crossing diagram and traverse it from the lower-numbered
    endpoint. Signs alternate starting at -1 (the first crossing heads down
    through N); the winding exponent changes by +-1 along a lower arc
    (right = +1) and by -+(enclosed punctures) along an upper arc
    (left = +enclosed).
    """
    spec.lower_arcs  # surfaces ParityViolation for malformed inputs
    k = spec.k
    if k == 0:
        return CurveDiagram(0, (), ())

    up_partner, up_enclosed, low_partner, upper_id, lower_id, term_pos = _layout(spec)
    crossings = tuple(
        Crossing(p, upper_id[p], lower_id[p]) for p in range(1, k + 1)
    )

    e1, e2 = spec.ends  # e1 < e2, so e1 is always an above puncture
    cur = term_pos[e1]
    sign, exponent = -1, 0
    visits = [Visit(cur, sign, exponent)]
    below = True  # the segment leaving the start crossing runs below N
    while True:
        nxt = low_partner[cur] if below else up_partner[cur]
        if nxt == 0:
            break  # reached the other terminal attachment
        if below:
            exponent += 1 if nxt > cur else -1
        else:
            step = up_enclosed[cur]
            exponent += step if nxt < cur else -step
        sign = -sign
        visits.append(Visit(nxt, sign, exponent))
        cur = nxt
        below = not below

    if len(visits) != k:
        raise Disconnected(
            f"{spec}: traversal covers {len(visits)} of {k} crossings"
        )
    if cur != term_pos[e2]:
        raise Disconnected(f"{spec}: traversal ends away from puncture {e2}")
    return CurveDiagram(k, crossings, tuple(visits))


def intersection_count(spec: ForkSpec) -> int:
    spec.lower_arcs  # surfaces ParityViolation
    return spec.k


# -- pairings -----------------------------------------------------------------


def _raw_poly(diagram: CurveDiagram) -> LaurentPoly:
    if diagram.k == 0:
        return LaurentPoly()
    lo = min(v.exponent for v in diagram.traversal)
    hi = max(v.exponent for v in diagram.traversal)
    coeffs = [0] * (hi - lo + 1)
    for v in diagram.traversal:
        coeffs[v.exponent - lo] += v.sign
    return LaurentPoly(lo, coeffs)


def pairing_exact(spec: ForkSpec) -> PairingValue:
    """The pairing polynomial, normalized to the canonical representative
    of its orbit under sign and q-power multiplication."""
    return PairingValue(exact=_raw_poly(build_diagram(spec)).normalize())


def pairing_mod(
    spec: ForkSpec, filters: list[tuple[int, int]] | tuple[tuple[int, int], ...]
) -> PairingValue:
    """
    Residues of the normalized pairing under each (q0, M) filter, computed
    by accumulating one machine integer per filter along the traversal.

    The raw traversal sum is a unit multiple +-q^s of the normalized
    polynomial, so each residue is adjusted by the tracked minimal exponent
    and its coefficient sign; in the rare case that coefficient cancels to
    zero the exact polynomial arbitrates.
    """
    diagram = build_diagram(spec)
    out = []
    for q0, modulus in filters:
        acc = 0
        min_exp: int | None = None
        min_coeff = 0
        for v in diagram.traversal:
            acc = (acc + v.sign * pow(q0, v.exponent, modulus)) % modulus
            if min_exp is None or v.exponent < min_exp:
                min_exp, min_coeff = v.exponent, v.sign
            elif v.exponent == min_exp:
                min_coeff += v.sign
        if min_exp is None:
            value = 0
        elif min_coeff == 0:
            # The lowest exponent cancelled; normalize via the exact value.
            value = _raw_poly(diagram).normalize().eval_mod(q0, modulus)
        else:
            flip = 1 if min_coeff > 0 else -1
            value = flip * acc * pow(q0, -min_exp, modulus) % modulus
        out.append(ModEval(modulus, q0 % modulus, value))
    return PairingValue(filtered=tuple(out))
