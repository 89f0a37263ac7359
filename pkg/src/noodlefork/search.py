"""Exhaustive, resumable scans over standard-form fork specs.

Specs are stratified by crossing count k and ordered lexicographically by
(k, c12, c1, c2, c3, endpoint-pair index), which gives every spec a global
integer index; scans, checkpoints, and distributed work units all address
this raw index space. The hot loop tests each pairing against mod-M point
filters and only filter-zero specs are recomputed exactly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import tempfile
from fractions import Fraction

from .forkpair import Disconnected, ForkSpec, pairing_exact
from .laurent import LaurentPoly

UNIT_SIZE = 10**6

# Two fixed word-sized primes with evaluation points drawn once from a
# seeded generator; fixed values keep distributed runs reproducible.
M61 = 2**61 - 1
M63 = 9223372036854775783
DEFAULT_FILTERS = ((718762972993956129, M61), (4347376730861985968, M63))

KIND_KERNEL = "kernel"
KIND_SPECIALIZATION = "specialization"
KIND_FALSE_ALARM = "false-alarm"
KIND_ROOT_CANDIDATE = "root-candidate"

MODES = ("kernel", "specialize", "roots")


class BadPoint(ValueError):
    """The specialization target must be rational and not 0, 1, or -1."""


class CorruptCheckpoint(ValueError):
    """The checkpoint file is unreadable or structurally invalid."""


class ParamsMismatch(ValueError):
    """The checkpoint was written for different scan parameters."""


@dataclasses.dataclass(frozen=True)
class ScanParams:
    """
    What to scan: puncture count, crossing-count ceiling, mode, the mod-M
    filters, and (in specialize mode) the rational target point.
    """

    n: int
    k_max: int
    mode: str = "kernel"
    filters: tuple[tuple[int, int], ...] = DEFAULT_FILTERS
    target: Fraction | None = None

    def __post_init__(self):
        if self.n not in (3, 4):
            raise ValueError(f"n must be 3 or 4, got {self.n}")
        if self.k_max < 0:
            raise ValueError(f"k_max must be non-negative, got {self.k_max}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(
            self, "filters", tuple((int(q), int(m)) for q, m in self.filters)
        )
        for q0, modulus in self.filters:
            if modulus < 2 or math.gcd(q0, modulus) != 1:
                raise ValueError(f"filter point {q0} is not a unit mod {modulus}")
        if self.mode == "specialize":
            if self.target is None:
                raise BadPoint("specialize mode needs a target point")
            t = Fraction(self.target)
            object.__setattr__(self, "target", t)
            if t in (0, 1, -1):
                raise BadPoint(f"target {t} is 0 or a root of unity")
        elif self.target is not None:
            raise ValueError(f"{self.mode} mode takes no target point")
        if self.mode != "roots" and not self.filters:
            raise ValueError(f"{self.mode} mode needs at least one filter")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k_max": self.k_max,
            "mode": self.mode,
            "filters": [[str(q), str(m)] for q, m in self.filters],
            "target": None if self.target is None else str(self.target),
        }

    @classmethod
    def from_json(cls, data: dict) -> ScanParams:
        return cls(
            n=int(data["n"]),
            k_max=int(data["k_max"]),
            mode=data["mode"],
            filters=tuple((int(q), int(m)) for q, m in data["filters"]),
            target=None if data["target"] is None else Fraction(data["target"]),
        )

    @property
    def params_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclasses.dataclass(frozen=True)
class HitRecord:
    """One ledger entry: a verified hit, a false alarm, or a root candidate."""

    spec: ForkSpec
    kind: str
    poly: LaurentPoly | None = None
    q0: str | None = None
    roots: tuple[str, ...] | None = None
    filters: tuple[tuple[str, str], ...] | None = None

    @property
    def k(self) -> int:
        return self.spec.k

    def to_json(self) -> dict:
        out: dict = {"spec": self.spec.to_text(), "k": self.k, "kind": self.kind}
        if self.q0 is not None:
            out["q0"] = self.q0
        if self.roots is not None:
            out["roots"] = list(self.roots)
        if self.filters is not None:
            out["filters"] = [list(f) for f in self.filters]
        if self.poly is not None:
            out["poly"] = self.poly.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> HitRecord:
        poly = None
        if "poly" in data:
            poly = LaurentPoly(
                int(data["poly"]["min_deg"]),
                tuple(int(c) for c in data["poly"]["coeffs"]),
            )
        return cls(
            spec=ForkSpec.from_text(data["spec"]),
            kind=data["kind"],
            poly=poly,
            q0=data.get("q0"),
            roots=None if "roots" not in data else tuple(data["roots"]),
            filters=None
            if "filters" not in data
            else tuple(tuple(f) for f in data["filters"]),
        )


@dataclasses.dataclass
class Counters:
    enumerated: int = 0
    invalid_parity: int = 0
    invalid_connectivity: int = 0
    degenerate: int = 0
    filter_hits: int = 0
    false_alarms: int = 0

    def __add__(self, other: Counters) -> Counters:
        return Counters(
            *(a + b for a, b in zip(dataclasses.astuple(self), dataclasses.astuple(other)))
        )

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> Counters:
        return cls(**{k: int(v) for k, v in data.items()})


@dataclasses.dataclass(frozen=True)
class Checkpoint:
    params: ScanParams
    cursor: int
    counters: Counters
    hits: tuple[HitRecord, ...]


@dataclasses.dataclass(frozen=True)
class ScanResult:
    hits: tuple[HitRecord, ...]
    checkpoint: Checkpoint


# -- the enumeration order -----------------------------------------------------
#
# Stratum k holds the specs with exactly k crossings. k odd means one above
# terminal (the other endpoint is the below puncture); k even means two.
# Within a stratum the counts tuple runs in lexicographic order keyed by
# (c12, c1, c2, c3) for n=4 and (c1, c2) for n=3, and the endpoint pair is
# the innermost digit. The all-zero/both-above tuples in the k=2 stratum
# describe edges disjoint from the noodle (k=0) and are skipped.

_ENDS = {
    (4, 1): ((1, 4), (2, 4), (3, 4)),
    (4, 0): ((1, 2), (1, 3), (2, 3)),
    (3, 1): ((1, 3), (2, 3)),
    (3, 0): ((1, 2),),
}


def _stratum(n: int, k: int) -> tuple[int, tuple[tuple[int, int], ...]]:
    """Arc-count total s and the endpoint pairs for stratum k."""
    terminals_above = 1 if k % 2 else 2
    return (k - terminals_above) // 2, _ENDS[(n, k % 2)]


def _compositions(total: int, parts: int) -> int:
    return math.comb(total + parts - 1, parts - 1)


def stratum_size(n: int, k: int) -> int:
    s, ends = _stratum(n, k)
    return _compositions(s, 4 if n == 4 else 2) * len(ends)


def space_size(n: int, k_max: int) -> int:
    """Raw index-space size: all (counts, ends) tuples for k = 1..k_max,
    including tuples that enumeration later skips."""
    return sum(stratum_size(n, k) for k in range(1, k_max + 1))


def _unrank_counts(n: int, s: int, rank: int) -> tuple[int, ...]:
    """The rank-th counts tuple of total s, in the stratum's lex order."""
    if n == 3:
        return (rank, s - rank)
    digits = []
    rem = s
    for parts_left in (3, 2, 1):
        x = 0
        while True:
            block = _compositions(rem - x, parts_left)
            if rank < block:
                break
            rank -= block
            x += 1
        digits.append(x)
        rem -= x
    c12, c1, c2 = digits
    return (c1, c2, rem, c12)


def spec_at(n: int, k_max: int, index: int) -> ForkSpec:
    """The raw spec at a global index (may be degenerate or disconnected)."""
    if not 0 <= index < space_size(n, k_max):
        raise IndexError(f"index {index} outside the k <= {k_max} space")
    k = 1
    while index >= stratum_size(n, k):
        index -= stratum_size(n, k)
        k += 1
    s, ends = _stratum(n, k)
    counts = _unrank_counts(n, s, index // len(ends))
    return ForkSpec(n, counts, ends[index % len(ends)])


def enumerate_specs(params: ScanParams, start: int = 0):
    """
    Stream of (index, spec) for every valid spec with 1 <= k <= k_max, in
    order, from raw index start: deterministic, duplicate-free, skipping
    degenerate and disconnected tuples.
    """
    from . import engine

    total = space_size(params.n, params.k_max)
    cursor = start
    while cursor < total:
        stop = min(cursor + UNIT_SIZE, total)
        flagged, _ = engine.scan_unit(params.n, params.k_max, cursor, stop, ())
        for index in flagged:
            yield index, spec_at(params.n, params.k_max, index)
        cursor = stop


# -- checkpoint files ----------------------------------------------------------


def save_checkpoint(checkpoint: Checkpoint, path: str) -> None:
    doc = {
        "params": checkpoint.params.to_json(),
        "params_hash": checkpoint.params.params_hash,
        "cursor": checkpoint.cursor,
        "counters": checkpoint.counters.to_json(),
        "hits": [h.to_json() for h in checkpoint.hits],
    }
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: str, params: ScanParams | None = None) -> Checkpoint:
    """Load a checkpoint, verifying its parameter hash against the stored
    params and, when given, against the resuming scan's params."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
        stored = ScanParams.from_json(doc["params"])
        if doc["params_hash"] != stored.params_hash:
            raise ParamsMismatch(f"{path}: parameter hash does not match body")
        checkpoint = Checkpoint(
            params=stored,
            cursor=int(doc["cursor"]),
            counters=Counters.from_json(doc["counters"]),
            hits=tuple(HitRecord.from_json(h) for h in doc["hits"]),
        )
    except ParamsMismatch:
        raise
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CorruptCheckpoint(f"{path}: {exc}") from exc
    if params is not None and params.params_hash != stored.params_hash:
        raise ParamsMismatch(f"{path} was written for different parameters")
    if not 0 <= checkpoint.cursor <= space_size(stored.n, stored.k_max):
        raise CorruptCheckpoint(f"{path}: cursor {checkpoint.cursor} out of range")
    return checkpoint


def append_ledger(path: str, hits) -> None:
    with open(path, "a") as fh:
        for hit in hits:
            fh.write(json.dumps(hit.to_json()) + "\n")


def read_ledger(path: str) -> list[HitRecord]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(HitRecord.from_json(json.loads(line)))
    return out


# -- scans ----------------------------------------------------------------------


def _residue_checks(params: ScanParams) -> tuple[tuple[int, int], ...]:
    """The (point, modulus) pairs the hot loop must all see vanish: the
    filter points in kernel mode; the images of the target and its
    reciprocal in specialize mode."""
    if params.mode == "kernel":
        return tuple((q0 % m, m) for q0, m in params.filters)
    t = params.target
    checks = []
    for _, m in params.filters:
        image = t.numerator * pow(t.denominator, -1, m) % m
        checks.append((image, m))
        checks.append((pow(image, -1, m), m))
    return tuple(checks)


def _classify(params: ScanParams, spec: ForkSpec) -> HitRecord:
    """Exact verdict for a spec that passed every residue check."""
    poly = pairing_exact(spec).exact
    if poly.is_zero():
        return HitRecord(spec, KIND_KERNEL, poly=poly)
    if params.mode == "specialize":
        t = params.target
        if poly.evaluate(t) == 0 and poly.evaluate(1 / t) == 0:
            return HitRecord(spec, KIND_SPECIALIZATION, poly=poly, q0=str(t))
        fooled = tuple((str(t), str(m)) for _, m in params.filters)
    else:
        fooled = tuple((str(q), str(m)) for q, m in params.filters)
    return HitRecord(spec, KIND_FALSE_ALARM, poly=poly, filters=fooled)


def scan_range(
    params: ScanParams, start: int, stop: int
) -> tuple[tuple[HitRecord, ...], Counters]:
    """
    One enumeration window [start, stop) of the deterministic order:
    mod-M filtering in the hot loop, then exact recomputation and
    classification of every flagged spec. The building block for both
    whole-space scans and distributed work units.
    """
    from . import engine

    total = space_size(params.n, params.k_max)
    if not 0 <= start <= stop <= total:
        raise ValueError(f"range [{start}, {stop}) not within [0, {total})")
    if params.mode == "roots":
        fresh, counters = _roots_unit(params, start, stop)
        return tuple(fresh), counters
    checks = _residue_checks(params)
    flagged, raw = engine.scan_unit(params.n, params.k_max, start, stop, checks)
    counters = Counters(
        enumerated=raw[0],
        degenerate=raw[1],
        invalid_connectivity=raw[2],
        filter_hits=raw[3],
    )
    fresh = []
    for index in flagged:
        record = _classify(params, spec_at(params.n, params.k_max, index))
        if record.kind == KIND_FALSE_ALARM:
            counters.false_alarms += 1
        fresh.append(record)
    return tuple(fresh), counters


def _run(
    params: ScanParams,
    checkpoint: Checkpoint | None,
    checkpoint_path: str | None,
    ledger_path: str | None,
    unit: int,
) -> ScanResult:
    if checkpoint is not None and checkpoint.params.params_hash != params.params_hash:
        raise ParamsMismatch("cannot resume: scan parameters changed")
    cursor = checkpoint.cursor if checkpoint else 0
    counters = checkpoint.counters if checkpoint else Counters()
    hits = list(checkpoint.hits) if checkpoint else []
    total = space_size(params.n, params.k_max)

    while cursor < total:
        stop = min(cursor + unit, total)
        fresh, unit_counters = scan_range(params, cursor, stop)
        counters = counters + unit_counters
        hits.extend(fresh)
        cursor = stop
        if ledger_path and fresh:
            append_ledger(ledger_path, fresh)
        if checkpoint_path:
            save_checkpoint(
                Checkpoint(params, cursor, counters, tuple(hits)), checkpoint_path
            )
    return ScanResult(tuple(hits), Checkpoint(params, cursor, counters, tuple(hits)))


def _roots_unit(params: ScanParams, start: int, stop: int):
    """Exact pairing and rational root hunt for one index range."""
    from . import engine

    counters = Counters()
    hits = []
    flagged, raw = engine.scan_unit(params.n, params.k_max, start, stop, ())
    counters.enumerated, counters.degenerate = raw[0], raw[1]
    counters.invalid_connectivity = raw[2]
    for index in flagged:
        spec = spec_at(params.n, params.k_max, index)
        poly = pairing_exact(spec).exact
        if poly.is_zero():
            hits.append(HitRecord(spec, KIND_KERNEL, poly=poly))
            continue
        scan = poly.rational_roots()
        if scan.reciprocal_closed:
            roots = tuple(sorted(str(r) for r in scan.reciprocal_closed))
            hits.append(HitRecord(spec, KIND_ROOT_CANDIDATE, poly=poly, roots=roots))
    return hits, counters


def kernel_scan(
    params: ScanParams,
    *,
    checkpoint: Checkpoint | None = None,
    checkpoint_path: str | None = None,
    ledger_path: str | None = None,
    unit: int = UNIT_SIZE,
) -> ScanResult:
    """Hunt for specs with identically zero pairing: every spec whose
    residues all vanish is recomputed exactly and classified as a kernel
    hit or a logged false alarm."""
    if params.mode != "kernel":
        raise ValueError("kernel_scan needs kernel-mode params")
    return _run(params, checkpoint, checkpoint_path, ledger_path, unit)


def specialize_scan(
    params: ScanParams,
    *,
    checkpoint: Checkpoint | None = None,
    checkpoint_path: str | None = None,
    ledger_path: str | None = None,
    unit: int = UNIT_SIZE,
) -> ScanResult:
    """Hunt for specs whose pairing vanishes at the target point and at its
    reciprocal; filter first at their images mod each M, verify exactly."""
    if params.mode != "specialize":
        raise ValueError("specialize_scan needs specialize-mode params")
    return _run(params, checkpoint, checkpoint_path, ledger_path, unit)


def root_collect(
    params: ScanParams,
    *,
    checkpoint: Checkpoint | None = None,
    checkpoint_path: str | None = None,
    ledger_path: str | None = None,
    unit: int = UNIT_SIZE,
) -> ScanResult:
    """Compute every exact pairing and collect reciprocal-closed rational
    root pairs {x, 1/x} (0 and roots of unity excluded)."""
    if params.mode != "roots":
        raise ValueError("root_collect needs roots-mode params")
    return _run(params, checkpoint, checkpoint_path, ledger_path, unit)
