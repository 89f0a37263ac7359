"""
Command-line front end.

One binary, subcommand style: pairings (pair), the three scan modes
(scan, specialize, roots), braid verification (verify), conjugator and
candidate synthesis (synth), a hermetic golden self-check (reproduce),
and the coordinator/worker pair (serve, work).

Exit codes: 0 success, 1 usage or input error, 2 a verified hit was
found by a scan subcommand, 3 the reproduce suite failed.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import re
import socket
import sys
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import distrib
from .braids import BraidWord, commutator, identity_word, parse_word
from .burau import GENERIC, burau
from .forkpair import ForkSpec, pairing_exact
from .kernelgen import ArcCoords, build_candidate, synthesize_conjugator, verify_candidate
from .laurent import LaurentPoly
from .search import (
    DEFAULT_FILTERS,
    KIND_FALSE_ALARM,
    M61,
    M63,
    UNIT_SIZE,
    Checkpoint,
    Counters,
    ScanParams,
    ScanResult,
    append_ledger,
    kernel_scan,
    load_checkpoint,
    root_collect,
    save_checkpoint,
    scan_range,
    space_size,
    specialize_scan,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_HIT = 2
EXIT_REPRODUCE = 3

# The q=2 kernel certificate: conjugating word, then [t1, psi^-1 b psi]
# with t1 the full twist on the first three strands.
_Q2_CONJUGATOR = "a^-3 b^-2 c^-1 b c^4 b^-1 c b a b c^2 b a^-1 b^-1 c^-2"


# -- word grammar ---------------------------------------------------------------
#
# The core letter syntax ("a^-3 b^2", "bababa") is extended with grouping,
# commutator brackets and named subwords:
#
#   word   := factor*
#   factor := atom ('^' int)?
#   atom   := '(' word ')' | '[' word ',' word ']' | run
#
# A run of letters is first looked up among the --define names; otherwise
# it is plain generator letters. A power after a group, bracket or name
# applies to the whole subword; after a bare letter run it keeps the core
# convention and binds to the final letter, so "ba^3" is b a^3 while
# "(ba)^3" is the cube of ba.


class WordSyntax(ValueError):
    """Malformed word text in the extended grammar."""


_WORD_TOKEN = re.compile(r"\s*(\(|\)|\[|\]|,|\^\s*[+-]?\d+|[A-Za-z]+)")


def _tokenize(text: str) -> list[str]:
    out: list[str] = []
    pos = 0
    while pos < len(text):
        match = _WORD_TOKEN.match(text, pos)
        if match is None:
            if text[pos:].strip():
                raise WordSyntax(f"unexpected character {text[pos:].strip()[0]!r}")
            break
        out.append(match.group(1))
        pos = match.end()
    return out


class _WordParser:
    def __init__(self, tokens: list[str], n: int, defines: dict[str, BraidWord]):
        self.tokens = tokens
        self.pos = 0
        self.n = n
        self.defines = defines

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise WordSyntax("unexpected end of word")
        self.pos += 1
        return tok

    def expect(self, wanted: str) -> None:
        tok = self.take()
        if tok != wanted:
            raise WordSyntax(f"expected {wanted!r}, got {tok!r}")

    def word(self, stop: frozenset[str]) -> BraidWord:
        out = identity_word(self.n)
        while self.peek() is not None and self.peek() not in stop:
            out = out * self.factor()
        return out

    def _power(self) -> int | None:
        tok = self.peek()
        if tok is not None and tok.startswith("^"):
            self.take()
            return int(tok[1:].strip())
        return None

    def factor(self) -> BraidWord:
        tok = self.take()
        if tok == "(":
            inner = self.word(frozenset(")"))
            self.expect(")")
        elif tok == "[":
            left = self.word(frozenset(","))
            self.expect(",")
            right = self.word(frozenset("]"))
            self.expect("]")
            inner = commutator(left, right)
        elif tok[0].isalpha():
            if tok in self.defines:
                inner = self.defines[tok]
            else:
                exp = self._power()
                text = tok if exp is None else f"{tok}^{exp}"
                return parse_word(text, self.n)
        else:
            raise WordSyntax(f"unexpected token {tok!r}")
        exp = self._power()
        return inner if exp is None else inner**exp


def parse_cli_word(
    text: str, n: int, defines: dict[str, BraidWord] | None = None
) -> BraidWord:
    parser = _WordParser(_tokenize(text), n, defines or {})
    word = parser.word(frozenset())
    if parser.peek() is not None:
        raise WordSyntax(f"unbalanced {parser.peek()!r}")
    return word


def _parse_defines(items: list[str], n: int) -> dict[str, BraidWord]:
    """Bind name=word pairs in order; later names may use earlier ones."""
    defines: dict[str, BraidWord] = {}
    for item in items:
        name, sep, body = item.partition("=")
        name = name.strip()
        if not sep or not name.isalpha():
            raise WordSyntax(f"--define wants NAME=WORD, got {item!r}")
        defines[name] = parse_cli_word(body, n, defines)
    return defines


# -- small renderers ------------------------------------------------------------


def _poly_text(poly: LaurentPoly) -> str:
    """Ascending-degree rendering, e.g. 2 - 9q + 18q^2 - ... - 2q^7."""
    parts: list[str] = []
    for i, c in enumerate(poly.coeffs, poly.min_deg):
        if c == 0:
            continue
        sign = ("-" if c < 0 else "") if not parts else (" - " if c < 0 else " + ")
        mag = abs(c)
        term = "" if i == 0 else "q" if i == 1 else f"q^{i}"
        coeff = str(mag) if (i == 0 or mag != 1) else ""
        parts.append(sign + coeff + term)
    return "".join(parts) or "0"


def _filters_text(filters) -> str:
    return ",".join(f"{q}:{m}" for q, m in filters)


def _parse_filters(text: str):
    pairs = []
    for part in text.split(","):
        q, sep, m = part.partition(":")
        if not sep:
            raise ValueError(f"filter {part!r} is not of the form q0:M")
        pairs.append((int(q), int(m)))
    return tuple(pairs)


def _seed_filters(seed: int):
    rng = random.Random(seed)
    return tuple((rng.randrange(2, m - 1), m) for m in (M61, M63))


def _hit_text(hit) -> str:
    line = f"{hit.kind}: {hit.spec.to_text()} k={hit.k}"
    if hit.q0 is not None:
        line += f" q0={hit.q0}"
    if hit.roots:
        line += f" roots={','.join(hit.roots)}"
    if hit.poly is not None and not hit.poly.is_zero():
        line += f" poly={_poly_text(hit.poly)}"
    return line


def _emit_json(doc: dict) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


# -- scan plumbing ---------------------------------------------------------------


def _threaded_scan(
    params: ScanParams,
    checkpoint: Checkpoint | None,
    checkpoint_path: str | None,
    ledger_path: str | None,
    unit: int,
    threads: int,
) -> ScanResult:
    """Unit-parallel version of the sequential runner. Units are dispatched
    to a thread pool but committed strictly in enumeration order, so the
    counters, the ledger and the checkpoint are identical to a single-shot
    run; the compiled core releases the GIL inside its hot loop."""
    cursor = checkpoint.cursor if checkpoint else 0
    counters = checkpoint.counters if checkpoint else Counters()
    hits = list(checkpoint.hits) if checkpoint else []
    total = space_size(params.n, params.k_max)
    starts = iter(range(cursor, total, unit))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        window: deque = deque()
        while True:
            while len(window) < threads * 4:
                start = next(starts, None)
                if start is None:
                    break
                stop = min(start + unit, total)
                window.append((stop, pool.submit(scan_range, params, start, stop)))
            if not window:
                break
            stop, future = window.popleft()
            fresh, unit_counters = future.result()
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


def _scan_filters(args, mode: str):
    """Resolve --filters/--seed into filter pairs (roots mode takes none)."""
    if mode == "roots":
        return ()
    if args.filters is not None and args.seed is not None:
        raise ValueError("--filters and --seed are mutually exclusive")
    if args.filters is not None:
        return _parse_filters(args.filters)
    if args.seed is not None:
        return _seed_filters(args.seed)
    return DEFAULT_FILTERS


def _run_scan(args, mode: str) -> int:
    filters = _scan_filters(args, mode)
    target = Fraction(args.at) if mode == "specialize" else None
    params = ScanParams(
        n=args.n, k_max=args.kmax, mode=mode, filters=filters, target=target
    )
    checkpoint = None
    if args.checkpoint and os.path.exists(args.checkpoint):
        checkpoint = load_checkpoint(args.checkpoint, params)
    threads = args.threads if args.threads else os.cpu_count() or 1

    if not args.json:
        print(f"mode: {mode}  n={params.n}  k_max={params.k_max}")
        if params.filters:
            seed_note = f" (seed {args.seed})" if args.seed is not None else ""
            print(f"filters: {_filters_text(params.filters)}{seed_note}")
        if target is not None:
            print(f"target: {target}")
        if checkpoint is not None:
            print(f"resuming at cursor {checkpoint.cursor}")

    runner = {"kernel": kernel_scan, "specialize": specialize_scan, "roots": root_collect}
    if threads <= 1:
        result = runner[mode](
            params,
            checkpoint=checkpoint,
            checkpoint_path=args.checkpoint,
            ledger_path=args.ledger,
            unit=args.unit,
        )
    else:
        result = _threaded_scan(
            params, checkpoint, args.checkpoint, args.ledger, args.unit, threads
        )

    verified = [h for h in result.hits if h.kind != KIND_FALSE_ALARM]
    if args.json:
        _emit_json(
            {
                "params": params.to_json(),
                "seed": args.seed,
                "threads": threads,
                "cursor": str(result.checkpoint.cursor),
                "counters": result.checkpoint.counters.to_json(),
                "hits": [h.to_json() for h in result.hits],
            }
        )
    else:
        counters = result.checkpoint.counters
        print(
            "  ".join(f"{key}={value}" for key, value in counters.to_json().items())
        )
        for hit in result.hits:
            print(_hit_text(hit))
        print(f"verified hits: {len(verified)}")
    return EXIT_HIT if verified else EXIT_OK


# -- subcommands ------------------------------------------------------------------


def _cmd_pair(args) -> int:
    spec = ForkSpec.from_text(args.spec)
    poly = pairing_exact(spec).exact
    if args.json:
        _emit_json(
            {
                "spec": spec.to_text(),
                "k": spec.k,
                "poly": poly.to_json(),
                "text": _poly_text(poly),
            }
        )
    else:
        print(_poly_text(poly))
    return EXIT_OK


def _cmd_verify(args) -> int:
    defines = _parse_defines(args.define or [], args.n)
    word = parse_cli_word(args.word, args.n, defines)
    points = [Fraction(t) for t in args.at or []]
    report = verify_candidate(word, ["generic", *points])

    kernel_points = report.kernel_points()
    if report.artin_trivial:
        verdict = "trivial braid word"
    elif kernel_points:
        at = ", ".join(f"q={p}" for p in kernel_points)
        verdict = f"kernel element at {at}; braid non-trivial"
    elif report.generic_identity:
        verdict = "braid non-trivial; generic image is the identity"
    else:
        verdict = "braid non-trivial; not in the kernel at the tested points"

    if args.json:
        _emit_json(
            {
                "word": word.to_text(),
                "letters": len(word),
                "checks": report.to_json(),
                "verdict": verdict,
            }
        )
    else:
        print(f"word: {len(word)} letters, exponent sum {word.exponent_sum}")
        print(f"artin: {'trivial' if report.artin_trivial else 'non-trivial'}")
        print(
            f"burau (generic): {'identity' if report.generic_identity else 'not identity'}"
        )
        for point, ok in report.q0_identity:
            print(f"burau at q={point}: {'identity' if ok else 'not identity'}")
        print(verdict)
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec = ForkSpec.from_text(args.spec)
    if args.at is None:
        word = synthesize_conjugator(
            ArcCoords.from_spec(spec), budget=args.budget, beam=args.beam
        )
        if args.json:
            _emit_json(
                {"spec": spec.to_text(), "conjugator": word.to_text(), "letters": len(word)}
            )
        else:
            print(f"conjugator: {word.to_text() or '<identity>'}")
            print(f"letters: {len(word)}")
        return EXIT_OK

    candidate = build_candidate(
        spec, Fraction(args.at), budget=args.budget, beam=args.beam
    )
    if args.json:
        _emit_json(candidate.to_json())
    else:
        report = candidate.report
        print(f"word: {candidate.word.to_text()}")
        print(f"letters: {len(candidate.word)}")
        print(f"conjugator: {candidate.conjugator.to_text() or '<identity>'}")
        print(
            f"twist: {candidate.twist_strands} strands ^ {candidate.twist_exponent},"
            f" band {candidate.band}"
        )
        points = ", ".join(f"q={p}" for p in report.kernel_points())
        print(f"kernel element at {points}; braid non-trivial")
    return EXIT_OK


def _reproduce_checks():
    """The golden suite: each item recomputes a frozen fact from scratch."""
    q = LaurentPoly(1, (1,))
    mq = LaurentPoly(1, (-1,))
    one = LaurentPoly(0, (1,))
    zero = LaurentPoly()

    def generator_matrices() -> bool:
        expected = {
            1: ((mq, q, zero), (zero, one, zero), (zero, zero, one)),
            2: ((one, zero, zero), (one, mq, q), (zero, zero, one)),
            3: ((one, zero, zero), (zero, one, zero), (zero, one, mq)),
        }
        return all(
            burau(BraidWord(4, (letter,)), GENERIC).rows == rows
            for letter, rows in expected.items()
        )

    def full_twist_scalar() -> bool:
        cube = burau(parse_word("ababab", 3), GENERIC)
        q3 = LaurentPoly(3, (1,))
        return cube.rows == ((q3, zero), (zero, q3))

    def reference_pairing() -> bool:
        spec = ForkSpec.from_text("n=4;c=24,18,11,0;ends=1,3")
        value = pairing_exact(spec).exact
        factors = (
            LaurentPoly(0, (-1,)),
            LaurentPoly(0, (-1, 1)),
            LaurentPoly(0, (-2, 1)),
            LaurentPoly(0, (-1, 2)),
            LaurentPoly(0, (1, -1, 1)),
            LaurentPoly(0, (1, 0, 1)),
        )
        product = LaurentPoly(0, (1,))
        for factor in factors:
            product = product * factor
        up_to_unit = value in (product.normalize(), product.mirror().normalize())
        return up_to_unit and abs(value.evaluate(-1)) == 108 == spec.k

    def kernel_element_at_two() -> bool:
        psi = parse_word(_Q2_CONJUGATOR, 4)
        word = commutator(parse_word("bababa", 4), psi.inverse() * parse_word("b", 4) * psi)
        report = verify_candidate(word, ["generic", Fraction(2)])
        return (
            not report.artin_trivial
            and report.generic_identity is False
            and report.identity_at(2) is True
        )

    return (
        ("burau generator matrices (n=4)", generator_matrices),
        ("full twist scalar q^3 I (n=3)", full_twist_scalar),
        ("reference pairing factorization (k=108)", reference_pairing),
        ("kernel element at q=2", kernel_element_at_two),
    )


def _cmd_reproduce(args) -> int:
    items = []
    for name, check in _reproduce_checks():
        ok = bool(check())
        items.append({"name": name, "pass": ok})
        if not args.json:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    ok_all = all(item["pass"] for item in items)
    if args.json:
        _emit_json({"items": items, "ok": ok_all})
    return EXIT_OK if ok_all else EXIT_REPRODUCE


def _cmd_serve(args) -> int:
    filters = _scan_filters(args, args.mode)
    target = Fraction(args.at) if args.mode == "specialize" else None
    if args.mode != "specialize" and args.at is not None:
        raise ValueError(f"{args.mode} mode takes no --at point")
    params = ScanParams(
        n=args.n, k_max=args.kmax, mode=args.mode, filters=filters, target=target
    )
    print(f"serving {args.mode} scan on {args.host}:{args.port}", flush=True)
    print(f"params hash {params.params_hash}", flush=True)
    try:
        distrib.serve(
            params,
            args.ledger,
            host=args.host,
            port=args.port,
            unit_size=args.unit,
            lease_timeout=args.lease_timeout,
        )
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _cmd_work(args) -> int:
    worker_id = args.worker_id or f"{socket.gethostname()}-{os.getpid()}"
    config = distrib.WorkerConfig(
        url=args.url,
        worker_id=worker_id,
        token=os.environ.get(distrib.TOKEN_ENV),
        poll_interval=args.poll,
    )
    completed = distrib.worker_loop(config)
    print(f"worker {worker_id} completed {completed} units")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract reserves 1 for that."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> str:
    try:
        Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational number")
    return text


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _add_scan_flags(sub, mode: str) -> None:
    sub.add_argument("--n", type=int, default=4, choices=(3, 4))
    sub.add_argument("--kmax", type=int, required=True, metavar="K")
    if mode != "roots":
        sub.add_argument(
            "--filters", metavar="q0:M,...", help="mod-M filter points (default built in)"
        )
        sub.add_argument(
            "--seed", type=int, help="derive the filter points from this seed"
        )
    else:
        sub.set_defaults(filters=None, seed=None)
    sub.add_argument("--checkpoint", metavar="PATH", help="save/resume cursor state")
    sub.add_argument("--ledger", metavar="PATH", help="append hits as JSONL")
    sub.add_argument("--unit", type=_positive, default=UNIT_SIZE, metavar="N")
    sub.add_argument(
        "--threads", type=_positive, default=None, help="default: all cores"
    )
    sub.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noodlefork", description=__doc__)
    subs = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    pair = subs.add_parser("pair", help="exact pairing polynomial of a spec")
    pair.add_argument("--spec", required=True, metavar="TEXT")
    pair.add_argument("--json", action="store_true")
    pair.set_defaults(func=_cmd_pair)

    scan = subs.add_parser("scan", help="hunt identically-zero pairings")
    _add_scan_flags(scan, "kernel")
    scan.set_defaults(func=lambda a: _run_scan(a, "kernel"))

    spec_scan = subs.add_parser("specialize", help="hunt pairings that vanish at q0")
    _add_scan_flags(spec_scan, "specialize")
    spec_scan.add_argument("--at", required=True, type=_fraction, metavar="q0")
    spec_scan.set_defaults(func=lambda a: _run_scan(a, "specialize"))

    roots = subs.add_parser("roots", help="collect reciprocal-closed rational roots")
    _add_scan_flags(roots, "roots")
    roots.set_defaults(func=lambda a: _run_scan(a, "roots"))

    verify = subs.add_parser("verify", help="check a braid word exactly")
    verify.add_argument("--n", type=int, default=4)
    verify.add_argument("--word", required=True, metavar="TEXT")
    verify.add_argument(
        "--define",
        action="append",
        metavar="NAME=WORD",
        help="bind a named subword; repeatable, later names may use earlier ones",
    )
    verify.add_argument(
        "--at", action="append", type=_fraction, metavar="q0", help="repeatable"
    )
    verify.add_argument("--json", action="store_true")
    verify.set_defaults(func=_cmd_verify)

    synth = subs.add_parser("synth", help="synthesize a conjugator or a candidate")
    synth.add_argument("--spec", required=True, metavar="TEXT")
    synth.add_argument(
        "--at", type=_fraction, metavar="q0", help="also build and verify a candidate"
    )
    synth.add_argument("--budget", type=_positive, default=10_000)
    synth.add_argument("--beam", type=_positive, default=512)
    synth.add_argument("--json", action="store_true")
    synth.set_defaults(func=_cmd_synth)

    repro = subs.add_parser("reproduce", help="run the hermetic golden suite")
    repro.add_argument("--json", action="store_true")
    repro.set_defaults(func=_cmd_reproduce)

    serve = subs.add_parser("serve", help="run the distribution coordinator")
    serve.add_argument("--n", type=int, default=4, choices=(3, 4))
    serve.add_argument("--kmax", type=int, required=True, metavar="K")
    serve.add_argument(
        "--mode", default="kernel", choices=("kernel", "specialize", "roots")
    )
    serve.add_argument("--at", type=_fraction, metavar="q0")
    serve.add_argument("--filters", metavar="q0:M,...")
    serve.add_argument("--seed", type=int)
    serve.add_argument("--ledger", required=True, metavar="PATH")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--unit", type=_positive, default=UNIT_SIZE, metavar="N")
    serve.add_argument("--lease-timeout", type=float, default=distrib.DEFAULT_LEASE_TIMEOUT)
    serve.set_defaults(func=_cmd_serve)

    work = subs.add_parser("work", help="run a scan worker against a coordinator")
    work.add_argument("--url", required=True, metavar="http://host:port")
    work.add_argument("--worker-id", default=None)
    work.add_argument("--poll", type=float, default=2.0, metavar="SECONDS")
    work.set_defaults(func=_cmd_work)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
