"""Coordinator and worker for spreading a scan across volunteer machines.

The coordinator slices the enumeration space into fixed-size work units,
leases them over HTTP+JSON, and records submissions in an append-only
JSONL ledger. Leasing is at-least-once (an expired lease is handed to the
next asker) and submission is idempotent (the first accepted entry per
unit wins), so the ledger drains to exactly one entry per unit no matter
how workers crash or race. Submitted hits are re-verified exactly before
acceptance; workers are trusted only to save the coordinator work, never
to assert results. Large numbers travel as decimal strings.
"""

from __future__ import annotations

import dataclasses
import json
import os
import threading
import time
import urllib.error
import urllib.request
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .forkpair import pairing_exact
from .search import (
    Counters,
    HitRecord,
    KIND_FALSE_ALARM,
    KIND_KERNEL,
    KIND_SPECIALIZATION,
    ParamsMismatch,
    ScanParams,
    UNIT_SIZE,
    scan_range,
    space_size,
)

TOKEN_ENV = "NOODLEFORK_TOKEN"
TOKEN_HEADER = "X-Noodlefork-Token"
DEFAULT_LEASE_TIMEOUT = 600.0


class LeaseConflict(RuntimeError):
    """Submission for a unit currently leased to a different live worker."""


class RejectedSubmission(ValueError):
    """Submission failed central re-verification or named an unknown unit."""


@dataclasses.dataclass
class WorkUnit:
    """One slice [start, stop) of the enumeration order."""

    unit_id: str
    start: int
    stop: int
    lease: tuple[str, float] | None = None
    status: str = "pending"  # pending | leased | done


@dataclasses.dataclass(frozen=True)
class LedgerEntry:
    """The accepted result of one work unit."""

    unit_id: str
    worker_id: str
    counters: Counters
    hits: tuple[HitRecord, ...]
    submitted_at: float

    def to_json(self) -> dict:
        return {
            "unit_id": self.unit_id,
            "worker_id": self.worker_id,
            "counters": {k: str(v) for k, v in self.counters.to_json().items()},
            "hits": [h.to_json() for h in self.hits],
            "submitted_at": str(self.submitted_at),
        }

    @classmethod
    def from_json(cls, data: dict) -> LedgerEntry:
        return cls(
            unit_id=data["unit_id"],
            worker_id=data["worker_id"],
            counters=Counters.from_json(data["counters"]),
            hits=tuple(HitRecord.from_json(h) for h in data["hits"]),
            submitted_at=float(data["submitted_at"]),
        )


def partition_units(params: ScanParams, unit_size: int) -> list[WorkUnit]:
    """Slice the whole space into consecutive units: no gaps, no overlaps."""
    if unit_size < 1:
        raise ValueError(f"unit size must be positive, got {unit_size}")
    total = space_size(params.n, params.k_max)
    units = []
    for index, start in enumerate(range(0, total, unit_size)):
        units.append(
            WorkUnit(f"u{index:06d}", start, min(start + unit_size, total))
        )
    return units


def _reverify(params: ScanParams, hit: HitRecord) -> bool:
    """Exact central check of a claimed hit; false alarms pass through
    (they are diagnostics, not claims)."""
    if hit.kind == KIND_KERNEL:
        return pairing_exact(hit.spec).exact.is_zero()
    if hit.kind == KIND_SPECIALIZATION:
        if params.target is None or hit.q0 != str(params.target):
            return False
        poly = pairing_exact(hit.spec).exact
        t = params.target
        return poly.evaluate(t) == 0 and poly.evaluate(1 / t) == 0
    return hit.kind == KIND_FALSE_ALARM


class Coordinator:
    """Lease/submit state machine with a single-writer JSONL ledger.

    All transitions run under one lock; the HTTP layer is a thin shim.
    An existing ledger at the configured path is replayed on startup so a
    restarted coordinator does not re-issue finished units.
    """

    def __init__(
        self,
        params: ScanParams,
        ledger_path: str,
        *,
        unit_size: int = UNIT_SIZE,
        lease_timeout: float = DEFAULT_LEASE_TIMEOUT,
        clock=time.time,
    ):
        self.params = params
        self.ledger_path = ledger_path
        self.lease_timeout = lease_timeout
        self.clock = clock
        self._lock = threading.Lock()
        self._units = {u.unit_id: u for u in partition_units(params, unit_size)}
        self._order = list(self._units)
        self._entries: dict[str, LedgerEntry] = {}
        if os.path.exists(ledger_path):
            for entry in read_ledger_entries(ledger_path):
                if entry.unit_id in self._units:
                    self._entries.setdefault(entry.unit_id, entry)
                    self._units[entry.unit_id].status = "done"

    def lease(self, worker_id: str) -> dict:
        """The next pending (or lease-expired) unit, or drained/empty."""
        now = self.clock()
        with self._lock:
            for uid in self._order:
                unit = self._units[uid]
                if unit.status == "done":
                    continue
                if unit.status == "leased" and unit.lease[1] > now:
                    continue
                unit.status = "leased"
                unit.lease = (worker_id, now + self.lease_timeout)
                return {
                    "unit_id": unit.unit_id,
                    "range": [str(unit.start), str(unit.stop)],
                    "params": self.params.to_json(),
                    "params_hash": self.params.params_hash,
                }
            return {"drained": self.drained()}

    def submit(
        self,
        unit_id: str,
        worker_id: str,
        params_hash: str,
        counters: Counters,
        hits: tuple[HitRecord, ...],
    ) -> dict:
        if params_hash != self.params.params_hash:
            raise ParamsMismatch("submission for different scan parameters")
        with self._lock:
            unit = self._units.get(unit_id)
            if unit is None:
                raise RejectedSubmission(f"unknown unit {unit_id!r}")
            if unit.status == "done":
                return {"accepted": False, "duplicate": True}
            if (
                unit.status == "leased"
                and unit.lease[0] != worker_id
                and unit.lease[1] > self.clock()
            ):
                raise LeaseConflict(
                    f"{unit_id} is leased to {unit.lease[0]!r} until {unit.lease[1]}"
                )
            for hit in hits:
                if not _reverify(self.params, hit):
                    raise RejectedSubmission(
                        f"hit {hit.spec.to_text()!r} failed central re-verification"
                    )
            entry = LedgerEntry(unit_id, worker_id, counters, hits, self.clock())
            with open(self.ledger_path, "a") as fh:
                fh.write(json.dumps(entry.to_json()) + "\n")
            unit.status = "done"
            unit.lease = None
            self._entries[unit_id] = entry
            return {"accepted": True, "duplicate": False}

    def drained(self) -> bool:
        """True only when accepted units cover the entire cursor range."""
        return all(u.status == "done" for u in self._units.values())

    def status(self) -> dict:
        now = self.clock()
        with self._lock:
            done = sum(1 for u in self._units.values() if u.status == "done")
            live = sum(
                1
                for u in self._units.values()
                if u.status == "leased" and u.lease[1] > now
            )
            counters = Counters()
            for entry in self._entries.values():
                counters = counters + entry.counters
            return {
                "params_hash": self.params.params_hash,
                "units": {
                    "total": str(len(self._units)),
                    "done": str(done),
                    "leased": str(live),
                    "pending": str(len(self._units) - done - live),
                },
                "counters": {k: str(v) for k, v in counters.to_json().items()},
                "hits": str(sum(len(e.hits) for e in self._entries.values())),
                "drained": all(u.status == "done" for u in self._units.values()),
            }

    def hits(self) -> list[HitRecord]:
        """Verified hits across accepted units, in unit order."""
        with self._lock:
            out = []
            for uid in self._order:
                entry = self._entries.get(uid)
                if entry:
                    out.extend(
                        h for h in entry.hits if h.kind != KIND_FALSE_ALARM
                    )
            return out


def read_ledger_entries(path: str) -> list[LedgerEntry]:
    """Parse a ledger file, ignoring a torn final line from a crashed append."""
    out = []
    with open(path) as fh:
        lines = fh.readlines()
    for index, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            out.append(LedgerEntry.from_json(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError):
            if index == len(lines) - 1:
                continue  # torn tail write
            raise
    return out


def compact_ledger(path: str) -> int:
    """Rewrite the ledger keeping the first entry per unit; returns the
    number of lines dropped."""
    entries = read_ledger_entries(path)
    kept: dict[str, LedgerEntry] = {}
    for entry in entries:
        kept.setdefault(entry.unit_id, entry)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        for entry in kept.values():
            fh.write(json.dumps(entry.to_json()) + "\n")
    os.replace(tmp, path)
    return len(entries) - len(kept)


# -- HTTP layer ------------------------------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    coordinator: Coordinator = None
    token: str | None = None

    def log_message(self, *args):  # tests stay quiet
        pass

    def _send(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _authorized(self) -> bool:
        return self.token is None or self.headers.get(TOKEN_HEADER) == self.token

    def do_GET(self):
        if not self._authorized():
            return self._send(401, {"error": "bad or missing token"})
        if self.path == "/v1/status":
            return self._send(200, self.coordinator.status())
        if self.path == "/v1/hits":
            return self._send(
                200, {"hits": [h.to_json() for h in self.coordinator.hits()]}
            )
        return self._send(404, {"error": f"no such endpoint {self.path!r}"})

    def do_POST(self):
        if not self._authorized():
            return self._send(401, {"error": "bad or missing token"})
        try:
            length = int(self.headers.get("Content-Length", "0"))
            data = json.loads(self.rfile.read(length) or b"{}")
        except (ValueError, json.JSONDecodeError):
            return self._send(400, {"error": "request body is not JSON"})
        if self.path == "/v1/lease":
            if "worker_id" not in data:
                return self._send(400, {"error": "lease needs worker_id"})
            return self._send(200, self.coordinator.lease(data["worker_id"]))
        if self.path == "/v1/submit":
            try:
                result = self.coordinator.submit(
                    data["unit_id"],
                    data["worker_id"],
                    data["params_hash"],
                    Counters.from_json(data["counters"]),
                    tuple(HitRecord.from_json(h) for h in data["hits"]),
                )
                return self._send(200, result)
            except KeyError as exc:
                return self._send(400, {"error": f"missing field {exc}"})
            except ParamsMismatch as exc:
                return self._send(400, {"error": str(exc)})
            except RejectedSubmission as exc:
                return self._send(400, {"error": str(exc)})
            except LeaseConflict as exc:
                return self._send(409, {"error": str(exc)})
        return self._send(404, {"error": f"no such endpoint {self.path!r}"})


def create_server(
    coordinator: Coordinator,
    host: str = "127.0.0.1",
    port: int = 0,
    token: str | None = None,
) -> ThreadingHTTPServer:
    """A ready ThreadingHTTPServer; port 0 picks a free port. The caller
    runs serve_forever (typically on a thread) and shutdown."""
    handler = type(
        "BoundHandler",
        (_Handler,),
        {
            "coordinator": coordinator,
            "token": token if token is not None else os.environ.get(TOKEN_ENV),
        },
    )
    return ThreadingHTTPServer((host, port), handler)


def serve(
    params: ScanParams,
    ledger_path: str,
    *,
    host: str = "127.0.0.1",
    port: int = 8765,
    unit_size: int = UNIT_SIZE,
    lease_timeout: float = DEFAULT_LEASE_TIMEOUT,
    token: str | None = None,
) -> None:
    """Run a coordinator until interrupted."""
    coordinator = Coordinator(
        params, ledger_path, unit_size=unit_size, lease_timeout=lease_timeout
    )
    server = create_server(coordinator, host, port, token)
    try:
        server.serve_forever()
    finally:
        server.server_close()


# -- worker ----------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class WorkerConfig:
    url: str
    worker_id: str
    token: str | None = None
    poll_interval: float = 2.0
    max_retries: int = 6
    backoff_base: float = 0.25


def _request(config: WorkerConfig, method: str, path: str, payload=None, *, sleep):
    """One JSON round trip with exponential backoff on transport errors.
    Returns (status, parsed body); HTTP error codes are returned, not
    raised, so the caller can treat 409/400 as protocol outcomes."""
    url = config.url.rstrip("/") + path
    body = None if payload is None else json.dumps(payload).encode()
    token = config.token if config.token is not None else os.environ.get(TOKEN_ENV)
    last = None
    for attempt in range(config.max_retries):
        request = urllib.request.Request(url, data=body, method=method)
        request.add_header("Content-Type", "application/json")
        if token:
            request.add_header(TOKEN_HEADER, token)
        try:
            with urllib.request.urlopen(request) as response:
                return response.status, json.loads(response.read() or b"{}")
        except urllib.error.HTTPError as exc:
            return exc.code, json.loads(exc.read() or b"{}")
        except (urllib.error.URLError, ConnectionError, TimeoutError) as exc:
            last = exc
            sleep(config.backoff_base * 2**attempt)
    raise RuntimeError(f"coordinator unreachable after {config.max_retries} tries: {last}")


def worker_loop(config: WorkerConfig, *, sleep=time.sleep) -> int:
    """Lease, scan, submit until the coordinator reports drained. Returns
    the number of units this worker completed. Hits are produced by the
    exact classification inside scan_range, so everything submitted has
    already been verified locally with exact arithmetic."""
    completed = 0
    while True:
        status, lease = _request(
            config, "POST", "/v1/lease", {"worker_id": config.worker_id}, sleep=sleep
        )
        if status == 401:
            raise PermissionError(lease.get("error", "unauthorized"))
        if status != 200:
            raise RuntimeError(f"lease failed with {status}: {lease}")
        if "unit_id" not in lease:
            if lease.get("drained"):
                return completed
            sleep(config.poll_interval)
            continue

        params = ScanParams.from_json(lease["params"])
        if params.params_hash != lease["params_hash"]:
            raise ParamsMismatch("coordinator params do not hash to params_hash")
        start, stop = (int(v) for v in lease["range"])
        hits, counters = scan_range(params, start, stop)

        status, verdict = _request(
            config,
            "POST",
            "/v1/submit",
            {
                "unit_id": lease["unit_id"],
                "worker_id": config.worker_id,
                "params_hash": lease["params_hash"],
                "counters": {k: str(v) for k, v in counters.to_json().items()},
                "hits": [h.to_json() for h in hits],
            },
            sleep=sleep,
        )
        if status == 200 and verdict.get("accepted"):
            completed += 1
        elif status == 409 or (status == 200 and verdict.get("duplicate")):
            continue  # someone else finished it first; nothing lost
        elif status == 400:
            raise ParamsMismatch(verdict.get("error", "submission rejected"))
        else:
            raise RuntimeError(f"submit failed with {status}: {verdict}")
