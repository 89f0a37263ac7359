"""Throughput benchmark for the scan cores.

Runs the same filtered scan on the pure-Python walker and, when built, the
compiled one, and reports specs/second for each.  Invoke with

    python -m noodlefork.bench [k_max]
"""

import sys
import time

from . import _pyscan
from .search import DEFAULT_FILTERS, space_size

try:
    from . import _fastscan
except ImportError:
    _fastscan = None


def _time_scan(scan_unit, n, k_max, total):
    t0 = time.perf_counter()
    flagged, counters = scan_unit(n, k_max, 0, total, DEFAULT_FILTERS)
    elapsed = time.perf_counter() - t0
    return elapsed, len(flagged), counters


def run(k_max=60, n=4):
    total = space_size(n, k_max)
    print(f"scan n={n} k<={k_max}: {total} tuples, {len(DEFAULT_FILTERS)} filters")
    results = {}
    backends = [("pure", _pyscan.scan_unit)]
    if _fastscan is not None:
        backends.append(("compiled", _fastscan.scan_unit))
    for name, fn in backends:
        elapsed, flags, counters = _time_scan(fn, n, k_max, total)
        rate = total / elapsed if elapsed else float("inf")
        results[name] = elapsed
        print(
            f"  {name:>8}: {elapsed:8.3f}s  {rate:12,.0f} tuples/s"
            f"  walked={counters[0]}  flagged={flags}"
        )
    if len(results) == 2:
        print(f"  speedup: {results['pure'] / results['compiled']:.1f}x")
    return results


if __name__ == "__main__":
    run(int(sys.argv[1]) if len(sys.argv) > 1 else 60)
