"""Scan backend selection.

The compiled core is used when the extension built; NOODLEFORK_PURE=1
forces the pure-Python core. Both expose the same scan_unit contract and
are cross-checked by the test suite.
"""

import os

if os.environ.get("NOODLEFORK_PURE"):
    from . import _pyscan as _impl

    backend = "pure"
else:
    try:
        from . import _fastscan as _impl  # type: ignore[attr-defined]

        backend = "compiled"
    except ImportError:
        from . import _pyscan as _impl

        backend = "pure"

scan_unit = _impl.scan_unit
