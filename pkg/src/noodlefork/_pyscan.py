"""Pure-Python scan core.

Walks a raw index range of the enumeration order, rebuilds each diagram in
reusable buffers, and accumulates the pairing residues for every requested
(point, modulus) check in one traversal. Only zero/nonzero matters here:
the raw traversal sum is a unit multiple of the normalized pairing, so it
vanishes exactly when the normalized residue does. Flagged and counted
results are re-verified exactly by the caller.
"""

from __future__ import annotations


def _pow_table(q0: int, modulus: int, radius: int) -> list[int]:
    """Residues of q0**e for e in [-radius, radius], indexed e + radius."""
    table = [1] * (2 * radius + 1)
    inv = pow(q0, -1, modulus)
    for e in range(1, radius + 1):
        table[radius + e] = table[radius + e - 1] * q0 % modulus
        table[radius - e] = table[radius - e + 1] * inv % modulus
    return table


def scan_unit(n, k_max, start, stop, checks):
    """
    Scan raw indices [start, stop). Returns (flagged, counters) where
    flagged lists the indices of connected specs whose residues vanish for
    every check (with no checks: every connected spec), and counters is
    (emitted, degenerate, disconnected, flagged).
    """
    from .search import _stratum, _unrank_counts, stratum_size

    flagged: list[int] = []
    emitted = degenerate = disconnected = 0

    up = [0] * 8  # partner and winding-step buffers, grown per stratum
    st = [0] * 8

    base = 0
    k = 1
    while k <= k_max and base + stratum_size(n, k) <= start:
        base += stratum_size(n, k)
        k += 1

    index = start
    while index < stop and k <= k_max:
        size = stratum_size(n, k)
        s, ends = _stratum(n, k)
        pairs = len(ends)
        below_end = k % 2 == 1  # odd stratum: one endpoint is the below puncture
        centre = (k + 1) // 2 if below_end else 0
        radius = 2 * k
        tables = [_pow_table(q0, m, radius) for q0, m in checks]
        moduli = [m for _, m in checks]
        nchecks = len(checks)
        if len(up) < k + 1:
            up = [0] * (k + 1)
            st = [0] * (k + 1)

        local = index - base
        digits = list(_unrank_counts(n, s, local // pairs))
        if n == 4:
            digits = [digits[3], digits[0], digits[1], digits[2]]  # to lex order
        ends_idx = local % pairs
        stratum_stop = min(stop, base + size)

        while index < stratum_stop:
            if n == 4:
                c12, c1, c2, c3 = digits
            else:
                (c1, c2), c3, c12 = digits, 0, 0
            e1, e2 = ends[ends_idx]

            if s == 0 and not below_end:
                degenerate += 1
            else:
                # Left-to-right block layout; terminals attach left of
                # their puncture, upper families nest, lower arcs rainbow.
                cur = 1 + c12
                c1L = cur
                cur += c1
                t1 = cur if e1 == 1 or e2 == 1 else 0
                cur += 1 if t1 else 0
                c1R = cur
                cur += c1
                c2L = cur
                cur += c2
                t2 = cur if e1 == 2 or e2 == 2 else 0
                cur += 1 if t2 else 0
                c2R = cur
                cur += c2
                c12R = cur
                cur += c12
                c3L = cur
                cur += c3
                t3 = cur if n == 4 and (e1 == 3 or e2 == 3) else 0
                cur += 1 if t3 else 0
                c3R = cur

                for j in range(c12):
                    l, r = 1 + j, c12R + c12 - 1 - j
                    up[l], up[r], st[l], st[r] = r, l, 2, 2
                for j in range(c1):
                    l, r = c1L + j, c1R + c1 - 1 - j
                    up[l], up[r], st[l], st[r] = r, l, 1, 1
                for j in range(c2):
                    l, r = c2L + j, c2R + c2 - 1 - j
                    up[l], up[r], st[l], st[r] = r, l, 1, 1
                for j in range(c3):
                    l, r = c3L + j, c3R + c3 - 1 - j
                    up[l], up[r], st[l], st[r] = r, l, 1, 1
                for t in (t1, t2, t3):
                    if t:
                        up[t] = 0

                pos = (t1, t2, t3)[e1 - 1]
                accs = [-tables[c][radius] for c in range(nchecks)]
                sign = -1
                exp = radius  # exponent plus table offset
                visited = 1
                lower = True
                while True:
                    if lower:
                        if pos == centre:
                            break
                        nxt = k + 1 - pos
                        exp += 1 if nxt > pos else -1
                    else:
                        nxt = up[pos]
                        if nxt == 0:
                            break
                        exp += st[pos] if nxt < pos else -st[pos]
                    sign = -sign
                    visited += 1
                    for c in range(nchecks):
                        accs[c] += sign * tables[c][exp]
                    pos = nxt
                    lower = not lower

                if visited < k:
                    disconnected += 1
                else:
                    emitted += 1
                    if all(accs[c] % moduli[c] == 0 for c in range(nchecks)):
                        flagged.append(index)

            index += 1
            ends_idx += 1
            if ends_idx == pairs:
                ends_idx = 0
                _next_composition(digits)

        base += size
        k += 1

    return flagged, (emitted, degenerate, disconnected, len(flagged))


def _next_composition(digits: list[int]) -> bool:
    """Advance a fixed-sum tuple to its lex successor in place."""
    m = len(digits)
    rest = digits[m - 1]
    for j in range(m - 2, -1, -1):
        if rest > 0:
            digits[j] += 1
            for i in range(j + 1, m):
                digits[i] = 0
            digits[m - 1] = rest - 1
            return True
        rest += digits[j]
    return False
