# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan core.

Identical contract to the pure module: walk a raw index range of the
enumeration order, rebuild each diagram, accumulate the pairing residues
for every (point, modulus) check in one traversal, and flag the connected
specs whose residues all vanish. The inner loop runs without the GIL so
threaded workers scale across cores.
"""

from libc.stdlib cimport free, malloc, realloc

ctypedef unsigned long long u64
ctypedef long long i64

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"


cdef inline u64 mulmod(u64 a, u64 b, u64 m) nogil:
    return <u64>((<u128> a * b) % m)


cdef u64 modinv(u64 a, u64 m) nogil:
    # Extended Euclid; the caller guarantees gcd(a, m) == 1.
    cdef i64 old_r = <i64> a, r = <i64> m
    cdef i64 old_s = 1, s = 0
    cdef i64 q, tmp
    while r != 0:
        q = old_r / r
        tmp = old_r - q * r
        old_r = r
        r = tmp
        tmp = old_s - q * s
        old_s = s
        s = tmp
    if old_s < 0:
        old_s += <i64> m
    return <u64> old_s


cdef inline u64 compositions(u64 total, int parts) nogil:
    if parts == 1:
        return 1
    if parts == 2:
        return total + 1
    if parts == 3:
        return (total + 1) * (total + 2) / 2
    return (total + 1) * (total + 2) * (total + 3) / 6


cdef inline u64 stratum_size_c(int n, u64 k) nogil:
    cdef int t = 1 if k % 2 else 2
    cdef u64 s = (k - t) / 2
    if n == 4:
        return compositions(s, 4) * 3
    return compositions(s, 2) * (2 if k % 2 else 1)


cdef void unrank_counts(int n, u64 s, u64 rank, i64 *digits) nogil:
    # Lex order over (c12, c1, c2, c3) for n=4, (c1, c2) for n=3.
    cdef u64 rem = s, block
    cdef i64 x
    cdef int parts_left, slot = 0
    if n == 3:
        digits[0] = <i64> rank
        digits[1] = <i64> (s - rank)
        return
    for parts_left in range(3, 0, -1):
        x = 0
        while True:
            block = compositions(rem - x, parts_left)
            if rank < block:
                break
            rank -= block
            x += 1
        digits[slot] = x
        slot += 1
        rem -= x
    digits[3] = <i64> rem


cdef bint next_composition(i64 *digits, int m) nogil:
    cdef i64 rest = digits[m - 1]
    cdef int i, j
    for j in range(m - 2, -1, -1):
        if rest > 0:
            digits[j] += 1
            for i in range(j + 1, m):
                digits[i] = 0
            digits[m - 1] = rest - 1
            return True
        rest += digits[j]
    return False


def scan_unit(n_arg, k_max_arg, start_arg, stop_arg, checks):
    """
    Scan raw indices [start, stop). Returns (flagged, counters) where
    flagged lists the indices of connected specs whose residues vanish for
    every check (with no checks: every connected spec), and counters is
    (emitted, degenerate, disconnected, flagged).
    """
    cdef int n = n_arg
    cdef u64 k_max = k_max_arg
    cdef u64 start = start_arg
    cdef u64 stop = stop_arg
    if n not in (3, 4):
        raise ValueError(f"n must be 3 or 4, got {n}")

    cdef int nchecks = len(checks)
    cdef u64 *q0s = NULL
    cdef u64 *ms = NULL
    cdef u64 *tables = NULL
    cdef i64 *up = NULL
    cdef i64 *st = NULL
    cdef u64 *accs = NULL
    cdef u64 *flag_buf = NULL
    cdef u64 *grown = NULL
    cdef i64 *grown_i = NULL
    cdef u64 flag_cap = 4096, flag_len = 0
    cdef bint oom = False

    cdef u64 emitted = 0, degenerate = 0, disconnected = 0
    cdef u64 base = 0, k = 1, index, size, stratum_stop, local
    cdef u64 s, pairs, radius, table_w
    cdef int below_end, ends_idx, c
    cdef i64 digits[4]
    cdef i64 e1_arr[3]
    cdef i64 e2_arr[3]
    cdef i64 c1, c2, c3, c12, cur, c1L, c1R, c2L, c2R, c12R, c3L, c3R
    cdef i64 t1, t2, t3, j, l, r, pos, nxt, stepv, centre
    cdef i64 sign, exp, visited, e1
    cdef u64 term, m
    cdef bint lower, ok

    cdef int ncomp = 4 if n == 4 else 2

    try:
        if nchecks:
            q0s = <u64 *> malloc(nchecks * sizeof(u64))
            ms = <u64 *> malloc(nchecks * sizeof(u64))
            accs = <u64 *> malloc(nchecks * sizeof(u64))
            if q0s == NULL or ms == NULL or accs == NULL:
                raise MemoryError()
            for c in range(nchecks):
                q0s[c] = checks[c][0] % checks[c][1]
                ms[c] = checks[c][1]
        flag_buf = <u64 *> malloc(flag_cap * sizeof(u64))
        if flag_buf == NULL:
            raise MemoryError()

        while k <= k_max and base + stratum_size_c(n, k) <= start:
            base += stratum_size_c(n, k)
            k += 1

        index = start
        while index < stop and k <= k_max:
            size = stratum_size_c(n, k)
            below_end = k % 2
            s = (k - (1 if below_end else 2)) / 2
            centre = <i64> ((k + 1) / 2) if below_end else 0
            if n == 4:
                pairs = 3
                for c in range(3):
                    e1_arr[c] = c + 1
                    e2_arr[c] = 4
                if not below_end:
                    e1_arr[0] = 1; e2_arr[0] = 2
                    e1_arr[1] = 1; e2_arr[1] = 3
                    e1_arr[2] = 2; e2_arr[2] = 3
            else:
                if below_end:
                    pairs = 2
                    e1_arr[0] = 1; e2_arr[0] = 3
                    e1_arr[1] = 2; e2_arr[1] = 3
                else:
                    pairs = 1
                    e1_arr[0] = 1; e2_arr[0] = 2

            radius = 2 * k
            table_w = 2 * radius + 1
            grown_i = <i64 *> realloc(up, (k + 1) * sizeof(i64))
            if grown_i == NULL:
                raise MemoryError()
            up = grown_i
            grown_i = <i64 *> realloc(st, (k + 1) * sizeof(i64))
            if grown_i == NULL:
                raise MemoryError()
            st = grown_i
            if nchecks:
                grown = <u64 *> realloc(tables, nchecks * table_w * sizeof(u64))
                if grown == NULL:
                    raise MemoryError()
                tables = grown
                for c in range(nchecks):
                    _fill_table(&tables[c * table_w], q0s[c], ms[c], radius)

            local = index - base
            unrank_counts(n, s, local / pairs, digits)
            ends_idx = <int> (local % pairs)
            stratum_stop = stop if stop < base + size else base + size

            with nogil:
                while index < stratum_stop:
                    if n == 4:
                        c12 = digits[0]; c1 = digits[1]
                        c2 = digits[2]; c3 = digits[3]
                    else:
                        c1 = digits[0]; c2 = digits[1]
                        c3 = 0; c12 = 0
                    e1 = e1_arr[ends_idx]

                    if s == 0 and not below_end:
                        degenerate += 1
                    else:
                        cur = 1 + c12
                        c1L = cur
                        cur += c1
                        t1 = cur if (e1 == 1 or e2_arr[ends_idx] == 1) else 0
                        if t1:
                            cur += 1
                        c1R = cur
                        cur += c1
                        c2L = cur
                        cur += c2
                        t2 = cur if (e1 == 2 or e2_arr[ends_idx] == 2) else 0
                        if t2:
                            cur += 1
                        c2R = cur
                        cur += c2
                        c12R = cur
                        cur += c12
                        c3L = cur
                        cur += c3
                        t3 = cur if (n == 4 and (e1 == 3 or e2_arr[ends_idx] == 3)) else 0
                        if t3:
                            cur += 1
                        c3R = cur

                        for j in range(c12):
                            l = 1 + j
                            r = c12R + c12 - 1 - j
                            up[l] = r; up[r] = l; st[l] = 2; st[r] = 2
                        for j in range(c1):
                            l = c1L + j
                            r = c1R + c1 - 1 - j
                            up[l] = r; up[r] = l; st[l] = 1; st[r] = 1
                        for j in range(c2):
                            l = c2L + j
                            r = c2R + c2 - 1 - j
                            up[l] = r; up[r] = l; st[l] = 1; st[r] = 1
                        for j in range(c3):
                            l = c3L + j
                            r = c3R + c3 - 1 - j
                            up[l] = r; up[r] = l; st[l] = 1; st[r] = 1
                        if t1:
                            up[t1] = 0
                        if t2:
                            up[t2] = 0
                        if t3:
                            up[t3] = 0

                        pos = t1 if e1 == 1 else (t2 if e1 == 2 else t3)
                        for c in range(nchecks):
                            term = tables[c * table_w + radius]
                            accs[c] = (ms[c] - term) % ms[c]
                        sign = -1
                        exp = <i64> radius
                        visited = 1
                        lower = True
                        while True:
                            if lower:
                                if pos == centre:
                                    break
                                nxt = <i64> k + 1 - pos
                                exp += 1 if nxt > pos else -1
                            else:
                                nxt = up[pos]
                                if nxt == 0:
                                    break
                                stepv = st[pos]
                                exp += stepv if nxt < pos else -stepv
                            sign = -sign
                            visited += 1
                            for c in range(nchecks):
                                term = tables[c * table_w + exp]
                                if sign > 0:
                                    accs[c] = (accs[c] + term) % ms[c]
                                else:
                                    accs[c] = (accs[c] + ms[c] - term) % ms[c]
                            pos = nxt
                            lower = not lower

                        if visited < <i64> k:
                            disconnected += 1
                        else:
                            emitted += 1
                            ok = True
                            for c in range(nchecks):
                                if accs[c] != 0:
                                    ok = False
                                    break
                            if ok:
                                if flag_len == flag_cap:
                                    flag_cap *= 2
                                    grown = <u64 *> realloc(
                                        flag_buf, flag_cap * sizeof(u64)
                                    )
                                    if grown == NULL:
                                        oom = True
                                        break
                                    flag_buf = grown
                                flag_buf[flag_len] = index
                                flag_len += 1

                    index += 1
                    ends_idx += 1
                    if ends_idx == <int> pairs:
                        ends_idx = 0
                        next_composition(digits, ncomp)

            if oom:
                raise MemoryError()
            base += size
            k += 1

        flagged = [flag_buf[i] for i in range(flag_len)]
        return flagged, (emitted, degenerate, disconnected, flag_len)
    finally:
        free(q0s)
        free(ms)
        free(accs)
        free(tables)
        free(up)
        free(st)
        free(flag_buf)


cdef void _fill_table(u64 *table, u64 q0, u64 m, u64 radius) nogil:
    cdef u64 inv = modinv(q0, m)
    cdef u64 e
    table[radius] = 1 % m
    for e in range(1, radius + 1):
        table[radius + e] = mulmod(table[radius + e - 1], q0, m)
        table[radius - e] = mulmod(table[radius - e + 1], inv, m)
