"""Hot numeric kernels, each with a numba path and a pure-numpy fallback.

The public functions dispatch on :data:`zext._accel.USE_NUMBA`. The ``*_nb``
and ``*_np`` variants are importable on their own so tests and the benchmark
can pin either path.

Conventions shared by the labelling kernels: vertices are *slots*
``0..n-1``; ``fixed[i]`` is a label index or ``-1`` for free slots; ``free``
lists the free slots from most to least significant, so enumeration index
order is lexicographic labelling order.
"""

from __future__ import annotations

from itertools import combinations, permutations

import numpy as np

from . import _accel
from ._accel import njit

# -- labelling enumeration -------------------------------------------------


@njit
def _best_labelling_nb(fixed, free, n_labels, dist, eu, ev, unary, kmax):
    n = fixed.shape[0]
    f = free.shape[0]
    lab = fixed.copy()
    for j in range(f):
        lab[free[j]] = 0
    digits = np.zeros(f, dtype=np.int64)
    best_cost = -1
    best_cross = -1
    best = lab.copy()
    m = eu.shape[0]
    while True:
        cost = 0
        cross = 0
        for e in range(m):
            a = lab[eu[e]]
            b = lab[ev[e]]
            cost += dist[a, b]
            if a != b:
                cross += 1
        for i in range(n):
            cost += unary[i, lab[i]]
        if (kmax < 0 or cross <= kmax) and (best_cost < 0 or cost < best_cost):
            best_cost = cost
            best_cross = cross
            for i in range(n):
                best[i] = lab[i]
        # odometer step, least significant digit last
        j = f - 1
        while j >= 0:
            digits[j] += 1
            if digits[j] < n_labels:
                lab[free[j]] = digits[j]
                break
            digits[j] = 0
            lab[free[j]] = 0
            j -= 1
        if j < 0:
            break
    return best_cost, best_cross, best


def _label_block(fixed, free, n_labels, start, stop):
    idx = np.arange(start, stop, dtype=np.int64)
    lab = np.broadcast_to(fixed, (idx.shape[0], fixed.shape[0])).copy()
    for j in range(free.shape[0] - 1, -1, -1):
        lab[:, free[j]] = idx % n_labels
        idx //= n_labels
    return lab


def _block_costs(lab, dist, eu, ev, unary):
    if eu.shape[0]:
        a = lab[:, eu]
        b = lab[:, ev]
        cost = dist[a, b].sum(axis=1)
        cross = (a != b).sum(axis=1)
    else:
        cost = np.zeros(lab.shape[0], dtype=np.int64)
        cross = np.zeros(lab.shape[0], dtype=np.int64)
    cost = cost + unary[np.arange(lab.shape[1]), lab].sum(axis=1)
    return cost.astype(np.int64), cross.astype(np.int64)


def _best_labelling_np(fixed, free, n_labels, dist, eu, ev, unary, kmax, chunk=1 << 16):
    total = n_labels ** free.shape[0]
    best_cost, best_cross, best = -1, -1, fixed.copy()
    for start in range(0, total, chunk):
        lab = _label_block(fixed, free, n_labels, start, min(total, start + chunk))
        cost, cross = _block_costs(lab, dist, eu, ev, unary)
        if kmax >= 0:
            cost = np.where(cross <= kmax, cost, np.iinfo(np.int64).max)
        i = int(np.argmin(cost))
        if cost[i] == np.iinfo(np.int64).max:
            continue
        if best_cost < 0 or cost[i] < best_cost:
            best_cost, best_cross, best = int(cost[i]), int(cross[i]), lab[i].copy()
    return best_cost, best_cross, best


@njit
def _all_costs_nb(fixed, free, n_labels, dist, eu, ev, unary):
    f = free.shape[0]
    total = 1
    for _ in range(f):
        total *= n_labels
    costs = np.empty(total, dtype=np.int64)
    crosses = np.empty(total, dtype=np.int64)
    lab = fixed.copy()
    n = fixed.shape[0]
    m = eu.shape[0]
    for t in range(total):
        r = t
        for j in range(f - 1, -1, -1):
            lab[free[j]] = r % n_labels
            r //= n_labels
        cost = 0
        cross = 0
        for e in range(m):
            a = lab[eu[e]]
            b = lab[ev[e]]
            cost += dist[a, b]
            if a != b:
                cross += 1
        for i in range(n):
            cost += unary[i, lab[i]]
        costs[t] = cost
        crosses[t] = cross
    return costs, crosses


def _all_costs_np(fixed, free, n_labels, dist, eu, ev, unary, chunk=1 << 16):
    total = n_labels ** free.shape[0]
    costs = np.empty(total, dtype=np.int64)
    crosses = np.empty(total, dtype=np.int64)
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        lab = _label_block(fixed, free, n_labels, start, stop)
        costs[start:stop], crosses[start:stop] = _block_costs(lab, dist, eu, ev, unary)
    return costs, crosses


def _prep(fixed, free, dist, eu, ev, unary, n_labels):
    fixed = np.ascontiguousarray(fixed, dtype=np.int64)
    free = np.ascontiguousarray(free, dtype=np.int64)
    dist = np.ascontiguousarray(dist, dtype=np.int64)
    eu = np.ascontiguousarray(eu, dtype=np.int64)
    ev = np.ascontiguousarray(ev, dtype=np.int64)
    if unary is None:
        unary = np.zeros((fixed.shape[0], n_labels), dtype=np.int64)
    unary = np.ascontiguousarray(unary, dtype=np.int64)
    return fixed, free, dist, eu, ev, unary


def best_labelling(fixed, free, n_labels, dist, eu, ev, unary=None, kmax=-1):
    """Lexicographically first minimum-cost labelling with at most ``kmax`` crossings.

    Returns ``(cost, crossings, labels)``; ``cost == -1`` when no labelling
    satisfies the crossing cap.
    """
    args = _prep(fixed, free, dist, eu, ev, unary, n_labels)
    fn = _best_labelling_nb if _accel.USE_NUMBA else _best_labelling_np
    cost, cross, lab = fn(args[0], args[1], int(n_labels), *args[2:], int(kmax))
    return int(cost), int(cross), np.asarray(lab)


def all_labelling_costs(fixed, free, n_labels, dist, eu, ev, unary=None):
    """Cost and crossing number of every labelling, in enumeration order."""
    args = _prep(fixed, free, dist, eu, ev, unary, n_labels)
    fn = _all_costs_nb if _accel.USE_NUMBA else _all_costs_np
    return fn(args[0], args[1], int(n_labels), *args[2:])


def decode_labelling(index, fixed, free, n_labels):
    lab = np.array(fixed, dtype=np.int64)
    for j in range(len(free) - 1, -1, -1):
        lab[free[j]] = index % n_labels
        index //= n_labels
    return lab


# -- connected bipartitions ------------------------------------------------


@njit
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit
def _connected(mask, adj):
    if mask == 0:
        return False
    low = mask & (-mask)
    reach = low
    frontier = low
    while frontier:
        nxt = 0
        f = frontier
        while f:
            b = f & (-f)
            i = 0
            while (b >> i) != 1:
                i += 1
            nxt |= adj[i]
            f ^= b
        nxt &= mask
        frontier = nxt & ~reach
        reach |= nxt
    return reach == mask


@njit
def _separation_nb(n, eu, ev, adj, sigma, k):
    full = (1 << n) - 1
    best_mask = -1
    best_cut = 1 << 30
    best_imb = 1 << 30
    m = eu.shape[0]
    # vertex 0 always on the left side
    for rest in range(1 << (n - 1)):
        left = (rest << 1) | 1
        nl = _popcount(left)
        nr = n - nl
        if nl <= sigma or nr <= sigma:
            continue
        cut = 0
        for e in range(m):
            if ((left >> eu[e]) & 1) != ((left >> ev[e]) & 1):
                cut += 1
        if cut > k:
            continue
        imb = nl - nr if nl >= nr else nr - nl
        if cut > best_cut or (cut == best_cut and imb >= best_imb):
            continue
        if not _connected(left, adj) or not _connected(full & ~left, adj):
            continue
        best_mask = left
        best_cut = cut
        best_imb = imb
    return best_mask


def _separation_np(n, eu, ev, adj, sigma, k, chunk=1 << 16):
    full = (1 << n) - 1
    best = (1 << 30, 1 << 30, -1)
    for start in range(0, 1 << (n - 1), chunk):
        rest = np.arange(start, min(1 << (n - 1), start + chunk), dtype=np.int64)
        left = (rest << 1) | 1
        bits = (left[:, None] >> np.arange(n)) & 1
        nl = bits.sum(axis=1)
        ok = (nl > sigma) & (n - nl > sigma)
        if eu.shape[0]:
            cut = (bits[:, eu] != bits[:, ev]).sum(axis=1)
        else:
            cut = np.zeros(left.shape[0], dtype=np.int64)
        ok &= cut <= k
        if not ok.any():
            continue
        left, bits, nl, cut = left[ok], bits[ok], nl[ok], cut[ok]
        good = _connected_np(left, bits, adj, n) & _connected_np(full & ~left, 1 - bits, adj, n)
        for mask, c, l in zip(left[good], cut[good], nl[good]):
            key = (int(c), abs(2 * int(l) - n), int(mask))
            if key[:2] < best[:2]:
                best = key
    return best[2]


def _connected_np(masks, bits, adj, n):
    low = masks & (-masks)
    reach = low.copy()
    for _ in range(n):
        nxt = np.zeros_like(reach)
        for i in range(n):
            nxt |= np.where((reach >> i) & 1, adj[i], 0)
        nxt &= masks
        new = reach | nxt
        if np.array_equal(new, reach):
            break
        reach = new
    return (reach == masks) & (masks != 0)


def best_separation(n, eu, ev, sigma, k):
    """Connected bipartition with both sides > sigma and cut <= k.

    Among candidates the smallest cut wins, then the most balanced split, then
    the smallest left-side bitmask (vertex 0 is always on the left). Returns a
    bitmask or ``-1``.
    """
    if n < 2 or n > 62:
        return -1
    eu = np.ascontiguousarray(eu, dtype=np.int64)
    ev = np.ascontiguousarray(ev, dtype=np.int64)
    adj = np.zeros(n, dtype=np.int64)
    for a, b in zip(eu, ev):
        adj[a] |= 1 << int(b)
        adj[b] |= 1 << int(a)
    fn = _separation_nb if _accel.USE_NUMBA else _separation_np
    return int(fn(int(n), eu, ev, adj, int(sigma), int(k)))


# -- GF(p) linear algebra --------------------------------------------------

DEFAULT_PRIME = 2147483659  # smallest prime above 2**31


@njit
def _modpow(a, e, p):
    r = 1
    a %= p
    while e > 0:
        if e & 1:
            r = (r * a) % p
        a = (a * a) % p
        e >>= 1
    return r


@njit
def _rank_mod_nb(a, p):
    a = a.copy()
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                t = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = t
        inv = _modpow(a[r, c], p - 2, p)
        for i in range(r + 1, rows):
            if a[i, c] != 0:
                f = (a[i, c] * inv) % p
                for j in range(c, cols):
                    a[i, j] = (a[i, j] - f * a[r, j]) % p
        r += 1
    return r


def _rank_mod_np(a, p):
    a = a.copy()
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        below = a[r + 1:, c] * inv % p
        a[r + 1:] = (a[r + 1:] - below[:, None] * a[r] % p) % p
        r += 1
    return r


def rank_mod(a, p=DEFAULT_PRIME):
    a = np.ascontiguousarray(a, dtype=np.int64) % p
    if a.size == 0:
        return 0
    fn = _rank_mod_nb if _accel.USE_NUMBA else _rank_mod_np
    return int(fn(a, int(p)))


@njit
def _solve_mod_nb(a, b, p):
    # Gauss-Jordan on [a | b]; returns (ok, a^-1 b)
    n = a.shape[0]
    k = b.shape[1]
    a = a.copy()
    b = b.copy()
    for c in range(n):
        piv = -1
        for i in range(c, n):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            return False, b
        if piv != c:
            for j in range(n):
                t = a[c, j]
                a[c, j] = a[piv, j]
                a[piv, j] = t
            for j in range(k):
                t = b[c, j]
                b[c, j] = b[piv, j]
                b[piv, j] = t
        inv = _modpow(a[c, c], p - 2, p)
        for j in range(n):
            a[c, j] = (a[c, j] * inv) % p
        for j in range(k):
            b[c, j] = (b[c, j] * inv) % p
        for i in range(n):
            if i != c and a[i, c] != 0:
                f = a[i, c]
                for j in range(n):
                    a[i, j] = (a[i, j] - f * a[c, j]) % p
                for j in range(k):
                    b[i, j] = (b[i, j] - f * b[c, j]) % p
    return True, b


def _solve_mod_np(a, b, p):
    a = a.copy()
    b = b.copy()
    n = a.shape[0]
    for c in range(n):
        nz = np.nonzero(a[c:, c])[0]
        if nz.size == 0:
            return False, b
        piv = c + int(nz[0])
        a[[c, piv]] = a[[piv, c]]
        b[[c, piv]] = b[[piv, c]]
        inv = pow(int(a[c, c]), p - 2, p)
        a[c] = a[c] * inv % p
        b[c] = b[c] * inv % p
        f = a[:, c].copy()
        f[c] = 0
        a = (a - f[:, None] * a[c] % p) % p
        b = (b - f[:, None] * b[c] % p) % p
    return True, b


def solve_mod(a, b, p=DEFAULT_PRIME):
    """Return ``a^-1 b`` over GF(p), or ``None`` when ``a`` is singular."""
    a = np.ascontiguousarray(a, dtype=np.int64) % p
    b = np.ascontiguousarray(b, dtype=np.int64) % p
    if a.shape[0] == 0:
        return b.copy()
    fn = _solve_mod_nb if _accel.USE_NUMBA else _solve_mod_np
    ok, x = fn(a, b, int(p))
    return np.asarray(x) if ok else None


@njit
def _det_mod_small(m, p):
    s = m.shape[0]
    a = m.copy()
    det = 1
    for c in range(s):
        piv = -1
        for i in range(c, s):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            return 0
        if piv != c:
            for j in range(s):
                t = a[c, j]
                a[c, j] = a[piv, j]
                a[piv, j] = t
            det = (p - det) % p
        det = (det * a[c, c]) % p
        inv = _modpow(a[c, c], p - 2, p)
        for i in range(c + 1, s):
            if a[i, c] != 0:
                f = (a[i, c] * inv) % p
                for j in range(c, s):
                    a[i, j] = (a[i, j] - f * a[c, j]) % p
    return det


@njit
def _minors_nb(cols, combos, p):
    n = combos.shape[0]
    s = combos.shape[1]
    out = np.zeros(n, dtype=np.int64)
    sub = np.empty((s, s), dtype=np.int64)
    for t in range(n):
        for i in range(s):
            for j in range(s):
                sub[i, j] = cols[combos[t, i], j]
        out[t] = _det_mod_small(sub, p)
    return out


def _minors_np(cols, combos, p):
    s = combos.shape[1]
    out = np.zeros(combos.shape[0], dtype=np.int64)
    for perm in permutations(range(s)):
        sign = 1
        seen = list(perm)
        for i in range(s):
            for j in range(i + 1, s):
                if seen[i] > seen[j]:
                    sign = -sign
        term = np.ones(combos.shape[0], dtype=np.int64)
        for i in range(s):
            term = term * cols[combos[:, i], perm[i]] % p
        out = (out + sign * term) % p
    return out


def row_combinations(n_rows, s):
    if s > n_rows:
        return np.zeros((0, s), dtype=np.int64)
    return np.array(list(combinations(range(n_rows), s)), dtype=np.int64).reshape(-1, s)


def wedge_vector(cols, p=DEFAULT_PRIME, combos=None):
    """All ``s x s`` minors of an ``R x s`` column block, rows in lexicographic order."""
    cols = np.ascontiguousarray(cols, dtype=np.int64) % p
    if combos is None:
        combos = row_combinations(cols.shape[0], cols.shape[1])
    if combos.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    fn = _minors_nb if _accel.USE_NUMBA else _minors_np
    return np.asarray(fn(cols, np.ascontiguousarray(combos), int(p)))


@njit
def _greedy_independent_nb(vecs, p):
    n, d = vecs.shape
    basis = np.zeros((n, d), dtype=np.int64)
    pivots = np.zeros(n, dtype=np.int64)
    nb = 0
    keep = np.zeros(n, dtype=np.bool_)
    for t in range(n):
        v = vecs[t].copy()
        for b in range(nb):
            c = pivots[b]
            if v[c] != 0:
                f = v[c]
                for j in range(d):
                    v[j] = (v[j] - f * basis[b, j]) % p
        piv = -1
        for j in range(d):
            if v[j] != 0:
                piv = j
                break
        if piv < 0:
            continue
        inv = _modpow(v[piv], p - 2, p)
        for j in range(d):
            v[j] = (v[j] * inv) % p
        # keep the basis reduced on existing pivots
        for b in range(nb):
            if basis[b, piv] != 0:
                f = basis[b, piv]
                for j in range(d):
                    basis[b, j] = (basis[b, j] - f * v[j]) % p
        basis[nb] = v
        pivots[nb] = piv
        nb += 1
        keep[t] = True
    return keep


def _greedy_independent_np(vecs, p):
    basis: list[np.ndarray] = []
    pivots: list[int] = []
    keep = np.zeros(vecs.shape[0], dtype=bool)
    for t in range(vecs.shape[0]):
        v = vecs[t].copy()
        for b, c in zip(basis, pivots):
            if v[c]:
                v = (v - v[c] * b) % p
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            continue
        piv = int(nz[0])
        v = v * pow(int(v[piv]), p - 2, p) % p
        for i, b in enumerate(basis):
            if b[piv]:
                basis[i] = (b - b[piv] * v) % p
        basis.append(v)
        pivots.append(piv)
        keep[t] = True
    return keep


def greedy_independent(vecs, p=DEFAULT_PRIME):
    """Mask of a maximal linearly independent subfamily, chosen in input order."""
    vecs = np.ascontiguousarray(vecs, dtype=np.int64) % p
    if vecs.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    fn = _greedy_independent_nb if _accel.USE_NUMBA else _greedy_independent_np
    return np.asarray(fn(vecs, int(p)))


@njit
def _rref_mod_nb(a, p):
    a = a.copy()
    rows, cols = a.shape
    pivots = np.full(rows, -1, dtype=np.int64)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                t = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = t
        inv = _modpow(a[r, c], p - 2, p)
        for j in range(cols):
            a[r, j] = (a[r, j] * inv) % p
        for i in range(rows):
            if i != r and a[i, c] != 0:
                f = a[i, c]
                for j in range(c, cols):
                    a[i, j] = (a[i, j] - f * a[r, j]) % p
        pivots[r] = c
        r += 1
    return a, pivots[:r]


def _rref_mod_np(a, p):
    a = a.copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        a[[r, piv]] = a[[piv, r]]
        a[r] = a[r] * pow(int(a[r, c]), p - 2, p) % p
        f = a[:, c].copy()
        f[r] = 0
        a = (a - f[:, None] * a[r] % p) % p
        pivots.append(c)
        r += 1
    return a, np.array(pivots, dtype=np.int64)


def rref_mod(a, p=DEFAULT_PRIME):
    """Reduced row echelon form over GF(p) and the pivot columns."""
    a = np.ascontiguousarray(a, dtype=np.int64) % p
    if a.size == 0:
        return a.copy(), np.zeros(0, dtype=np.int64)
    fn = _rref_mod_nb if _accel.USE_NUMBA else _rref_mod_np
    r, piv = fn(a, int(p))
    return np.asarray(r), np.asarray(piv)


def nullspace_mod(a, p=DEFAULT_PRIME):
    """Rows spanning ``{x : a x = 0}`` over GF(p)."""
    a = np.ascontiguousarray(a, dtype=np.int64) % p
    cols = a.shape[1]
    r, piv = rref_mod(a, p)
    free = np.setdiff1d(np.arange(cols), piv)
    out = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        out[i, f] = 1
        out[i, piv] = (-r[: len(piv), f]) % p
    return out
