"""Numba kernels for the hot loops of the search pipeline.

Everything here is an internal accelerator: each kernel has a pure-Python
counterpart in the public modules (maximal_cliques, implies_cliquewise,
is_trivial_at, apply_perm) against which it is tested, and which the
post-search verification pass uses instead of these.

Graph numerics are int64 throughout, which caps the kernels at n <= 10
(45 edge bits); the pipelines never exceed n = 9.
"""

from __future__ import annotations

import numpy as np
from numba import njit

KERNEL_MAX_NODES = 10


@njit(cache=True)
def _bk_fill(n, numerics, flat, offsets, nbr, rs, ps, xs):
    total = 0
    cap = flat.shape[0]
    full = (np.int64(1) << n) - 1
    for gi in range(numerics.shape[0]):
        g = numerics[gi]
        for v in range(n):
            m = 0
            for u in range(n):
                if u == v:
                    continue
                a, b = (u, v) if u < v else (v, u)
                if (g >> (a + b * (b - 1) // 2)) & 1:
                    m |= np.int64(1) << u
            nbr[v] = m
        depth = 0
        rs[0] = 0
        ps[0] = full
        xs[0] = 0
        while depth >= 0:
            p = ps[depth]
            if p == 0:
                depth -= 1
                continue
            pv = p & (-p)
            v = 0
            while (p >> v) & 1 == 0:
                v += 1
            cr = rs[depth] | pv
            cp = p & nbr[v]
            cx = xs[depth] & nbr[v]
            ps[depth] = p & ~pv
            xs[depth] = xs[depth] | pv
            if cp == 0 and cx == 0:
                if total == cap:
                    return -1  # caller grows the buffer and retries
                flat[total] = cr
                total += 1
            elif cp != 0:
                depth += 1
                rs[depth] = cr
                ps[depth] = cp
                xs[depth] = cx
        # insertion sort the graph's slice; lists are tiny (<= 36 entries)
        lomark = offsets[gi]
        for i in range(lomark + 1, total):
            key = flat[i]
            j = i - 1
            while j >= lomark and flat[j] > key:
                flat[j + 1] = flat[j]
                j -= 1
            flat[j + 1] = key
        offsets[gi + 1] = total
    return total


def batch_maximal_cliques(numerics: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Maximal cliques for every graph, flat int64 masks plus offsets.

    Per-graph lists are sorted ascending by mask, matching the order of
    cliques.maximal_cliques.
    """
    if n < 1 or n > KERNEL_MAX_NODES:
        raise ValueError(f"kernel supports 1..{KERNEL_MAX_NODES} nodes, got {n}")
    count = numerics.shape[0]
    offsets = np.zeros(count + 1, dtype=np.int64)
    cap = max(16, count * 8)
    nbr = np.empty(n, dtype=np.int64)
    rs = np.empty(n + 2, dtype=np.int64)
    ps = np.empty(n + 2, dtype=np.int64)
    xs = np.empty(n + 2, dtype=np.int64)
    while True:
        flat = np.empty(cap, dtype=np.int64)
        total = _bk_fill(n, numerics, flat, offsets, nbr, rs, ps, xs)
        if total >= 0:
            return flat[:total].copy(), offsets
        cap *= 2


@njit(cache=True)
def set_clique_bits(matrix, flat, offsets):
    """matrix[q, col] bit: graph `col` has maximal clique q.  matrix is uint64 words."""
    for gi in range(offsets.shape[0] - 1):
        w = gi >> 6
        b = np.uint64(1) << np.uint64(gi & 63)
        for k in range(offsets[gi], offsets[gi + 1]):
            matrix[flat[k], w] |= b


def upward_closure_rows(matrix: np.ndarray, n: int) -> None:
    """In place: row[p] |= row[q] for every q subset of p (sum-over-subsets DP)."""
    size = 1 << n
    idx = np.arange(size)
    for i in range(n):
        bit = 1 << i
        hi = idx[(idx & bit) != 0]
        matrix[hi] |= matrix[hi ^ bit]


@njit(cache=True)
def phase6_minimal(n, graphs, least_ordinal, perm_enc, phi_flat, phi_off, bit2x, bit2y, pairbit):
    """Logical-minimality filter over the non-trivial implication sets.

    phi_flat holds, per least graph ordinal, the sorted numerics of the webs it
    non-trivially implies.  An entry S of least R survives iff no T in the same
    set has S in its own (transported) set: membership of sigma_T(S) in the set
    of T's least form, where sigma_T is the recorded permutation to that form.
    """
    total = phi_flat.shape[0]
    keep = np.ones(total, np.bool_)
    perm = np.empty(n, np.int64)
    for l in range(phi_off.shape[0] - 1):
        s0 = phi_off[l]
        s1 = phi_off[l + 1]
        m = s1 - s0
        if m == 0:
            continue
        alive = np.empty(m, np.int64)
        for i in range(m):
            alive[i] = i
        alive_count = m
        for t in range(m):
            if alive_count == 0:
                break
            tnum = phi_flat[s0 + t]
            gi = np.searchsorted(graphs, tnum)
            lt = least_ordinal[gi]
            t0 = phi_off[lt]
            t1 = phi_off[lt + 1]
            if t0 == t1:
                continue
            enc = perm_enc[gi]
            for i in range(n):
                perm[i] = (enc >> (4 * i)) & 15
            w = 0
            for ai in range(alive_count):
                s = alive[ai]
                if s == t:
                    alive[w] = s
                    w += 1
                    continue
                v = phi_flat[s0 + s]
                img = np.int64(0)
                e = 0
                while v != 0:
                    while v & 1 == 0:
                        v >>= 1
                        e += 1
                    img |= np.int64(1) << pairbit[perm[bit2x[e]] * n + perm[bit2y[e]]]
                    v >>= 1
                    e += 1
                lo = t0
                hi = t1
                found = False
                while lo < hi:
                    mid = (lo + hi) >> 1
                    fv = phi_flat[mid]
                    if fv < img:
                        lo = mid + 1
                    elif fv > img:
                        hi = mid
                    else:
                        found = True
                        break
                if found:
                    keep[s0 + s] = False
                else:
                    alive[w] = s
                    w += 1
            alive_count = w
    return keep


@njit(cache=True)
def count_interpolants(r_cliques, s_up, flat, offsets, numerics, r_num, s_num):
    """Number of webs T distinct from R and S with R -> T -> S both valid.

    Direct per-graph clique tests (no shared state with the phase-4/5 matrix
    or the phase-6 transport); used by the post-search verification pass.
    s_up[mask] = 1 iff some maximal clique of S lies inside mask.
    """
    count = 0
    for gi in range(numerics.shape[0]):
        t = numerics[gi]
        if t == r_num or t == s_num:
            continue
        o0 = offsets[gi]
        o1 = offsets[gi + 1]
        ok = True
        for k in range(o0, o1):  # T -> S
            if s_up[flat[k]] == 0:
                ok = False
                break
        if not ok:
            continue
        for pi in range(r_cliques.shape[0]):  # R -> T
            p = r_cliques[pi]
            found = False
            for k in range(o0, o1):
                if flat[k] & ~p == 0:
                    found = True
                    break
            if not found:
                ok = False
                break
        if ok:
            count += 1
    return count


def edge_index_tables(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """bit -> endpoints and endpoints -> bit lookup tables for n-node graphs."""
    bits = n * (n - 1) // 2
    bit2x = np.zeros(max(bits, 1), dtype=np.int64)
    bit2y = np.zeros(max(bits, 1), dtype=np.int64)
    pairbit = np.zeros(n * n if n else 1, dtype=np.int64)
    for y in range(n):
        for x in range(y):
            e = x + y * (y - 1) // 2
            bit2x[e] = x
            bit2y[e] = y
            pairbit[x * n + y] = e
            pairbit[y * n + x] = e
    return bit2x, bit2y, pairbit
