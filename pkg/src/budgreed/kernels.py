"""Hot loops, each in a numba flavour and a numpy flavour.

The numba flavour is used when ``_accel.HAVE_NUMBA`` is set (disable with
``BUDGREED_DISABLE_NUMBA=1``).  Both flavours perform the same floating point
operations in the same order, so they agree bit for bit; the test-suite
checks this on every kernel.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit
from .core import FEAS_RTOL

INT64_MAX = np.iinfo(np.int64).max


def _use_numba(force):
    if force is None:
        return _accel.HAVE_NUMBA
    if force == "numba" and not _accel.HAVE_NUMBA:
        raise RuntimeError("numba backend requested but unavailable")
    return force == "numba"


# -- subset enumeration ------------------------------------------------------------
#
# Subset arrays are indexed by bitmask; bit i is element i.  Sums are built by
# adding the highest element last, which is the order the numpy doubling
# construction produces.

@njit(cache=True, nogil=True)
def _lex_less(a, b):
    # sorted-tuple comparison of two bitmask sets
    while True:
        if a == 0:
            return b != 0
        if b == 0:
            return False
        la = a & -a
        lb = b & -b
        if la != lb:
            return la < lb
        a ^= la
        b ^= lb


@njit(cache=True, nogil=True)
def _bf_modular_nb(costs, weights, limit):
    n = costs.shape[0]
    size = 1 << n
    cost = np.zeros(size)
    val = np.zeros(size)
    best = 0
    bv = 0.0
    h = -1
    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            h += 1
        rest = mask - (1 << h)
        cost[mask] = cost[rest] + costs[h]
        val[mask] = val[rest] + weights[h]
        if cost[mask] <= limit:
            v = val[mask]
            if v > bv or (v == bv and _lex_less(mask, best)):
                bv = v
                best = mask
    return best, bv


@njit(cache=True, nogil=True)
def _bf_coverage_nb(costs, cover, tables, limit):
    n = costs.shape[0]
    size = 1 << n
    nchunks = tables.shape[0]
    cost = np.zeros(size)
    cov = np.zeros(size, dtype=np.uint64)
    best = 0
    bv = 0.0
    for c in range(nchunks):
        bv += tables[c, 0]
    h = -1
    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            h += 1
        rest = mask - (1 << h)
        cost[mask] = cost[rest] + costs[h]
        m = cov[rest] | cover[h]
        cov[mask] = m
        if cost[mask] <= limit:
            v = 0.0
            for c in range(nchunks):
                v += tables[c, np.int64((m >> np.uint64(8 * c)) & np.uint64(255))]
            if v > bv or (v == bv and _lex_less(mask, best)):
                bv = v
                best = mask
    return best, bv


def _pick(val, feasible):
    vals = np.where(feasible, val, -np.inf)
    bv = vals.max()
    cands = np.flatnonzero(vals == bv)
    if len(cands) == 1:
        return int(cands[0]), float(bv)
    # lexicographically smallest sorted tuple among the tied masks
    idx = cands.copy()
    rem = cands.astype(np.int64)
    while len(idx) > 1:
        zero = rem == 0
        if zero.any():
            idx = idx[zero][:1]
            break
        low = rem & -rem
        keep = low == low.min()
        idx, rem = idx[keep], rem[keep] ^ low.min()
    return int(idx[0]), float(bv)


def _bf_modular_np(costs, weights, limit):
    cost = np.zeros(1)
    val = np.zeros(1)
    for i in range(len(costs)):
        cost = np.concatenate([cost, cost + costs[i]])
        val = np.concatenate([val, val + weights[i]])
    return _pick(val, cost <= limit)


def _bf_coverage_np(costs, cover, tables, limit):
    cost = np.zeros(1)
    cov = np.zeros(1, dtype=np.uint64)
    for i in range(len(costs)):
        cost = np.concatenate([cost, cost + costs[i]])
        cov = np.concatenate([cov, cov | cover[i]])
    val = np.zeros(len(cov))
    for c in range(tables.shape[0]):
        val = val + tables[c][((cov >> np.uint64(8 * c)) & np.uint64(255)).astype(np.int64)]
    return _pick(val, cost <= limit)


def brute_force_modular(costs, weights, budget, force=None):
    costs = np.asarray(costs, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    limit = budget + FEAS_RTOL * abs(budget)
    if _use_numba(force):
        best, bv = _bf_modular_nb(costs, weights, limit)
        return int(best), float(bv)
    return _bf_modular_np(costs, weights, limit)


def brute_force_coverage(costs, cover_masks, tables, budget, force=None):
    """``cover_masks``: per-element uint64 universe masks; ``tables``: (chunks, 256) byte sums."""
    costs = np.asarray(costs, dtype=np.float64)
    cover = np.asarray(cover_masks, dtype=np.uint64)
    tables = np.asarray(tables, dtype=np.float64)
    limit = budget + FEAS_RTOL * abs(budget)
    if _use_numba(force):
        best, bv = _bf_coverage_nb(costs, cover, tables, limit)
        return int(best), float(bv)
    return _bf_coverage_np(costs, cover, tables, limit)


# -- certified recurrence over grid pairs ----------------------------------------------
#
# Every m value is k/D for an integer k.  With delta = 1/N, estimates
# j_r/N, j_r2/N and rho = a/b, each branch of the recurrence rounded down to
# the grid is an integer floor division:
#   branch 1: (k N + D) // (N + 1)
#   branch 2: ((N - j_r) k b + D (b - a)) // (b (N - j_r + 1))
#   branch 3: ((N - J) k b + D (b - 2a)) // (b (N - J + 1)),   J = j_r + j_r2

@njit(cache=True, nogil=True)
def _m_grid_nb(jr, jr2, N, D, a, b):
    P = jr.shape[0]
    out = np.empty(P, dtype=np.int64)
    for p in range(P):
        r = jr[p]
        r2 = jr2[p]
        J = r + r2
        lim1 = N - r - 1
        lim2 = N - r2 - 1
        num2 = D * (b - a)
        den2 = b * (N - r + 1)
        num3 = D * (b - 2 * a)
        den3 = b * (N - J + 1)
        k = np.int64(0)
        for i in range(1, N + 1):
            best = k
            if i <= lim1:
                v = (k * N + D) // (N + 1)
                if v > best:
                    best = v
            if i <= lim2:
                v = ((N - r) * k * b + num2) // den2
                if v > best:
                    best = v
            if i <= J:
                v = ((N - J) * k * b + num3) // den3
                if v > best:
                    best = v
            k = best
        out[p] = k
    return out


def _m_grid_np(jr, jr2, N, D, a, b, dtype=np.int64):
    jr = np.asarray(jr).astype(dtype)
    jr2 = np.asarray(jr2).astype(dtype)
    J = jr + jr2
    lim1, lim2 = N - jr - 1, N - jr2 - 1
    num2, den2 = D * (b - a), b * (N - jr + 1)
    num3, den3 = D * (b - 2 * a), b * (N - J + 1)
    coef2, coef3 = (N - jr) * b, (N - J) * b
    k = np.zeros(len(jr), dtype=dtype)
    for i in range(1, N + 1):
        best = k
        b1 = (k * N + D) // (N + 1)
        best = np.where(i <= lim1, np.maximum(best, b1), best)
        b2 = (coef2 * k + num2) // den2
        best = np.where(i <= lim2, np.maximum(best, b2), best)
        b3 = (coef3 * k + num3) // den3
        best = np.where(i <= J, np.maximum(best, b3), best)
        k = best
    return k


def m_grid_fits_int64(N, D, a, b) -> bool:
    # largest intermediate: N * k * b + D * b with k <= D
    return (N + 1) * D * b + D * b < INT64_MAX


def m_grid_final(jr, jr2, N, D, a, b, force=None):
    """Final grid numerators k (m = k/D) for every pair; python ints when int64 could overflow."""
    if not m_grid_fits_int64(N, D, a, b):
        out = _m_grid_np(jr, jr2, N, D, a, b, dtype=object)
        return out, "bigint"
    jr = np.ascontiguousarray(jr, dtype=np.int64)
    jr2 = np.ascontiguousarray(jr2, dtype=np.int64)
    if _use_numba(force):
        return _m_grid_nb(jr, jr2, np.int64(N), np.int64(D), np.int64(a), np.int64(b)), "numba"
    return _m_grid_np(jr, jr2, N, D, a, b), "numpy"


# -- k-guess plain greedy query counting on modular instances ---------------------------
#
# Mirrors the generic engine's query accounting for ``k-guess:<k>:plain-greedy``
# on a modular oracle with integer weights and integer costs, where every
# float sum is exact:
#   per feasible guess Y: 1 (f(Y)) + 1 (h(empty)) + #fitting candidates per step + 1 (lift)
#   plus one query per feasible set with fewer than k elements.

@njit(cache=True, nogil=True)
def _greedy_count_nb(w, c, left, excl, limit_scale):
    # plain greedy from the empty set over elements not flagged in excl
    n = w.shape[0]
    picked = excl.copy()
    q = 1
    val = 0.0
    cost = 0.0
    minc = np.inf
    for v in range(n):
        if not excl[v] and c[v] < minc:
            minc = c[v]
    lim = left + limit_scale * abs(left)
    while cost + minc <= lim:
        best = -1
        bd = -np.inf
        for v in range(n):
            if picked[v] or cost + c[v] > lim:
                continue
            q += 1
            d = w[v] / c[v]
            if d > bd:
                bd = d
                best = v
        if best < 0:
            break
        picked[best] = True
        cost += c[best]
        val += w[best]
    return val, q


@njit(cache=True, nogil=True)
def _kguess_count_nb(w, c, budget, k, rtol):
    n = w.shape[0]
    lim = budget + rtol * abs(budget)
    q = 0
    best = -np.inf
    excl = np.zeros(n, dtype=np.bool_)
    idx = np.arange(k)
    if k <= n:
        while True:
            cy = 0.0
            wy = 0.0
            for t in range(k):
                cy += c[idx[t]]
                wy += w[idx[t]]
            if cy <= lim:
                for t in range(k):
                    excl[idx[t]] = True
                left = max(budget - cy, 0.0)
                hv, hq = _greedy_count_nb(w, c, left, excl, rtol)
                q += 2 + hq
                if wy + hv > best:
                    best = wy + hv
                for t in range(k):
                    excl[idx[t]] = False
            # next combination in lexicographic order
            t = k - 1
            while t >= 0 and idx[t] == n - k + t:
                t -= 1
            if t < 0:
                break
            idx[t] += 1
            for s in range(t + 1, k):
                idx[s] = idx[s - 1] + 1
    # feasible sets of size < k
    for size in range(min(k - 1, n) + 1):
        if size == 0:
            q += 1
            if 0.0 > best:
                best = 0.0
            continue
        sub = np.arange(size)
        while True:
            cs = 0.0
            ws = 0.0
            for t in range(size):
                cs += c[sub[t]]
                ws += w[sub[t]]
            if cs <= lim:
                q += 1
                if ws > best:
                    best = ws
            t = size - 1
            while t >= 0 and sub[t] == n - size + t:
                t -= 1
            if t < 0:
                break
            sub[t] += 1
            for s in range(t + 1, size):
                sub[s] = sub[s - 1] + 1
    return best, q


def _plain_count_py(w, c, budget, rtol):
    excl = np.zeros(len(w), dtype=bool)
    return _greedy_count_py(w, c, budget, excl, rtol)


def _greedy_count_py(w, c, left, excl, rtol):
    lim = left + rtol * abs(left)
    avail = ~excl
    cost, val, q = 0.0, 0.0, 1
    dens = w / c
    while True:
        fit = avail & (cost + c <= lim)
        cnt = int(fit.sum())
        if cnt == 0:
            return val, q
        q += cnt
        best = int(np.argmax(np.where(fit, dens, -np.inf)))
        avail[best] = False
        cost += c[best]
        val += w[best]


def _kguess_count_np(w, c, budget, k, rtol, chunk=8192):
    from itertools import combinations, islice

    n = len(w)
    lim = budget + rtol * abs(budget)
    dens = w / c
    best, q = -np.inf, 0
    it = combinations(range(n), k)
    while True:
        Y = np.array(list(islice(it, chunk)), dtype=np.int64).reshape(-1, k)
        if len(Y) == 0:
            break
        cy = c[Y].sum(axis=1)
        ok = cy <= lim
        Y, cy = Y[ok], cy[ok]
        if len(Y) == 0:
            continue
        G = len(Y)
        rows = np.arange(G)
        left = np.maximum(budget - cy, 0.0)
        glim = left + rtol * np.abs(left)
        avail = np.ones((G, n), dtype=bool)
        avail[rows[:, None], Y] = False
        cost = np.zeros(G)
        val = np.zeros(G)
        qq = np.full(G, 3, dtype=np.int64)
        while True:
            fit = avail & (cost[:, None] + c[None, :] <= glim[:, None])
            cnt = fit.sum(axis=1)
            act = np.flatnonzero(cnt > 0)
            if len(act) == 0:
                break
            qq += cnt
            pick = np.argmax(np.where(fit[act], dens[None, :], -np.inf), axis=1)
            avail[act, pick] = False
            cost[act] += c[pick]
            val[act] += w[pick]
        q += int(qq.sum())
        best = max(best, float((w[Y].sum(axis=1) + val).max()))
    for size in range(min(k - 1, n) + 1):
        for T in combinations(range(n), size):
            T = list(T)
            if c[T].sum() <= lim:
                q += 1
                best = max(best, float(w[T].sum()))
    return best, q


def kguess_query_count(weights, costs, budget, k, force=None):
    """(best value, oracle queries) of ``k-guess:<k>:plain-greedy``; k = 0 means plain greedy."""
    w = np.asarray(weights, dtype=np.float64)
    c = np.asarray(costs, dtype=np.float64)
    if k == 0:
        if _use_numba(force):
            val, q = _greedy_count_nb(w, c, float(budget), np.zeros(len(w), dtype=np.bool_), FEAS_RTOL)
            return float(val), int(q)
        val, q = _plain_count_py(w, c, float(budget), FEAS_RTOL)
        return float(val), int(q)
    if _use_numba(force):
        val, q = _kguess_count_nb(w, c, float(budget), int(k), FEAS_RTOL)
        return float(val), int(q)
    val, q = _kguess_count_np(w, c, float(budget), int(k), FEAS_RTOL)
    return float(val), int(q)
