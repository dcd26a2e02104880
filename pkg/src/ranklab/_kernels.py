"""Hot numeric kernels with numba and pure-numpy implementations.

Three inner loops dominate runtime: rank/statistics accumulation over
Monte Carlo batches, simplex pivoting, and the subset DP used for exact
rank aggregation. Each kernel exists twice: a loop version compiled with
numba (when available) and a vectorized numpy fallback. The dispatched
names (``mc_accumulate``, ``simplex_iterate``, ``kemeny_dp_table``) pick
the compiled version unless ``RANKLAB_DISABLE_NUMBA=1``.

Integer statistics are identical across the two paths; floating-point
tableau arithmetic performs the same operations element-for-element, so
the paths agree to round-off (bit-identical in practice).
"""

from __future__ import annotations

import numpy as np

from ._accel import NUMBA_AVAILABLE, jit_or_none

# ---------------------------------------------------------------------------
# Monte Carlo batch accumulation.
# scores: (B, n) one row per run. Integer accumulators are updated in place;
# score sums are handled by the caller (identically for both paths).
# ---------------------------------------------------------------------------


def _mc_accumulate_loop(scores, top_k, rank_sum, rank_sumsq, topk_count,
                        min_rank, max_rank, min_count, max_count, hist):
    n_runs, n = scores.shape
    for t in range(n_runs):
        order = np.argsort(-scores[t], kind="mergesort")
        for pos in range(n):
            row = order[pos]
            r = pos + 1
            rank_sum[row] += r
            rank_sumsq[row] += r * r
            if r <= top_k:
                topk_count[row] += 1
            hist[row, pos] += 1
            if r < min_rank[row]:
                min_rank[row] = r
                min_count[row] = 1
            elif r == min_rank[row]:
                min_count[row] += 1
            if r > max_rank[row]:
                max_rank[row] = r
                max_count[row] = 1
            elif r == max_rank[row]:
                max_count[row] += 1


def mc_accumulate_numpy(scores, top_k, rank_sum, rank_sumsq, topk_count,
                        min_rank, max_rank, min_count, max_count, hist):
    n_runs, n = scores.shape
    order = np.argsort(-scores, axis=1, kind="stable")
    ranks = np.empty((n_runs, n), dtype=np.int64)
    ranks[np.arange(n_runs)[:, None], order] = np.arange(1, n + 1)[None, :]

    rank_sum += ranks.sum(axis=0)
    rank_sumsq += (ranks * ranks).sum(axis=0)
    topk_count += (ranks <= top_k).sum(axis=0)

    # row r at position p in some run -> hist[r, p] += 1
    flat = (order * n + np.arange(n)[None, :]).ravel()
    hist += np.bincount(flat, minlength=n * n).reshape(n, n)

    bmin = ranks.min(axis=0)
    bmax = ranks.max(axis=0)
    bmin_count = (ranks == bmin[None, :]).sum(axis=0)
    bmax_count = (ranks == bmax[None, :]).sum(axis=0)

    taken = bmin < min_rank
    min_rank[taken] = bmin[taken]
    min_count[taken] = bmin_count[taken]
    tied = bmin == min_rank
    tied &= ~taken
    min_count[tied] += bmin_count[tied]

    taken = bmax > max_rank
    max_rank[taken] = bmax[taken]
    max_count[taken] = bmax_count[taken]
    tied = bmax == max_rank
    tied &= ~taken
    max_count[tied] += bmax_count[tied]


mc_accumulate_numba = jit_or_none(_mc_accumulate_loop, nogil=True)
mc_accumulate = mc_accumulate_numba if NUMBA_AVAILABLE else mc_accumulate_numpy


# ---------------------------------------------------------------------------
# Simplex iteration (Bland's rule, objective row last, RHS column last).
# T[-1, j] holds the reduced cost of column j for a minimization problem;
# T[-1, -1] holds minus the current objective value. Returns
# (status, iterations): 0 optimal, 1 unbounded, 2 iteration limit.
# ---------------------------------------------------------------------------

SIMPLEX_OPTIMAL = 0
SIMPLEX_UNBOUNDED = 1
SIMPLEX_ITER_LIMIT = 2

_RCOST_TOL = 1e-9
_PIVOT_TOL = 1e-10


def _simplex_iterate_loop(T, basis, allowed, max_iter):
    n_rows = T.shape[0] - 1
    rhs = T.shape[1] - 1
    it = 0
    while it < max_iter:
        enter = -1
        for j in range(rhs):
            if allowed[j] and T[n_rows, j] < -_RCOST_TOL:
                enter = j
                break
        if enter < 0:
            return SIMPLEX_OPTIMAL, it

        leave = -1
        best_ratio = np.inf
        best_bvar = np.iinfo(np.int64).max
        for i in range(n_rows):
            a = T[i, enter]
            if a > _PIVOT_TOL:
                ratio = T[i, rhs] / a
                if ratio < best_ratio:
                    best_ratio = ratio
                    leave = i
                    best_bvar = basis[i]
                elif ratio == best_ratio and basis[i] < best_bvar:
                    leave = i
                    best_bvar = basis[i]
        if leave < 0:
            return SIMPLEX_UNBOUNDED, it

        piv = T[leave, enter]
        for c in range(rhs + 1):
            T[leave, c] /= piv
        for r in range(n_rows + 1):
            if r != leave:
                f = T[r, enter]
                if f != 0.0:
                    for c in range(rhs + 1):
                        T[r, c] -= f * T[leave, c]
        basis[leave] = enter
        it += 1
    return SIMPLEX_ITER_LIMIT, it


def simplex_iterate_numpy(T, basis, allowed, max_iter):
    n_rows = T.shape[0] - 1
    rhs = T.shape[1] - 1
    it = 0
    while it < max_iter:
        cand = np.flatnonzero(allowed & (T[-1, :rhs] < -_RCOST_TOL))
        if cand.size == 0:
            return SIMPLEX_OPTIMAL, it
        enter = int(cand[0])

        col = T[:n_rows, enter]
        pos = np.flatnonzero(col > _PIVOT_TOL)
        if pos.size == 0:
            return SIMPLEX_UNBOUNDED, it
        ratios = T[pos, rhs] / col[pos]
        rmin = ratios.min()
        ties = pos[ratios == rmin]
        leave = int(ties[np.argmin(basis[ties])])

        prow = T[leave] / T[leave, enter]
        T[leave] = prow
        factors = T[:, enter].copy()
        factors[leave] = 0.0
        T -= np.outer(factors, prow)
        basis[leave] = enter
        it += 1
    return SIMPLEX_ITER_LIMIT, it


simplex_iterate_numba = jit_or_none(_simplex_iterate_loop, nogil=True)
simplex_iterate = simplex_iterate_numba if NUMBA_AVAILABLE else simplex_iterate_numpy


# ---------------------------------------------------------------------------
# Subset DP for minimum-disagreement ordering. P[b, a] counts the input
# rankings that place b ahead of a. dp[S] is the cheapest cost of seating
# the members of S in the first |S| positions; choice[S] records the item
# seated last. Appending v after S costs sum_{s in S} P[v, s].
# ---------------------------------------------------------------------------

_DP_INF = np.iinfo(np.int64).max // 4


def _kemeny_dp_table_loop(P):
    n = P.shape[0]
    full = 1 << n
    dp = np.full(full, _DP_INF, dtype=np.int64)
    choice = np.full(full, -1, dtype=np.int8)
    dp[0] = 0
    for S in range(full - 1):
        base = dp[S]
        if base >= _DP_INF:
            continue
        for v in range(n):
            if S & (1 << v):
                continue
            add = 0
            for s in range(n):
                if S & (1 << s):
                    add += P[v, s]
            ns = S | (1 << v)
            c = base + add
            if c < dp[ns]:
                dp[ns] = c
                choice[ns] = v
    return dp, choice


def kemeny_dp_table_numpy(P):
    n = P.shape[0]
    full = 1 << n
    dp = np.full(full, _DP_INF, dtype=np.int64)
    choice = np.full(full, -1, dtype=np.int8)
    dp[0] = 0
    bits = np.arange(n)
    for S in range(full - 1):
        base = dp[S]
        if base >= _DP_INF:
            continue
        member = ((S >> bits) & 1).astype(bool)
        add = P[:, member].sum(axis=1) if member.any() else np.zeros(n, dtype=np.int64)
        outs = np.flatnonzero(~member)
        cand = base + add[outs]
        targets = S | (1 << outs)
        better = cand < dp[targets]
        dp[targets[better]] = cand[better]
        choice[targets[better]] = outs[better]
    return dp, choice


kemeny_dp_table_numba = jit_or_none(_kemeny_dp_table_loop, nogil=True)
kemeny_dp_table = kemeny_dp_table_numba if NUMBA_AVAILABLE else kemeny_dp_table_numpy
