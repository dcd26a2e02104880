"""Weight-space exploration: uniform simplex sampling and per-row rank
statistics over many randomized scoring runs.

Each run draws its weights from a substream keyed by (master seed, run
index), so the sequence of weight vectors is reproducible regardless of
batching or thread count. Integer statistics accumulate exactly; float
score sums are reduced per batch in a fixed order, so results are
identical for any ``n_threads``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .scoring import GEOMETRIC_FLOOR, score_arithmetic, score_geometric

ARITHMETIC = "arithmetic"
GEOMETRIC = "geometric"

DEFAULT_TOP_K = 20
DEFAULT_GROUP_SIZE = 10
_BATCH = 256


@dataclass(frozen=True)
class SeededGenerator:
    """Reproducible per-run random substreams from one master seed."""

    seed: int

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 63:
            raise ValueError("seed must be a non-negative 63-bit integer")

    def run_rng(self, run_index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence((int(self.seed), int(run_index))))

    def run_weights(self, run_index: int, m: int) -> np.ndarray:
        return sample_simplex(m, self.run_rng(run_index))


def sample_simplex(m: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform sample from the (m-1)-simplex by sorted-uniform spacings.

    Draw m-1 iid uniforms, sort them, and take the gaps between
    consecutive values (including the 0 and 1 boundaries). Equivalent to
    a flat Dirichlet; components are non-negative and sum to one.
    """
    if m < 1:
        raise ValueError("need at least one component")
    if m == 1:
        return np.ones(1)
    cuts = np.sort(rng.random(m - 1))
    return np.diff(np.concatenate([[0.0], cuts, [1.0]]))


@dataclass
class MonteCarloStats:
    """Per-row statistics over N randomized-weight runs."""

    labels: tuple[str, ...]
    n_runs: int
    mean_kind: str
    seed: int
    top_k: int
    group_size: int
    score_avg: np.ndarray
    score_std: np.ndarray
    score_cv: np.ndarray
    rank_avg: np.ndarray
    rank_std: np.ndarray
    rank_cv: np.ndarray
    prob_top_k: np.ndarray
    group: np.ndarray
    max_rank: np.ndarray
    min_rank: np.ndarray
    max_rank_count: np.ndarray
    min_rank_count: np.ndarray
    product_raw: np.ndarray
    product_rel: np.ndarray
    product_rel_defined: bool
    rank_hist: np.ndarray = field(repr=False)

    @property
    def n_rows(self) -> int:
        return len(self.labels)


def _resolve_matrix(matrix, labels):
    if hasattr(matrix, "values") and hasattr(matrix, "labels"):
        return np.asarray(matrix.values, dtype=float), tuple(matrix.labels)
    values = np.asarray(matrix, dtype=float)
    if labels is None:
        labels = tuple(str(i) for i in range(values.shape[0]))
    return values, tuple(labels)


def _batch_weights(gen: SeededGenerator, start: int, stop: int, m: int) -> np.ndarray:
    out = np.empty((stop - start, m))
    for t in range(start, stop):
        out[t - start] = gen.run_weights(t, m)
    return out


def monte_carlo(matrix, n_runs: int, mean: str = ARITHMETIC,
                gen: SeededGenerator | int = 0, top_k: int = DEFAULT_TOP_K,
                group_size: int = DEFAULT_GROUP_SIZE, labels=None,
                n_threads: int = 1) -> MonteCarloStats:
    """Sample weights, score, rank, and aggregate statistics over n_runs."""
    values, labels = _resolve_matrix(matrix, labels)
    n, m = values.shape
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if mean not in (ARITHMETIC, GEOMETRIC):
        raise ValueError(f"mean must be {ARITHMETIC!r} or {GEOMETRIC!r}")
    if not isinstance(gen, SeededGenerator):
        gen = SeededGenerator(int(gen))

    log_values = np.log(np.maximum(values, GEOMETRIC_FLOOR)) if mean == GEOMETRIC else None

    starts = list(range(0, n_runs, _BATCH))
    n_batches = len(starts)
    score_sums = np.zeros((n_batches, n))
    score_sumsqs = np.zeros((n_batches, n))

    def make_acc():
        return dict(
            rank_sum=np.zeros(n, dtype=np.int64),
            rank_sumsq=np.zeros(n, dtype=np.int64),
            topk_count=np.zeros(n, dtype=np.int64),
            min_rank=np.full(n, np.iinfo(np.int64).max, dtype=np.int64),
            max_rank=np.zeros(n, dtype=np.int64),
            min_count=np.zeros(n, dtype=np.int64),
            max_count=np.zeros(n, dtype=np.int64),
            hist=np.zeros((n, n), dtype=np.int64),
        )

    def work(worker: int, acc: dict):
        for b in range(worker, n_batches, max(n_threads, 1)):
            start = starts[b]
            stop = min(start + _BATCH, n_runs)
            w = _batch_weights(gen, start, stop, m)
            if mean == ARITHMETIC:
                scores = w @ values.T
            else:
                scores = np.exp(w @ log_values.T)
            _kernels.mc_accumulate(
                scores, top_k, acc["rank_sum"], acc["rank_sumsq"], acc["topk_count"],
                acc["min_rank"], acc["max_rank"], acc["min_count"], acc["max_count"],
                acc["hist"])
            score_sums[b] = scores.sum(axis=0)
            score_sumsqs[b] = (scores * scores).sum(axis=0)

    if n_threads <= 1:
        accs = [make_acc()]
        work(0, accs[0])
    else:
        accs = [make_acc() for _ in range(n_threads)]
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            futures = [pool.submit(work, i, accs[i]) for i in range(n_threads)]
            for f in futures:
                f.result()

    acc = accs[0]
    for other in accs[1:]:
        acc["rank_sum"] += other["rank_sum"]
        acc["rank_sumsq"] += other["rank_sumsq"]
        acc["topk_count"] += other["topk_count"]
        acc["hist"] += other["hist"]
        lower = other["min_rank"] < acc["min_rank"]
        tie = other["min_rank"] == acc["min_rank"]
        acc["min_count"][tie] += other["min_count"][tie]
        acc["min_rank"][lower] = other["min_rank"][lower]
        acc["min_count"][lower] = other["min_count"][lower]
        higher = other["max_rank"] > acc["max_rank"]
        tie = other["max_rank"] == acc["max_rank"]
        acc["max_count"][tie] += other["max_count"][tie]
        acc["max_rank"][higher] = other["max_rank"][higher]
        acc["max_count"][higher] = other["max_count"][higher]

    score_sum = score_sums.sum(axis=0)
    score_sumsq = score_sumsqs.sum(axis=0)
    score_avg = score_sum / n_runs
    score_std = np.sqrt(np.maximum(score_sumsq / n_runs - score_avg ** 2, 0.0))
    rank_avg = acc["rank_sum"] / n_runs
    rank_std = np.sqrt(np.maximum(acc["rank_sumsq"] / n_runs - rank_avg ** 2, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        score_cv = np.where(score_avg != 0.0, score_std / score_avg, np.nan)
        rank_cv = np.where(rank_avg != 0.0, rank_std / rank_avg, np.nan)

    raw, rel, defined = _product(rank_avg, rank_std,
                                 acc["min_rank"].astype(float),
                                 acc["max_rank"].astype(float))
    stats = MonteCarloStats(
        labels=labels, n_runs=n_runs, mean_kind=mean, seed=gen.seed,
        top_k=top_k, group_size=group_size,
        score_avg=score_avg, score_std=score_std, score_cv=score_cv,
        rank_avg=rank_avg, rank_std=rank_std, rank_cv=rank_cv,
        prob_top_k=acc["topk_count"] / n_runs,
        group=np.zeros(n, dtype=np.int64),
        max_rank=acc["max_rank"], min_rank=acc["min_rank"],
        max_rank_count=acc["max_count"], min_rank_count=acc["min_count"],
        product_raw=raw, product_rel=rel, product_rel_defined=defined,
        rank_hist=acc["hist"])
    stats.group = assign_groups(stats, group_size)
    return stats


def _product(rank_avg, rank_std, min_rank, max_rank):
    raw = rank_avg * rank_std * min_rank * (max_rank - min_rank)
    low = raw.min() if raw.size else 0.0
    if low > 0.0:
        return raw, raw / low, True
    return raw, np.full_like(raw, np.nan), False


def product_heuristic(stats: MonteCarloStats):
    """Smaller-is-better product of rank average, rank spread, best rank,
    and rank range; the relative value divides by the smallest product and
    is undefined when that smallest product is zero."""
    return _product(stats.rank_avg, stats.rank_std,
                    stats.min_rank.astype(float), stats.max_rank.astype(float))


def assign_groups(stats: MonteCarloStats, group_size: int = DEFAULT_GROUP_SIZE) -> np.ndarray:
    """Bucket ranks into windows of group_size and give each row the bucket
    it lands in most often; ties go to the better (lower-rank) bucket."""
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    hist = stats.rank_hist
    n = hist.shape[0]
    edges = np.arange(0, n, group_size)
    bucket_counts = np.add.reduceat(hist, edges, axis=1)
    return np.argmax(bucket_counts, axis=1) + 1


REPORT_COLUMNS = (
    "name", "score_avg", "score_std", "score_cv", "rank_avg", "rank_std",
    "rank_cv", "prob_top_k", "group", "max_rank", "min_rank",
    "max_rank_count", "min_rank_count", "product", "product_raw",
)


def stats_rows(stats: MonteCarloStats, sort_by: str = "score"):
    """Report rows in the classic column order (name, score stats, rank
    stats, top-K probability, group, extremes, product).

    The ``product`` column holds the relative product when defined and the
    raw product otherwise; the raw value is always appended last.
    """
    if sort_by == "score":
        idx = np.lexsort((np.arange(stats.n_rows), -stats.score_avg))
    elif sort_by == "product":
        key = stats.product_rel if stats.product_rel_defined else stats.product_raw
        idx = np.lexsort((np.arange(stats.n_rows), key))
    elif sort_by == "none":
        idx = np.arange(stats.n_rows)
    else:
        raise ValueError("sort_by must be 'score', 'product', or 'none'")
    rows = []
    for i in idx:
        shown = stats.product_rel[i] if stats.product_rel_defined else stats.product_raw[i]
        rows.append((
            stats.labels[i], stats.score_avg[i], stats.score_std[i], stats.score_cv[i],
            stats.rank_avg[i], stats.rank_std[i], stats.rank_cv[i],
            stats.prob_top_k[i], int(stats.group[i]), int(stats.max_rank[i]),
            int(stats.min_rank[i]), int(stats.max_rank_count[i]),
            int(stats.min_rank_count[i]), shown, stats.product_raw[i],
        ))
    return rows
