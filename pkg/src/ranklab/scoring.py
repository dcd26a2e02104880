"""Composite scoring, rankings, and domination tests.

Scores are weighted aggregates of a row's attributes: the arithmetic form
is the plain dot product ``s = A @ w``; the geometric form is
``exp(sum_j w_j * ln(a_ij))`` with attributes clamped at a small floor so
zero entries stay finite. Weight vectors are plain 1-D float arrays,
non-negative and summing to one; :func:`normalize_weights` is the one
place raw (unnormalized) weights are accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Attributes are clamped here before the logarithm in the geometric mean.
# Keeps zero attributes finite while preserving order among positive ones.
GEOMETRIC_FLOOR = 1e-6

WEIGHT_SUM_TOL = 1e-9


def normalize_weights(raw) -> np.ndarray:
    """Scale non-negative raw weights so they sum to one."""
    w = np.asarray(raw, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D vector")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must have a positive sum")
    return w / total


def uniform_weights(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("need at least one attribute")
    return np.full(m, 1.0 / m)


def check_weights(w, tol: float = WEIGHT_SUM_TOL) -> np.ndarray:
    """Validate an already-normalized weight vector and return it as float."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D vector")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if abs(w.sum() - 1.0) > tol:
        raise ValueError(f"weights must sum to 1 within {tol:g} (got {w.sum()!r})")
    return w


def score_arithmetic(values, weights) -> np.ndarray:
    """Weighted sum of attributes per row: s_i = sum_j w_j * a_ij."""
    a = np.asarray(values, dtype=float)
    w = check_weights(weights)
    if a.ndim != 2 or a.shape[1] != w.size:
        raise ValueError(f"attribute matrix is {a.shape}, weights have length {w.size}")
    return a @ w


def score_geometric(values, weights, floor: float = GEOMETRIC_FLOOR) -> np.ndarray:
    """Weighted geometric mean per row: exp(sum_j w_j * ln(max(a_ij, floor)))."""
    a = np.asarray(values, dtype=float)
    w = check_weights(weights)
    if a.ndim != 2 or a.shape[1] != w.size:
        raise ValueError(f"attribute matrix is {a.shape}, weights have length {w.size}")
    return np.exp(np.log(np.maximum(a, floor)) @ w)


@dataclass(frozen=True)
class Ranking:
    """A full ranking of rows.

    ``order[p]`` is the row occupying position ``p`` (position 0 = rank 1);
    ``ranks[i]`` is the 1-based rank of row ``i``. The two are mutually
    inverse permutations. When scores are attached they are non-increasing
    along ``order``.
    """

    order: np.ndarray
    ranks: np.ndarray
    scores: np.ndarray | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.int64)
        ranks = np.asarray(self.ranks, dtype=np.int64)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "ranks", ranks)
        n = order.size
        if ranks.size != n or n == 0:
            raise ValueError("order and ranks must be non-empty and equal length")
        if not np.array_equal(np.sort(order), np.arange(n)):
            raise ValueError("order must be a permutation of row indices")
        if not np.array_equal(ranks[order], np.arange(1, n + 1)):
            raise ValueError("ranks must be the 1-based inverse of order")
        if self.scores is not None:
            s = np.asarray(self.scores, dtype=float)
            object.__setattr__(self, "scores", s)
            if s.size != n:
                raise ValueError("scores length must match order")
            along = s[order]
            if np.any(np.diff(along) > 1e-12):
                raise ValueError("scores must be non-increasing along order")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels length must match order")

    def __len__(self) -> int:
        return self.order.size

    def label_at(self, position: int) -> str:
        row = int(self.order[position])
        return self.labels[row] if self.labels is not None else str(row)


def rank_by_score(scores, labels=None) -> Ranking:
    """Rank rows by descending score, ties broken by original row index."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("scores must be a non-empty 1-D vector")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    order = np.argsort(-s, kind="stable")
    ranks = np.empty(s.size, dtype=np.int64)
    ranks[order] = np.arange(1, s.size + 1)
    if labels is not None:
        labels = tuple(labels)
    return Ranking(order=order, ranks=ranks, scores=s, labels=labels)


def strictly_dominates(ax, ay) -> bool:
    """True iff ax >= ay in every attribute (so ax scores at least as high
    under any non-negative weights)."""
    x = np.asarray(ax, dtype=float)
    y = np.asarray(ay, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("attribute rows must be 1-D and equal length")
    return bool(np.all(x >= y))


def partially_dominates(ax, ay) -> bool:
    """True iff ay does not strictly dominate ax."""
    return not strictly_dominates(ay, ax)
