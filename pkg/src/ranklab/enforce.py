"""Weight programs that force ranking outcomes.

Four analyses over an attribute matrix, all phrased as linear programs on
the weight simplex: can a target row reach rank 1, can a given top-k
prefix be reproduced, which orderings block an infeasible prefix (slack
diagnosis), how close to uniform can enforcing weights be, and the best
rank a row can reach under any weights (a binary program counting the
score constraints that cannot hold).

Ordering requirements are enforced on weighted score differences, i.e.
as row dot products ``(a_x - a_y) . w >= epsilon``, with ``epsilon = 0``
permitting ties. Every feasible result is verified by re-scoring with the
returned weights before it is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lp
from .scoring import (
    Ranking,
    check_weights,
    rank_by_score,
    score_arithmetic,
    score_geometric,
    uniform_weights,
)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"

DEFAULT_EPSILON = 0.0005
SLACK_TOL = 1e-7
VERIFY_TOL = 1e-9


class BudgetExhausted(RuntimeError):
    """A solver ran out of its node or iteration budget."""


@dataclass(frozen=True)
class EnforceConfig:
    epsilon: float = DEFAULT_EPSILON
    big_m_slack: float = 1000.0
    big_m_rank: float = 10.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.big_m_slack <= 0 or self.big_m_rank <= 0:
            raise ValueError("big-M constants must be positive")


@dataclass
class FeasibilityReport:
    status: str
    weights: np.ndarray | None = None
    violated_pairs: list[tuple[str, int, int]] | None = None
    spread: float | None = None
    model: lp.LpModel | None = field(default=None, repr=False)
    result: lp.SolveResult | None = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


@dataclass
class BestRank:
    rank: int
    weights: np.ndarray | None
    forced: int
    model: lp.LpModel | None = field(default=None, repr=False)
    result: lp.SolveResult | None = field(default=None, repr=False)


@dataclass
class BestRankReport:
    labels: tuple[str, ...]
    deterministic: np.ndarray
    random: np.ndarray
    optimal: np.ndarray
    witnesses: list[np.ndarray | None]


def _values_labels(matrix, labels=None):
    if hasattr(matrix, "values") and hasattr(matrix, "labels"):
        return np.asarray(matrix.values, dtype=float), tuple(matrix.labels)
    values = np.asarray(matrix, dtype=float)
    if labels is None:
        labels = tuple(str(i) for i in range(values.shape[0]))
    return values, tuple(labels)


def difference_rows(matrix, pivot: int, others) -> np.ndarray:
    """One row per other: attribute difference (pivot row - other row)."""
    values, _ = _values_labels(matrix)
    others = list(others)
    if pivot in others:
        raise ValueError("pivot must not appear in others")
    return values[pivot][None, :] - values[others]


def _pareto_keep(D: np.ndarray) -> np.ndarray:
    """Indices of rows not implied by another row.

    With w >= 0, ``D_j . w >= eps`` implies ``D_i . w >= eps`` whenever
    D_i >= D_j componentwise, so such rows i are redundant. Among equal
    rows the first is kept.
    """
    r = D.shape[0]
    if r <= 1:
        return np.arange(r)
    le = np.all(D[None, :, :] <= D[:, None, :], axis=2)  # le[i, j]: D_j <= D_i
    redundant = np.zeros(r, dtype=bool)
    for i in range(r):
        others = le[i].copy()
        others[i] = False
        if not others.any():
            continue
        js = np.flatnonzero(others)
        strict = ~le[js, i]
        redundant[i] = bool(np.any(strict | (js < i)))
    return np.flatnonzero(~redundant)


def _ordering_rows(values: np.ndarray, order, k: int):
    """Difference rows for a top-k prefix: adjacent pairs within the
    prefix, then the k-th row against every row outside the prefix.

    Returns (D, descriptors); descriptor ("adjacent", i, j) means row i
    must outscore row j, ("boundary", i, j) likewise for the cut row.
    """
    order = [int(r) for r in order]
    n = values.shape[0]
    if k < 1 or k > len(order) or k > n:
        raise ValueError("need 1 <= k <= len(order) and k <= n")
    if len(set(order)) != len(order):
        raise ValueError("order must not repeat rows")
    rows = []
    desc = []
    for i in range(k - 1):
        rows.append(values[order[i]] - values[order[i + 1]])
        desc.append(("adjacent", order[i], order[i + 1]))
    prefix = set(order[:k])
    cut = order[k - 1]
    for r in range(n):
        if r not in prefix:
            rows.append(values[cut] - values[r])
            desc.append(("boundary", cut, r))
    return np.array(rows), desc


def _weight_model(name: str, m: int) -> tuple[lp.LpModel, list[int]]:
    model = lp.LpModel(name)
    w_ids = [model.add_var(f"w_{j}") for j in range(m)]
    model.add_constraint([(w, 1.0) for w in w_ids], "=", 1.0, name="weight_sum")
    return model, w_ids


def _margin_terms(row: np.ndarray, w_ids) -> list[tuple[int, float]]:
    return [(w_ids[j], float(row[j])) for j in range(row.size) if row[j] != 0.0]


def _extract_weights(result: lp.SolveResult, m: int) -> np.ndarray:
    w = np.array([result.assignment[f"w_{j}"] for j in range(m)])
    w = np.maximum(w, 0.0)
    return w / w.sum()


def _verify_prefix(values: np.ndarray, w: np.ndarray,
                   epsilon: float, prefix: list[int]) -> None:
    """Check a feasibility witness by re-scoring: every enforced ordering
    holds with margin >= epsilon - tol, and for a strict margin the exact
    re-scored ranking reproduces the prefix (epsilon = 0 permits ties, so
    there the margin check is the whole contract)."""
    if not prefix:
        return
    s = score_arithmetic(values, w)
    n = values.shape[0]
    floor = epsilon - VERIFY_TOL
    for i in range(len(prefix) - 1):
        if s[prefix[i]] - s[prefix[i + 1]] < floor:
            raise RuntimeError("witness violates an adjacent ordering constraint")
    outside = [q for q in range(n) if q not in set(prefix)]
    if outside and s[prefix[-1]] - max(s[q] for q in outside) < floor:
        raise RuntimeError("witness violates a boundary ordering constraint")
    if epsilon > 10 * VERIFY_TOL:
        ranks = rank_by_score(s).ranks
        if not np.array_equal(ranks[prefix], np.arange(1, len(prefix) + 1)):
            raise RuntimeError("witness does not reproduce the enforced prefix")


def _feasibility(values, D, cfg, prefix, name, prune=True) -> FeasibilityReport:
    d_solve = D
    if prune and D.shape[0] > 1:
        d_solve = D[_pareto_keep(D)]
    model, w_ids = _weight_model(name, values.shape[1])
    for i, row in enumerate(d_solve):
        model.add_constraint(_margin_terms(row, w_ids), ">=", cfg.epsilon,
                             name=f"gap_{i}")
    model.set_objective("minimize", [])
    result = lp.solve_lp(model)
    if result.status == lp.ITERATION_LIMIT:
        raise BudgetExhausted("simplex iteration budget exhausted")
    if result.status != lp.OPTIMAL:
        return FeasibilityReport(INFEASIBLE, model=model, result=result)
    w = _extract_weights(result, values.shape[1])
    _verify_prefix(values, w, cfg.epsilon, prefix)
    return FeasibilityReport(FEASIBLE, weights=w, model=model, result=result)


def feasible_top1(matrix, target: int, cfg: EnforceConfig = EnforceConfig(),
                  prune: bool = True) -> FeasibilityReport:
    """Is there a weight vector putting the target row at rank 1?"""
    values, _ = _values_labels(matrix)
    others = [i for i in range(values.shape[0]) if i != target]
    if not others:
        raise ValueError("need at least two rows")
    D = difference_rows(values, target, others)
    return _feasibility(values, D, cfg, [target], f"top1_row{target}", prune)


def feasible_topk(matrix, order, k: int, cfg: EnforceConfig = EnforceConfig(),
                  prune: bool = True) -> FeasibilityReport:
    """Is there a weight vector reproducing order[:k] as the exact top k?"""
    values, _ = _values_labels(matrix)
    D, desc = _ordering_rows(values, order, k)
    return _feasibility(values, D, cfg, list(order)[:k], f"top{k}", prune)


def diagnose_topk(matrix, order, k: int, cfg: EnforceConfig = EnforceConfig(),
                  count_mode: str = "l1") -> FeasibilityReport:
    """Relax each ordering constraint with a slack and report which ones
    stay violated.

    ``l1`` minimizes the big-M-weighted total slack (a linear program);
    ``exact`` minimizes the number of nonzero slacks via binary
    indicators. Nonzero slacks mark orderings that would have to be
    reversed for the prefix to become enforceable.
    """
    if count_mode not in ("l1", "exact"):
        raise ValueError("count_mode must be 'l1' or 'exact'")
    values, _ = _values_labels(matrix)
    D, desc = _ordering_rows(values, order, k)
    needed = cfg.epsilon - float(D.min()) if D.size else 0.0
    if cfg.big_m_slack <= needed:
        raise ValueError(f"big_m_slack={cfg.big_m_slack} cannot cover the "
                         f"largest possible violation {needed:.3g}")
    model, w_ids = _weight_model(f"diagnose_top{k}_{count_mode}", values.shape[1])
    d_ids = []
    for i, row in enumerate(D):
        d_i = model.add_var(f"d_{i}")
        d_ids.append(d_i)
        model.add_constraint(_margin_terms(row, w_ids) + [(d_i, 1.0)], ">=",
                             cfg.epsilon, name=f"gap_{i}")
    if count_mode == "l1":
        model.set_objective("minimize", [(d, cfg.big_m_slack) for d in d_ids])
        result = lp.solve_lp(model)
    else:
        y_ids = []
        for i, d_i in enumerate(d_ids):
            y_i = model.add_var(f"y_{i}", kind="binary")
            y_ids.append(y_i)
            model.add_constraint([(d_i, 1.0), (y_i, -cfg.big_m_slack)], "<=", 0.0,
                                 name=f"ind_{i}")
        model.set_objective("minimize", [(y, 1.0) for y in y_ids])
        result = lp.solve_ilp(model)
    if result.status in (lp.ITERATION_LIMIT, lp.NODE_LIMIT):
        raise BudgetExhausted(f"solver budget exhausted ({result.status})")
    if result.status != lp.OPTIMAL:
        raise RuntimeError(f"slack diagnosis unexpectedly {result.status}")
    slacks = np.array([result.assignment[f"d_{i}"] for i in range(len(d_ids))])
    violated = [desc[i] for i in np.flatnonzero(slacks > SLACK_TOL)]
    w = _extract_weights(result, values.shape[1])
    if violated:
        return FeasibilityReport(INFEASIBLE, weights=w, violated_pairs=violated,
                                 model=model, result=result)
    _verify_prefix(values, w, cfg.epsilon, list(order)[:k])
    return FeasibilityReport(FEASIBLE, weights=w, violated_pairs=[],
                             model=model, result=result)


def appealing_weights(matrix, order, k: int, cfg: EnforceConfig = EnforceConfig(),
                      mode: str = "topk") -> FeasibilityReport:
    """Enforcing weights with the smallest max-min spread (closest to
    uniform). Feasibility is identical to the plain variant; only the
    objective changes. ``k = 0`` means no ordering constraints, which
    yields exactly uniform weights."""
    values, _ = _values_labels(matrix)
    if mode not in ("top1", "topk"):
        raise ValueError("mode must be 'top1' or 'topk'")
    if k == 0:
        D = np.zeros((0, values.shape[1]))
        prefix = []
    elif mode == "top1":
        target = int(list(order)[0])
        others = [i for i in range(values.shape[0]) if i != target]
        D = difference_rows(values, target, others)
        prefix = [target]
    else:
        D, _ = _ordering_rows(values, order, k)
        prefix = list(order)[:k]

    m = values.shape[1]
    model, w_ids = _weight_model(f"appealing_{mode}_{k}", m)
    w_max = model.add_var("w_max")
    w_min = model.add_var("w_min")
    for j in range(m):
        model.add_constraint([(w_ids[j], 1.0), (w_max, -1.0)], "<=", 0.0,
                             name=f"below_max_{j}")
        model.add_constraint([(w_ids[j], 1.0), (w_min, -1.0)], ">=", 0.0,
                             name=f"above_min_{j}")
    keep = _pareto_keep(D) if D.shape[0] > 1 else np.arange(D.shape[0])
    for i, row in enumerate(D[keep]):
        model.add_constraint(_margin_terms(row, w_ids), ">=", cfg.epsilon,
                             name=f"gap_{i}")
    model.set_objective("minimize", [(w_max, 1.0), (w_min, -1.0)])
    result = lp.solve_lp(model)
    if result.status == lp.ITERATION_LIMIT:
        raise BudgetExhausted("simplex iteration budget exhausted")
    if result.status != lp.OPTIMAL:
        return FeasibilityReport(INFEASIBLE, model=model, result=result)
    w = _extract_weights(result, m)
    _verify_prefix(values, w, cfg.epsilon, prefix)
    spread = float(w.max() - w.min())
    if abs(spread - result.objective) > 1e-6:
        raise RuntimeError("spread bound does not match the achieved spread")
    return FeasibilityReport(FEASIBLE, weights=w, spread=spread,
                             model=model, result=result)


def build_best_rank_model(matrix, target: int, cfg: EnforceConfig = EnforceConfig()) -> lp.LpModel:
    """The full best-rank binary program (no presolve), mainly for export."""
    values, _ = _values_labels(matrix)
    others = [i for i in range(values.shape[0]) if i != target]
    D = difference_rows(values, target, others)
    model, w_ids = _weight_model(f"best_rank_row{target}", values.shape[1])
    y_terms = []
    for pos, row in enumerate(D):
        i = others[pos]
        d_i = model.add_var(f"d_{i}")
        y_i = model.add_var(f"y_{i}", kind="binary")
        model.add_constraint(_margin_terms(row, w_ids) + [(d_i, 1.0)], ">=",
                             cfg.epsilon, name=f"gap_{i}")
        model.add_constraint([(d_i, 1.0), (y_i, -cfg.big_m_rank)], "<=", 0.0,
                             name=f"ind_{i}")
        y_terms.append((y_i, 1.0))
    model.set_objective("minimize", y_terms)
    return model


def best_rank(matrix, target: int, cfg: EnforceConfig = EnforceConfig(),
              node_budget: int = lp.DEFAULT_NODE_BUDGET) -> BestRank:
    """Best rank the target can attain under any weights: one plus the
    minimum number of score constraints no weight vector can satisfy."""
    values, _ = _values_labels(matrix)
    n, m = values.shape
    others = [i for i in range(n) if i != target]
    if not others:
        raise ValueError("need at least two rows")
    D = difference_rows(values, target, others)
    needed = cfg.epsilon - float(D.min())
    if cfg.big_m_rank <= needed:
        raise ValueError(f"big_m_rank={cfg.big_m_rank} cannot cover the "
                         f"largest possible violation {needed:.3g}")

    # a row whose best single-attribute margin is still below epsilon can
    # never be outscored (weights live on the simplex); a row beaten by
    # epsilon in every attribute never constrains the search
    maxima = D.max(axis=1)
    minima = D.min(axis=1)
    forced = maxima < cfg.epsilon
    free = minima >= cfg.epsilon
    open_rows = np.flatnonzero(~forced & ~free)

    model, w_ids = _weight_model(f"best_rank_row{target}", m)
    y_names = []
    for pos in open_rows:
        i = others[pos]
        d_i = model.add_var(f"d_{i}")
        y_i = model.add_var(f"y_{i}", kind="binary")
        model.add_constraint(_margin_terms(D[pos], w_ids) + [(d_i, 1.0)], ">=",
                             cfg.epsilon, name=f"gap_{i}")
        model.add_constraint([(d_i, 1.0), (y_i, -cfg.big_m_rank)], "<=", 0.0,
                             name=f"ind_{i}")
        y_names.append(f"y_{i}")
    model.set_objective("minimize", [(name, 1.0) for name in y_names])
    result = lp.solve_ilp(model, node_budget=node_budget)
    if result.status in (lp.NODE_LIMIT, lp.ITERATION_LIMIT):
        raise BudgetExhausted(f"best-rank search budget exhausted ({result.status})")
    if result.status != lp.OPTIMAL:
        raise RuntimeError(f"best-rank program unexpectedly {result.status}")
    demotions = int(forced.sum()) + int(round(sum(result.assignment[nm] for nm in y_names)))
    rank = 1 + demotions
    w = _extract_weights(result, m)
    achieved = 1 + int(np.sum(D @ w < cfg.epsilon - VERIFY_TOL))
    if achieved != rank:
        raise RuntimeError(f"witness achieves rank {achieved}, expected {rank}")
    return BestRank(rank=rank, weights=w, forced=int(forced.sum()),
                    model=model, result=result)


def baseline_ranking(matrix) -> Ranking:
    """Uniform-weight geometric ranking, the deterministic reference order."""
    values, labels = _values_labels(matrix)
    scores = score_geometric(values, uniform_weights(values.shape[1]))
    return rank_by_score(scores, labels=labels)


def best_rank_table(matrix, cfg: EnforceConfig = EnforceConfig(),
                    mc_stats=None) -> BestRankReport:
    """Per row: deterministic rank (uniform geometric), best sampled rank,
    and the provably best rank with its witness weights."""
    values, labels = _values_labels(matrix)
    n = values.shape[0]
    deterministic = baseline_ranking(matrix).ranks
    random_rank = (np.asarray(mc_stats.min_rank, dtype=np.int64)
                   if mc_stats is not None else np.zeros(n, dtype=np.int64))
    optimal = np.zeros(n, dtype=np.int64)
    witnesses: list[np.ndarray | None] = []
    for i in range(n):
        found = best_rank(matrix, i, cfg)
        optimal[i] = found.rank
        witnesses.append(found.weights)
    return BestRankReport(labels=labels, deterministic=deterministic,
                          random=random_rank, optimal=optimal, witnesses=witnesses)
