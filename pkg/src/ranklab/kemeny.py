"""Weight-free ranking: per-attribute rankings, pairwise precedence
counts, exact minimum-disagreement aggregation (by binary program and by
an independent subset DP), the average-rank shortcut, and footrule
distances.

The aggregate ranking minimizes the total number of pairwise
disagreements with the input rankings. Ties in attribute values are
broken by row index before counting precedences, so every input ranking
is a strict order and ``n_ab + n_ba`` always equals the number of input
rankings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, lp
from .enforce import BudgetExhausted
from .scoring import Ranking, rank_by_score

ILP_MAX_ITEMS = 25
DP_MAX_ITEMS = 20


@dataclass(frozen=True)
class RankTable:
    """Several strict rankings over one item set.

    ``ranks[r, i]`` is the 1-based rank of item i in ranking r; sources
    name where each ranking came from (an attribute or an external list).
    """

    items: tuple[str, ...]
    ranks: np.ndarray
    sources: tuple[str, ...]

    def __post_init__(self):
        ranks = np.asarray(self.ranks, dtype=np.int64)
        object.__setattr__(self, "ranks", ranks)
        n = len(self.items)
        if ranks.ndim != 2 or ranks.shape[1] != n:
            raise ValueError("ranks must be (n_rankings, n_items)")
        if ranks.shape[0] != len(self.sources):
            raise ValueError("one source tag per ranking")
        expected = np.arange(1, n + 1)
        for r in range(ranks.shape[0]):
            if not np.array_equal(np.sort(ranks[r]), expected):
                raise ValueError(f"ranking {self.sources[r]!r} is not a permutation of 1..n")

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def n_rankings(self) -> int:
        return self.ranks.shape[0]


def per_attribute_ranks(matrix) -> RankTable:
    """Rank the rows independently by each attribute (descending value,
    ties to the lower row index)."""
    if hasattr(matrix, "values") and hasattr(matrix, "labels"):
        values = np.asarray(matrix.values, dtype=float)
        items = tuple(matrix.labels)
        sources = tuple(matrix.columns)
    else:
        values = np.asarray(matrix, dtype=float)
        items = tuple(str(i) for i in range(values.shape[0]))
        sources = tuple(f"attr_{j}" for j in range(values.shape[1]))
    ranks = np.empty((values.shape[1], values.shape[0]), dtype=np.int64)
    for j in range(values.shape[1]):
        ranks[j] = rank_by_score(values[:, j]).ranks
    return RankTable(items=items, ranks=ranks, sources=sources)


def precedence_counts(table: RankTable) -> np.ndarray:
    """n x n matrix whose [b, a] entry counts rankings placing b ahead of a."""
    n = table.n_items
    counts = np.zeros((n, n), dtype=np.int64)
    for r in range(table.n_rankings):
        ranks = table.ranks[r]
        counts += ranks[:, None] < ranks[None, :]
    return counts


def total_disagreements(precedence: np.ndarray, ranking: Ranking) -> int:
    """Disagreement count of an aggregate order against the counted inputs."""
    order = ranking.order
    cost = 0
    for pos, a in enumerate(order):
        cost += int(precedence[order[pos + 1:], a].sum())
    return cost


def _pair_index(n: int):
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


def kemeny_ilp(precedence: np.ndarray, items=None,
               node_budget: int = lp.DEFAULT_NODE_BUDGET) -> Ranking:
    """Minimum-disagreement order via a binary program.

    One variable per unordered pair (x_ab = 1 when a precedes b; the
    reverse orientation is substituted away), with triangle constraints
    forcing a transitive tournament. The tournament is read back into an
    order by descending win counts.
    """
    P = np.asarray(precedence)
    n = P.shape[0]
    if items is None:
        items = tuple(str(i) for i in range(n))
    if n > ILP_MAX_ITEMS:
        raise ValueError(f"aggregation by ILP is limited to {ILP_MAX_ITEMS} items")
    if n <= 1:
        return Ranking(order=np.arange(n), ranks=np.arange(1, n + 1), labels=tuple(items))

    model = lp.LpModel(f"aggregate_{n}")
    pair_id = {}
    terms = []
    constant = 0.0
    for a, b in _pair_index(n):
        vid = model.add_var(f"x_{a}_{b}", kind="binary")
        pair_id[(a, b)] = vid
        coef = float(P[b, a] - P[a, b])
        constant += float(P[a, b])
        if coef != 0.0:
            terms.append((vid, coef))
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                tri = [(pair_id[(a, b)], 1.0), (pair_id[(b, c)], 1.0),
                       (pair_id[(a, c)], -1.0)]
                model.add_constraint(tri, "<=", 1.0, name=f"tri_hi_{a}_{b}_{c}")
                model.add_constraint(tri, ">=", 0.0, name=f"tri_lo_{a}_{b}_{c}")
    model.set_objective("minimize", terms, constant=constant)
    result = lp.solve_ilp(model, node_budget=node_budget)
    if result.status == lp.NODE_LIMIT:
        raise BudgetExhausted("aggregation node budget exhausted")
    if result.status != lp.OPTIMAL:
        raise RuntimeError(f"aggregation program unexpectedly {result.status}")

    wins = np.zeros(n, dtype=np.int64)
    for (a, b), vid in pair_id.items():
        ahead = result.assignment[model.variables[vid].name] > 0.5
        if ahead:
            wins[a] += 1
        else:
            wins[b] += 1
    if sorted(wins) != list(range(n)):
        raise RuntimeError("tournament is not transitive; triangle constraints violated")
    order = np.argsort(-wins, kind="stable")
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(1, n + 1)
    ranking = Ranking(order=order, ranks=ranks, labels=tuple(items))
    cost = total_disagreements(P, ranking)
    if abs(cost - result.objective) > 1e-6:
        raise RuntimeError("order cost does not match the program objective")
    return ranking


def kemeny_dp(precedence: np.ndarray, items=None) -> Ranking:
    """Minimum-disagreement order by dynamic programming over item
    subsets (O(2^n * n^2)); exact, independent of the binary program."""
    P = np.asarray(precedence, dtype=np.int64)
    n = P.shape[0]
    if items is None:
        items = tuple(str(i) for i in range(n))
    if n > DP_MAX_ITEMS:
        raise ValueError(f"subset DP is limited to {DP_MAX_ITEMS} items")
    if n <= 1:
        return Ranking(order=np.arange(n), ranks=np.arange(1, n + 1), labels=tuple(items))
    dp, choice = _kernels.kemeny_dp_table(P)
    full = (1 << n) - 1
    order = np.empty(n, dtype=np.int64)
    mask = full
    for pos in range(n - 1, -1, -1):
        v = int(choice[mask])
        order[pos] = v
        mask ^= 1 << v
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(1, n + 1)
    return Ranking(order=order, ranks=ranks, labels=tuple(items))


def kemeny_cost(precedence: np.ndarray) -> int:
    """Optimal disagreement count (via the subset DP)."""
    P = np.asarray(precedence, dtype=np.int64)
    if P.shape[0] <= 1:
        return 0
    dp, _ = _kernels.kemeny_dp_table(P)
    return int(dp[(1 << P.shape[0]) - 1])


def mean_ranks(table: RankTable) -> np.ndarray:
    return table.ranks.mean(axis=0)


def average_rank(table: RankTable) -> Ranking:
    """Order items by ascending mean rank, ties to the lower item index."""
    means = mean_ranks(table)
    n = table.n_items
    order = np.lexsort((np.arange(n), means))
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(1, n + 1)
    return Ranking(order=order, ranks=ranks, labels=table.items)


def footrule(r1: Ranking, r2: Ranking) -> int:
    """Sum of absolute rank differences over the shared item set."""
    if r1.labels is not None and r2.labels is not None:
        if set(r1.labels) != set(r2.labels):
            raise ValueError("rankings cover different item sets")
        pos2 = {label: r2.ranks[i] for i, label in enumerate(r2.labels)}
        other = np.array([pos2[label] for label in r1.labels])
    else:
        if len(r1) != len(r2):
            raise ValueError("rankings cover different item counts")
        other = r2.ranks
    return int(np.abs(r1.ranks - other).sum())


def parse_rankings_text(text: str, delimiter: str | None = None) -> RankTable:
    """Read external rankings: a header of ranking names, then one row per
    rank position listing each ranking's item at that position. Every
    column must mention the same item set exactly once."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) < 2:
        raise ValueError("need a header row and at least one rank row")
    if delimiter is None:
        delimiter = "\t" if "\t" in lines[0] else ","
    sources = tuple(cell.strip() for cell in lines[0].split(delimiter))
    columns = [[] for _ in sources]
    for ln in lines[1:]:
        cells = [cell.strip() for cell in ln.split(delimiter)]
        if len(cells) != len(sources):
            raise ValueError(f"row has {len(cells)} cells, expected {len(sources)}")
        for j, cell in enumerate(cells):
            columns[j].append(cell)
    items = tuple(columns[0])
    item_set = set(items)
    if len(item_set) != len(items):
        raise ValueError(f"duplicate item in ranking {sources[0]!r}")
    ranks = np.empty((len(sources), len(items)), dtype=np.int64)
    index = {name: i for i, name in enumerate(items)}
    for j, col in enumerate(columns):
        if set(col) != item_set or len(col) != len(items):
            raise ValueError(f"ranking {sources[j]!r} does not cover the same items")
        for pos, name in enumerate(col):
            ranks[j, index[name]] = pos + 1
    return RankTable(items=items, ranks=ranks, sources=sources)


def aggregation_rows(table: RankTable, aggregate: Ranking, average: Ranking):
    """Report rows: per-source ranks plus the aggregate and average ranks,
    ordered by the aggregate; the footer carries each source's footrule
    distance to the aggregate (unnormalized)."""
    header = ["name"] + [f"rank_{s}" for s in table.sources] + ["kemeny_rank", "average_rank"]
    rows = []
    for i in aggregate.order:
        rows.append([table.items[i]] + [int(table.ranks[r, i]) for r in range(table.n_rankings)]
                    + [int(aggregate.ranks[i]), int(average.ranks[i])])
    distances = []
    for r in range(table.n_rankings):
        source_ranking = Ranking(
            order=np.argsort(table.ranks[r], kind="stable"),
            ranks=table.ranks[r], labels=table.items)
        distances.append(footrule(source_ranking, aggregate))
    footer = ["footrule_to_kemeny"] + distances + [0, footrule(average, aggregate)]
    return header, rows, footer
