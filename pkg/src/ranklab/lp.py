"""Declarative linear programs, a two-phase simplex solver, and
branch-and-bound for binary variables.

The solver is a dense tableau simplex with Bland's anti-cycling rule,
sized for models in the few-thousand-constraint range. Strict
inequalities never appear in a model; callers encode ``> 0`` as
``>= epsilon``. Feasibility is checked to ``FEASIBILITY_TOL`` and
binary integrality to ``INTEGRALITY_TOL``. Models can also be written
out in the lp_solve text dialect for cross-checking with an external
solver (see :func:`emit_lp_format`).
"""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field

import numpy as np

from ._kernels import (
    SIMPLEX_ITER_LIMIT,
    SIMPLEX_OPTIMAL,
    SIMPLEX_UNBOUNDED,
    simplex_iterate,
)

FEASIBILITY_TOL = 1e-7
INTEGRALITY_TOL = 1e-6
DEFAULT_MAX_ITER = 1_000_000
DEFAULT_NODE_BUDGET = 100_000

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
NODE_LIMIT = "node_limit"
NUMERICAL_FAILURE = "numerical_failure"

CONTINUOUS = "continuous"
BINARY = "binary"

_RELATIONS = ("<=", ">=", "=")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class LpError(ValueError):
    """Invalid model construction or use."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lb: float | None
    ub: float | None


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[int, float], ...]
    relation: str
    rhs: float


@dataclass
class SolveResult:
    status: str
    assignment: dict[str, float] | None = None
    objective: float | None = None
    iterations: int = 0
    nodes: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


class LpModel:
    """A linear program with continuous and binary variables.

    Variables default to bounds [0, +inf); binaries carry implied bounds
    [0, 1]. Constraints and the objective reference variables by the id
    returned from :meth:`add_var` (or by name).
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.sense: str = "minimize"
        self.objective_terms: tuple[tuple[int, float], ...] = ()
        self.objective_constant: float = 0.0
        self._by_name: dict[str, int] = {}

    # -- construction -----------------------------------------------------

    def add_var(self, name: str, *, kind: str = CONTINUOUS,
                lb: float | None = 0.0, ub: float | None = None) -> int:
        if not _NAME_RE.match(name):
            raise LpError(f"invalid variable name {name!r}")
        if name in self._by_name:
            raise LpError(f"duplicate variable name {name!r}")
        if kind not in (CONTINUOUS, BINARY):
            raise LpError(f"unknown variable kind {kind!r}")
        if kind == BINARY:
            if lb not in (0.0, 0, None) or ub not in (1.0, 1, None):
                raise LpError("binary variables carry implied bounds [0, 1]")
            lb, ub = 0.0, 1.0
        else:
            if lb is not None and not math.isfinite(lb):
                raise LpError("lower bound must be finite or None")
            if ub is not None and not math.isfinite(ub):
                raise LpError("upper bound must be finite or None")
            if lb is not None and ub is not None and lb > ub:
                raise LpError(f"empty bound interval for {name!r}")
        vid = len(self.variables)
        self.variables.append(Variable(name, kind, lb, ub))
        self._by_name[name] = vid
        return vid

    def var_id(self, ref) -> int:
        if isinstance(ref, str):
            if ref not in self._by_name:
                raise LpError(f"unknown variable {ref!r}")
            return self._by_name[ref]
        vid = int(ref)
        if not 0 <= vid < len(self.variables):
            raise LpError(f"unknown variable id {vid}")
        return vid

    def _clean_terms(self, terms) -> tuple[tuple[int, float], ...]:
        combined: dict[int, float] = {}
        for ref, coef in terms:
            vid = self.var_id(ref)
            coef = float(coef)
            if not math.isfinite(coef):
                raise LpError("coefficients must be finite")
            combined[vid] = combined.get(vid, 0.0) + coef
        return tuple(sorted(combined.items()))

    def add_constraint(self, terms, relation: str, rhs: float,
                       name: str | None = None) -> int:
        if relation == "==":
            relation = "="
        if relation not in _RELATIONS:
            raise LpError(f"relation must be one of {_RELATIONS}")
        rhs = float(rhs)
        if not math.isfinite(rhs):
            raise LpError("rhs must be finite")
        cid = len(self.constraints)
        if name is None:
            name = f"c{cid + 1}"
        self.constraints.append(Constraint(name, self._clean_terms(terms), relation, rhs))
        return cid

    def set_objective(self, sense: str, terms, constant: float = 0.0) -> None:
        if sense not in ("minimize", "maximize"):
            raise LpError("sense must be 'minimize' or 'maximize'")
        constant = float(constant)
        if not math.isfinite(constant):
            raise LpError("objective constant must be finite")
        self.sense = sense
        self.objective_terms = self._clean_terms(terms)
        self.objective_constant = constant

    # -- views ------------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def binary_ids(self) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.kind == BINARY]

    def dense(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Constraint data as (rows, relations, rhs, objective) arrays.

        Relations are encoded -1 for <=, 0 for =, +1 for >=.
        """
        nv = self.n_vars
        nr = len(self.constraints)
        rows = np.zeros((nr, nv))
        rels = np.zeros(nr, dtype=np.int64)
        rhs = np.zeros(nr)
        rel_code = {"<=": -1, "=": 0, ">=": 1}
        for i, con in enumerate(self.constraints):
            for vid, coef in con.terms:
                rows[i, vid] = coef
            rels[i] = rel_code[con.relation]
            rhs[i] = con.rhs
        obj = np.zeros(nv)
        for vid, coef in self.objective_terms:
            obj[vid] = coef
        return rows, rels, rhs, obj

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([-np.inf if v.lb is None else v.lb for v in self.variables])
        ub = np.array([np.inf if v.ub is None else v.ub for v in self.variables])
        return lb, ub

    def evaluate_objective(self, assignment: dict[str, float]) -> float:
        total = self.objective_constant
        for vid, coef in self.objective_terms:
            total += coef * assignment[self.variables[vid].name]
        return total

    def max_violation(self, assignment: dict[str, float]) -> float:
        """Largest constraint/bound violation of an assignment."""
        worst = 0.0
        for v in self.variables:
            x = assignment[v.name]
            if v.lb is not None:
                worst = max(worst, v.lb - x)
            if v.ub is not None:
                worst = max(worst, x - v.ub)
        for con in self.constraints:
            lhs = sum(coef * assignment[self.variables[vid].name]
                      for vid, coef in con.terms)
            if con.relation == "<=":
                worst = max(worst, lhs - con.rhs)
            elif con.relation == ">=":
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        return worst


# ---------------------------------------------------------------------------
# Standard-form assembly and the two-phase driver.
# ---------------------------------------------------------------------------


@dataclass
class _StdForm:
    # trans[v] describes how original variable v maps to standard columns:
    # ("fixed", value) / ("shift", col, lb) / ("mirror", col, ub) /
    # ("free", col_pos, col_neg)
    trans: list[tuple]
    n_cols: int
    rows: np.ndarray
    rels: np.ndarray
    rhs: np.ndarray
    cost: np.ndarray
    cost_const: float
    infeasible_bounds: bool = False


def _standardize(rows, rels, rhs, cost, lb, ub) -> _StdForm:
    """Shift/mirror/split variables so every standard column is >= 0."""
    nv = cost.size
    trans: list[tuple] = []
    n_cols = 0
    extra_rows = []  # (col, limit) for two-sided bounds: x_col <= limit
    for v in range(nv):
        lo, hi = lb[v], ub[v]
        if lo > hi:
            return _StdForm([], 0, rows, rels, rhs, cost, 0.0, infeasible_bounds=True)
        if lo == hi:
            trans.append(("fixed", lo))
        elif np.isfinite(lo):
            trans.append(("shift", n_cols, lo))
            if np.isfinite(hi):
                extra_rows.append((n_cols, hi - lo))
            n_cols += 1
        elif np.isfinite(hi):
            trans.append(("mirror", n_cols, hi))
            n_cols += 1
        else:
            trans.append(("free", n_cols, n_cols + 1))
            n_cols += 2

    nr = rows.shape[0]
    std_rows = np.zeros((nr + len(extra_rows), n_cols))
    std_rhs = np.concatenate([rhs.copy(), np.zeros(len(extra_rows))])
    std_rels = np.concatenate([rels.copy(), np.full(len(extra_rows), -1, dtype=np.int64)])
    std_cost = np.zeros(n_cols)
    const = 0.0

    for v, tr in enumerate(trans):
        col = rows[:, v]
        if tr[0] == "fixed":
            std_rhs[:nr] -= col * tr[1]
            const += cost[v] * tr[1]
        elif tr[0] == "shift":
            std_rows[:nr, tr[1]] = col
            std_rhs[:nr] -= col * tr[2]
            std_cost[tr[1]] = cost[v]
            const += cost[v] * tr[2]
        elif tr[0] == "mirror":
            std_rows[:nr, tr[1]] = -col
            std_rhs[:nr] -= col * tr[2]
            std_cost[tr[1]] = -cost[v]
            const += cost[v] * tr[2]
        else:
            std_rows[:nr, tr[1]] = col
            std_rows[:nr, tr[2]] = -col
            std_cost[tr[1]] = cost[v]
            std_cost[tr[2]] = -cost[v]

    for i, (c, limit) in enumerate(extra_rows):
        std_rows[nr + i, c] = 1.0
        std_rhs[nr + i] = limit

    return _StdForm(trans, n_cols, std_rows, std_rels, std_rhs, std_cost, const)


def _recover(trans, x_cols) -> np.ndarray:
    x = np.zeros(len(trans))
    for v, tr in enumerate(trans):
        if tr[0] == "fixed":
            x[v] = tr[1]
        elif tr[0] == "shift":
            x[v] = tr[2] + x_cols[tr[1]]
        elif tr[0] == "mirror":
            x[v] = tr[2] - x_cols[tr[1]]
        else:
            x[v] = x_cols[tr[1]] - x_cols[tr[2]]
    return x


def _solve_dense(rows, rels, rhs, cost, lb, ub, max_iter) -> tuple[str, np.ndarray | None, int]:
    """Minimize cost.x over the given constraints; returns (status, x, iters)."""
    std = _standardize(rows, rels, rhs, cost, lb, ub)
    if std.infeasible_bounds:
        return INFEASIBLE, None, 0
    n_cols, nr = std.n_cols, std.rows.shape[0]

    if n_cols == 0:
        # every variable fixed: just check the rows
        ok = True
        for i in range(nr):
            r = std.rhs[i]
            if std.rels[i] == -1:
                ok &= r >= -FEASIBILITY_TOL
            elif std.rels[i] == 1:
                ok &= r <= FEASIBILITY_TOL
            else:
                ok &= abs(r) <= FEASIBILITY_TOL
        return (OPTIMAL, _recover(std.trans, np.zeros(0)), 0) if ok else (INFEASIBLE, None, 0)

    a = std.rows.copy()
    b = std.rhs.copy()
    rel = std.rels.copy()

    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0
    rel[flip] *= -1
    # a ">= 0" row needs no artificial once flipped to "<= 0"
    flat = (rel == 1) & (b == 0.0)
    a[flat] *= -1.0
    rel[flat] = -1

    is_le = rel == -1
    is_ge = rel == 1
    is_eq = rel == 0
    n_slack = int(is_le.sum() + is_ge.sum())
    n_art = int(is_ge.sum() + is_eq.sum())

    width = n_cols + n_slack + n_art + 1
    T = np.zeros((nr + 1, width))
    T[:nr, :n_cols] = a
    T[:nr, -1] = b
    basis = np.empty(nr, dtype=np.int64)

    s_at = n_cols
    a_at = n_cols + n_slack
    art_cols = []
    for i in range(nr):
        if is_le[i]:
            T[i, s_at] = 1.0
            basis[i] = s_at
            s_at += 1
        elif is_ge[i]:
            T[i, s_at] = -1.0
            s_at += 1
            T[i, a_at] = 1.0
            basis[i] = a_at
            art_cols.append(a_at)
            a_at += 1
        else:
            T[i, a_at] = 1.0
            basis[i] = a_at
            art_cols.append(a_at)
            a_at += 1

    iters_total = 0

    if n_art:
        # phase 1: minimize the sum of artificials
        T[-1] = 0.0
        for c in art_cols:
            T[-1, c] = 1.0
        for i in range(nr):
            if basis[i] >= n_cols + n_slack:
                T[-1] -= T[i]
        allowed = np.ones(width - 1, dtype=bool)
        status, it = simplex_iterate(T, basis, allowed, max_iter)
        iters_total += it
        if status == SIMPLEX_ITER_LIMIT:
            return ITERATION_LIMIT, None, iters_total
        if status == SIMPLEX_UNBOUNDED:
            return NUMERICAL_FAILURE, None, iters_total
        if -T[-1, -1] > FEASIBILITY_TOL:
            return INFEASIBLE, None, iters_total

        # clear artificials out of the basis; drop redundant rows
        art_start = n_cols + n_slack
        drop = []
        for i in range(nr):
            if basis[i] >= art_start:
                piv = -1
                for j in range(art_start):
                    if abs(T[i, j]) > 1e-9:
                        piv = j
                        break
                if piv < 0:
                    drop.append(i)
                else:
                    prow = T[i] / T[i, piv]
                    T[i] = prow
                    factors = T[:, piv].copy()
                    factors[i] = 0.0
                    T -= np.outer(factors, prow)
                    basis[i] = piv
        if drop:
            keep = np.setdiff1d(np.arange(nr), np.array(drop))
            T = np.vstack([T[keep], T[-1:]])
            basis = basis[keep]
            nr = basis.size
        T = np.delete(T, np.s_[art_start:art_start + n_art], axis=1)
        width = T.shape[1]

    # phase 2
    T[-1] = 0.0
    T[-1, :n_cols] = std.cost
    for i in range(nr):
        if basis[i] < n_cols and std.cost[basis[i]] != 0.0:
            T[-1] -= std.cost[basis[i]] * T[i]
    allowed = np.ones(width - 1, dtype=bool)
    status, it = simplex_iterate(T, basis, allowed, max_iter - iters_total)
    iters_total += it
    if status == SIMPLEX_ITER_LIMIT:
        return ITERATION_LIMIT, None, iters_total
    if status == SIMPLEX_UNBOUNDED:
        return UNBOUNDED, None, iters_total

    x_cols = np.zeros(width - 1)
    for i in range(nr):
        x_cols[basis[i]] = T[i, -1]
    return OPTIMAL, _recover(std.trans, x_cols[:n_cols]), iters_total


def _finish(model: LpModel, status: str, x: np.ndarray | None,
            iterations: int, nodes: int = 0) -> SolveResult:
    if status != OPTIMAL or x is None:
        return SolveResult(status=status, iterations=iterations, nodes=nodes)
    assignment = {v.name: float(x[i]) for i, v in enumerate(model.variables)}
    worst = model.max_violation(assignment)
    if worst > 10 * FEASIBILITY_TOL:
        return SolveResult(status=NUMERICAL_FAILURE, iterations=iterations, nodes=nodes)
    objective = model.evaluate_objective(assignment)
    return SolveResult(status=OPTIMAL, assignment=assignment,
                       objective=objective, iterations=iterations, nodes=nodes)


def solve_lp(model: LpModel, *, max_iter: int = DEFAULT_MAX_ITER) -> SolveResult:
    """Solve a continuous model by two-phase simplex (Bland's rule)."""
    if model.binary_ids():
        raise LpError("solve_lp handles continuous models; use solve_ilp")
    rows, rels, rhs, obj = model.dense()
    lb, ub = model.bounds()
    cost = obj if model.sense == "minimize" else -obj
    status, x, iters = _solve_dense(rows, rels, rhs, cost, lb, ub, max_iter)
    return _finish(model, status, x, iters)


@dataclass(order=True)
class _Node:
    bound: float
    tie: int
    fixings: dict[int, float] = field(compare=False)
    branch_var: int = field(compare=False)
    branch_frac: float = field(compare=False)


def solve_ilp(model: LpModel, *, max_iter: int = DEFAULT_MAX_ITER,
              node_budget: int = DEFAULT_NODE_BUDGET) -> SolveResult:
    """Exact branch-and-bound over the binary variables.

    Branches on the most fractional binary, explores nodes best-first by
    LP relaxation bound, and reports ``node_limit`` with the incumbent if
    the budget runs out. ``nodes`` counts child relaxations solved (0 when
    the root relaxation is already integral).
    """
    binaries = model.binary_ids()
    if not binaries:
        return solve_lp(model, max_iter=max_iter)
    rows, rels, rhs, obj = model.dense()
    lb0, ub0 = model.bounds()
    cost = obj if model.sense == "minimize" else -obj
    bin_arr = np.array(binaries, dtype=np.int64)

    iters_total = 0
    nodes = 0
    best_cost = np.inf
    best_x: np.ndarray | None = None

    def relax(fixings: dict[int, float]):
        nonlocal iters_total
        lb = lb0.copy()
        ub = ub0.copy()
        for vid, val in fixings.items():
            lb[vid] = ub[vid] = val
        status, x, iters = _solve_dense(rows, rels, rhs, cost, lb, ub, max_iter)
        iters_total += iters
        return status, x

    def frac_info(x: np.ndarray):
        vals = x[bin_arr]
        dist = np.minimum(np.abs(vals), np.abs(1.0 - vals))
        worst = int(np.argmax(dist))
        return (None if dist[worst] <= INTEGRALITY_TOL
                else (int(bin_arr[worst]), float(dist[worst])))

    status, x = relax({})
    if status in (ITERATION_LIMIT, NUMERICAL_FAILURE, UNBOUNDED):
        return SolveResult(status=status, iterations=iters_total)
    heap: list[_Node] = []
    tie = 0
    if status == OPTIMAL:
        info = frac_info(x)
        bound = float(cost @ x)
        if info is None:
            best_cost, best_x = bound, x
        else:
            heapq.heappush(heap, _Node(bound, tie, {}, info[0], info[1]))
            tie += 1

    budget_hit = False
    while heap:
        node = heapq.heappop(heap)
        if node.bound >= best_cost - 1e-9:
            break
        if nodes >= node_budget:
            budget_hit = True
            break
        for val in (0.0, 1.0):
            fixings = dict(node.fixings)
            fixings[node.branch_var] = val
            status, x = relax(fixings)
            nodes += 1
            if status == ITERATION_LIMIT:
                return SolveResult(status=ITERATION_LIMIT, iterations=iters_total, nodes=nodes)
            if status != OPTIMAL:
                continue
            bound = float(cost @ x)
            if bound >= best_cost - 1e-9:
                continue
            info = frac_info(x)
            if info is None:
                best_cost, best_x = bound, x
            else:
                heapq.heappush(heap, _Node(bound, tie, fixings, info[0], info[1]))
                tie += 1

    if budget_hit:
        result = _finish(model, OPTIMAL, best_x, iters_total, nodes) if best_x is not None \
            else SolveResult(status=NODE_LIMIT, iterations=iters_total, nodes=nodes)
        result.status = NODE_LIMIT
        return result
    if best_x is None:
        return SolveResult(status=INFEASIBLE, iterations=iters_total, nodes=nodes)
    return _finish(model, OPTIMAL, best_x, iters_total, nodes)


# ---------------------------------------------------------------------------
# lp_solve text dialect.
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    text = f"{value:.12g}"
    return "0" if text == "-0" else text


def _fmt_terms(terms, variables) -> str:
    if not terms:
        return "0"
    parts = []
    for vid, coef in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign}{_fmt(abs(coef))} {variables[vid].name}")
    return " ".join(parts)


def emit_lp_format(model: LpModel) -> str:
    """Render the model in the lp_solve LP text dialect.

    Layout: objective line (``min:``/``max:``), one constraint per line,
    explicit bound lines, and an ``int`` declaration listing the binary
    variables (their 0/1 bounds are emitted explicitly). Ordering follows
    variable and constraint insertion order, so output is deterministic.
    """
    lines = [f"/* {model.name} */"]
    sense = "min" if model.sense == "minimize" else "max"
    head = _fmt_terms(model.objective_terms, model.variables)
    if model.objective_constant:
        head += f" +{_fmt(model.objective_constant)}" if model.objective_constant > 0 \
            else f" -{_fmt(abs(model.objective_constant))}"
    lines.append(f"{sense}: {head};")
    for con in model.constraints:
        lines.append(f"{con.name}: {_fmt_terms(con.terms, model.variables)} "
                     f"{con.relation} {_fmt(con.rhs)};")
    ints = []
    for v in model.variables:
        if v.kind == BINARY:
            lines.append(f"{v.name} >= 0;")
            lines.append(f"{v.name} <= 1;")
            ints.append(v.name)
        else:
            if v.lb is None:
                lines.append(f"free {v.name};")
            elif v.lb != 0.0:
                lines.append(f"{v.name} >= {_fmt(v.lb)};")
            if v.ub is not None:
                lines.append(f"{v.name} <= {_fmt(v.ub)};")
    if ints:
        lines.append("int " + ", ".join(ints) + ";")
    return "\n".join(lines) + "\n"
