"""Exact optimization over 0-1 strategies.

maximize() is a depth-first branch-and-bound over facilities in input order;
brute_force() is the independent exhaustive oracle built on the enumeration
kernels. Both share the deterministic tie-break: among equal-value optima the
lexicographically smallest activation triple sequence wins (triples sorted by
facility, then location, then period; shorter prefix first).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .model import ProblemInstance, Strategy

MAX = "max"
MIN = "min"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LinearObjective:
    """A linear functional of the activation variables: coefficients[i, l, t]
    is the objective gain of activating facility i at location l in period t."""

    coefficients: np.ndarray  # (n, m, p)
    sense: str = MAX
    name: str = ""

    def __post_init__(self):
        arr = np.array(self.coefficients, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "coefficients", arr)
        if self.sense not in (MAX, MIN):
            raise ValueError(f"sense must be {MAX!r} or {MIN!r}")

    def value(self, strategy: Strategy) -> float:
        total = 0.0
        for i, l, t in strategy.activations:
            total += float(self.coefficients[i, l, t])
        return total


@dataclass(frozen=True)
class LinearConstraint:
    """Objective-style functional required to reach at least `rhs`."""

    coefficients: np.ndarray
    rhs: float
    name: str = ""

    def __post_init__(self):
        arr = np.array(self.coefficients, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "coefficients", arr)

    def value(self, strategy: Strategy) -> float:
        return float(sum(self.coefficients[i, l, t] for i, l, t in strategy.activations))

    def satisfied(self, strategy: Strategy, tol: float = 1e-9) -> bool:
        return self.value(strategy) >= self.rhs - tol


@dataclass(frozen=True)
class SolveResult:
    strategy: Strategy
    objective_value: float
    status: str
    nodes_explored: int = 0


def _per_option_coef(instance: ProblemInstance, coefficients: np.ndarray) -> np.ndarray:
    """(n, n_opts) per-option coefficients under the kernel option coding."""
    n, m, p = instance.n_facilities, instance.n_locations, instance.horizon
    out = np.zeros((n, 1 + m * p))
    flat = np.asarray(coefficients, dtype=float).reshape(n, m * p)
    out[:, 1:] = flat
    return out


def _option_meta(instance: ProblemInstance):
    return _kernels.option_tables(instance.n_locations, instance.horizon)


def _precedence_ok(instance: ProblemInstance, assignment: dict[int, tuple[int, int]]) -> bool:
    for a, b in instance.precedence:
        if b in assignment:
            if a not in assignment or assignment[a][1] > assignment[b][1]:
                return False
    return True


class _Search:
    """Shared DFS machinery for branch and bound over per-facility options."""

    def __init__(self, instance: ProblemInstance,
                 constraints: Sequence[LinearConstraint] = (), audit: bool = False):
        self.inst = instance
        self.n = instance.n_facilities
        self.m = instance.n_locations
        self.p = instance.horizon
        self.opt_loc, self.opt_per = _option_meta(instance)
        self.n_opts = 1 + self.m * self.p
        self.constraints = list(constraints)
        self.cons_opt = [_per_option_coef(instance, c.coefficients) for c in self.constraints]
        # best attainable constraint contribution per facility, ignoring budget
        self.cons_suffix = []
        for co in self.cons_opt:
            best = co.max(axis=1)
            suff = np.zeros(self.n + 1)
            suff[:-1] = best[::-1].cumsum()[::-1]
            self.cons_suffix.append(suff)
        self.audit = audit
        self.audit_margin = np.inf
        self.nodes = 0

    def option_order(self, coef_opt: np.ndarray) -> list[list[int]]:
        """Branches per facility: skip first, then options by coefficient
        descending (ties by option index for determinism)."""
        orders = []
        for i in range(self.n):
            opts = sorted(range(1, self.n_opts), key=lambda o: (-coef_opt[i, o], o))
            orders.append([0] + opts)
        return orders

    def constraint_can_complete(self, level: int, cons_ach: list[float], tol: float = 1e-9) -> bool:
        for k, c in enumerate(self.constraints):
            if cons_ach[k] + self.cons_suffix[k][level] < c.rhs - tol:
                return False
        return True

    def leaf_feasible(self, assignment: dict[int, tuple[int, int]], cons_ach: list[float]) -> bool:
        if not _precedence_ok(self.inst, assignment):
            return False
        for k, c in enumerate(self.constraints):
            if cons_ach[k] < c.rhs - 1e-9:
                return False
        return True


def _strategy_key(assignment: dict[int, tuple[int, int]]) -> tuple:
    return tuple(sorted((i, l, t) for i, (l, t) in assignment.items()))


def maximize(instance: ProblemInstance, objective: LinearObjective,
             constraints: Sequence[LinearConstraint] = (),
             audit: bool = False) -> SolveResult:
    """Exact maximum of a linear objective over feasible strategies.

    Depth-first branch and bound over facilities in input order; the node
    upper bound is the accumulated value plus each remaining facility's best
    option ignoring budget. A node survives pruning whenever its bound ties
    the incumbent, so the lexicographic tie-break is exact.
    """
    sign = 1.0 if objective.sense == MAX else -1.0
    coef_opt = _per_option_coef(instance, objective.coefficients) * sign
    s = _Search(instance, constraints, audit)
    best_per_fac = np.maximum(coef_opt.max(axis=1), 0.0) if s.n else np.zeros(0)
    suffix = np.zeros(s.n + 1)
    if s.n:
        suffix[:-1] = best_per_fac[::-1].cumsum()[::-1]
    orders = s.option_order(coef_opt)

    best_val = -np.inf
    best_key: tuple | None = None
    spent = np.zeros(s.p)
    assignment: dict[int, tuple[int, int]] = {}
    budgets = instance.budgets
    costs = instance.costs

    # value and constraint totals are passed down, never undone in place:
    # += / -= backtracking would drift by rounding and break exact tie checks
    def rec(level: int, value: float, cons_ach: tuple[float, ...]):
        nonlocal best_val, best_key
        s.nodes += 1
        if level == s.n:
            if not s.leaf_feasible(assignment, cons_ach):
                return
            key = _strategy_key(assignment)
            if value > best_val or (value == best_val and (best_key is None or key < best_key)):
                best_val = value
                best_key = key
            return
        # rounding in the suffix sums must never prune an exact-value tie, so
        # the cut carries a small slack; incumbent updates stay exact
        bound = value + suffix[level]
        if bound < best_val - 1e-9 * (1.0 + abs(best_val)):
            if s.audit:
                # bound soundness re-check: pruning must leave real slack
                assert best_val - bound > 0, (bound, best_val)
                s.audit_margin = min(s.audit_margin, best_val - bound)
            return
        if not s.constraint_can_complete(level, cons_ach):
            return
        for o in orders[level]:
            if o == 0:
                rec(level + 1, value, cons_ach)
                continue
            t = int(s.opt_per[o])
            if spent[t] + costs[level] > budgets[t] + 1e-9:
                continue
            ok = True
            for a, b in instance.precedence:
                if b == level and a in assignment and assignment[a][1] > t:
                    ok = False  # full precedence is re-checked at the leaf
            if not ok:
                continue
            spent[t] += costs[level]
            assignment[level] = (int(s.opt_loc[o]), t)
            nxt = tuple(c + s.cons_opt[k][level, o] for k, c in enumerate(cons_ach))
            rec(level + 1, value + coef_opt[level, o], nxt)
            del assignment[level]
            spent[t] -= costs[level]

    rec(0, 0.0, tuple(0.0 for _ in s.constraints))
    if best_key is None:
        return SolveResult(Strategy(), 0.0, INFEASIBLE, s.nodes)
    strategy = Strategy(best_key)
    return SolveResult(strategy, objective.value(strategy), OPTIMAL, s.nodes)


def solve_minimax(instance: ProblemInstance,
                  deviations: Sequence[tuple[LinearObjective, float]],
                  constraints: Sequence[LinearConstraint] = ()) -> SolveResult:
    """Minimize the maximum relative deviation (ideal - value)/ideal over the
    given (objective, ideal) pairs. Ideals must be positive. The returned
    objective_value is the attained minimax deviation."""
    if not deviations:
        raise ValueError("at least one deviation required")
    for _, ideal in deviations:
        if ideal <= 0:
            raise ValueError(f"relative deviation undefined for ideal {ideal:g}")
    K = len(deviations)
    ideals = np.array([ideal for _, ideal in deviations])
    coef_opts = np.stack([_per_option_coef(instance, obj.coefficients)
                          for obj, _ in deviations])  # (K, n, n_opts)
    s = _Search(instance, constraints)
    # optimistic remaining contribution per member
    suffix = np.zeros((K, s.n + 1))
    for k in range(K):
        best = np.maximum(coef_opts[k].max(axis=1), 0.0)
        suffix[k, :-1] = best[::-1].cumsum()[::-1]
    # branch on the sum of member coefficients, a reasonable greedy order
    orders = s.option_order(coef_opts.sum(axis=0))

    best_mm = np.inf
    best_key: tuple | None = None
    spent = np.zeros(s.p)
    assignment: dict[int, tuple[int, int]] = {}

    # member achievements are passed down, never undone in place (see maximize)
    def rec(level: int, ach: np.ndarray, cons_ach: tuple[float, ...]):
        nonlocal best_mm, best_key
        s.nodes += 1
        if level == s.n:
            if not s.leaf_feasible(assignment, cons_ach):
                return
            mm = float(((ideals - ach) / ideals).max())
            key = _strategy_key(assignment)
            if mm < best_mm or (mm == best_mm and (best_key is None or key < best_key)):
                best_mm = mm
                best_key = key
            return
        lb = float(((ideals - (ach + suffix[:, level])) / ideals).max())
        if lb > best_mm + 1e-9 * (1.0 + abs(best_mm)):  # slack keeps exact ties alive
            return
        if not s.constraint_can_complete(level, cons_ach):
            return
        for o in orders[level]:
            if o == 0:
                rec(level + 1, ach, cons_ach)
                continue
            t = int(s.opt_per[o])
            if spent[t] + instance.costs[level] > instance.budgets[t] + 1e-9:
                continue
            skip = False
            for a, b in instance.precedence:
                if b == level and a in assignment and assignment[a][1] > t:
                    skip = True
            if skip:
                continue
            spent[t] += instance.costs[level]
            assignment[level] = (int(s.opt_loc[o]), t)
            nxt_cons = tuple(c + s.cons_opt[k][level, o] for k, c in enumerate(cons_ach))
            rec(level + 1, ach + coef_opts[:, level, o], nxt_cons)
            del assignment[level]
            spent[t] -= instance.costs[level]

    rec(0, np.zeros(K), tuple(0.0 for _ in s.constraints))
    if best_key is None:
        return SolveResult(Strategy(), np.inf, INFEASIBLE, s.nodes)
    strategy = Strategy(best_key)
    vals = np.array([obj.value(strategy) for obj, _ in deviations])
    mm = float(((ideals - vals) / ideals).max())
    return SolveResult(strategy, mm, OPTIMAL, s.nodes)


# --- exhaustive oracle -------------------------------------------------------


def _enumerate(instance: ProblemInstance, constraints: Sequence[LinearConstraint],
               guard: float) -> np.ndarray:
    choices = _kernels.feasible_choices(
        instance.costs, instance.budgets, instance.n_locations, instance.horizon, guard)
    opt_loc, opt_per = _option_meta(instance)
    if instance.precedence and len(choices):
        mask = np.ones(len(choices), dtype=bool)
        for a, b in instance.precedence:
            ca, cb = choices[:, a].astype(np.int64), choices[:, b].astype(np.int64)
            ta, tb = opt_per[ca], opt_per[cb]
            mask &= (cb == 0) | ((ca != 0) & (ta <= tb))
        choices = choices[mask]
    for c in constraints:
        vals = _kernels.option_values(choices, _per_option_coef(instance, c.coefficients))
        choices = choices[vals >= c.rhs - 1e-9]
    return choices


def _choices_to_strategy(instance: ProblemInstance, row: np.ndarray) -> Strategy:
    opt_loc, opt_per = _option_meta(instance)
    acts = [(i, int(opt_loc[o]), int(opt_per[o])) for i, o in enumerate(row.astype(int)) if o]
    return Strategy(tuple(acts))


def _lex_best(instance: ProblemInstance, choices: np.ndarray) -> Strategy:
    return min(_choices_to_strategy(instance, row) for row in choices)


def brute_force(instance: ProblemInstance, objective: LinearObjective | None = None,
                deviations: Sequence[tuple[LinearObjective, float]] = (),
                constraints: Sequence[LinearConstraint] = (),
                guard: float = 1e9) -> SolveResult:
    """Exhaustive-enumeration optimum; the testing oracle for maximize and
    solve_minimax. Exactly one of objective / deviations must be given."""
    if (objective is None) == (not deviations):
        raise ValueError("provide either an objective or deviations")
    choices = _enumerate(instance, constraints, guard)
    if len(choices) == 0:
        return SolveResult(Strategy(), 0.0 if objective is not None else np.inf,
                           INFEASIBLE, 0)
    if objective is not None:
        sign = 1.0 if objective.sense == MAX else -1.0
        vals = _kernels.option_values(
            choices, _per_option_coef(instance, objective.coefficients) * sign)
        top = choices[vals == vals.max()]
        strategy = _lex_best(instance, top)
        return SolveResult(strategy, objective.value(strategy), OPTIMAL, len(choices))
    ideals = np.array([ideal for _, ideal in deviations])
    if (ideals <= 0).any():
        raise ValueError("relative deviation undefined for nonpositive ideals")
    per_opt = np.stack([_per_option_coef(instance, obj.coefficients)
                        for obj, _ in deviations], axis=2)  # (n, n_opts, K)
    vals = _kernels.option_values(choices, per_opt)  # (N, K)
    devs = (ideals[None, :] - vals) / ideals[None, :]
    mm = devs.max(axis=1)
    top = choices[mm == mm.min()]
    strategy = _lex_best(instance, top)
    achieved = np.array([obj.value(strategy) for obj, _ in deviations])
    value = float(((ideals - achieved) / ideals).max())
    return SolveResult(strategy, value, OPTIMAL, len(choices))


def count_feasible(instance: ProblemInstance,
                   constraints: Sequence[LinearConstraint] = (),
                   guard: float = 1e9) -> int:
    """Number of feasible strategies under the accumulated constraints."""
    return len(_enumerate(instance, constraints, guard))


def enumerate_nondominated(instance: ProblemInstance,
                           objectives: Sequence[LinearObjective],
                           constraints: Sequence[LinearConstraint] = (),
                           guard: float = 1e9) -> list[tuple[Strategy, np.ndarray]]:
    """All Pareto-maximal objective vectors over feasible strategies, one
    lexicographically-smallest witness strategy per vector. Sorted by vector,
    descending, for deterministic output."""
    if not objectives:
        raise ValueError("at least one objective required")
    choices = _enumerate(instance, constraints, guard)
    if len(choices) == 0:
        return []
    per_opt = np.stack([_per_option_coef(instance, o.coefficients) for o in objectives], axis=2)
    vals = _kernels.option_values(choices, per_opt)  # (N, K)
    vecs, inverse = np.unique(vals, axis=0, return_inverse=True)
    # sweep in descending lexicographic order: any dominator of a vector sorts
    # before it, so each vector only needs checking against the kept set
    order = np.lexsort(vecs.T[::-1])[::-1]
    kept: list[int] = []
    for idx in order:
        v = vecs[idx]
        if kept:
            front = vecs[kept]
            if np.any(np.all(front >= v[None, :], axis=1)
                      & np.any(front > v[None, :], axis=1)):
                continue
        kept.append(int(idx))
    out = []
    for idx in kept:
        rows = choices[inverse == idx]
        out.append((_lex_best(instance, rows), vecs[idx].copy()))
    out.sort(key=lambda sv: tuple(-sv[1]))
    return out
