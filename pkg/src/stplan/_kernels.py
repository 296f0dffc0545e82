"""Feasible-strategy enumeration kernels.

The exhaustive oracle, the non-dominated enumerator and the compromise brute
force all reduce to one primitive: generate every budget-feasible assignment
of per-facility options, where an option is either "skip" or one
(location, period) pair. The walk is depth-first over facilities with budget
pruning; with numba available it JIT-compiles to native code, otherwise a
vectorized numpy frontier expansion is used.

Set STPLAN_NO_NUMBA=1 to force the numpy path (e.g. for the benchmark).

Option coding, shared with the solver: option 0 is skip, option
1 + location * horizon + period activates at that (location, period). Leaves
keep a per-facility option index; everything downstream (objective values,
constraint filters, dominance checks) is vectorized numpy over the leaf array.
"""
from __future__ import annotations

import os

import numpy as np

BUDGET_TOL = 1e-9

_DISABLED = os.environ.get("STPLAN_NO_NUMBA", "").strip() not in ("", "0")
if _DISABLED:
    _njit = None
else:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _njit = None

USE_NUMBA = _njit is not None


class TooLarge(RuntimeError):
    """Raw option product exceeds the enumeration guard."""


def option_tables(n_locations: int, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """(location, period) per option index; -1 for the skip option."""
    n_opts = 1 + n_locations * horizon
    loc = np.full(n_opts, -1, dtype=np.int64)
    per = np.full(n_opts, -1, dtype=np.int64)
    for l in range(n_locations):
        for t in range(horizon):
            loc[1 + l * horizon + t] = l
            per[1 + l * horizon + t] = t
    return loc, per


def raw_candidates(n_facilities: int, n_locations: int, horizon: int) -> float:
    return float(1 + n_locations * horizon) ** n_facilities


def _guard_check(n: int, m: int, p: int, guard: float) -> None:
    if raw_candidates(n, m, p) > guard:
        raise TooLarge(
            f"{(1 + m * p)}^{n} candidate strategies exceed the enumeration guard {guard:g}")


# --- numba path ------------------------------------------------------------

def _dfs_walk(costs, budgets, opt_per, out, do_fill):
    """Iterative DFS over facilities; counts leaves, optionally filling `out`
    with the option row of each feasible leaf. Returns the leaf count."""
    n = costs.shape[0]
    n_opts = opt_per.shape[0]
    spent = np.zeros(budgets.shape[0])
    choice = np.zeros(n, dtype=np.int16)
    nxt = np.zeros(n, dtype=np.int64)  # next option to try per level
    rows = 0
    if n == 0:
        return 1
    level = 0
    while level >= 0:
        o = nxt[level]
        if o == n_opts:  # options exhausted: undo our placement and pop
            nxt[level] = 0
            level -= 1
            if level >= 0 and choice[level] > 0:
                spent[opt_per[choice[level]]] -= costs[level]
            continue
        nxt[level] = o + 1
        if o > 0:
            t = opt_per[o]
            if spent[t] + costs[level] > budgets[t] + BUDGET_TOL:
                continue
        choice[level] = o
        if level == n - 1:
            if do_fill:
                for k in range(n):
                    out[rows, k] = choice[k]
            rows += 1
            continue
        if o > 0:
            spent[opt_per[o]] += costs[level]
        level += 1
    return rows


if USE_NUMBA:
    _dfs_walk_jit = _njit(cache=False)(_dfs_walk)


def _feasible_choices_numba(costs, budgets, opt_per):
    n = costs.shape[0]
    empty = np.empty((0, n), dtype=np.int16)
    count = _dfs_walk_jit(costs, budgets, opt_per, empty, False)
    out = np.empty((count, n), dtype=np.int16)
    _dfs_walk_jit(costs, budgets, opt_per, out, True)
    return out


# --- numpy fallback ---------------------------------------------------------

def _feasible_choices_numpy(costs, budgets, opt_per):
    n = costs.shape[0]
    n_opts = opt_per.shape[0]
    choices = np.zeros((1, 0), dtype=np.int16)
    spent = np.zeros((1, budgets.shape[0]))
    for i in range(n):
        parts_c = []
        parts_s = []
        for o in range(n_opts):
            if o == 0:
                keep = np.ones(len(choices), dtype=bool)
                add = None
            else:
                t = opt_per[o]
                keep = spent[:, t] + costs[i] <= budgets[t] + BUDGET_TOL
                add = t
            if not keep.any():
                continue
            block = np.empty((int(keep.sum()), i + 1), dtype=np.int16)
            block[:, :i] = choices[keep]
            block[:, i] = o
            parts_c.append(block)
            s = spent[keep].copy()
            if add is not None:
                s[:, add] += costs[i]
            parts_s.append(s)
        choices = np.concatenate(parts_c, axis=0)
        spent = np.concatenate(parts_s, axis=0)
    return choices


def feasible_choices(costs: np.ndarray, budgets: np.ndarray, n_locations: int,
                     horizon: int, guard: float = 1e9,
                     use_numba: bool | None = None) -> np.ndarray:
    """All budget-feasible option rows, shape (N, n_facilities), int16.

    Raises TooLarge when the raw candidate product (1 + m*p)^n exceeds the
    guard; the actual work is budget-pruned and usually far smaller. The two
    backends enumerate the same set (kernel-equivalence is pinned by a test);
    use_numba overrides the env-selected default, mainly for the benchmark.
    """
    costs = np.ascontiguousarray(costs, dtype=np.float64)
    budgets = np.ascontiguousarray(budgets, dtype=np.float64)
    n = costs.shape[0]
    _guard_check(n, n_locations, horizon, guard)
    _, opt_per = option_tables(n_locations, horizon)
    if n == 0:
        return np.zeros((1, 0), dtype=np.int16)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        if not USE_NUMBA:
            raise RuntimeError("numba path requested but unavailable")
        return _feasible_choices_numba(costs, budgets, opt_per)
    return _feasible_choices_numpy(costs, budgets, opt_per)


def count_feasible(costs, budgets, n_locations, horizon, guard: float = 1e9) -> int:
    """Number of budget-feasible strategies (cheap pass, no leaf storage)."""
    costs = np.ascontiguousarray(costs, dtype=np.float64)
    budgets = np.ascontiguousarray(budgets, dtype=np.float64)
    _guard_check(costs.shape[0], n_locations, horizon, guard)
    _, opt_per = option_tables(n_locations, horizon)
    if costs.shape[0] == 0:
        return 1
    if USE_NUMBA:
        empty = np.empty((0, costs.shape[0]), dtype=np.int16)
        return int(_dfs_walk_jit(costs, budgets, opt_per, empty, False))
    return len(_feasible_choices_numpy(costs, budgets, opt_per))


def option_values(choices: np.ndarray, per_option: np.ndarray) -> np.ndarray:
    """Accumulate per-leaf values: per_option has shape (n, n_opts) or
    (n, n_opts, K); returns (N,) or (N, K). Summation runs in facility order
    so values are bit-identical to a sequential accumulation."""
    n = choices.shape[1]
    if per_option.ndim == 2:
        acc = np.zeros(choices.shape[0])
    else:
        acc = np.zeros((choices.shape[0], per_option.shape[2]))
    for i in range(n):
        acc += per_option[i][choices[:, i].astype(np.int64)]
    return acc
