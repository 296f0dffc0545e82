"""Continuous budget-allocation extension.

Here the activation variables become money: x[i, l, t] is the budget granted
to facility i at location l in period t, evaluations are read as performance
per unit of budget, and the single-activation constraint disappears. Each
period is an independent LP (nothing couples periods), solved exactly with a
dense two-phase simplex under Bland's rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import objectives
from .model import FeasibilityReport, ProblemInstance, Violation

CHECK_TOL = 1e-6
PIVOT_TOL = 1e-9


class InfeasibleProgram(ValueError):
    """The bound system admits no allocation."""


@dataclass(frozen=True)
class BudgetBounds:
    """Optional per-period caps and floors; a missing key means unconstrained.

    facility bounds apply to a facility's total across locations, location
    bounds to a location's total across facilities.
    """

    facility_max: dict[tuple[int, int], float] = field(default_factory=dict)
    facility_min: dict[tuple[int, int], float] = field(default_factory=dict)
    location_max: dict[tuple[int, int], float] = field(default_factory=dict)
    location_min: dict[tuple[int, int], float] = field(default_factory=dict)

    def errors(self, instance: ProblemInstance) -> list[str]:
        errs = []
        for label, bounds, high in (("facility", self.facility_max, instance.n_facilities),
                                    ("facility", self.facility_min, instance.n_facilities),
                                    ("location", self.location_max, instance.n_locations),
                                    ("location", self.location_min, instance.n_locations)):
            for (k, t), v in bounds.items():
                if not 0 <= k < high:
                    errs.append(f"{label} bound references unknown {label} {k}")
                if not 0 <= t < instance.horizon:
                    errs.append(f"{label} bound references unknown period {t}")
                if v < 0:
                    errs.append(f"{label} bound ({k},{t}) is negative")
        for (key, t), lo in self.facility_min.items():
            hi = self.facility_max.get((key, t))
            if hi is not None and lo > hi:
                errs.append(f"facility ({key},{t}) min {lo:g} > max {hi:g}")
        for (key, t), lo in self.location_min.items():
            hi = self.location_max.get((key, t))
            if hi is not None and lo > hi:
                errs.append(f"location ({key},{t}) min {lo:g} > max {hi:g}")
        return errs

    def vacuous_maxima(self, instance: ProblemInstance) -> list[str]:
        """Defined maxima exceeding the period budget; harmless but flagged."""
        out = []
        for (i, t), v in sorted(self.facility_max.items()):
            if 0 <= t < instance.horizon and v > instance.budgets[t]:
                out.append(f"facility ({i},{t}) max {v:g} exceeds period budget "
                           f"{instance.budgets[t]:g}")
        for (l, t), v in sorted(self.location_max.items()):
            if 0 <= t < instance.horizon and v > instance.budgets[t]:
                out.append(f"location ({l},{t}) max {v:g} exceeds period budget "
                           f"{instance.budgets[t]:g}")
        return out


@dataclass(frozen=True)
class BudgetAllocation:
    """Nonnegative money per (facility, location, period); zeros omitted when
    serialized."""

    amounts: np.ndarray  # (n, m, p)

    def __post_init__(self):
        arr = np.array(self.amounts, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "amounts", arr)

    def total(self) -> float:
        return float(self.amounts.sum())

    def nonzero(self) -> list[tuple[int, int, int, float]]:
        return [(int(i), int(l), int(t), float(self.amounts[i, l, t]))
                for i, l, t in np.argwhere(self.amounts > 0)]


@dataclass(frozen=True)
class LinearProgram:
    instance: ProblemInstance
    bounds: BudgetBounds
    coefficients: np.ndarray  # (n, m, p) objective gain per unit of budget

    @property
    def n_variables(self) -> int:
        n, m, p = self.coefficients.shape
        return n * m * p


def build_program(instance: ProblemInstance, bounds: BudgetBounds) -> LinearProgram:
    """Assemble the per-unit-budget objective and validate the bound system.

    The objective reuses the discounted overall performance with evaluations
    interpreted per unit of budget, so the coefficient of x[i, l, tau] is the
    weighted evaluation row times the discount suffix sum over t > tau.
    """
    errs = bounds.errors(instance)
    if errs:
        raise ValueError("; ".join(errs))
    coef = objectives.overall_objective(instance).coefficients
    return LinearProgram(instance, bounds, coef)


def _period_system(program: LinearProgram, t: int):
    """(c, A_ub, b_ub, A_ge, b_ge) over the n*m variables of period t."""
    inst = program.instance
    n, m = inst.n_facilities, inst.n_locations
    nv = n * m
    c = program.coefficients[:, :, t].reshape(nv)
    rows_ub, rhs_ub, rows_ge, rhs_ge = [], [], [], []
    rows_ub.append(np.ones(nv))
    rhs_ub.append(float(inst.budgets[t]))
    for i in range(n):
        sel = np.zeros(nv)
        sel[i * m:(i + 1) * m] = 1.0
        hi = program.bounds.facility_max.get((i, t))
        lo = program.bounds.facility_min.get((i, t))
        if hi is not None:
            rows_ub.append(sel)
            rhs_ub.append(float(hi))
        if lo is not None and lo > 0:
            rows_ge.append(sel)
            rhs_ge.append(float(lo))
    for l in range(m):
        sel = np.zeros(nv)
        sel[l::m] = 1.0
        hi = program.bounds.location_max.get((l, t))
        lo = program.bounds.location_min.get((l, t))
        if hi is not None:
            rows_ub.append(sel)
            rhs_ub.append(float(hi))
        if lo is not None and lo > 0:
            rows_ge.append(sel)
            rhs_ge.append(float(lo))
    return c, np.array(rows_ub), np.array(rhs_ub), \
        (np.array(rows_ge) if rows_ge else np.zeros((0, nv))), np.array(rhs_ge)


def simplex_max(c, A_ub, b_ub, A_ge, b_ge):
    """Maximize c.x subject to A_ub x <= b_ub, A_ge x >= b_ge, x >= 0.

    Dense two-phase primal simplex with Bland's rule (smallest eligible
    index enters; ratio ties leave by smallest basis index), so it cannot
    cycle and is fully deterministic. Right-hand sides must be nonnegative.
    Returns (x, value); raises InfeasibleProgram when phase 1 cannot zero
    the artificials.
    """
    c = np.asarray(c, dtype=float)
    if (np.asarray(b_ub) < 0).any() or (len(b_ge) and (np.asarray(b_ge) < 0).any()):
        raise ValueError("right-hand sides must be nonnegative")
    n = c.shape[0]
    n_ub, n_ge = len(b_ub), len(b_ge)
    m_rows = n_ub + n_ge
    # columns: x | slacks(ub) | surplus(ge) | artificials(ge)
    n_cols = n + n_ub + n_ge + n_ge
    T = np.zeros((m_rows, n_cols + 1))
    if n_ub:
        T[:n_ub, :n] = A_ub
        T[:n_ub, n:n + n_ub] = np.eye(n_ub)
        T[:n_ub, -1] = b_ub
    if n_ge:
        T[n_ub:, :n] = A_ge
        T[n_ub:, n + n_ub:n + n_ub + n_ge] = -np.eye(n_ge)
        T[n_ub:, n + n_ub + n_ge:n_cols] = np.eye(n_ge)
        T[n_ub:, -1] = b_ge
    basis = np.concatenate([np.arange(n, n + n_ub),
                            np.arange(n + n_ub + n_ge, n_cols)]).astype(int)
    art_start = n + n_ub + n_ge

    def pivot(row, col):
        T[row] /= T[row, col]
        for r in range(m_rows):
            if r != row and abs(T[r, col]) > PIVOT_TOL:
                T[r] -= T[r, col] * T[row]
        basis[row] = col

    def run_phase(cost, allowed):
        while True:
            # reduced costs for a maximization of `cost`
            y = cost[basis] @ T[:, :n_cols]
            red = cost[:n_cols] - y
            enter = -1
            for j in range(n_cols):
                if allowed[j] and red[j] > PIVOT_TOL:
                    enter = j
                    break
            if enter < 0:
                return
            best_ratio = np.inf
            leave = -1
            for r in range(m_rows):
                a = T[r, enter]
                if a > PIVOT_TOL:
                    ratio = T[r, -1] / a
                    if ratio < best_ratio - PIVOT_TOL or (
                            abs(ratio - best_ratio) <= PIVOT_TOL
                            and (leave < 0 or basis[r] < basis[leave])):
                        best_ratio = ratio
                        leave = r
            if leave < 0:
                raise RuntimeError("unbounded linear program")
            pivot(leave, enter)

    allowed = np.ones(n_cols, dtype=bool)
    if n_ge:
        phase1 = np.zeros(n_cols)
        phase1[art_start:n_cols] = -1.0  # maximize -(sum of artificials)
        run_phase(phase1, allowed)
        art_sum = float(sum(T[r, -1] for r in range(m_rows) if basis[r] >= art_start))
        if art_sum > 1e-7:
            raise InfeasibleProgram(f"minimum bounds unsatisfiable (residual {art_sum:g})")
        # drive any degenerate artificial out of the basis
        for r in range(m_rows):
            if basis[r] >= art_start:
                for j in range(art_start):
                    if abs(T[r, j]) > PIVOT_TOL:
                        pivot(r, j)
                        break
        allowed[art_start:] = False
    cost = np.zeros(n_cols)
    cost[:n] = c
    run_phase(cost, allowed)
    x = np.zeros(n_cols)
    for r in range(m_rows):
        if basis[r] < n_cols:
            x[basis[r]] = T[r, -1]
    xs = x[:n]
    return xs, float(c @ xs)


def solve_lp(program: LinearProgram, decompose: bool = True):
    """Optimal allocation and objective. Periods never couple, so the default
    solves one LP per period and concatenates; decompose=False assembles the
    single whole-horizon LP instead (used as an oracle for the equivalence
    test). A program whose objective is identically zero falls back to the
    least-allocation rule: minimize total money subject to the same bounds.
    """
    inst = program.instance
    n, m, p = program.coefficients.shape
    degenerate = not np.any(program.coefficients)
    if decompose:
        amounts = np.zeros((n, m, p))
        total = 0.0
        for t in range(p):
            c, A_ub, b_ub, A_ge, b_ge = _period_system(program, t)
            if degenerate:
                x, _ = simplex_max(-np.ones_like(c), A_ub, b_ub, A_ge, b_ge)
                total += 0.0
            else:
                x, v = simplex_max(c, A_ub, b_ub, A_ge, b_ge)
                total += v
            amounts[:, :, t] = x.reshape(n, m)
        return BudgetAllocation(amounts), total
    nv = n * m * p
    blocks = [_period_system(program, t) for t in range(p)]
    c_all = np.concatenate([b[0] for b in blocks])
    A_ub = np.zeros((sum(len(b[2]) for b in blocks), nv))
    b_ub = np.concatenate([b[2] for b in blocks])
    A_ge = np.zeros((sum(len(b[4]) for b in blocks), nv))
    b_ge = np.concatenate([b[4] for b in blocks])
    r_ub = r_ge = 0
    for t, (c, aub, bub, age, bge) in enumerate(blocks):
        cols = slice(t * n * m, (t + 1) * n * m)
        A_ub[r_ub:r_ub + len(bub), cols] = aub
        r_ub += len(bub)
        if len(bge):
            A_ge[r_ge:r_ge + len(bge), cols] = age
            r_ge += len(bge)
    if degenerate:
        x, _ = simplex_max(-np.ones(nv), A_ub, b_ub, A_ge, b_ge)
        total = 0.0
    else:
        x, total = simplex_max(c_all, A_ub, b_ub, A_ge, b_ge)
    # whole-horizon variables are ordered period-major
    amounts = np.moveaxis(x.reshape(p, n, m), 0, 2)
    return BudgetAllocation(amounts), total


def check_allocation(instance: ProblemInstance, bounds: BudgetBounds,
                     allocation: BudgetAllocation) -> FeasibilityReport:
    """Verify every constraint of the continuous model with 1e-6 slack."""
    a = allocation.amounts
    n, m, p = instance.n_facilities, instance.n_locations, instance.horizon
    if a.shape != (n, m, p):
        raise ValueError(f"allocation shape {a.shape} != {(n, m, p)}")
    violations = []
    if (a < -CHECK_TOL).any():
        i, l, t = np.argwhere(a < -CHECK_TOL)[0]
        violations.append(Violation("negative", f"allocation ({i},{l},{t}) is negative",
                                    facility=int(i), period=int(t)))
    for t in range(p):
        spend = float(a[:, :, t].sum())
        if spend > instance.budgets[t] + CHECK_TOL:
            violations.append(Violation(
                "budget", f"period {t} total {spend:g} exceeds budget {instance.budgets[t]:g}",
                period=t))
    fac_tot = a.sum(axis=1)  # (n, p)
    loc_tot = a.sum(axis=0)  # (m, p)
    for (i, t), hi in sorted(bounds.facility_max.items()):
        if fac_tot[i, t] > hi + CHECK_TOL:
            violations.append(Violation(
                "facility_max", f"facility {instance.facilities[i]} period {t} total "
                f"{fac_tot[i, t]:g} exceeds max {hi:g}", facility=i, period=t))
    for (i, t), lo in sorted(bounds.facility_min.items()):
        if fac_tot[i, t] < lo - CHECK_TOL:
            violations.append(Violation(
                "facility_min", f"facility {instance.facilities[i]} period {t} total "
                f"{fac_tot[i, t]:g} below min {lo:g}", facility=i, period=t))
    for (l, t), hi in sorted(bounds.location_max.items()):
        if loc_tot[l, t] > hi + CHECK_TOL:
            violations.append(Violation(
                "location_max", f"location {instance.locations[l]} period {t} total "
                f"{loc_tot[l, t]:g} exceeds max {hi:g}", period=t))
    for (l, t), lo in sorted(bounds.location_min.items()):
        if loc_tot[l, t] < lo - CHECK_TOL:
            violations.append(Violation(
                "location_min", f"location {instance.locations[l]} period {t} total "
                f"{loc_tot[l, t]:g} below min {lo:g}", period=t))
    return FeasibilityReport(tuple(violations))
