"""The aggregate-performance dashboard.

A strategy's raw performance is a cell y[i, j, l, t]: facility i yields its
evaluation on criterion j at location l in every accrual period t >= 1 that
follows its activation. Every dashboard table is a marginal sum of those
cells over some subset of the five axes (facility, criterion, location,
period, stakeholder), optionally discounted by v(t) and weighted when the
criterion axis is summed out. Criterion-indexed tables stay unweighted.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import ProblemInstance, Strategy

FACILITY = "facility"
CRITERION = "criterion"
LOCATION = "location"
PERIOD = "period"
STAKEHOLDER = "stakeholder"

AXIS_ORDER = (FACILITY, CRITERION, LOCATION, PERIOD, STAKEHOLDER)

WEIGHT_NONE = "none"
WEIGHT_CRITERIA = "criterion_weights"
WEIGHT_STAKEHOLDERS = "stakeholder_and_criterion_weights"


@dataclass(frozen=True)
class StakeholderSet:
    """Per-stakeholder criterion weights w[j, k] plus the central planner's
    stakeholder weights z[k]."""

    stakeholders: tuple[str, ...]
    criterion_weights: np.ndarray  # (q, K)
    planner_weights: np.ndarray  # (K,)

    def __post_init__(self):
        cw = np.array(self.criterion_weights, dtype=float)
        pw = np.array(self.planner_weights, dtype=float)
        cw.flags.writeable = False
        pw.flags.writeable = False
        object.__setattr__(self, "stakeholders", tuple(self.stakeholders))
        object.__setattr__(self, "criterion_weights", cw)
        object.__setattr__(self, "planner_weights", pw)

    def validate(self, n_criteria: int, tol: float = 1e-9) -> "StakeholderSet":
        k = len(self.stakeholders)
        if self.criterion_weights.shape != (n_criteria, k):
            raise ValueError(
                f"criterion weights shape {self.criterion_weights.shape} != {(n_criteria, k)}")
        if self.planner_weights.shape != (k,):
            raise ValueError(f"planner weights shape {self.planner_weights.shape} != {(k,)}")
        if (self.criterion_weights < 0).any() or (self.planner_weights < 0).any():
            raise ValueError("stakeholder weights must be nonnegative")
        sums = self.criterion_weights.sum(axis=0)
        for name, s in zip(self.stakeholders, sums):
            if abs(s - 1.0) > tol:
                raise ValueError(f"criterion weights for {name} sum {s:g} != 1")
        z = float(self.planner_weights.sum())
        if abs(z - 1.0) > tol:
            raise ValueError(f"planner weights sum {z:g} != 1")
        return self

    @property
    def n_stakeholders(self) -> int:
        return len(self.stakeholders)


@dataclass(frozen=True)
class AxisSelection:
    """Which axes a table keeps, whether cells are discounted, and which
    weights apply to the summed-out criterion axis."""

    kept: frozenset[str]
    discounted: bool = False
    weighting: str = WEIGHT_NONE

    def __post_init__(self):
        kept = frozenset(self.kept)
        unknown = kept - set(AXIS_ORDER)
        if unknown:
            raise ValueError(f"unknown axes {sorted(unknown)}")
        object.__setattr__(self, "kept", kept)
        if CRITERION in kept and self.weighting != WEIGHT_NONE:
            raise ValueError("criterion-indexed tables are unweighted")
        if STAKEHOLDER in kept and self.weighting != WEIGHT_STAKEHOLDERS:
            raise ValueError("stakeholder-indexed tables use stakeholder weighting")
        if self.weighting == WEIGHT_STAKEHOLDERS and CRITERION in kept:
            raise ValueError("stakeholder weighting requires the criterion axis summed out")

    def ordered(self) -> tuple[str, ...]:
        return tuple(a for a in AXIS_ORDER if a in self.kept)


@dataclass(frozen=True)
class DashboardTable:
    """One aggregation: cells keyed by the retained index tuple, in the
    canonical axis order (facility, criterion, location, period, stakeholder).
    Facility/criterion/location/stakeholder indices are 0-based positions;
    the period index runs over accrual periods 1..p."""

    axes: AxisSelection
    cells: dict[tuple, float]
    name: str = ""

    def value(self, *index) -> float:
        return self.cells[tuple(index)]

    def total(self) -> float:
        return float(sum(self.cells.values()))


def _activation_matrix(instance: ProblemInstance, strategy: Strategy) -> np.ndarray:
    """active[i, l, ti] = 1 when facility i, placed at l, accrues in period
    ti+1, i.e. it was activated at some tau <= ti."""
    n, m, p = instance.n_facilities, instance.n_locations, instance.horizon
    active = np.zeros((n, m, p))
    for i, l, tau in strategy.activations:
        active[i, l, tau:] = 1.0
    return active


def performance_cell(instance: ProblemInstance, strategy: Strategy,
                     facility: int, criterion: int, location: int, period: int) -> float:
    """Raw (undiscounted, unweighted) performance of one facility cell in one
    accrual period t in 1..p: the evaluation if the facility was activated at
    that location no later than period t-1, else 0."""
    if not 1 <= period <= instance.horizon:
        raise ValueError(f"accrual period must be in 1..{instance.horizon}")
    lp = strategy.location_period(facility)
    if lp is None or lp[0] != location or lp[1] > period - 1:
        return 0.0
    return float(instance.eval_cube()[facility, criterion, location, period - 1])


def _weighted_cells(instance: ProblemInstance, strategy: Strategy, axes: AxisSelection,
                    stakeholders: StakeholderSet | None) -> np.ndarray:
    """Dense cell tensor (n, q, m, p[, K]) after discounting and weighting."""
    cube = np.array(instance.eval_cube())
    active = _activation_matrix(instance, strategy)
    cells = cube * active[:, None, :, :]
    if axes.discounted:
        v = instance.discount_vector()
        cells = cells * v[1:][None, None, None, :]
    needs_stake = axes.weighting == WEIGHT_STAKEHOLDERS or STAKEHOLDER in axes.kept
    if needs_stake:
        if stakeholders is None:
            raise ValueError("stakeholder axis requested without a stakeholder set")
        w = stakeholders.criterion_weights  # (q, K)
        cells = np.einsum("ijlt,jk->ijltk", cells, w)
        if STAKEHOLDER not in axes.kept:
            cells = np.einsum("ijltk,k->ijlt", cells, stakeholders.planner_weights)
    elif axes.weighting == WEIGHT_CRITERIA:
        cells = cells * instance.weights[None, :, None, None]
    return cells


def aggregate(instance: ProblemInstance, strategy: Strategy, axes: AxisSelection,
              stakeholders: StakeholderSet | None = None, name: str = "") -> DashboardTable:
    """Sum the weighted cell tensor over every dropped axis."""
    cells = _weighted_cells(instance, strategy, axes, stakeholders)
    has_k = cells.ndim == 5
    axis_pos = {FACILITY: 0, CRITERION: 1, LOCATION: 2, PERIOD: 3}
    if has_k:
        axis_pos[STAKEHOLDER] = 4
    drop = tuple(pos for ax, pos in axis_pos.items() if ax not in axes.kept)
    reduced = cells.sum(axis=drop)
    kept_order = [ax for ax in AXIS_ORDER if ax in axes.kept]
    out: dict[tuple, float] = {}
    if not kept_order:
        out[()] = float(reduced)
    else:
        for idx in np.ndindex(reduced.shape):
            key = tuple(int(t) + 1 if ax == PERIOD else int(t)
                        for ax, t in zip(kept_order, idx))
            out[key] = float(reduced[idx])
    return DashboardTable(axes, out, name or _table_name(axes))


def _table_name(axes: AxisSelection) -> str:
    kept = axes.ordered()
    base = "overall" if not kept else "by_" + "_".join(kept)
    if axes.weighting == WEIGHT_STAKEHOLDERS and STAKEHOLDER not in axes.kept:
        base += "_planner"
    return base + ("_discounted" if axes.discounted else "")


def _report_axes(stakeholders: StakeholderSet | None) -> Iterator[AxisSelection]:
    single = (FACILITY, CRITERION, LOCATION, PERIOD)
    for discounted in (False, True):
        for mask in range(1 << 4):
            kept = frozenset(ax for b, ax in enumerate(single) if mask >> b & 1)
            weighting = WEIGHT_NONE if CRITERION in kept else WEIGHT_CRITERIA
            yield AxisSelection(kept, discounted, weighting)
        if stakeholders is not None:
            non_crit = (FACILITY, LOCATION, PERIOD)
            for mask in range(1 << 3):
                kept = frozenset(ax for b, ax in enumerate(non_crit) if mask >> b & 1)
                yield AxisSelection(kept | {STAKEHOLDER}, discounted, WEIGHT_STAKEHOLDERS)
                yield AxisSelection(kept, discounted, WEIGHT_STAKEHOLDERS)


def full_report(instance: ProblemInstance, strategy: Strategy,
                stakeholders: StakeholderSet | None = None) -> list[DashboardTable]:
    """Every named aggregation, discounted and undiscounted: the 16 subsets of
    {facility, criterion, location, period}, plus the stakeholder-extended
    family (stakeholder kept with per-stakeholder weights, or summed out with
    planner weights) when a stakeholder set is supplied."""
    return [aggregate(instance, strategy, axes, stakeholders)
            for axes in _report_axes(stakeholders)]


def table_rows(instance: ProblemInstance, table: DashboardTable,
               stakeholders: StakeholderSet | None = None) -> Iterator[list]:
    """CSV-ready rows: header (axis names + value), then one row per cell
    with human-readable labels."""
    kept = table.axes.ordered()
    yield [*kept, "value"]
    labels = {
        FACILITY: instance.facilities,
        CRITERION: instance.criteria,
        LOCATION: instance.locations,
    }
    if stakeholders is not None:
        labels[STAKEHOLDER] = stakeholders.stakeholders
    for key in sorted(table.cells):
        row: list = []
        for ax, idx in zip(kept, key):
            row.append(idx if ax == PERIOD else labels[ax][idx])
        row.append(repr(table.cells[key]))
        yield row
