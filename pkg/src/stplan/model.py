"""Problem data model: instances, strategies, discounting, feasibility.

An instance describes facilities that can each be activated at most once, in
one location and one period, under per-period budgets. Activating facility i
in location l at period tau makes it yield its evaluation on every criterion
in each later period t (accrual periods 1..p). All operations here are pure
functions over immutable data.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

TOL = 1e-9


class InvalidInstance(ValueError):
    """Raised when an instance violates a structural invariant."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)  # copy so freezing never touches the caller's array
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable planning instance.

    evaluations has shape (n_facilities, n_criteria, n_locations) and holds
    the per-period yield of each activated facility. period_evaluations, when
    present, overrides it with accrual-period-dependent values of shape
    (n, q, m, horizon) indexed by t-1 for t in 1..horizon (used by the
    expected-value construction).
    """

    facilities: tuple[str, ...]
    locations: tuple[str, ...]
    criteria: tuple[str, ...]
    horizon: int
    evaluations: np.ndarray
    costs: np.ndarray
    budgets: np.ndarray
    weights: np.ndarray
    interest_rate: float
    precedence: tuple[tuple[int, int], ...] = ()
    period_evaluations: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "facilities", tuple(self.facilities))
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "evaluations", _frozen(self.evaluations))
        object.__setattr__(self, "costs", _frozen(self.costs))
        object.__setattr__(self, "budgets", _frozen(self.budgets))
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "precedence", tuple((int(a), int(b)) for a, b in self.precedence))
        if self.period_evaluations is not None:
            object.__setattr__(self, "period_evaluations", _frozen(self.period_evaluations))

    @property
    def n_facilities(self) -> int:
        return len(self.facilities)

    @property
    def n_locations(self) -> int:
        return len(self.locations)

    @property
    def n_criteria(self) -> int:
        return len(self.criteria)

    def eval_cube(self) -> np.ndarray:
        """Evaluations as (n, q, m, p), indexed by accrual period t-1."""
        if self.period_evaluations is not None:
            return self.period_evaluations
        return np.broadcast_to(
            self.evaluations[..., None],
            (self.n_facilities, self.n_criteria, self.n_locations, self.horizon),
        )

    def discount_vector(self) -> np.ndarray:
        """v(t) for t = 0..p."""
        return discount_factor(np.arange(self.horizon + 1), self.interest_rate)

    def facility_index(self, name: str) -> int:
        return self.facilities.index(name)

    def location_index(self, name: str) -> int:
        return self.locations.index(name)

    def criterion_index(self, name: str) -> int:
        return self.criteria.index(name)


def discount_factor(t, rate: float):
    """Present-value factor v(t) = (1 + rate)^-t; v(0) = 1, nonincreasing in t."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("period must be nonnegative")
    if rate < 0:
        raise ValueError("interest rate must be nonnegative")
    return (1.0 + rate) ** -np.asarray(t, dtype=float)


Activation = tuple[int, int, int]  # (facility, location, period)


@dataclass(frozen=True, order=True)
class Strategy:
    """A 0-1 activation plan: one (facility, location, period) triple per
    activated facility, stored sorted so equal strategies compare equal and
    ordering is the lexicographic triple-sequence order used for tie-breaks."""

    activations: tuple[Activation, ...] = ()

    def __post_init__(self):
        acts = tuple(sorted((int(i), int(l), int(t)) for i, l, t in self.activations))
        object.__setattr__(self, "activations", acts)

    @classmethod
    def from_pairs(cls, assignment: dict[int, tuple[int, int]]) -> "Strategy":
        return cls(tuple((i, l, t) for i, (l, t) in assignment.items()))

    def location_period(self, facility: int) -> tuple[int, int] | None:
        """(location, period) of the facility's activation, or None."""
        for i, l, t in self.activations:
            if i == facility:
                return (l, t)
        return None

    def activated_facilities(self) -> set[int]:
        return {i for i, _, _ in self.activations}

    def spend(self, instance: ProblemInstance) -> np.ndarray:
        """Cost committed per period, shape (horizon,)."""
        out = np.zeros(instance.horizon)
        for i, _, t in self.activations:
            out[t] += instance.costs[i]
        return out

    def union(self, other: "Strategy") -> "Strategy":
        return Strategy(self.activations + other.activations)


EMPTY_STRATEGY = Strategy()


@dataclass(frozen=True)
class Violation:
    kind: str  # budget | activation | precedence
    detail: str
    facility: int | None = None
    period: int | None = None


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...]

    @property
    def feasible(self) -> bool:
        return not self.violations


def instance_errors(inst: ProblemInstance) -> list[str]:
    """All violated structural invariants, empty when the instance is valid."""
    errors: list[str] = []
    n, q, m, p = inst.n_facilities, inst.n_criteria, inst.n_locations, inst.horizon
    if p < 1:
        errors.append(f"horizon must be >= 1, got {p}")
    if len(set(inst.facilities)) != n:
        errors.append("facility names must be unique")
    if len(set(inst.locations)) != m:
        errors.append("location names must be unique")
    if len(set(inst.criteria)) != q:
        errors.append("criterion names must be unique")
    if inst.evaluations.shape != (n, q, m):
        errors.append(f"evaluations shape {inst.evaluations.shape} != {(n, q, m)}")
    elif np.isnan(inst.evaluations).any():
        bad = np.argwhere(np.isnan(inst.evaluations))[0]
        errors.append("missing evaluation cell (facility %d, criterion %d, location %d)" % tuple(bad))
    elif (inst.evaluations < 0).any():
        errors.append("evaluations must be nonnegative")
    if inst.costs.shape != (n,):
        errors.append(f"costs shape {inst.costs.shape} != {(n,)}")
    elif (inst.costs <= 0).any():
        errors.append("costs must be positive")
    if inst.budgets.shape != (p,):
        errors.append(f"budgets shape {inst.budgets.shape} != {(p,)}")
    elif (inst.budgets < 0).any():
        errors.append("budgets must be nonnegative")
    if inst.weights.shape != (q,):
        errors.append(f"weights shape {inst.weights.shape} != {(q,)}")
    else:
        if (inst.weights < 0).any():
            errors.append("weights must be nonnegative")
        s = float(inst.weights.sum())
        if abs(s - 1.0) > TOL:
            errors.append(f"weights sum {s:g} != 1")
    if inst.interest_rate < 0:
        errors.append("interest rate must be nonnegative")
    if inst.period_evaluations is not None and inst.period_evaluations.shape != (n, q, m, p):
        errors.append(f"period evaluations shape {inst.period_evaluations.shape} != {(n, q, m, p)}")
    for a, b in inst.precedence:
        if not (0 <= a < n and 0 <= b < n):
            errors.append(f"precedence pair ({a}, {b}) references unknown facility")
    if _has_cycle(n, inst.precedence):
        errors.append("precedence cycle")
    return errors


def _has_cycle(n: int, pairs: Iterable[tuple[int, int]]) -> bool:
    succ: dict[int, list[int]] = {}
    for a, b in pairs:
        if 0 <= a < n and 0 <= b < n:
            succ.setdefault(a, []).append(b)
    seen = {}  # 1 = on stack, 2 = done

    def visit(u: int) -> bool:
        seen[u] = 1
        for v in succ.get(u, ()):
            if seen.get(v) == 1 or (v not in seen and visit(v)):
                return True
        seen[u] = 2
        return False

    return any(visit(u) for u in range(n) if u not in seen)


def validate_instance(inst: ProblemInstance) -> ProblemInstance:
    """Return the instance unchanged if valid; raise InvalidInstance listing
    every violated invariant otherwise."""
    errors = instance_errors(inst)
    if errors:
        raise InvalidInstance(errors)
    return inst


def _check_indices(inst: ProblemInstance, strategy: Strategy) -> None:
    for i, l, t in strategy.activations:
        if not 0 <= i < inst.n_facilities:
            raise ValueError(f"activation references unknown facility {i}")
        if not 0 <= l < inst.n_locations:
            raise ValueError(f"activation references unknown location {l}")
        if not 0 <= t < inst.horizon:
            raise ValueError(f"activation period {t} outside 0..{inst.horizon - 1}")


def check_feasibility(inst: ProblemInstance, strategy: Strategy) -> FeasibilityReport:
    """Check the per-period budget constraint, single activation per facility,
    and weak precedence (a predecessor must be activated in some period <=
    the successor's; a successor cannot run without its predecessor).

    Out-of-range indices are a usage error and raise instead of reporting.
    """
    _check_indices(inst, strategy)
    violations: list[Violation] = []

    spend = strategy.spend(inst)
    for t in range(inst.horizon):
        if spend[t] > inst.budgets[t] + TOL:
            violations.append(Violation(
                "budget", f"period {t} spend {spend[t]:g} exceeds budget {inst.budgets[t]:g}",
                period=t))

    counts: dict[int, int] = {}
    for i, _, _ in strategy.activations:
        counts[i] = counts.get(i, 0) + 1
    for i, c in sorted(counts.items()):
        if c > 1:
            violations.append(Violation(
                "activation", f"facility {inst.facilities[i]} activated {c} times", facility=i))

    when = {i: t for i, _, t in strategy.activations}
    for a, b in inst.precedence:
        if b in when:
            if a not in when:
                violations.append(Violation(
                    "precedence",
                    f"{inst.facilities[b]} activated but predecessor {inst.facilities[a]} is not",
                    facility=b))
            elif when[a] > when[b]:
                violations.append(Violation(
                    "precedence",
                    f"{inst.facilities[a]} activated at {when[a]} after successor "
                    f"{inst.facilities[b]} at {when[b]}",
                    facility=b, period=when[b]))

    return FeasibilityReport(tuple(violations))


def with_evaluations(inst: ProblemInstance, evaluations: np.ndarray,
                     period_evaluations: np.ndarray | None = None) -> ProblemInstance:
    """Copy of the instance with replaced evaluation data."""
    return replace(inst, evaluations=evaluations, period_evaluations=period_evaluations)
