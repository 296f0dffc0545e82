"""Qualitative satisfaction classes, attainment counts, and dominance-based
rule induction for the interactive optimization loop.

Class boundaries follow the convention that actually generates the worked
qualitative table and the attainment counts: a value must strictly exceed a
threshold to reach the class above it (class a covers s_{a-1} < y <= s_a,
the bottom class is y <= s_1, the top class y > s_last). Attaining level a
therefore means y > s_a.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .model import ProblemInstance, Strategy
from .solver import LinearObjective

GOOD = "good"
OTHER = "other"
UNLABELED = "unlabeled"

FORM_LOCATION = "location"
FORM_CRITERION = "criterion"
FORM_CRITERION_LOCATION = "criterion-location"
FORMULATIONS = (FORM_LOCATION, FORM_CRITERION, FORM_CRITERION_LOCATION)


@dataclass(frozen=True)
class ThresholdScheme:
    """Ascending thresholds per (criterion, location) plus the class labels.

    thresholds has shape (n_criteria, n_locations, n_levels); labels has
    n_levels + 1 entries, weakest class first.
    """

    labels: tuple[str, ...]
    thresholds: np.ndarray

    def __post_init__(self):
        arr = np.array(self.thresholds, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "thresholds", arr)
        object.__setattr__(self, "labels", tuple(self.labels))
        if arr.ndim != 3:
            raise ValueError("thresholds must have shape (criteria, locations, levels)")
        if len(self.labels) != arr.shape[2] + 1:
            raise ValueError(f"{arr.shape[2]} levels need {arr.shape[2] + 1} class labels")
        if not np.all(np.diff(arr, axis=2) > 0):
            raise ValueError("thresholds must be strictly ascending per (criterion, location)")

    @property
    def n_levels(self) -> int:
        return int(self.thresholds.shape[2])

    @classmethod
    def uniform(cls, labels, values, n_criteria: int, n_locations: int) -> "ThresholdScheme":
        """Same threshold list for every (criterion, location)."""
        vals = np.broadcast_to(np.asarray(values, dtype=float),
                               (n_criteria, n_locations, len(values))).copy()
        return cls(tuple(labels), vals)


def classify(value: float, thresholds) -> int:
    """1-based satisfaction class: 1 + number of thresholds strictly exceeded."""
    t = np.asarray(thresholds, dtype=float)
    if t.ndim != 1 or not np.all(np.diff(t) > 0):
        raise ValueError("thresholds must be a strictly ascending vector")
    return 1 + int((value > t).sum())


def class_label(scheme: ThresholdScheme, value: float, criterion: int, location: int) -> str:
    return scheme.labels[classify(value, scheme.thresholds[criterion, location]) - 1]


@dataclass(frozen=True)
class AttainmentCounts:
    """counts[a-1, j, l] = number of facilities activated at location l whose
    evaluation on criterion j strictly exceeds threshold level a; sums[a-1, l]
    adds criteria up (the script-F objectives)."""

    counts: np.ndarray  # (levels, q, m)
    sums: np.ndarray  # (levels, m)

    def count(self, level: int, criterion: int, location: int) -> int:
        return int(self.counts[level - 1, criterion, location])

    def sum(self, level: int, location: int) -> int:
        return int(self.sums[level - 1, location])


def attainment_counts(instance: ProblemInstance, strategy: Strategy,
                      scheme: ThresholdScheme) -> AttainmentCounts:
    h, q, m = scheme.n_levels, instance.n_criteria, instance.n_locations
    counts = np.zeros((h, q, m), dtype=int)
    for i, l, _t in strategy.activations:
        for j in range(q):
            y = instance.evaluations[i, j, l]
            counts[:, j, l] += (y > scheme.thresholds[j, l]).astype(int)
    return AttainmentCounts(counts, counts.sum(axis=1))


def formulation_objectives(instance: ProblemInstance, formulation: str,
                           scheme: ThresholdScheme) -> list[LinearObjective]:
    """The count objectives of one multiobjective formulation, each linear in
    the activations (a facility contributes its attained levels at its
    location, independent of the activation period)."""
    n, q, m, p = (instance.n_facilities, instance.n_criteria,
                  instance.n_locations, instance.horizon)
    # attain[i, j, l, a] = facility i attains level a on criterion j at l
    attain = (instance.evaluations[:, :, :, None]
              > scheme.thresholds[None, :, :, :]).astype(float)
    out: list[LinearObjective] = []
    if formulation == FORM_LOCATION:
        for a in range(scheme.n_levels):
            for l in range(m):
                coef = np.zeros((n, m, p))
                coef[:, l, :] = attain[:, :, l, a].sum(axis=1)[:, None]
                out.append(LinearObjective(coef, name=f"F{a + 1},{instance.locations[l]}"))
    elif formulation == FORM_CRITERION:
        for a in range(scheme.n_levels):
            for j in range(q):
                coef = np.repeat(attain[:, j, :, a][:, :, None], p, axis=2)
                out.append(LinearObjective(coef, name=f"F{a + 1},{instance.criteria[j]}"))
    elif formulation == FORM_CRITERION_LOCATION:
        for a in range(scheme.n_levels):
            for j in range(q):
                for l in range(m):
                    coef = np.zeros((n, m, p))
                    coef[:, l, :] = attain[:, j, l, a][:, None]
                    out.append(LinearObjective(
                        coef, name=f"F{a + 1},{instance.criteria[j]},{instance.locations[l]}"))
    else:
        raise ValueError(f"unknown formulation {formulation!r}; expected one of {FORMULATIONS}")
    return out


@dataclass(frozen=True)
class LabeledItem:
    vector: tuple[float, ...]
    label: str = UNLABELED
    strategy: Strategy | None = None


@dataclass(frozen=True)
class LabeledSample:
    items: tuple[LabeledItem, ...]

    def __post_init__(self):
        arities = {len(it.vector) for it in self.items}
        if len(arities) > 1:
            raise ValueError("objective vectors must share one arity")
        for it in self.items:
            if it.label not in (GOOD, OTHER, UNLABELED):
                raise ValueError(f"unknown label {it.label!r}")

    def good(self) -> list[int]:
        return [k for k, it in enumerate(self.items) if it.label == GOOD]

    def other(self) -> list[int]:
        return [k for k, it in enumerate(self.items) if it.label == OTHER]


def _dominates(u, v) -> bool:
    return all(a >= b for a, b in zip(u, v))


def lower_approximation(sample: LabeledSample) -> set[int]:
    """Indices of GOOD items that every weakly dominating item also labels
    GOOD; the consistent core rules are induced from."""
    out = set()
    for g in sample.good():
        vg = sample.items[g].vector
        consistent = all(sample.items[o].label != OTHER or not _dominates(sample.items[o].vector, vg)
                         for o in range(len(sample.items)))
        if consistent:
            out.add(g)
    return out


@dataclass(frozen=True)
class DecisionRule:
    """Minimal consistent at-least rule: objective[o] >= threshold for every
    condition, covering only GOOD items."""

    conditions: tuple[tuple[int, float], ...]
    support: frozenset[int]

    def covers(self, vector) -> bool:
        return all(vector[o] >= th for o, th in self.conditions)


def induce_rules(sample: LabeledSample) -> list[DecisionRule]:
    """All minimal consistent at-least rules.

    Candidate thresholds come from GOOD item values. For every subset of the
    lower approximation the weakest covering antecedent takes per-objective
    minima; consistency then requires hitting every OTHER item on at least one
    condition, so minimal condition sets are minimal hitting sets. A final
    dominance pass removes any rule implied by a weaker one. Sorted by
    coverage descending, then condition count, then lexicographic conditions.
    """
    lower = lower_approximation(sample)
    if not lower:
        warnings.warn("empty lower approximation; no rules induced", stacklevel=2)
        return []
    arity = len(sample.items[0].vector)
    others = [sample.items[o].vector for o in sample.other()]
    goods = sample.good()

    candidates: dict[tuple[tuple[int, float], ...], frozenset[int]] = {}
    lower_sorted = sorted(lower)
    for r in range(1, len(lower_sorted) + 1):
        for subset in combinations(lower_sorted, r):
            theta = [min(sample.items[g].vector[o] for g in subset) for o in range(arity)]
            # objectives that separate each OTHER from the antecedent
            kill_sets = []
            feasible = True
            for ov in others:
                ks = frozenset(o for o in range(arity) if ov[o] < theta[o])
                if not ks:
                    feasible = False
                    break
                kill_sets.append(ks)
            if not feasible:
                continue
            for cond_set in _minimal_hitting_sets(kill_sets, arity):
                conds = tuple(sorted((o, theta[o]) for o in cond_set))
                support = frozenset(g for g in goods
                                    if all(sample.items[g].vector[o] >= th for o, th in conds))
                candidates[conds] = support

    rules = [DecisionRule(conds, supp) for conds, supp in candidates.items()]
    kept = [r for r in rules if not any(_weaker(o, r) for o in rules if o is not r)]
    kept.sort(key=lambda r: (-len(r.support), len(r.conditions), r.conditions))
    return kept


def _weaker(a: DecisionRule, b: DecisionRule) -> bool:
    """a's antecedent is implied by b's (same or lower thresholds on a subset
    of b's objectives), i.e. b is redundant given a."""
    bmap = dict(b.conditions)
    if not all(o in bmap and th <= bmap[o] for o, th in a.conditions):
        return False
    return a.conditions != b.conditions


def _minimal_hitting_sets(sets: list[frozenset[int]], arity: int) -> list[frozenset[int]]:
    """All minimal condition sets intersecting every given set. With no OTHER
    items there is nothing to separate from; rules still need a condition to
    be presentable, so each single objective qualifies on its own."""
    if not sets:
        return [frozenset({o}) for o in range(arity)]
    found: set[frozenset[int]] = set()

    def extend(chosen: frozenset[int], remaining: list[frozenset[int]]):
        remaining = [s for s in remaining if not (s & chosen)]
        if not remaining:
            found.add(chosen)
            return
        pivot = min(remaining, key=lambda s: (len(s), sorted(s)))
        for o in sorted(pivot):
            extend(chosen | {o}, remaining)

    extend(frozenset(), sets)
    # branch order can produce supersets; keep only the minimal ones
    return sorted((h for h in found if not any(g < h for g in found)),
                  key=lambda s: (len(s), sorted(s)))
