"""Compromise programming: ideal points, relative deviations, minimax plans.

A family fixes a member set (locations, criteria, criterion-location pairs,
or stakeholders); each member's ideal is the best attainable discounted
aggregate for that member alone, and the compromise strategy minimizes the
largest relative shortfall (ideal - achieved) / ideal across members.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Hashable

from . import objectives, solver
from .dashboard import (AxisSelection, CRITERION, LOCATION, STAKEHOLDER, StakeholderSet,
                        WEIGHT_CRITERIA, WEIGHT_NONE, WEIGHT_STAKEHOLDERS, aggregate)
from .model import ProblemInstance, Strategy

CPL = "CPL"  # compromise over locations
CPO = "CPO"  # compromise over criteria
CPOL = "CPOL"  # compromise over criterion-location pairs
CPK = "CPK"  # compromise over stakeholders

Member = Hashable


@dataclass(frozen=True)
class CpFamily:
    kind: str
    members: tuple[Member, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("compromise family needs at least one member")


@dataclass(frozen=True)
class CpResult:
    family: CpFamily
    ideal: dict[Member, float]
    strategy: Strategy
    deviations: dict[Member, float]
    minimax: float
    dropped: tuple[Member, ...] = ()  # members with a zero ideal, excluded


def cp_family(instance: ProblemInstance, kind: str,
              stakeholders: StakeholderSet | None = None) -> CpFamily:
    if kind == CPL:
        return CpFamily(kind, tuple(range(instance.n_locations)))
    if kind == CPO:
        return CpFamily(kind, tuple(range(instance.n_criteria)))
    if kind == CPOL:
        return CpFamily(kind, tuple((j, l) for j in range(instance.n_criteria)
                                    for l in range(instance.n_locations)))
    if kind == CPK:
        if stakeholders is None:
            raise ValueError("stakeholder compromise requires a stakeholder set")
        return CpFamily(kind, tuple(range(stakeholders.n_stakeholders)))
    raise ValueError(f"unknown compromise kind {kind!r}")


def member_objective(instance: ProblemInstance, family: CpFamily, member: Member,
                     stakeholders: StakeholderSet | None = None) -> solver.LinearObjective:
    if family.kind == CPL:
        return objectives.location_objective(instance, member)
    if family.kind == CPO:
        # per-criterion aggregate is unweighted; the weight would cancel in
        # the relative deviation anyway
        return objectives.criterion_objective(instance, member)
    if family.kind == CPOL:
        j, l = member
        return objectives.criterion_location_objective(instance, j, l)
    if family.kind == CPK:
        return objectives.stakeholder_objective(instance, member, stakeholders)
    raise ValueError(f"unknown compromise kind {family.kind!r}")


def _member_axes(family: CpFamily) -> tuple[AxisSelection, callable]:
    if family.kind == CPL:
        return (AxisSelection(frozenset({LOCATION}), True, WEIGHT_CRITERIA),
                lambda m: (m,))
    if family.kind == CPO:
        return (AxisSelection(frozenset({CRITERION}), True, WEIGHT_NONE),
                lambda m: (m,))
    if family.kind == CPOL:
        return (AxisSelection(frozenset({CRITERION, LOCATION}), True, WEIGHT_NONE),
                lambda m: m)
    return (AxisSelection(frozenset({STAKEHOLDER}), True, WEIGHT_STAKEHOLDERS),
            lambda m: (m,))


def ideal_point(instance: ProblemInstance, family: CpFamily,
                stakeholders: StakeholderSet | None = None) -> dict[Member, float]:
    """Best attainable discounted aggregate per member, each an independent
    single-objective solve."""
    out: dict[Member, float] = {}
    for member in family.members:
        obj = member_objective(instance, family, member, stakeholders)
        res = solver.maximize(instance, obj)
        out[member] = res.objective_value
    return out


def deviations(instance: ProblemInstance, strategy: Strategy, family: CpFamily,
               ideals: dict[Member, float],
               stakeholders: StakeholderSet | None = None) -> dict[Member, float]:
    """Relative shortfalls (ideal - achieved) / ideal, with the achieved
    values read off the discounted dashboard aggregate."""
    axes, key = _member_axes(family)
    table = aggregate(instance, strategy, axes, stakeholders)
    out = {}
    for member in family.members:
        ideal = ideals[member]
        if ideal <= 0:
            raise ValueError(f"relative deviation undefined for member {member!r} "
                             f"with ideal {ideal:g}")
        out[member] = (ideal - table.value(*key(member))) / ideal
    return out


def solve_cp(instance: ProblemInstance, kind: str,
             stakeholders: StakeholderSet | None = None) -> CpResult:
    """Minimize the maximum relative deviation across the family's members.

    Members whose ideal is zero carry no information (any strategy attains
    the ideal); they are dropped with a warning. If every ideal is zero the
    deviation is undefined and this raises.
    """
    family = cp_family(instance, kind, stakeholders)
    ideals = ideal_point(instance, family, stakeholders)
    kept = tuple(m for m in family.members if ideals[m] > 0)
    dropped = tuple(m for m in family.members if ideals[m] <= 0)
    if dropped:
        warnings.warn(f"{kind}: dropped members with zero ideal: {dropped}", stacklevel=2)
    if not kept:
        raise ValueError(f"{kind}: every member has a zero ideal; deviations undefined")
    devs = [(member_objective(instance, family, m, stakeholders), ideals[m]) for m in kept]
    res = solver.solve_minimax(instance, devs)
    sub_family = CpFamily(family.kind, kept)
    dev_map = deviations(instance, res.strategy, sub_family, ideals, stakeholders)
    return CpResult(family=family, ideal=ideals, strategy=res.strategy,
                    deviations=dev_map, minimax=max(dev_map.values()), dropped=dropped)
