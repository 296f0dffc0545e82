"""Linearization of dashboard aggregates into activation-variable objectives.

Every aggregate is linear in the activation variables: activating facility i
at location l in period tau contributes its (weighted, possibly discounted)
evaluations over all accrual periods t > tau that the table retains. The
coefficient tensors built here must agree with dashboard.aggregate on every
strategy; the test suite pins that equivalence.
"""
from __future__ import annotations

import numpy as np

from . import dashboard as db
from .model import ProblemInstance
from .solver import LinearObjective


def _weighted_cube(instance: ProblemInstance, discounted: bool, weighting: str,
                   stakeholders: db.StakeholderSet | None) -> np.ndarray:
    """(n, q, m, p[, K]) cell values before activation masking."""
    cube = np.array(instance.eval_cube(), dtype=float)
    if discounted:
        cube = cube * instance.discount_vector()[1:][None, None, None, :]
    if weighting == db.WEIGHT_STAKEHOLDERS:
        if stakeholders is None:
            raise ValueError("stakeholder weighting requires a stakeholder set")
        return np.einsum("ijlt,jk->ijltk", cube, stakeholders.criterion_weights)
    if weighting == db.WEIGHT_CRITERIA:
        return cube * instance.weights[None, :, None, None]
    return cube


def linearize(instance: ProblemInstance, axes: db.AxisSelection, member: dict[str, int],
              stakeholders: db.StakeholderSet | None = None, name: str = "") -> LinearObjective:
    """Linear objective equal to one cell (or the scalar) of an aggregation.

    `member` pins an index for every kept axis, e.g. {"location": 0} for a
    per-location total or {} for the overall scalar. The period member, when
    kept, is an accrual period in 1..p.
    """
    if set(member) != set(axes.kept):
        raise ValueError(f"member must pin exactly the kept axes {sorted(axes.kept)}")
    cube = _weighted_cube(instance, axes.discounted, axes.weighting, stakeholders)
    if cube.ndim == 5:
        if db.STAKEHOLDER in axes.kept:
            cube = cube[..., member[db.STAKEHOLDER]]
        else:
            cube = np.einsum("ijltk,k->ijlt", cube, stakeholders.planner_weights)
    if db.CRITERION in axes.kept:
        cube = cube[:, member[db.CRITERION]:member[db.CRITERION] + 1]
    if db.FACILITY in axes.kept:
        keep = member[db.FACILITY]
        mask = np.zeros((instance.n_facilities, 1, 1, 1))
        mask[keep] = 1.0
        cube = cube * mask
    if db.LOCATION in axes.kept:
        keep = member[db.LOCATION]
        mask = np.zeros((1, 1, instance.n_locations, 1))
        mask[:, :, keep] = 1.0
        cube = cube * mask
    per_t = cube.sum(axis=1)  # (n, m, p) summed over criteria
    n, m, p = per_t.shape
    coef = np.zeros((n, m, p))
    if db.PERIOD in axes.kept:
        t = member[db.PERIOD]
        if not 1 <= t <= p:
            raise ValueError(f"period member must be in 1..{p}")
        coef[:, :, :t] = per_t[:, :, t - 1][:, :, None]
    else:
        # activating at tau accrues the suffix of periods tau+1..p
        suffix = np.cumsum(per_t[:, :, ::-1], axis=2)[:, :, ::-1]
        coef[:, :, :] = suffix
    return LinearObjective(coef, name=name or _member_name(axes, member))


def _member_name(axes: db.AxisSelection, member: dict[str, int]) -> str:
    if not member:
        return "overall_discounted" if axes.discounted else "overall"
    parts = [f"{ax}={member[ax]}" for ax in axes.ordered()]
    return ("discounted " if axes.discounted else "") + ", ".join(parts)


def overall_objective(instance: ProblemInstance, discounted: bool = True,
                      stakeholders: db.StakeholderSet | None = None) -> LinearObjective:
    """The headline objective: weighted overall performance, discounted by
    accrual period; with stakeholders, planner-weighted over their weights."""
    weighting = db.WEIGHT_STAKEHOLDERS if stakeholders is not None else db.WEIGHT_CRITERIA
    axes = db.AxisSelection(frozenset(), discounted, weighting)
    return linearize(instance, axes, {}, stakeholders, name="overall")


def location_objective(instance: ProblemInstance, location: int,
                       discounted: bool = True) -> LinearObjective:
    axes = db.AxisSelection(frozenset({db.LOCATION}), discounted, db.WEIGHT_CRITERIA)
    return linearize(instance, axes, {db.LOCATION: location},
                     name=f"location:{instance.locations[location]}")


def criterion_objective(instance: ProblemInstance, criterion: int,
                        discounted: bool = True) -> LinearObjective:
    """Per-criterion total; unweighted, like every criterion-indexed table."""
    axes = db.AxisSelection(frozenset({db.CRITERION}), discounted, db.WEIGHT_NONE)
    return linearize(instance, axes, {db.CRITERION: criterion},
                     name=f"criterion:{instance.criteria[criterion]}")


def criterion_location_objective(instance: ProblemInstance, criterion: int, location: int,
                                 discounted: bool = True) -> LinearObjective:
    axes = db.AxisSelection(frozenset({db.CRITERION, db.LOCATION}), discounted, db.WEIGHT_NONE)
    return linearize(instance, axes, {db.CRITERION: criterion, db.LOCATION: location},
                     name=f"criterion:{instance.criteria[criterion]}"
                          f"/location:{instance.locations[location]}")


def stakeholder_objective(instance: ProblemInstance, stakeholder: int,
                          stakeholders: db.StakeholderSet,
                          discounted: bool = True) -> LinearObjective:
    axes = db.AxisSelection(frozenset({db.STAKEHOLDER}), discounted, db.WEIGHT_STAKEHOLDERS)
    return linearize(instance, axes, {db.STAKEHOLDER: stakeholder}, stakeholders,
                     name=f"stakeholder:{stakeholders.stakeholders[stakeholder]}")
