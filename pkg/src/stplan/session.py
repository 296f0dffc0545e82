"""Interactive optimization sessions.

The protocol alternates: the engine shows a spread of non-dominated
strategies, the decision maker marks some good, the engine induces at-least
rules from the partition, the decision maker picks one, and its conditions
become constraints that shrink the feasible region before the next sample.
Every step is journaled so a session can be replayed deterministically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import drsa
from .model import ProblemInstance, Strategy
from .solver import LinearConstraint, LinearObjective, enumerate_nondominated

AWAITING_LABELS = "awaiting_labels"
AWAITING_RULE_CHOICE = "awaiting_rule_choice"
SATISFIED = "satisfied"
EMPTY_REGION = "empty_region"

DEFAULT_SAMPLE_SIZE = 6


class ProtocolError(RuntimeError):
    """An interaction arrived out of protocol order."""


class LabelError(ValueError):
    """Labels reference unknown strategies or contain no good one."""


class EmptyRegionError(RuntimeError):
    """No feasible strategy satisfies the accumulated constraints."""


def sample_representatives(instance: ProblemInstance,
                           objectives: Sequence[LinearObjective],
                           constraints: Sequence[LinearConstraint] = (),
                           k: int = DEFAULT_SAMPLE_SIZE,
                           guard: float = 1e9) -> list[tuple[Strategy, np.ndarray]]:
    """min(k, |nondominated|) spread-out non-dominated vectors.

    Seeds are the per-objective maximizers (objective order; ties broken by
    the lexicographically greatest vector), then greedy max-min dispersion
    under the range-normalized Chebyshev distance fills up to k, ties again
    to the greatest vector. Deterministic throughout.
    """
    if k < 1:
        raise ValueError("sample size must be >= 1")
    nd = enumerate_nondominated(instance, objectives, constraints, guard)
    if not nd:
        raise EmptyRegionError("no feasible strategy satisfies the accumulated constraints")
    vectors = np.array([v for _, v in nd])
    lo, hi = vectors.min(axis=0), vectors.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    norm = (vectors - lo) / span

    chosen: list[int] = []
    for o in range(vectors.shape[1]):
        if len(chosen) == k:
            break
        order = sorted(range(len(nd)),
                       key=lambda idx: (-vectors[idx, o], tuple(-vectors[idx])))
        best = order[0]
        if best not in chosen:
            chosen.append(best)
    while len(chosen) < min(k, len(nd)):
        rest = [i for i in range(len(nd)) if i not in chosen]
        dist = {i: min(float(np.max(np.abs(norm[i] - norm[c]))) for c in chosen)
                for i in rest}
        rest.sort(key=lambda i: (-dist[i], tuple(-vectors[i])))
        chosen.append(rest[0])
    return [nd[i] for i in chosen[:k]]


@dataclass
class Iteration:
    sample: list[tuple[Strategy, np.ndarray]]
    labels: dict[int, str] = field(default_factory=dict)
    rules: list[drsa.DecisionRule] = field(default_factory=list)
    chosen_rule: int | None = None


@dataclass
class ImoSession:
    """Single-writer session state machine. Constraints only grow; every
    sample satisfies all accumulated constraints by construction."""

    instance: ProblemInstance
    formulation: str
    scheme: drsa.ThresholdScheme
    k: int = DEFAULT_SAMPLE_SIZE
    guard: float = 1e9
    objectives: list[LinearObjective] = field(init=False)
    constraints: list[LinearConstraint] = field(default_factory=list)
    iterations: list[Iteration] = field(default_factory=list)
    state: str = field(init=False)
    final_strategy: Strategy | None = None

    def __post_init__(self):
        self.objectives = drsa.formulation_objectives(self.instance, self.formulation,
                                                      self.scheme)
        self.state = AWAITING_LABELS
        self._next_sample()

    # -- protocol steps ------------------------------------------------------

    def current(self) -> Iteration:
        if not self.iterations:
            raise ProtocolError("session has no iterations")
        return self.iterations[-1]

    def submit_labels(self, labels: dict[int, str]) -> list[drsa.DecisionRule]:
        if self.state != AWAITING_LABELS:
            raise ProtocolError(f"labels not expected in state {self.state}")
        it = self.current()
        for idx, lab in labels.items():
            if not 0 <= idx < len(it.sample):
                raise LabelError(f"no strategy {idx} in the current sample")
            if lab not in (drsa.GOOD, drsa.OTHER):
                raise LabelError(f"label must be good or other, got {lab!r}")
        if drsa.GOOD not in labels.values():
            raise LabelError("at least one strategy must be labeled good")
        it.labels = dict(labels)
        sample = drsa.LabeledSample(tuple(
            drsa.LabeledItem(tuple(float(x) for x in vec),
                             labels.get(i, drsa.OTHER), strat)
            for i, (strat, vec) in enumerate(it.sample)))
        it.rules = drsa.induce_rules(sample)
        self.state = AWAITING_RULE_CHOICE
        return it.rules

    def choose_rule(self, rule_index: int) -> None:
        if self.state != AWAITING_RULE_CHOICE:
            raise ProtocolError(f"rule choice not expected in state {self.state}")
        it = self.current()
        if not 0 <= rule_index < len(it.rules):
            raise ValueError(f"no rule {rule_index} in the induced list")
        it.chosen_rule = rule_index
        for obj_index, threshold in it.rules[rule_index].conditions:
            self.add_constraint(obj_index, threshold)
        self.state = AWAITING_LABELS
        self._next_sample()

    def add_constraint(self, obj_index: int, threshold: float) -> None:
        obj = self.objectives[obj_index]
        self.constraints.append(LinearConstraint(
            obj.coefficients, float(threshold), name=f"{obj.name}>={threshold:g}"))

    def apply_constraint(self, obj_index: int, threshold: float) -> None:
        """Add one constraint outside the rule-choice flow and resample (used
        by scripted runs that inject a known rule's conditions)."""
        if self.state not in (AWAITING_LABELS, AWAITING_RULE_CHOICE):
            raise ProtocolError(f"cannot constrain in state {self.state}")
        self.add_constraint(obj_index, threshold)
        self.state = AWAITING_LABELS
        self._next_sample()

    def mark_satisfied(self, strategy_index: int) -> Strategy:
        if self.state not in (AWAITING_LABELS, AWAITING_RULE_CHOICE):
            raise ProtocolError(f"cannot finish in state {self.state}")
        it = self.current()
        if not 0 <= strategy_index < len(it.sample):
            raise ValueError(f"no strategy {strategy_index} in the current sample")
        self.final_strategy = it.sample[strategy_index][0]
        self.state = SATISFIED
        return self.final_strategy

    def _next_sample(self) -> None:
        try:
            sample = sample_representatives(self.instance, self.objectives,
                                            self.constraints, self.k, self.guard)
        except EmptyRegionError:
            self.state = EMPTY_REGION
            return
        self.iterations.append(Iteration(sample=sample))

    # -- journal ---------------------------------------------------------------

    def journal(self) -> list[dict]:
        """Ordered event log: SAMPLE, LABELS, RULES, CHOICE, SATISFIED."""
        events: list[dict] = []
        for it in self.iterations:
            events.append({
                "type": "SAMPLE",
                "strategies": [[list(a) for a in s.activations] for s, _ in it.sample],
                "vectors": [[float(x) for x in v] for _, v in it.sample],
            })
            if it.labels:
                events.append({"type": "LABELS",
                               "labels": {str(i): lab for i, lab in sorted(it.labels.items())}})
            if it.rules:
                events.append({"type": "RULES", "rules": [_rule_dict(r) for r in it.rules]})
            if it.chosen_rule is not None:
                events.append({"type": "CHOICE", "rule": it.chosen_rule})
        if self.final_strategy is not None:
            events.append({"type": "SATISFIED",
                           "strategy": [list(a) for a in self.final_strategy.activations]})
        return events


def _rule_dict(rule: drsa.DecisionRule) -> dict:
    return {"conditions": [[int(o), float(t)] for o, t in rule.conditions],
            "support": sorted(rule.support)}


def replay(instance: ProblemInstance, formulation: str, scheme: drsa.ThresholdScheme,
           events: list[dict], k: int = DEFAULT_SAMPLE_SIZE) -> ImoSession:
    """Re-run a journal and verify the engine regenerates the same samples and
    rules; raises ValueError at the first divergence."""
    session = ImoSession(instance, formulation, scheme, k=k)
    for n, event in enumerate(events):
        kind = event.get("type")
        if kind == "SAMPLE":
            if session.state == EMPTY_REGION:
                raise ValueError(f"event {n}: journal has a sample but the region is empty")
            got = session.journal()
            mine = [e for e in got if e["type"] == "SAMPLE"][-1]
            if mine["strategies"] != event["strategies"] or mine["vectors"] != event["vectors"]:
                raise ValueError(f"event {n}: regenerated sample differs from the journal")
        elif kind == "LABELS":
            session.submit_labels({int(i): lab for i, lab in event["labels"].items()})
        elif kind == "RULES":
            mine = [_rule_dict(r) for r in session.current().rules]
            if mine != event["rules"]:
                raise ValueError(f"event {n}: induced rules differ from the journal")
        elif kind == "CHOICE":
            session.choose_rule(int(event["rule"]))
        elif kind == "SATISFIED":
            want = sorted(tuple(a) for a in event["strategy"])
            it = session.current()
            match = [i for i, (s, _) in enumerate(it.sample)
                     if sorted(s.activations) == want]
            if not match:
                raise ValueError(f"event {n}: satisfied strategy not in the current sample")
            session.mark_satisfied(match[0])
        else:
            raise ValueError(f"event {n}: unknown journal event {kind!r}")
    return session
