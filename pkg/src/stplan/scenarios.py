"""Scenario trees over states of nature and the expected-value construction.

A tree is scoped to one (facility, criterion, location) cell. Each node holds
the conditional probability of its state given the parent's, and the
performance realized in its period; leaves sit at the final period. Expected
per-period performances replace the deterministic evaluations, after which
every solver and dashboard operation applies unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ProblemInstance, with_evaluations

SIBLING_TOL = 1e-9
FIXTURE_TOL = 1e-3  # transcribed probabilities carry print rounding


@dataclass(frozen=True)
class TreeNode:
    state: str
    performance: float
    probability: float | None = None  # conditional on the parent; None at the root
    children: tuple["TreeNode", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class ScenarioTree:
    facility: int
    criterion: int
    location: int
    root: TreeNode

    def depth(self) -> int:
        d = 0
        level = [self.root]
        while any(n.children for n in level):
            level = [c for n in level for c in n.children]
            d += 1
        return d

    def nodes_at(self, period: int) -> list[TreeNode]:
        level = [self.root]
        for _ in range(period):
            level = [c for n in level for c in n.children]
        return level

    def resolve(self, path: tuple[int, ...]) -> TreeNode:
        node = self.root
        for k in path:
            node = node.children[k]
        return node


def path_probability(tree: ScenarioTree, node) -> float:
    """Unconditional probability of a state: the product of conditional
    probabilities along its root path. Accepts a node or a child-index path."""
    if isinstance(node, tuple):
        p = 1.0
        cur = tree.root
        for k in node:
            cur = cur.children[k]
            p *= cur.probability
        return p
    target = node
    prob = _find_path_product(tree.root, target, 1.0)
    if prob is None:
        raise ValueError("node not in tree")
    return prob


def _find_path_product(node: TreeNode, target: TreeNode, acc: float) -> float | None:
    if node is target:
        return acc
    for child in node.children:
        got = _find_path_product(child, target, acc * child.probability)
        if got is not None:
            return got
    return None


def expected_performance(tree: ScenarioTree, period: int) -> float:
    """Probability-weighted mean of the period's state performances."""
    if period == 0:
        return float(tree.root.performance)
    level = [(c, c.probability) for c in tree.root.children]
    for _ in range(period - 1):
        level = [(c, p * c.probability) for n, p in level for c in n.children]
    return float(sum(p * node.performance for node, p in level))


def validate_tree(tree: ScenarioTree, horizon: int | None = None,
                  prob_tol: float = SIBLING_TOL) -> list[str]:
    """Sibling-probability normalization, uniform leaf depth, nonnegative
    performances and probabilities; returns one message per violation."""
    errors: list[str] = []
    leaf_depths: set[int] = set()

    def walk(node: TreeNode, depth: int):
        if node.performance < 0:
            errors.append(f"state {node.state!r}: negative performance")
        if node.children:
            s = 0.0
            for c in node.children:
                if c.probability is None:
                    errors.append(f"state {c.state!r}: missing conditional probability")
                    continue
                if c.probability < 0:
                    errors.append(f"state {c.state!r}: negative probability")
                s += c.probability
            if abs(s - 1.0) > prob_tol:
                errors.append(f"state {node.state!r}: children probabilities sum {s:g} != 1")
            for c in node.children:
                walk(c, depth + 1)
        else:
            leaf_depths.add(depth)

    walk(tree.root, 0)
    if len(leaf_depths) > 1:
        errors.append(f"leaves at mixed depths {sorted(leaf_depths)}")
    if horizon is not None and leaf_depths and leaf_depths != {horizon}:
        errors.append(f"leaf depth {sorted(leaf_depths)} != horizon {horizon}")
    return errors


def expected_instance(instance: ProblemInstance, trees: list[ScenarioTree],
                      prob_tol: float = FIXTURE_TOL) -> ProblemInstance:
    """Instance whose evaluations carry per-accrual-period expected values.

    Cells without a tree keep their deterministic value in every period; each
    tree must reach the horizon and a cell may have at most one tree.
    """
    if not trees:
        return instance
    seen: set[tuple[int, int, int]] = set()
    cube = np.array(instance.eval_cube(), dtype=float)
    for tree in trees:
        key = (tree.facility, tree.criterion, tree.location)
        if key in seen:
            raise ValueError(f"multiple trees for cell {key}")
        seen.add(key)
        errors = validate_tree(tree, instance.horizon, prob_tol)
        if errors:
            raise ValueError(f"tree for cell {key}: " + "; ".join(errors))
        for t in range(1, instance.horizon + 1):
            cube[tree.facility, tree.criterion, tree.location, t - 1] = \
                expected_performance(tree, t)
    return with_evaluations(instance, instance.evaluations, cube)


def tree_from_leaf_distribution(facility: int, criterion: int, location: int,
                                leaf_probs: list[float], leaf_values: list[float],
                                branching: int = 2) -> ScenarioTree:
    """Rebuild a full tree from terminal path probabilities and performances.

    Conditional probabilities come from ratios of subtree sums; internal
    performances are backward expectations of their children, which makes the
    per-period expectation constant across periods and equal to the terminal
    one.
    """
    n = len(leaf_probs)
    if n != len(leaf_values) or n == 0:
        raise ValueError("leaf probabilities and values must align and be nonempty")
    depth = round(np.log(n) / np.log(branching))
    if branching ** depth != n:
        raise ValueError(f"{n} leaves do not form a complete {branching}-ary tree")

    def build(lo: int, hi: int, level: int, label: str) -> TreeNode:
        if level == depth:
            return TreeNode(label, leaf_values[lo], None)
        width = (hi - lo) // branching
        kids = []
        for b in range(branching):
            child = build(lo + b * width, lo + (b + 1) * width, level + 1,
                          f"{label},{b + 1}" if label else str(b + 1))
            kids.append((child, sum(leaf_probs[lo + b * width: lo + (b + 1) * width])))
        total = sum(m for _, m in kids) or 1.0
        children = tuple(
            TreeNode(c.state, c.performance, m / total, c.children) for c, m in kids)
        perf = sum((m / total) * c.performance for c, m in kids)
        return TreeNode(label or "root", perf, None, children)

    return ScenarioTree(facility, criterion, location, build(0, n, 0, ""))
