"""Instance files, strategy files, and CSV export.

One JSON document carries the core instance plus the optional blocks
(thresholds, stakeholders, uncertainty trees, continuous bounds). Parsing is
strict: unknown keys are rejected, and every error carries a JSON-pointer to
the offending location. Serialization is canonical (sorted keys), so
parse -> serialize -> parse is the identity.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, IO

import numpy as np

from .dashboard import DashboardTable, StakeholderSet, table_rows
from .drsa import ThresholdScheme
from .lp import BudgetBounds
from .model import ProblemInstance, Strategy, instance_errors
from .scenarios import ScenarioTree, TreeNode


class SchemaError(ValueError):
    """Parse or validation failure with a JSON-pointer location."""

    def __init__(self, message: str, pointer: str):
        super().__init__(f"{pointer}: {message}")
        self.message = message
        self.pointer = pointer

    def to_json(self) -> dict:
        return {"code": "schema_error", "message": self.message, "pointer": self.pointer}


@dataclass
class InstanceBundle:
    """A parsed instance plus whichever optional blocks the file carried."""

    instance: ProblemInstance
    thresholds: ThresholdScheme | None = None
    stakeholders: StakeholderSet | None = None
    trees: list[ScenarioTree] = field(default_factory=list)
    bounds: BudgetBounds | None = None


def _expect(doc: Any, typ, pointer: str, what: str):
    if not isinstance(doc, typ):
        raise SchemaError(f"expected {what}", pointer)
    return doc


def _known_keys(doc: dict, allowed: set[str], pointer: str):
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError(f"unknown keys {sorted(unknown)}", pointer)


def _number(doc: Any, pointer: str) -> float:
    if isinstance(doc, bool) or not isinstance(doc, (int, float)):
        raise SchemaError("expected a number", pointer)
    return float(doc)


def _name_list(doc: Any, pointer: str) -> list[str]:
    items = _expect(doc, list, pointer, "a list of names")
    out = []
    for k, v in enumerate(items):
        out.append(_expect(v, str, f"{pointer}/{k}", "a name string"))
    if len(set(out)) != len(out):
        raise SchemaError("names must be unique", pointer)
    return out


def parse_instance(doc: dict) -> InstanceBundle:
    _expect(doc, dict, "", "a JSON object")
    _known_keys(doc, {"meta", "evaluations", "costs", "budgets", "weights", "precedence",
                      "thresholds", "stakeholders", "uncertainty", "continuous"}, "")
    for key in ("meta", "evaluations", "costs", "budgets", "weights"):
        if key not in doc:
            raise SchemaError(f"missing required block {key!r}", "")

    meta = _expect(doc["meta"], dict, "/meta", "an object")
    _known_keys(meta, {"name", "interest_rate", "horizon", "facilities", "locations",
                       "criteria"}, "/meta")
    for key in ("interest_rate", "horizon", "facilities", "locations", "criteria"):
        if key not in meta:
            raise SchemaError(f"missing key {key!r}", "/meta")
    facilities = _name_list(meta["facilities"], "/meta/facilities")
    locations = _name_list(meta["locations"], "/meta/locations")
    criteria = _name_list(meta["criteria"], "/meta/criteria")
    horizon = meta["horizon"]
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise SchemaError("horizon must be a positive integer", "/meta/horizon")
    rate = _number(meta["interest_rate"], "/meta/interest_rate")
    if rate < 0:
        raise SchemaError("interest rate must be nonnegative", "/meta/interest_rate")
    name = meta.get("name", "")
    if not isinstance(name, str):
        raise SchemaError("name must be a string", "/meta/name")

    evaluations = _parse_evaluations(doc["evaluations"], facilities, criteria, locations)
    costs = _parse_named_numbers(doc["costs"], facilities, "/costs")
    weights = _parse_named_numbers(doc["weights"], criteria, "/weights")
    wsum = float(np.sum(weights))
    if abs(wsum - 1.0) > 1e-9:
        raise SchemaError(f"weights sum {wsum:g} != 1", "/weights")

    budgets = _expect(doc["budgets"], list, "/budgets", "a list of numbers")
    if len(budgets) != horizon:
        raise SchemaError(f"expected {horizon} period budgets, got {len(budgets)}", "/budgets")
    budget_arr = np.array([_number(b, f"/budgets/{t}") for t, b in enumerate(budgets)])

    precedence: list[tuple[int, int]] = []
    for k, pair in enumerate(_expect(doc.get("precedence", []), list, "/precedence", "a list")):
        ptr = f"/precedence/{k}"
        pair = _expect(pair, list, ptr, "a [before, after] pair")
        if len(pair) != 2:
            raise SchemaError("expected a [before, after] pair", ptr)
        precedence.append((_facility_index(pair[0], facilities, f"{ptr}/0"),
                           _facility_index(pair[1], facilities, f"{ptr}/1")))

    instance = ProblemInstance(
        facilities=tuple(facilities), locations=tuple(locations), criteria=tuple(criteria),
        horizon=horizon, evaluations=evaluations, costs=costs, budgets=budget_arr,
        weights=weights, interest_rate=rate, precedence=tuple(precedence), name=name)
    errors = instance_errors(instance)
    if errors:
        raise SchemaError("; ".join(errors), "")

    bundle = InstanceBundle(instance)
    if "thresholds" in doc:
        bundle.thresholds = _parse_thresholds(doc["thresholds"], criteria, locations)
    if "stakeholders" in doc:
        bundle.stakeholders = _parse_stakeholders(doc["stakeholders"], criteria)
    if "uncertainty" in doc:
        bundle.trees = _parse_uncertainty(doc["uncertainty"], facilities, criteria, locations)
    if "continuous" in doc:
        bundle.bounds = _parse_bounds(doc["continuous"], facilities, locations, horizon,
                                      instance)
    return bundle


def _facility_index(value: Any, facilities: list[str], pointer: str) -> int:
    name = _expect(value, str, pointer, "a facility name")
    if name not in facilities:
        raise SchemaError(f"unknown facility {name!r}", pointer)
    return facilities.index(name)


def _parse_evaluations(doc, facilities, criteria, locations) -> np.ndarray:
    table = _expect(doc, dict, "/evaluations", "an object keyed by facility")
    _known_keys(table, set(facilities), "/evaluations")
    out = np.full((len(facilities), len(criteria), len(locations)), np.nan)
    for i, fac in enumerate(facilities):
        if fac not in table:
            raise SchemaError(f"missing evaluations for facility {fac!r}", "/evaluations")
        row = _expect(table[fac], dict, f"/evaluations/{fac}", "an object keyed by criterion")
        _known_keys(row, set(criteria), f"/evaluations/{fac}")
        for j, crit in enumerate(criteria):
            if crit not in row:
                raise SchemaError(f"missing criterion {crit!r}", f"/evaluations/{fac}")
            cell = _expect(row[crit], dict, f"/evaluations/{fac}/{crit}",
                           "an object keyed by location")
            _known_keys(cell, set(locations), f"/evaluations/{fac}/{crit}")
            for l, loc in enumerate(locations):
                if loc not in cell:
                    raise SchemaError(f"missing location {loc!r}",
                                      f"/evaluations/{fac}/{crit}")
                out[i, j, l] = _number(cell[loc], f"/evaluations/{fac}/{crit}/{loc}")
    return out


def _parse_named_numbers(doc, names, pointer) -> np.ndarray:
    table = _expect(doc, dict, pointer, "an object")
    _known_keys(table, set(names), pointer)
    out = np.zeros(len(names))
    for k, name in enumerate(names):
        if name not in table:
            raise SchemaError(f"missing entry for {name!r}", pointer)
        out[k] = _number(table[name], f"{pointer}/{name}")
    return out


def _parse_thresholds(doc, criteria, locations) -> ThresholdScheme:
    block = _expect(doc, dict, "/thresholds", "an object")
    _known_keys(block, {"labels", "values"}, "/thresholds")
    labels = _name_list(block.get("labels"), "/thresholds/labels")
    values = _expect(block.get("values"), dict, "/thresholds/values", "an object")
    _known_keys(values, set(criteria), "/thresholds/values")
    n_levels = len(labels) - 1
    arr = np.zeros((len(criteria), len(locations), n_levels))
    for j, crit in enumerate(criteria):
        row = _expect(values.get(crit), dict, f"/thresholds/values/{crit}",
                      "an object keyed by location")
        _known_keys(row, set(locations), f"/thresholds/values/{crit}")
        for l, loc in enumerate(locations):
            ptr = f"/thresholds/values/{crit}/{loc}"
            vals = _expect(row.get(loc), list, ptr, "an ascending list of numbers")
            if len(vals) != n_levels:
                raise SchemaError(f"expected {n_levels} thresholds", ptr)
            arr[j, l] = [_number(v, f"{ptr}/{k}") for k, v in enumerate(vals)]
    try:
        return ThresholdScheme(tuple(labels), arr)
    except ValueError as exc:
        raise SchemaError(str(exc), "/thresholds") from exc


def _parse_stakeholders(doc, criteria) -> StakeholderSet:
    block = _expect(doc, dict, "/stakeholders", "an object")
    _known_keys(block, {"members"}, "/stakeholders")
    members = _expect(block.get("members"), list, "/stakeholders/members", "a list")
    names, cw, pw = [], [], []
    for k, entry in enumerate(members):
        ptr = f"/stakeholders/members/{k}"
        entry = _expect(entry, dict, ptr, "an object")
        _known_keys(entry, {"name", "criterion_weights", "planner_weight"}, ptr)
        names.append(_expect(entry.get("name"), str, f"{ptr}/name", "a name"))
        cw.append(_parse_named_numbers(entry.get("criterion_weights"), criteria,
                                       f"{ptr}/criterion_weights"))
        pw.append(_number(entry.get("planner_weight"), f"{ptr}/planner_weight"))
    stakeholders = StakeholderSet(tuple(names), np.array(cw).T, np.array(pw))
    try:
        return stakeholders.validate(len(criteria))
    except ValueError as exc:
        raise SchemaError(str(exc), "/stakeholders") from exc


def _parse_tree_node(doc, pointer, is_root) -> TreeNode:
    node = _expect(doc, dict, pointer, "a tree node")
    allowed = {"state", "performance", "children"} | (set() if is_root else {"probability"})
    _known_keys(node, allowed, pointer)
    state = _expect(node.get("state", ""), str, f"{pointer}/state", "a state label")
    perf = _number(node.get("performance", 0.0), f"{pointer}/performance")
    prob = None
    if not is_root:
        if "probability" not in node:
            raise SchemaError("missing conditional probability", pointer)
        prob = _number(node["probability"], f"{pointer}/probability")
    children = []
    for k, child in enumerate(_expect(node.get("children", []), list,
                                      f"{pointer}/children", "a list")):
        children.append(_parse_tree_node(child, f"{pointer}/children/{k}", False))
    return TreeNode(state, perf, prob, tuple(children))


def _parse_uncertainty(doc, facilities, criteria, locations) -> list[ScenarioTree]:
    entries = _expect(doc, list, "/uncertainty", "a list of trees")
    trees = []
    for k, entry in enumerate(entries):
        ptr = f"/uncertainty/{k}"
        entry = _expect(entry, dict, ptr, "an object")
        _known_keys(entry, {"facility", "criterion", "location", "root"}, ptr)
        fac = _facility_index(entry.get("facility"), facilities, f"{ptr}/facility")
        crit = _expect(entry.get("criterion"), str, f"{ptr}/criterion", "a criterion name")
        if crit not in criteria:
            raise SchemaError(f"unknown criterion {crit!r}", f"{ptr}/criterion")
        loc = _expect(entry.get("location"), str, f"{ptr}/location", "a location name")
        if loc not in locations:
            raise SchemaError(f"unknown location {loc!r}", f"{ptr}/location")
        root = _parse_tree_node(entry.get("root"), f"{ptr}/root", True)
        trees.append(ScenarioTree(fac, criteria.index(crit), locations.index(loc), root))
    return trees


def _parse_bound_block(doc, names, horizon, pointer) -> dict[tuple[int, int], float]:
    block = _expect(doc, dict, pointer, "an object")
    _known_keys(block, set(names), pointer)
    out: dict[tuple[int, int], float] = {}
    for name, periods in block.items():
        periods = _expect(periods, dict, f"{pointer}/{name}", "an object keyed by period")
        for t_str, value in periods.items():
            ptr = f"{pointer}/{name}/{t_str}"
            try:
                t = int(t_str)
            except ValueError:
                raise SchemaError("period keys must be integers", ptr) from None
            if not 0 <= t < horizon:
                raise SchemaError(f"period {t} outside 0..{horizon - 1}", ptr)
            out[(names.index(name), t)] = _number(value, ptr)
    return out


def _parse_bounds(doc, facilities, locations, horizon, instance) -> BudgetBounds:
    block = _expect(doc, dict, "/continuous", "an object")
    _known_keys(block, {"facility_max", "facility_min", "location_max", "location_min"},
                "/continuous")
    bounds = BudgetBounds(
        facility_max=_parse_bound_block(block.get("facility_max", {}), facilities, horizon,
                                        "/continuous/facility_max"),
        facility_min=_parse_bound_block(block.get("facility_min", {}), facilities, horizon,
                                        "/continuous/facility_min"),
        location_max=_parse_bound_block(block.get("location_max", {}), locations, horizon,
                                        "/continuous/location_max"),
        location_min=_parse_bound_block(block.get("location_min", {}), locations, horizon,
                                        "/continuous/location_min"))
    errs = bounds.errors(instance)
    if errs:
        raise SchemaError("; ".join(errs), "/continuous")
    return bounds


# --- serialization ------------------------------------------------------------


def serialize_bundle(bundle: InstanceBundle) -> dict:
    inst = bundle.instance
    doc: dict[str, Any] = {
        "meta": {
            "interest_rate": inst.interest_rate,
            "horizon": inst.horizon,
            "facilities": list(inst.facilities),
            "locations": list(inst.locations),
            "criteria": list(inst.criteria),
        },
        "evaluations": {
            fac: {crit: {loc: float(inst.evaluations[i, j, l])
                         for l, loc in enumerate(inst.locations)}
                  for j, crit in enumerate(inst.criteria)}
            for i, fac in enumerate(inst.facilities)},
        "costs": {fac: float(inst.costs[i]) for i, fac in enumerate(inst.facilities)},
        "budgets": [float(b) for b in inst.budgets],
        "weights": {crit: float(inst.weights[j]) for j, crit in enumerate(inst.criteria)},
    }
    if inst.name:
        doc["meta"]["name"] = inst.name
    if inst.precedence:
        doc["precedence"] = [[inst.facilities[a], inst.facilities[b]]
                             for a, b in inst.precedence]
    if bundle.thresholds is not None:
        sch = bundle.thresholds
        doc["thresholds"] = {
            "labels": list(sch.labels),
            "values": {crit: {loc: [float(v) for v in sch.thresholds[j, l]]
                              for l, loc in enumerate(inst.locations)}
                       for j, crit in enumerate(inst.criteria)}}
    if bundle.stakeholders is not None:
        st = bundle.stakeholders
        doc["stakeholders"] = {"members": [
            {"name": st.stakeholders[k],
             "criterion_weights": {crit: float(st.criterion_weights[j, k])
                                   for j, crit in enumerate(inst.criteria)},
             "planner_weight": float(st.planner_weights[k])}
            for k in range(st.n_stakeholders)]}
    if bundle.trees:
        doc["uncertainty"] = [
            {"facility": inst.facilities[tree.facility],
             "criterion": inst.criteria[tree.criterion],
             "location": inst.locations[tree.location],
             "root": _serialize_node(tree.root, True)}
            for tree in bundle.trees]
    if bundle.bounds is not None:
        b = bundle.bounds
        doc["continuous"] = {
            "facility_max": _serialize_bound_block(b.facility_max, inst.facilities),
            "facility_min": _serialize_bound_block(b.facility_min, inst.facilities),
            "location_max": _serialize_bound_block(b.location_max, inst.locations),
            "location_min": _serialize_bound_block(b.location_min, inst.locations)}
    return doc


def _serialize_node(node: TreeNode, is_root: bool) -> dict:
    out: dict[str, Any] = {"state": node.state, "performance": float(node.performance)}
    if not is_root:
        out["probability"] = float(node.probability)
    if node.children:
        out["children"] = [_serialize_node(c, False) for c in node.children]
    return out


def _serialize_bound_block(bounds: dict[tuple[int, int], float], names) -> dict:
    out: dict[str, dict[str, float]] = {}
    for (k, t), v in sorted(bounds.items()):
        out.setdefault(names[k], {})[str(t)] = float(v)
    return out


def load_instance(path: str | Path) -> InstanceBundle:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "") from exc
    return parse_instance(doc)


def save_instance(bundle: InstanceBundle, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(serialize_bundle(bundle)), encoding="utf-8")


def dumps_canonical(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# --- strategies ----------------------------------------------------------------


def parse_strategy(doc: dict, instance: ProblemInstance) -> Strategy:
    _expect(doc, dict, "", "a JSON object")
    _known_keys(doc, {"activations"}, "")
    acts = []
    for k, entry in enumerate(_expect(doc.get("activations"), list, "/activations", "a list")):
        ptr = f"/activations/{k}"
        entry = _expect(entry, dict, ptr, "an object")
        _known_keys(entry, {"facility", "location", "period"}, ptr)
        fac = _facility_index(entry.get("facility"), list(instance.facilities),
                              f"{ptr}/facility")
        loc = _expect(entry.get("location"), str, f"{ptr}/location", "a location name")
        if loc not in instance.locations:
            raise SchemaError(f"unknown location {loc!r}", f"{ptr}/location")
        period = entry.get("period")
        if isinstance(period, bool) or not isinstance(period, int):
            raise SchemaError("period must be an integer", f"{ptr}/period")
        if not 0 <= period < instance.horizon:
            raise SchemaError(f"period {period} outside 0..{instance.horizon - 1}",
                              f"{ptr}/period")
        acts.append((fac, instance.locations.index(loc), period))
    return Strategy(tuple(acts))


def serialize_strategy(strategy: Strategy, instance: ProblemInstance) -> dict:
    return {"activations": [
        {"facility": instance.facilities[i], "location": instance.locations[l], "period": t}
        for i, l, t in strategy.activations]}


def load_strategy(path: str | Path, instance: ProblemInstance) -> Strategy:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "") from exc
    return parse_strategy(doc, instance)


# --- CSV -----------------------------------------------------------------------


def write_table_csv(instance: ProblemInstance, table: DashboardTable, out: IO[str],
                    stakeholders: StakeholderSet | None = None) -> None:
    writer = csv.writer(out, lineterminator="\n")
    for row in table_rows(instance, table, stakeholders):
        writer.writerow(row)


def read_table_csv(text: str) -> tuple[list[str], list[tuple[tuple[str, ...], float]]]:
    """Header axes and (label tuple, value) rows; values parse back exactly
    because they are written with full repr precision."""
    rows = list(csv.reader(text.splitlines()))
    header = rows[0]
    out = []
    for row in rows[1:]:
        out.append((tuple(row[:-1]), float(row[-1])))
    return header, out
