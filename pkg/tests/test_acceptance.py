"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
(run with -s to see them all). Two sub-criteria are implemented as stated and
fail honestly against recomputation from the source tables; their tests print
the conflicting numbers (see the repository README).
"""
import time

import numpy as np
import pytest

from stplan import (BudgetAllocation, ImoSession, Strategy, aggregate,
                    attainment_counts, brute_force, build_program, check_allocation,
                    classify, cp_family, deviations, expected_instance,
                    expected_performance, ideal_point, induce_rules, maximize,
                    overall_objective, path_probability, solve_cp, solve_lp,
                    solve_minimax, tree_from_leaf_distribution)
from stplan.compromise import CPK, CPL, CPO, CPOL, member_objective
from stplan.dashboard import (AxisSelection, CRITERION, FACILITY, LOCATION, PERIOD,
                              StakeholderSet, WEIGHT_CRITERIA, WEIGHT_NONE,
                              WEIGHT_STAKEHOLDERS)
from stplan.drsa import FORM_LOCATION, formulation_objectives
from stplan.solver import count_feasible
from conftest import (PAPER_OPTIMUM, TABLE5_CPL, TABLE5_CPO, TABLE5_CPOL,
                      random_instance)
from test_drsa import T9_VECTORS, T9_LABELS, T10_VECTORS, T10_LABELS, make_sample
from test_lp import paper_allocation


RESULTS: list[str] = []


def report(ok: bool, name: str, detail: str = "") -> bool:
    line = f"ACCEPTANCE {'PASS' if ok else 'FAIL'}: {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    RESULTS.append(line)
    return ok


def test_weighted_optimum_reproduction(instance):
    start = time.perf_counter()
    res = maximize(instance, overall_objective(instance))
    elapsed = time.perf_counter() - start
    ok = res.strategy.activations == PAPER_OPTIMUM and elapsed < 5.0
    assert report(ok, "weighted optimum reproduction",
                  f"value {res.objective_value:.6f}, {elapsed:.2f}s")


def test_oracle_equivalence_200_instances():
    rng = np.random.default_rng(2024)
    checked = 0
    minimax_checked = 0
    for _ in range(200):
        inst = random_instance(rng, n_max=4, m=2, p_max=3, precedence=True)
        obj = overall_objective(inst)
        a = maximize(inst, obj)
        b = brute_force(inst, obj)
        assert a.objective_value == b.objective_value, "objective value must match exactly"
        assert a.strategy == b.strategy, "tie-break must produce the same strategy"
        checked += 1
        devs = []
        for l in range(inst.n_locations):
            from stplan.objectives import location_objective
            o = location_objective(inst, l)
            ideal = maximize(inst, o).objective_value
            if ideal > 0:
                devs.append((o, ideal))
        if devs:
            am = solve_minimax(inst, devs)
            bm = brute_force(inst, deviations=devs)
            assert am.objective_value == bm.objective_value
            assert am.strategy == bm.strategy
            minimax_checked += 1
    assert report(checked == 200, "oracle equivalence",
                  f"{checked} weighted + {minimax_checked} minimax instances, exact")


def test_cp_minimax_equals_bruteforce(instance):
    details = []
    ok = True
    for kind in (CPL, CPO, CPOL):
        result = solve_cp(instance, kind)
        family = cp_family(instance, kind)
        devs = [(member_objective(instance, family, m), result.ideal[m])
                for m in family.members]
        oracle = brute_force(instance, deviations=devs)
        ok &= abs(result.minimax - oracle.objective_value) <= 1e-9
        details.append(f"{kind}={result.minimax:.9f}")
    assert report(ok, "compromise minimax equals brute force", ", ".join(details))


def test_cp_table5_match_or_tie(instance):
    """Implemented as specified: each family's optimum must match the printed
    strategy table, or the mismatch must be an exact minimax tie. The printed
    strategies recompute to strictly worse deviations from the source tables
    (paper errata; decisions ledger), so this criterion fails honestly."""
    printed = {CPL: TABLE5_CPL, CPO: TABLE5_CPO, CPOL: TABLE5_CPOL}
    failures = []
    for kind, activations in printed.items():
        result = solve_cp(instance, kind)
        table5 = Strategy(activations)
        if result.strategy == table5:
            continue
        family = cp_family(instance, kind)
        printed_mm = max(deviations(instance, table5, family, result.ideal).values())
        if abs(printed_mm - result.minimax) <= 1e-9:
            continue  # an exact tie would satisfy the criterion
        failures.append(
            f"{kind}: computed {result.strategy.activations} minimax {result.minimax:.6f}"
            f" vs printed {table5.activations} minimax {printed_mm:.6f}")
    report(not failures, "compromise strategies match printed table or tie",
           "; ".join(failures) or "all matched")
    if failures:
        pytest.fail("printed compromise strategies are not minimax ties: "
                    + " | ".join(failures))


def test_cp_rescaling_invariance(instance):
    from dataclasses import replace
    base = solve_cp(instance, CPO)
    scaled = replace(instance, weights=np.array(instance.weights) * 4.2)
    again = solve_cp(scaled, CPO)
    ok = (again.strategy == base.strategy
          and abs(again.minimax - base.minimax) <= 1e-12
          and all(abs(again.deviations[m] - base.deviations[m]) <= 1e-12
                  for m in base.deviations))
    assert report(ok, "per-criterion deviations invariant under weight rescaling")


PRINTED_QUALITATIVE = [
    "S S ES ES S S", "VS VS ES ES VS S", "WS WS S S S S", "ES ES ES ES ES ES",
    "ES ES WS WS WS WS", "WS WS WS WS VS ES", "S S ES VS S VS", "WS S ES ES WS WS"]


def test_qualitative_mapping_48_of_48(instance, council):
    short = ["WS", "S", "VS", "ES"]
    hits = 0
    for i in range(8):
        cells = PRINTED_QUALITATIVE[i].split()
        for j in range(3):
            for l in range(2):
                got = short[classify(instance.evaluations[i, j, l],
                                     council.thresholds.thresholds[j, l]) - 1]
                hits += got == cells[2 * j + l]
    assert report(hits == 48, "qualitative mapping", f"{hits}/48 cells")


def test_attainment_counts_consistent_entries(instance, council):
    st2 = Strategy(((0, 1, 3), (1, 1, 0), (2, 1, 2), (3, 1, 0), (6, 1, 1)))
    st4 = Strategy(((0, 1, 3), (1, 1, 0), (3, 1, 0), (5, 1, 2), (6, 1, 1)))
    c2 = attainment_counts(instance, st2, council.thresholds)
    c4 = attainment_counts(instance, st4, council.thresholds)
    consistent = (c2.sum(1, 1) == 14 and c4.sum(1, 1) == 13 and c4.sum(3, 1) == 6)
    # the printed off-by-one entries, asserted as documented errata:
    # recomputation must give the corrected values, not the printed ones
    printed = {"ST2 F2,South": 9, "ST2 F3,South": 6, "ST4 F2,South": 10}
    recomputed = {"ST2 F2,South": c2.sum(2, 1), "ST2 F3,South": c2.sum(3, 1),
                  "ST4 F2,South": c4.sum(2, 1)}
    errata_documented = (recomputed == {"ST2 F2,South": 8, "ST2 F3,South": 5,
                                        "ST4 F2,South": 9}
                         and all(recomputed[k] != printed[k] for k in printed))
    assert report(consistent and errata_documented, "attainment counts",
                  f"consistent entries 14/13/6; errata recomputed {recomputed}")


def test_rule_induction_iteration_one():
    rules = induce_rules(make_sample(T9_VECTORS, T9_LABELS))
    got = {r.conditions: r.support for r in rules}
    want = {((1, 12.0),), ((3, 9.0),), ((5, 6.0),)}
    ok = set(got) == want and all(s == frozenset({1, 3, 5}) for s in got.values())
    assert report(ok, "rule induction, first iteration",
                  "F1,South>=12, F2,South>=9, F3,South>=6, full support")


def test_rule_induction_iteration_two():
    rules = induce_rules(make_sample(T10_VECTORS, T10_LABELS))
    got = {r.conditions: r.support for r in rules}
    ok = (got.get(((3, 9.0),)) == frozenset({1, 3, 5})
          and got.get(((5, 6.0),)) == frozenset({1, 3, 5})
          and got.get(((1, 13.0),)) == frozenset({1, 3}))
    assert report(ok, "rule induction, second iteration",
                  "includes F2,South>=9, F3,South>=6 (support 3) and F1,South>=13 (support 2)")


def test_session_protocol_constraint_accumulation(instance, council):
    objectives = formulation_objectives(instance, FORM_LOCATION, council.thresholds)
    sizes = [count_feasible(instance)]
    session = ImoSession(instance, FORM_LOCATION, council.thresholds)
    session.apply_constraint(1, 12.0)  # the worked run's first chosen rule
    ok = all(v[1] >= 12.0 and objectives[1].value(s) >= 12.0
             for s, v in session.current().sample)
    sizes.append(count_feasible(instance, session.constraints))
    session.apply_constraint(3, 9.0)  # and its second
    ok &= all(v[1] >= 12.0 and v[3] >= 9.0 for s, v in session.current().sample)
    sizes.append(count_feasible(instance, session.constraints))
    ok &= sizes[0] >= sizes[1] >= sizes[2]
    ok &= sizes == [98153, 1306, 90]
    assert report(ok, "session protocol", f"region sizes {sizes}")


def test_uncertainty_criterion(instance, council):
    north, south = council.trees
    p = path_probability(north, (0, 0, 0, 0, 0))
    ok = abs(p - 0.80 * 0.65 * 0.30 * 0.60 * 0.25) < 1e-15 and abs(p - 0.0234) < 1e-12

    fig7 = tree_from_leaf_distribution(0, 0, 0, [0.06, 0.24, 0.42, 0.28],
                                       [20.0, 40.0, 60.0, 50.0])
    ok &= expected_performance(fig7, 2) == 50.0

    e811 = expected_performance(north, 5)
    e812 = expected_performance(south, 5)
    ok &= abs(e811 - 73.0) <= 0.5 and abs(e812 - 76.0) <= 0.5

    expected = expected_instance(instance, council.trees)
    res = maximize(expected, overall_objective(expected))
    when = {i: t for i, l, t in res.strategy.activations}
    ok &= when.get(7, 99) <= 1
    assert report(ok, "uncertainty",
                  f"path 0.0234, fig7 50 exact, E=({e811:.3f},{e812:.3f}), "
                  f"social housing at t={when.get(7)}")


def test_stakeholders_criterion(instance, council):
    rng = np.random.default_rng(77)
    z = council.stakeholders.planner_weights
    shared = StakeholderSet(council.stakeholders.stakeholders,
                            np.tile(np.array(instance.weights)[:, None], (1, 3)), z)
    ok = True
    for _ in range(20):
        from conftest import random_strategy
        s = random_strategy(rng, instance)
        plain = aggregate(instance, s, AxisSelection(frozenset(), True, WEIGHT_CRITERIA))
        stake = aggregate(instance, s,
                          AxisSelection(frozenset(), True, WEIGHT_STAKEHOLDERS), shared)
        ok &= abs(stake.value() - plain.value()) <= 1e-9

    exact = 0
    for _ in range(25):
        inst = random_instance(rng, n_max=3, p_max=2)
        k = int(rng.integers(2, 4))
        w = rng.random((inst.n_criteria, k)) + 0.1
        w /= w.sum(axis=0, keepdims=True)
        zz = rng.random(k) + 0.1
        zz /= zz.sum()
        stake = StakeholderSet(tuple(f"s{j}" for j in range(k)), w, zz)
        family = cp_family(inst, CPK, stake)
        ideals = ideal_point(inst, family, stake)
        devs = [(member_objective(inst, family, m, stake), ideals[m])
                for m in family.members if ideals[m] > 0]
        if not devs:
            continue
        a = solve_minimax(inst, devs)
        b = brute_force(inst, deviations=devs)
        ok &= a.objective_value == b.objective_value and a.strategy == b.strategy
        exact += 1
    assert report(ok, "stakeholders",
                  f"single-DM reduction 1e-9; {exact} stakeholder minimax solves exact")


def test_continuous_lp_solver_allocation_and_oracles(instance, council):
    program = build_program(instance, council.bounds)
    allocation, value = solve_lp(program)
    feasible = check_allocation(instance, council.bounds, allocation).feasible

    _, whole = solve_lp(program, decompose=False)
    decomposition_ok = abs(value - whole) <= 1e-9

    rng = np.random.default_rng(5)
    never_beaten = True
    vertices = []
    for _ in range(10):
        noisy = type(program)(instance, council.bounds,
                              rng.random(program.coefficients.shape))
        vertex, _ = solve_lp(noisy)
        vertices.append(vertex.amounts)
    for _ in range(100):
        lam = rng.random(len(vertices))
        lam /= lam.sum()
        point = sum(l * v for l, v in zip(lam, vertices))
        assert check_allocation(instance, council.bounds,
                                BudgetAllocation(point)).feasible
        never_beaten &= float((program.coefficients * point).sum()) <= value + 1e-9

    ok = feasible and decomposition_ok and never_beaten
    assert report(ok, "continuous program: feasibility, decomposition, sampling",
                  f"optimum {value:.4f}")


def test_continuous_lp_objective_vs_printed_allocation(instance, council):
    """Implemented as specified: the solver optimum must reach the printed
    allocation's objective under the same per-unit coefficients. The printed
    allocation violates three location maxima and outspends any point of the
    bounded region (decisions ledger), so this criterion fails honestly."""
    program = build_program(instance, council.bounds)
    _, value = solve_lp(program)
    printed = paper_allocation(instance)
    printed_value = float((program.coefficients * printed.amounts).sum())
    violations = check_allocation(instance, council.bounds, printed).violations
    ok = value >= printed_value - 1e-9
    report(ok, "continuous program: objective reaches printed allocation",
           f"optimum {value:.2f} vs printed {printed_value:.2f}; printed allocation "
           f"breaks {len(violations)} location maxima")
    if not ok:
        pytest.fail(
            f"bounded optimum {value:.4f} < printed allocation {printed_value:.4f}; "
            f"the printed allocation is infeasible: "
            + "; ".join(v.detail for v in violations))


def _marginalize(table_cells, axes_order, axis, weights):
    """Sum a finer table's cells over one axis (weighted for the criterion)."""
    pos = axes_order.index(axis)
    out = {}
    for key, value in table_cells.items():
        reduced = key[:pos] + key[pos + 1:]
        w = weights[key[pos]] if axis == CRITERION else 1.0
        out[reduced] = out.get(reduced, 0.0) + w * value
    return out


def test_dashboard_lattice_1000_random_strategies(instance):
    from dataclasses import replace
    from conftest import random_strategy
    rng = np.random.default_rng(99)
    flat = replace(instance, interest_rate=0.0)
    axes_all = (FACILITY, CRITERION, LOCATION, PERIOD)
    checked = 0
    for _ in range(1000):
        s = random_strategy(rng, instance)
        tables = {}
        for mask in range(16):
            kept = frozenset(ax for b, ax in enumerate(axes_all) if mask >> b & 1)
            weighting = WEIGHT_NONE if CRITERION in kept else WEIGHT_CRITERIA
            tables[kept] = aggregate(instance, s, AxisSelection(kept, False, weighting))
        for kept, table in tables.items():
            order = [ax for ax in (FACILITY, CRITERION, LOCATION, PERIOD) if ax in kept]
            for axis in kept:
                coarser = tables[kept - {axis}]
                derived = _marginalize(table.cells, order, axis, instance.weights)
                for key, value in coarser.cells.items():
                    assert abs(derived[key] - value) <= 1e-9
                    checked += 1
        # with no discounting, the discounted table is the identical dict
        s0 = random_strategy(rng, flat)
        kept = frozenset({LOCATION, PERIOD})
        a = aggregate(flat, s0, AxisSelection(kept, False, WEIGHT_CRITERIA))
        b = aggregate(flat, s0, AxisSelection(kept, True, WEIGHT_CRITERIA))
        assert a.cells == b.cells
    assert report(True, "dashboard lattice",
                  f"1000 strategies, {checked} marginal cells at 1e-9; rho=0 exact")
