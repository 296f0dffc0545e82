import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stplan import (InvalidInstance, Strategy, check_feasibility,
                    discount_factor, instance_errors, validate_instance)
from conftest import PAPER_OPTIMUM, random_instance, random_strategy


def test_council_instance_valid(instance):
    assert validate_instance(instance) is instance
    assert instance.n_facilities == 8
    assert instance.horizon == 5


def test_weight_sum_error(instance):
    from dataclasses import replace
    bad = replace(instance, weights=np.array([0.5, 0.3, 0.3]))
    errors = instance_errors(bad)
    assert any("weights sum 1.1" in e for e in errors)
    with pytest.raises(InvalidInstance):
        validate_instance(bad)


def test_precedence_cycle_error(instance):
    from dataclasses import replace
    bad = replace(instance, precedence=((0, 1), (1, 0)))
    assert any("precedence cycle" in e for e in instance_errors(bad))


def test_negative_and_missing_cells(instance):
    from dataclasses import replace
    evals = np.array(instance.evaluations)
    evals[2, 1, 0] = -3
    assert any("nonnegative" in e for e in instance_errors(replace(instance, evaluations=evals)))
    evals[2, 1, 0] = np.nan
    assert any("missing evaluation cell" in e
               for e in instance_errors(replace(instance, evaluations=evals)))


def test_discount_factor_values():
    assert discount_factor(0, 0.1) == 1.0
    # oracle: repeated division by (1 + rate)
    x = 1.0
    for t in range(1, 6):
        x = x / 1.1
        assert discount_factor(t, 0.1) == pytest.approx(x, abs=1e-12)
    assert discount_factor(1, 0.1) == pytest.approx(0.9090909090909091, abs=1e-12)
    assert discount_factor(2, 0.1) == pytest.approx(0.8264462809917354, abs=1e-12)


def test_discount_factor_domain():
    with pytest.raises(ValueError):
        discount_factor(-1, 0.1)
    with pytest.raises(ValueError):
        discount_factor(1, -0.5)


@settings(max_examples=200, deadline=None)
@given(t=st.integers(min_value=0, max_value=60),
       rho=st.floats(min_value=0.0, max_value=5.0, allow_nan=False))
def test_discount_factor_monotone(t, rho):
    v_t = discount_factor(t, rho)
    v_next = discount_factor(t + 1, rho)
    assert 0.0 < v_next <= v_t <= 1.0
    if rho == 0.0:
        assert v_next == v_t
    elif 1.0 + rho > 1.0:  # strict decay needs a representable rate bump
        assert v_next < v_t


def test_paper_optimum_feasible(instance):
    s = Strategy(PAPER_OPTIMUM)
    report = check_feasibility(instance, s)
    assert report.feasible
    assert s.spend(instance)[0] == 400  # 150 + 100 + 150 at the start year


def test_empty_strategy_feasible(instance):
    s = Strategy()
    report = check_feasibility(instance, s)
    assert report.feasible
    assert np.all(s.spend(instance) == 0)


def test_budget_violation(instance):
    # Leisure Centre (cost 300) in the first year (budget 100)
    report = check_feasibility(instance, Strategy(((1, 0, 1),)))
    assert not report.feasible
    assert [v.kind for v in report.violations] == ["budget"]
    assert report.violations[0].period == 1


def test_duplicate_activation_violation(instance):
    report = check_feasibility(instance, Strategy(((3, 0, 0), (3, 1, 2))))
    assert any(v.kind == "activation" for v in report.violations)


def test_out_of_range_raises(instance):
    with pytest.raises(ValueError):
        check_feasibility(instance, Strategy(((99, 0, 0),)))
    with pytest.raises(ValueError):
        check_feasibility(instance, Strategy(((0, 0, 5),)))  # t must stay below p


def test_precedence_weak_semantics(instance):
    from dataclasses import replace
    inst = replace(instance, precedence=((3, 0),))  # recycling before school
    ok = Strategy(((3, 0, 0), (0, 0, 2)))
    assert check_feasibility(inst, ok).feasible
    same_period = Strategy(((3, 0, 0), (0, 0, 0)))
    assert check_feasibility(inst, same_period).feasible  # weak precedence allows ties
    late = Strategy(((3, 0, 3), (0, 0, 2)))
    assert [v.kind for v in check_feasibility(inst, late).violations] == ["precedence"]
    missing = Strategy(((0, 0, 2),))
    assert [v.kind for v in check_feasibility(inst, missing).violations] == ["precedence"]
    predecessor_only = Strategy(((3, 0, 0),))
    assert check_feasibility(inst, predecessor_only).feasible


def test_feasibility_order_independent(instance):
    rng = np.random.default_rng(7)
    for _ in range(25):
        s = random_strategy(rng, instance)
        shuffled = list(s.activations)
        rng.shuffle(shuffled)
        assert Strategy(tuple(shuffled)) == s
        a = check_feasibility(instance, s)
        b = check_feasibility(instance, Strategy(tuple(shuffled)))
        assert a == b


def test_removing_activation_never_breaks_budget():
    rng = np.random.default_rng(11)
    for _ in range(50):
        inst = random_instance(rng)
        s = random_strategy(rng, inst)
        base = {v.kind for v in check_feasibility(inst, s).violations}
        if "budget" in base:
            continue
        for k in range(len(s.activations)):
            reduced = Strategy(s.activations[:k] + s.activations[k + 1:])
            kinds = {v.kind for v in check_feasibility(inst, reduced).violations}
            assert "budget" not in kinds


def test_instance_immutable(instance):
    with pytest.raises(ValueError):
        instance.evaluations[0, 0, 0] = 5.0


def test_strategy_ordering_is_triple_lexicographic():
    assert Strategy() < Strategy(((0, 0, 0),))
    assert Strategy(((1, 0, 0),)) < Strategy(((2, 0, 0),))
    assert Strategy(((1, 0, 0),)) < Strategy(((1, 0, 0), (2, 0, 0)))
    assert Strategy(((0, 0, 1),)) > Strategy(((0, 0, 0), (5, 1, 1)))
