"""stplan: what, where and when to activate facilities under budgets."""

from .model import (EMPTY_STRATEGY, FeasibilityReport, InvalidInstance, ProblemInstance,
                    Strategy, Violation, check_feasibility, discount_factor,
                    instance_errors, validate_instance)
from .dashboard import (AxisSelection, DashboardTable, StakeholderSet, aggregate,
                        full_report, performance_cell)
from .solver import (LinearConstraint, LinearObjective, SolveResult, brute_force,
                     enumerate_nondominated, maximize, solve_minimax)
from .objectives import (criterion_location_objective, criterion_objective, linearize,
                         location_objective, overall_objective, stakeholder_objective)
from .compromise import CpFamily, CpResult, cp_family, deviations, ideal_point, solve_cp
from .lp import (BudgetAllocation, BudgetBounds, InfeasibleProgram, LinearProgram,
                 build_program, check_allocation, solve_lp)
from .drsa import (AttainmentCounts, DecisionRule, LabeledItem, LabeledSample,
                   ThresholdScheme, attainment_counts, classify, formulation_objectives,
                   induce_rules, lower_approximation)
from .session import (EmptyRegionError, ImoSession, LabelError, ProtocolError, replay,
                      sample_representatives)
from .scenarios import (ScenarioTree, TreeNode, expected_instance, expected_performance,
                        path_probability, tree_from_leaf_distribution, validate_tree)
from .io import (InstanceBundle, SchemaError, load_instance, load_strategy, parse_instance,
                 parse_strategy, save_instance, serialize_bundle, serialize_strategy)

__version__ = "0.1.0"
