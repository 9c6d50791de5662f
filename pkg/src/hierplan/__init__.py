"""hierplan: abstraction hierarchies over discrete MDPs.

Build a stack of increasingly abstract MDPs from user-supplied option
sets, answer plan queries at the highest level that brackets them, refine
abstract plans down to base-level action sequences, and compare against
flat planning.
"""

from .abstraction import (
    AbstractLevel,
    AbstractSubgoal,
    Construction,
    EffectSet,
    OptionPart,
    PartitionedOption,
    RewardMode,
    Subgoal,
    Unclassifiable,
    assign_rewards,
    build_factored_abstraction,
    build_plan_graph,
    classify_option,
    compute_effect_set,
    partition_option,
)
from .bench import BenchmarkRow, FlatSMDP, flatten_options, run_benchmark
from .core import (
    BaseMDP,
    ExecutionTrace,
    Option,
    RunningMean,
    StateSpace,
    Variable,
    execute_option,
    one_step_preimage_options,
)
from .domain_io import load_domain, load_query
from .hierarchy import Hierarchy, PlanQuery, Violation
from .pddl import export_pddl
from .planner import (
    InstrumentationRecord,
    MatchPair,
    Plan,
    PlanAnswer,
    answer_query,
    candidate_goals,
    candidate_starts,
    execute_refined,
    findplan,
    findplan_value_iteration,
    plan_match,
    planning_cost,
    refine,
)
from .symbols import GroundingSet, Symbol, SymbolTable, final_ground, ground
from .taxi import (
    DEFAULT_LAYOUT,
    TaxiLayout,
    build_taxi,
    build_taxi_hierarchy,
    depot_seed_states,
    benchmark_queries,
    taxi_options_level1,
    taxi_options_level2,
)

__all__ = [
    "AbstractLevel",
    "AbstractSubgoal",
    "BaseMDP",
    "BenchmarkRow",
    "Construction",
    "DEFAULT_LAYOUT",
    "EffectSet",
    "ExecutionTrace",
    "FlatSMDP",
    "GroundingSet",
    "Hierarchy",
    "InstrumentationRecord",
    "MatchPair",
    "Option",
    "OptionPart",
    "PartitionedOption",
    "Plan",
    "PlanAnswer",
    "PlanQuery",
    "RewardMode",
    "RunningMean",
    "StateSpace",
    "Subgoal",
    "Symbol",
    "SymbolTable",
    "TaxiLayout",
    "Unclassifiable",
    "Variable",
    "Violation",
    "answer_query",
    "assign_rewards",
    "build_factored_abstraction",
    "build_plan_graph",
    "build_taxi",
    "build_taxi_hierarchy",
    "candidate_goals",
    "candidate_starts",
    "classify_option",
    "compute_effect_set",
    "depot_seed_states",
    "execute_option",
    "execute_refined",
    "export_pddl",
    "final_ground",
    "findplan",
    "findplan_value_iteration",
    "flatten_options",
    "ground",
    "load_domain",
    "load_query",
    "one_step_preimage_options",
    "benchmark_queries",
    "partition_option",
    "plan_match",
    "planning_cost",
    "refine",
    "run_benchmark",
    "taxi_options_level1",
    "taxi_options_level2",
]
