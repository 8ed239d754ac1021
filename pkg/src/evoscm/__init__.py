"""Interpretable policy search for supply-chain problems.

Evolves decision trees with Q-learning leaves through a grammatical encoding,
plus classic baselines (random search, GA, ACO, greedy, tree GP), two
discrete-event problem domains (make-or-buy sourcing and a hybrid flow shop),
dataset generators, and a benchmarking harness with rank-sum comparisons.
"""

from .baselines import (
    SearchSpace,
    aco_run,
    format_candidate,
    ga_run,
    gp_evolve,
    greedy_edd,
    order_crossover,
    random_search,
)
from .bench import (
    ExperimentConfig,
    aggregate,
    compare_dirs,
    emit_trend_csv,
    run_experiment,
    wilcoxon_rank_sum,
    write_artifacts,
)
from .datagen import (
    DataError,
    default_machine_types,
    gen_hfs,
    gen_makeorbuy,
    load_hfs,
    load_machine_types,
    load_makeorbuy,
    save_hfs,
    save_makeorbuy,
)
from .envs import (
    PENALTY_FITNESS,
    BudgetCounter,
    BudgetExhausted,
    Env,
    EnvSpec,
    FeatureSpec,
    ToyThresholdEnv,
    evaluate_fitness,
    greedy_rollout,
    run_episode,
)
from .evolve import EvolutionConfig, Individual, run_eldt
from .flowshop import (
    HfsEnv,
    HfsInstance,
    Job,
    Schedule,
    check_feasible,
    decode_list_schedule,
    hfs_env,
    lower_bounds,
    makespan,
    priorities_to_permutation,
    save_schedule,
)
from .grammar import (
    Grammar,
    IncompleteDerivation,
    build_policy_tree,
    decode,
    default_policy_grammar,
    derive_tokens,
    load_bnf,
    parse_bnf,
)
from .kvconfig import format_kv, load_kv, parse_kv
from .makeorbuy import (
    BUY,
    MAKE,
    MakeOrBuyEnv,
    MakeOrBuyParams,
    Order,
    SimOutcome,
    makeorbuy_env,
    revenue,
    simulate,
)
from .records import BestTrace, RunRecord
from .tree import (
    Condition,
    DecisionTree,
    Leaf,
    LearningConfig,
    Split,
    epsilon_greedy,
    parse_text,
    prune_unreached,
    q_update,
    structurally_equal,
    to_dot,
    to_oneline,
    to_text,
)

__version__ = "0.1.0"

__all__ = [
    "BUY",
    "BestTrace",
    "BudgetCounter",
    "BudgetExhausted",
    "Condition",
    "DataError",
    "DecisionTree",
    "Env",
    "EnvSpec",
    "EvolutionConfig",
    "ExperimentConfig",
    "FeatureSpec",
    "Grammar",
    "HfsEnv",
    "HfsInstance",
    "IncompleteDerivation",
    "Individual",
    "Job",
    "Leaf",
    "LearningConfig",
    "MAKE",
    "MakeOrBuyEnv",
    "MakeOrBuyParams",
    "Order",
    "PENALTY_FITNESS",
    "RunRecord",
    "Schedule",
    "SearchSpace",
    "SimOutcome",
    "Split",
    "ToyThresholdEnv",
    "aco_run",
    "aggregate",
    "build_policy_tree",
    "check_feasible",
    "compare_dirs",
    "decode",
    "decode_list_schedule",
    "default_machine_types",
    "default_policy_grammar",
    "derive_tokens",
    "emit_trend_csv",
    "epsilon_greedy",
    "evaluate_fitness",
    "format_candidate",
    "format_kv",
    "ga_run",
    "gen_hfs",
    "gen_makeorbuy",
    "gp_evolve",
    "greedy_edd",
    "greedy_rollout",
    "hfs_env",
    "load_bnf",
    "load_hfs",
    "load_kv",
    "load_machine_types",
    "load_makeorbuy",
    "lower_bounds",
    "makeorbuy_env",
    "makespan",
    "order_crossover",
    "parse_bnf",
    "parse_kv",
    "parse_text",
    "priorities_to_permutation",
    "prune_unreached",
    "q_update",
    "random_search",
    "revenue",
    "run_eldt",
    "run_episode",
    "run_experiment",
    "save_hfs",
    "save_makeorbuy",
    "save_schedule",
    "simulate",
    "structurally_equal",
    "to_dot",
    "to_oneline",
    "to_text",
    "wilcoxon_rank_sum",
    "write_artifacts",
]
