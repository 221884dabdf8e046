"""Beta-Bernoulli bandits for adaptive treatment allocation, plain and contextual,
with a simulator that replays a trial's participant sequence under each policy."""
from .contextual import ContextualBandit, context_index
from .core import BernoulliBandit, BetaParams, new_bandit, posterior_mean, sample_theta, update
from .environment import MissingCellError, OutcomeModel, TrialRecord, draw_outcome, estimate_model, optimal_arm
from .estimators import BanditAllocator, CellOutcomeModel
from .ingest import ColumnMapping, Dataset, encode_arm, encode_context, encode_outcome, load_csv
from .metrics import aggregate, relative_ratio, step_regret, suboptimal_indicator
from .policies import PolicyKind, select_arm, select_greedy, select_random, select_thompson, select_ucb
from .runner import ExperimentConfig, ResultsBundle, SyntheticSpec, emit_plot_data, load_config, run_experiment

__version__ = "0.1.0"

__all__ = [
    "BanditAllocator",
    "BernoulliBandit",
    "BetaParams",
    "CellOutcomeModel",
    "ColumnMapping",
    "ContextualBandit",
    "Dataset",
    "ExperimentConfig",
    "MissingCellError",
    "OutcomeModel",
    "PolicyKind",
    "ResultsBundle",
    "SyntheticSpec",
    "TrialRecord",
    "aggregate",
    "context_index",
    "draw_outcome",
    "emit_plot_data",
    "encode_arm",
    "encode_context",
    "encode_outcome",
    "estimate_model",
    "load_config",
    "load_csv",
    "new_bandit",
    "optimal_arm",
    "posterior_mean",
    "relative_ratio",
    "run_experiment",
    "sample_theta",
    "select_arm",
    "select_greedy",
    "select_random",
    "select_thompson",
    "select_ucb",
    "step_regret",
    "suboptimal_indicator",
    "update",
]
