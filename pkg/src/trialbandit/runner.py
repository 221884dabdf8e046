"""Experiment orchestration: replay a participant sequence under each policy.

Random streams
--------------
Each run uses three streams, all derived from the master seed by keyed
splitting (``numpy.random.SeedSequence`` with a ``spawn_key``):

* ``(run, 0, 0)`` outcome draws. Shared by every policy, which gives common
  random numbers.
* ``(run, 1, 0)`` synthetic context draws (synthetic mode only).
* ``(run, 2, policy.code)`` the policy's own randomness.

Keys never depend on which other policies are configured or their order, so
adding or removing a policy leaves the others' results unchanged.

Ground truth
------------
With ``ground_truth = "auto"``, contextual runs are scored against
per-context success probabilities. Context-free runs are scored against
probabilities pooled over contexts: estimated from the whole dataset in replay
mode, or frequency-weighted over the table rows in synthetic mode. With
``ground_truth = "context"``, per-context probabilities are used whatever the
bandit mode, so a context-free policy is scored against the same truth as a
contextual one.
"""
from __future__ import annotations

import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .contextual import MAX_CONTEXT_BITS, ContextualBandit, context_index
from .core import BernoulliBandit, update
from .environment import OutcomeModel, estimate_model
from .ingest import ColumnMapping, load_csv
from .metrics import (
    DegenerateBaselineError,
    PolicyAggregate,
    RunSummary,
    StepLog,
    aggregate,
    relative_ratio,
    summarize_run,
)
from .policies import PolicyKind, select_arm

__all__ = [
    "SyntheticSpec",
    "ExperimentConfig",
    "ResultsBundle",
    "Scenario",
    "build_scenario",
    "replay",
    "run_experiment",
    "emit_plot_data",
    "load_config",
    "policy_streams",
]

log = logging.getLogger(__name__)

ENV_STREAM, CONTEXT_STREAM, POLICY_STREAM = 0, 1, 2
METRICS = ("regret", "suboptimal")
STEP_HEADER = "step,context,arm,outcome,optimal_arm,theta_opt,theta_chosen"


def fmt(x: float) -> str:
    """Real numbers are written with 9 significant digits."""
    return f"{x:.9g}"


@dataclass(frozen=True)
class SyntheticSpec:
    """Table of success probabilities (``2**d`` rows of ``k``) plus a horizon."""

    theta: tuple[tuple[float, ...], ...]
    horizon: int
    context_freq: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(tuple(float(p) for p in row) for row in self.theta))
        model = OutcomeModel.from_table(self.theta)  # validates shape and range
        if model.d > MAX_CONTEXT_BITS:
            raise ValueError(f"at most 2**{MAX_CONTEXT_BITS} contexts are supported")
        if self.horizon < 1:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.context_freq is not None:
            freq = tuple(float(f) for f in self.context_freq)
            if len(freq) != len(self.theta):
                raise ValueError(f"context_freq needs {len(self.theta)} entries, got {len(freq)}")
            if any(f < 0 for f in freq) or not np.isclose(sum(freq), 1.0):
                raise ValueError("context_freq must be non-negative and sum to 1")
            object.__setattr__(self, "context_freq", freq)

    @property
    def frequencies(self) -> np.ndarray:
        n = len(self.theta)
        return np.full(n, 1.0 / n) if self.context_freq is None else np.asarray(self.context_freq)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: Path | None = None
    mapping: ColumnMapping = field(default_factory=ColumnMapping)
    missing: str = "drop"
    synthetic: SyntheticSpec | None = None
    policies: tuple[PolicyKind, ...] = (PolicyKind.RANDOM, PolicyKind.THOMPSON, PolicyKind.UCB)
    contextual: bool = False
    runs: int = 20
    seed: int = 0
    band: tuple[float, float] = (25.0, 75.0)
    regret_mode: str = "pseudo"
    smoothing: bool = False
    ground_truth: str = "auto"
    output_dir: Path | None = None
    workers: int = 1
    write_steps: bool = True

    def __post_init__(self):
        object.__setattr__(self, "policies", tuple(PolicyKind.parse(p) for p in self.policies))
        object.__setattr__(self, "band", tuple(float(b) for b in self.band))
        if self.dataset is not None:
            object.__setattr__(self, "dataset", Path(self.dataset))
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))
        if (self.dataset is None) == (self.synthetic is None):
            raise ValueError("exactly one of a dataset or a synthetic spec must be given")
        if not self.policies:
            raise ValueError("at least one policy is required")
        if len(set(self.policies)) != len(self.policies):
            raise ValueError("policies must not repeat")
        if self.runs < 1:
            raise ValueError(f"runs must be at least 1, got {self.runs}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        lo, hi = self.band
        if not 0 <= lo <= hi <= 100:
            raise ValueError(f"band must satisfy 0 <= low <= high <= 100, got {self.band}")
        if self.regret_mode not in ("pseudo", "realized"):
            raise ValueError(f"regret_mode must be 'pseudo' or 'realized', got {self.regret_mode!r}")
        if self.ground_truth not in ("auto", "context"):
            raise ValueError(f"ground_truth must be 'auto' or 'context', got {self.ground_truth!r}")
        if self.missing not in ("drop", "error"):
            raise ValueError(f"missing must be 'drop' or 'error', got {self.missing!r}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @property
    def mode(self) -> str:
        return "contextual" if self.contextual else "context-free"


@dataclass
class Scenario:
    """Frozen ground truth plus whatever is needed to produce each run's contexts."""

    truth: OutcomeModel
    d: int
    k: int
    horizon: int
    contextual: bool
    pooled: bool
    recorded_contexts: np.ndarray | None = None
    frequencies: np.ndarray | None = None

    def contexts(self, seed: int, run: int) -> np.ndarray:
        """Context index per step (the participant's actual context)."""
        if self.recorded_contexts is not None:
            return self.recorded_contexts
        rng = _stream(seed, run, CONTEXT_STREAM)
        return rng.choice(len(self.frequencies), size=self.horizon, p=self.frequencies)


def _pooled_table(theta, freq) -> list[list[float]]:
    return [list(np.asarray(freq) @ np.asarray(theta, dtype=float))]


def build_scenario(config: ExperimentConfig) -> Scenario:
    pooled = not config.contextual and config.ground_truth == "auto"
    if config.synthetic is not None:
        spec = config.synthetic
        full = OutcomeModel.from_table(spec.theta)
        truth = OutcomeModel.from_table(_pooled_table(spec.theta, spec.frequencies)) if pooled else full
        return Scenario(
            truth=truth,
            d=full.d,
            k=full.k,
            horizon=spec.horizon,
            contextual=config.contextual,
            pooled=pooled,
            frequencies=spec.frequencies,
        )

    data = load_csv(config.dataset, config.mapping, missing=config.missing)
    if not len(data):
        raise ValueError(f"{config.dataset}: no usable records")
    log.info("loaded %d records (%d excluded) from %s", len(data), data.excluded, config.dataset)
    source = data.without_context() if pooled else data
    truth = estimate_model(source.records, config.smoothing, d=source.d, k=data.k)
    contexts = np.fromiter((context_index(r.context) for r in data.records), dtype=np.int64, count=len(data))
    return Scenario(
        truth=truth,
        d=data.d,
        k=data.k,
        horizon=len(data),
        contextual=config.contextual,
        pooled=pooled,
        recorded_contexts=contexts,
    )


def _stream(seed: int, run: int, purpose: int, code: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run, purpose, code)))


def policy_streams(seed: int, run: int, policy: PolicyKind) -> tuple[np.random.Generator, np.random.Generator]:
    """``(outcome stream, policy stream)`` for one (policy, run) job."""
    return _stream(seed, run, ENV_STREAM), _stream(seed, run, POLICY_STREAM, PolicyKind.parse(policy).code)


def replay(
    policy: PolicyKind,
    truth: OutcomeModel,
    contexts: Sequence[int],
    *,
    k: int,
    d: int,
    contextual: bool,
    policy_rng: np.random.Generator,
    env_rng: np.random.Generator,
    pooled: bool = False,
) -> StepLog:
    """Run one policy over the participant sequence.

    Each participant gets exactly one selection, one outcome draw and one
    posterior update. ``contexts`` are the participants' actual context
    indices. ``pooled`` scores every participant against truth row 0.
    """
    n = len(contexts)
    if contextual:
        get_bandit = ContextualBandit(d, k).cell
    else:
        single = BernoulliBandit(k)
        get_bandit = lambda m: single  # noqa: E731

    rows, best = {}, {}
    arm_col = np.empty(n, dtype=np.int64)
    out_col = np.empty(n, dtype=np.int64)
    ctx_col = np.empty(n, dtype=np.int64)
    opt_col = np.empty(n, dtype=np.int64)
    topt_col = np.empty(n, dtype=float)
    tch_col = np.empty(n, dtype=float)
    draw = truth.draw
    for i in range(n):
        actual = int(contexts[i])
        m = 0 if pooled else actual
        if m not in rows:
            rows[m] = truth.row(m)
            best[m] = truth.best(m)
        bandit = get_bandit(actual if contextual else 0)
        arm = select_arm(policy, bandit, policy_rng)
        outcome = draw(m, arm, env_rng)
        update(bandit, arm, outcome)
        ctx_col[i] = m
        arm_col[i] = arm
        out_col[i] = outcome
        opt_col[i], topt_col[i] = best[m]
        tch_col[i] = rows[m][arm]
    return StepLog(ctx_col, arm_col, out_col, opt_col, topt_col, tch_col)


@dataclass
class ResultsBundle:
    config: ExperimentConfig
    summaries: dict[str, list[RunSummary]]
    aggregates: dict[str, PolicyAggregate]
    ratios: dict[str, dict[str, float]]
    files: list[Path] = field(default_factory=list)
    logs: dict[tuple[str, int], StepLog] = field(default_factory=dict)


def _run_job(args) -> tuple[str, int, StepLog]:
    config, scenario, policy, run = args
    env_rng, policy_rng = policy_streams(config.seed, run, policy)
    contexts = scenario.contexts(config.seed, run)
    step_log = replay(
        policy,
        scenario.truth,
        contexts,
        k=scenario.k,
        d=scenario.d,
        contextual=config.contextual,
        policy_rng=policy_rng,
        env_rng=env_rng,
        pooled=scenario.pooled,
    )
    return policy.value, run, step_log


def write_step_log(path: Path, step_log: StepLog) -> None:
    lines = [STEP_HEADER]
    lines.extend(
        f"{i},{m},{a},{c},{o},{fmt(to)},{fmt(tc)}"
        for i, m, a, c, o, to, tc in zip(
            step_log.step.tolist(),
            step_log.context.tolist(),
            step_log.arm.tolist(),
            step_log.outcome.tolist(),
            step_log.optimal.tolist(),
            step_log.theta_opt.tolist(),
            step_log.theta_chosen.tolist(),
        )
    )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_summary(path: Path, runs: Sequence[RunSummary]) -> None:
    lines = ["run,seed,final_regret,final_suboptimal,suboptimal_fraction"]
    for r in runs:
        frac = r.final_suboptimal / r.horizon if r.horizon else 0.0
        lines.append(f"{r.run},{r.seed},{fmt(r.final_regret)},{r.final_suboptimal},{fmt(frac)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_aggregate(path: Path, bundle: ResultsBundle) -> None:
    cfg = bundle.config
    lines = [
        "# aggregate over repeated runs",
        f'mode = "{cfg.mode}"',
        f"runs = {cfg.runs}",
        f"seed = {cfg.seed}",
        f'regret_mode = "{cfg.regret_mode}"',
        f"band = [{fmt(cfg.band[0])}, {fmt(cfg.band[1])}]",
    ]
    for name, agg in bundle.aggregates.items():
        lines += [
            "",
            "[[policy]]",
            f'policy = "{name}"',
            f'mode = "{cfg.mode}"',
            f"horizon = {agg.horizon}",
            f"mean_final_regret = {fmt(agg.mean_final_regret)}",
            f"std_final_regret = {fmt(agg.std_final_regret)}",
            f"mean_final_suboptimal = {fmt(agg.mean_final_suboptimal)}",
            f"std_final_suboptimal = {fmt(agg.std_final_suboptimal)}",
            f"mean_suboptimal_fraction = {fmt(agg.mean_final_suboptimal / agg.horizon)}",
        ]
        for key, value in bundle.ratios.get(name, {}).items():
            lines.append(f"{key} = {fmt(value)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_plot_data(bundle: ResultsBundle, out_dir: str | os.PathLike | None = None) -> list[Path]:
    """Write ``plot_<policy>_<metric>.dat``: whitespace-separated step, mean, band_low, band_high."""
    out = Path(out_dir) if out_dir is not None else bundle.config.output_dir
    if out is None:
        raise ValueError("no output directory given")
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, agg in bundle.aggregates.items():
        for metric in METRICS:
            mean, low, high = agg.curve(metric)
            lines = ["step mean band_low band_high"]
            lines.extend(
                f"{i} {fmt(a)} {fmt(b)} {fmt(c)}"
                for i, a, b, c in zip(range(1, len(mean) + 1), mean.tolist(), low.tolist(), high.tolist())
            )
            path = out / f"plot_{name}_{metric}.dat"
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            paths.append(path)
    return paths


def _ratios(aggregates: Mapping[str, PolicyAggregate]) -> dict[str, dict[str, float]]:
    base = aggregates.get(PolicyKind.RANDOM.value)
    if base is None:
        return {}
    out = {}
    for name, agg in aggregates.items():
        entry = {}
        for metric, finals, ref in (
            ("regret", agg.final_regret, base.final_regret),
            ("suboptimal", agg.final_suboptimal, base.final_suboptimal),
        ):
            try:
                mean, std = relative_ratio(finals, ref)
            except DegenerateBaselineError:
                log.warning("random baseline has a zero final %s; ratio skipped", metric)
                continue
            entry[f"{metric}_ratio_vs_random_pct"] = mean
            entry[f"{metric}_ratio_vs_random_std_pct"] = std
        out[name] = entry
    return out


def run_experiment(config: ExperimentConfig, *, keep_logs: bool = False) -> ResultsBundle:
    """Replay every (policy, run) pair, aggregate, and write outputs if ``output_dir`` is set."""
    scenario = build_scenario(config)
    jobs = [(config, scenario, p, run) for p in config.policies for run in range(config.runs)]

    out = config.output_dir
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results: Iterable = pool.map(_run_job, jobs)
            results = list(results)
    else:
        results = map(_run_job, jobs)

    summaries: dict[str, list[RunSummary]] = {p.value: [] for p in config.policies}
    logs = {}
    files: list[Path] = []
    for name, run, step_log in results:
        summaries[name].append(summarize_run(step_log, name, run, config.seed, config.regret_mode))
        if out is not None and config.write_steps:
            path = out / f"steps_{name}_{run}.csv"
            write_step_log(path, step_log)
            files.append(path)
        if keep_logs:
            logs[(name, run)] = step_log

    aggregates = {name: aggregate(runs, config.band) for name, runs in summaries.items()}
    bundle = ResultsBundle(config, summaries, aggregates, _ratios(aggregates), files, logs)
    if out is not None:
        for name, runs in summaries.items():
            path = out / f"summary_{name}.csv"
            _write_summary(path, runs)
            files.append(path)
        path = out / "aggregate.txt"
        _write_aggregate(path, bundle)
        files.append(path)
        files.extend(emit_plot_data(bundle, out))
    return bundle


_KEYS = {
    "dataset", "missing", "columns", "values", "missing_values", "synthetic", "policies",
    "contextual", "runs", "seed", "band", "regret_mode", "smoothing", "ground_truth",
    "output_dir", "workers", "write_steps",
}


def config_from_dict(
    doc: Mapping[str, Any], base_dir: Path | None = None, mode: str | None = None, **overrides
) -> ExperimentConfig:
    """Build a config from a parsed document.

    ``mode`` (``"replay"`` or ``"synth"``) keeps only the matching section when a
    document carries both. ``None`` overrides are ignored.
    """
    unknown = set(doc) - _KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    base_dir = base_dir or Path.cwd()

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base_dir / p

    kw: dict[str, Any] = {}
    for key in ("missing", "contextual", "runs", "seed", "regret_mode", "smoothing", "ground_truth", "workers", "write_steps"):
        if key in doc:
            kw[key] = doc[key]
    if "policies" in doc:
        kw["policies"] = tuple(doc["policies"])
    if "band" in doc:
        kw["band"] = tuple(doc["band"])
    if "dataset" in doc:
        kw["dataset"] = resolve(doc["dataset"])
    if "output_dir" in doc:
        kw["output_dir"] = resolve(doc["output_dir"])

    cols = doc.get("columns", {})
    mapping_kw: dict[str, Any] = {}
    for src, dst in (("aspirin", "aspirin_col"), ("heparin", "heparin_col"), ("outcome", "outcome_col")):
        if src in cols:
            mapping_kw[dst] = cols[src]
    if "context" in cols:
        ctx = cols["context"]
        mapping_kw["context_cols"] = (ctx,) if isinstance(ctx, str) else tuple(ctx)
    if "values" in doc:
        mapping_kw["value_maps"] = doc["values"]
    if "missing_values" in doc:
        mapping_kw["missing_values"] = tuple(doc["missing_values"])
    kw["mapping"] = ColumnMapping(**mapping_kw)

    if "synthetic" in doc:
        syn = doc["synthetic"]
        kw["synthetic"] = SyntheticSpec(
            theta=syn["theta"],
            horizon=int(syn["horizon"]),
            context_freq=syn.get("context_freq"),
        )

    for key, value in overrides.items():
        if value is None:
            continue
        if key == "dataset":
            value = Path(value)
        kw[key] = value
    if mode == "replay":
        kw.pop("synthetic", None)
    elif mode == "synth":
        kw.pop("dataset", None)
    elif mode is not None:
        raise ValueError(f"mode must be 'replay' or 'synth', got {mode!r}")
    return ExperimentConfig(**kw)


def load_config(path: str | os.PathLike, mode: str | None = None, **overrides) -> ExperimentConfig:
    """Read a TOML experiment config. Relative paths resolve against the file's directory."""
    path = Path(path)
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    return config_from_dict(doc, base_dir=path.parent, mode=mode, **overrides)


def with_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
