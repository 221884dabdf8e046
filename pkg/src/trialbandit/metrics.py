"""Regret and suboptimal-draw accounting, and aggregation over repeated runs.

Regret defaults to the pseudo-regret form: each step costs
``theta_opt - theta_chosen`` for its context, so the curve is deterministic
given the action sequence and never decreases. Realized regret
(``theta_opt - outcome``) is available for sensitivity checks and can go down.

Percentile bands use linear interpolation between order statistics (numpy's
default ``"linear"`` method). Spreads are population standard deviations
(``ddof=0``) across runs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "StepLog",
    "RunSummary",
    "PolicyAggregate",
    "step_regret",
    "realized_regret",
    "suboptimal_indicator",
    "summarize_run",
    "aggregate",
    "relative_ratio",
    "DegenerateBaselineError",
]


class DegenerateBaselineError(ValueError):
    """Baseline (random-policy) final value is zero, so a ratio is undefined."""


def step_regret(theta_opt: float, theta_chosen: float) -> float:
    if not (0.0 <= theta_chosen <= 1.0 and 0.0 <= theta_opt <= 1.0):
        raise ValueError(f"probabilities must lie in [0, 1], got ({theta_opt}, {theta_chosen})")
    if theta_chosen > theta_opt:
        raise ValueError(f"chosen arm ({theta_chosen}) beats the optimum ({theta_opt})")
    return theta_opt - theta_chosen


def realized_regret(theta_opt: float, outcome: int) -> float:
    return theta_opt - outcome


def suboptimal_indicator(chosen: int, optimal: int) -> int:
    return int(chosen != optimal)


@dataclass
class StepLog:
    """Column-oriented per-step record of one run. Steps are numbered from 1."""

    context: np.ndarray
    arm: np.ndarray
    outcome: np.ndarray
    optimal: np.ndarray
    theta_opt: np.ndarray
    theta_chosen: np.ndarray

    def __post_init__(self):
        n = len(self.arm)
        cols = (self.context, self.outcome, self.optimal, self.theta_opt, self.theta_chosen)
        if any(len(c) != n for c in cols):
            raise ValueError("step log columns must have equal length")

    def __len__(self):
        return len(self.arm)

    @property
    def step(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    def regret_increments(self, mode: str = "pseudo") -> np.ndarray:
        if mode == "pseudo":
            inc = self.theta_opt - self.theta_chosen
            if np.any(inc < 0):
                raise ValueError("step log has a chosen arm better than the optimum")
            return inc
        if mode == "realized":
            return self.theta_opt - self.outcome
        raise ValueError(f"regret mode must be 'pseudo' or 'realized', got {mode!r}")

    def suboptimal_increments(self) -> np.ndarray:
        return (self.arm != self.optimal).astype(np.int64)


@dataclass
class RunSummary:
    policy: str
    run: int
    seed: int
    regret: np.ndarray
    suboptimal: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.regret)

    @property
    def final_regret(self) -> float:
        return float(self.regret[-1]) if len(self.regret) else 0.0

    @property
    def final_suboptimal(self) -> int:
        return int(self.suboptimal[-1]) if len(self.suboptimal) else 0


def summarize_run(log: StepLog, policy: str, run: int, seed: int, regret_mode: str = "pseudo") -> RunSummary:
    return RunSummary(
        policy=policy,
        run=run,
        seed=seed,
        regret=np.cumsum(log.regret_increments(regret_mode)),
        suboptimal=np.cumsum(log.suboptimal_increments()),
    )


@dataclass
class PolicyAggregate:
    """Pointwise mean and percentile band of one policy's cumulative curves."""

    policy: str
    runs: int
    band: tuple[float, float]
    regret_mean: np.ndarray
    regret_low: np.ndarray
    regret_high: np.ndarray
    suboptimal_mean: np.ndarray
    suboptimal_low: np.ndarray
    suboptimal_high: np.ndarray
    final_regret: np.ndarray = field(repr=False)
    final_suboptimal: np.ndarray = field(repr=False)

    @property
    def horizon(self) -> int:
        return len(self.regret_mean)

    @property
    def mean_final_regret(self) -> float:
        return float(self.final_regret.mean())

    @property
    def std_final_regret(self) -> float:
        return float(self.final_regret.std())

    @property
    def mean_final_suboptimal(self) -> float:
        return float(self.final_suboptimal.mean())

    @property
    def std_final_suboptimal(self) -> float:
        return float(self.final_suboptimal.std())

    def curve(self, metric: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if metric == "regret":
            return self.regret_mean, self.regret_low, self.regret_high
        if metric == "suboptimal":
            return self.suboptimal_mean, self.suboptimal_low, self.suboptimal_high
        raise ValueError(f"unknown metric {metric!r}")


def _band(curves: np.ndarray, band: tuple[float, float]):
    mean = curves.mean(axis=0)
    low, high = np.percentile(curves, band, axis=0)
    return mean, low, high


def aggregate(runs: Sequence[RunSummary], band: tuple[float, float] = (25.0, 75.0)) -> PolicyAggregate:
    """Pointwise mean and empirical percentile band over runs of one policy."""
    if not runs:
        raise ValueError("need at least one run to aggregate")
    lo, hi = band
    if not 0 <= lo <= hi <= 100:
        raise ValueError(f"band must satisfy 0 <= low <= high <= 100, got {band}")
    policies = {r.policy for r in runs}
    if len(policies) != 1:
        raise ValueError(f"runs mix policies {sorted(policies)}")
    lengths = {r.horizon for r in runs}
    if len(lengths) != 1:
        raise ValueError(f"runs have ragged lengths {sorted(lengths)}")

    regret = np.vstack([r.regret for r in runs]).astype(float)
    subopt = np.vstack([r.suboptimal for r in runs]).astype(float)
    r_mean, r_low, r_high = _band(regret, band)
    s_mean, s_low, s_high = _band(subopt, band)
    return PolicyAggregate(
        policy=runs[0].policy,
        runs=len(runs),
        band=(float(lo), float(hi)),
        regret_mean=r_mean,
        regret_low=r_low,
        regret_high=r_high,
        suboptimal_mean=s_mean,
        suboptimal_low=s_low,
        suboptimal_high=s_high,
        final_regret=regret[:, -1] if regret.shape[1] else np.zeros(len(runs)),
        final_suboptimal=subopt[:, -1] if subopt.shape[1] else np.zeros(len(runs)),
    )


def relative_ratio(policy_finals: Sequence[float], random_finals: Sequence[float]) -> tuple[float, float]:
    """Mean and spread, in percent, of per-run ``policy / random`` ratios.

    Runs are paired by index. The pairing matters because runs with the same
    index share outcome randomness.
    """
    p = np.asarray(policy_finals, dtype=float)
    r = np.asarray(random_finals, dtype=float)
    if p.shape != r.shape or p.ndim != 1 or not len(p):
        raise ValueError(f"need equal, non-empty run counts, got {p.shape} and {r.shape}")
    if np.any(r <= 0):
        raise DegenerateBaselineError("random-policy final value is not positive; ratio undefined")
    pct = 100.0 * (p / r)
    return float(pct.mean()), float(pct.std())
