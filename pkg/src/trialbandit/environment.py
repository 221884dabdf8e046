"""Ground-truth outcome model used to replay a trial.

Success probabilities are estimated per (context, arm) cell from the whole
dataset before replay starts and stay frozen afterwards. During replay every
outcome, whichever arm the policy picks, is a fresh Bernoulli draw from that
cell's probability.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .contextual import check_context, context_index

__all__ = [
    "MissingCellError",
    "TrialRecord",
    "OutcomeModel",
    "estimate_model",
    "draw_outcome",
    "optimal_arm",
]


class MissingCellError(LookupError):
    """No success probability is available for a (context, arm) cell."""

    def __init__(self, context: int, arm: int, reason: str = "no records"):
        self.context = context
        self.arm = arm
        super().__init__(f"cell (context={context}, arm={arm}) is undefined: {reason}")


@dataclass(frozen=True, slots=True)
class TrialRecord:
    context: tuple[int, ...]
    arm: int
    outcome: int
    sequence: int


@dataclass(frozen=True)
class OutcomeModel:
    """Per-cell success probabilities ``theta[(m, u)]``.

    ``counts`` holds ``(successes, trials)`` for estimated models and is empty
    for models built from a fixed table. With ``smoothing`` on, cells absent
    from ``theta`` read as 0.5.
    """

    d: int
    k: int
    theta: dict[tuple[int, int], float]
    counts: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)
    smoothing: bool = False

    def __post_init__(self):
        for cell, p in self.theta.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"theta{cell} = {p} is not a probability")

    @classmethod
    def from_table(cls, rows: Sequence[Sequence[float]]) -> "OutcomeModel":
        """Model from a dense table, one row per context index.

        The number of rows must be a power of two (``2**d``).
        """
        rows = [list(map(float, r)) for r in rows]
        if not rows or not rows[0]:
            raise ValueError("theta table must be non-empty")
        k = len(rows[0])
        if any(len(r) != k for r in rows):
            raise ValueError("theta table rows must all have the same length")
        n = len(rows)
        if n & (n - 1):
            raise ValueError(f"theta table needs 2**d rows, got {n}")
        d = n.bit_length() - 1
        theta = {(m, u): p for m, r in enumerate(rows) for u, p in enumerate(r)}
        return cls(d=d, k=k, theta=theta)

    def theta_at(self, m: int, arm: int) -> float:
        try:
            return self.theta[(m, arm)]
        except KeyError:
            if not 0 <= arm < self.k:
                raise MissingCellError(m, arm, f"arm outside [0, {self.k})") from None
            if self.smoothing and 0 <= m < 2**self.d:
                return 0.5
            raise MissingCellError(m, arm) from None

    def draw(self, m: int, arm: int, rng: np.random.Generator) -> int:
        """Bernoulli outcome for cell ``(m, arm)``; consumes one uniform from ``rng``."""
        return int(rng.random() < self.theta_at(m, arm))

    def row(self, m: int) -> list[float]:
        return [self.theta_at(m, u) for u in range(self.k)]

    def best(self, m: int) -> tuple[int, float]:
        """``(argmax, max)`` of row ``m``, lowest index on ties."""
        r = self.row(m)
        top = max(r)
        return r.index(top), top


def estimate_model(
    records: Iterable[TrialRecord],
    smoothing: bool = False,
    *,
    d: int | None = None,
    k: int | None = None,
) -> OutcomeModel:
    """Empirical success fraction for every (context, arm) cell.

    Without smoothing, every arm must have at least one record in each context
    that occurs in ``records``; otherwise :class:`MissingCellError` names the
    first empty cell. With smoothing, ``(s + 1) / (n + 2)`` is used and empty
    cells read as 0.5.
    """
    counts: dict[tuple[int, int], list[int]] = {}
    seen_d = set()
    max_arm = -1
    for rec in records:
        seen_d.add(len(rec.context))
        cell = (context_index(rec.context), rec.arm)
        c = counts.setdefault(cell, [0, 0])
        c[0] += rec.outcome
        c[1] += 1
        max_arm = max(max_arm, rec.arm)
    if not counts:
        raise ValueError("cannot estimate an outcome model from zero records")
    if len(seen_d) != 1:
        raise ValueError(f"records mix context dimensions {sorted(seen_d)}")
    (rec_d,) = seen_d
    if d is not None and d != rec_d:
        raise ValueError(f"records have {rec_d} context bits, expected {d}")
    k = max_arm + 1 if k is None else k
    if max_arm >= k:
        raise ValueError(f"record arm {max_arm} out of range for k={k}")

    if smoothing:
        theta = {cell: (s + 1) / (n + 2) for cell, (s, n) in counts.items()}
    else:
        contexts = sorted({m for m, _ in counts})
        for m in contexts:
            for u in range(k):
                if (m, u) not in counts:
                    raise MissingCellError(m, u, "no records for this arm in an observed context")
        theta = {cell: s / n for cell, (s, n) in counts.items()}
    return OutcomeModel(
        d=rec_d,
        k=k,
        theta=theta,
        counts={cell: (s, n) for cell, (s, n) in counts.items()},
        smoothing=smoothing,
    )


def draw_outcome(model: OutcomeModel, x: Sequence[int], arm: int, rng: np.random.Generator) -> int:
    return model.draw(context_index(check_context(x, model.d)), arm, rng)


def optimal_arm(model: OutcomeModel, x: Sequence[int]) -> tuple[int, float]:
    return model.best(context_index(check_context(x, model.d)))
