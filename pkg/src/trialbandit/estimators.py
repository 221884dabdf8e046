"""scikit-learn style wrappers around the bandit and outcome-model primitives.

Both classes follow the estimator conventions (constructor stores parameters
only, fitted state ends in ``_``, ``get_params``/``set_params`` via
:class:`~sklearn.base.BaseEstimator`). Contexts are passed as a binary matrix
``X`` of shape ``(n_samples, n_context_bits)``, outcomes as ``y`` and the
treatment each row received as ``arms``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_contexts, check_labels
from .contextual import MAX_CONTEXT_BITS, ContextualBandit, context_index
from .core import update
from .environment import OutcomeModel, TrialRecord, estimate_model
from .policies import PolicyKind, select_arm

__all__ = ["BanditAllocator", "CellOutcomeModel"]


def _indices(X: np.ndarray) -> list[int]:
    return [context_index(row) for row in X.tolist()]


class BanditAllocator(BaseEstimator):
    """Online treatment allocator backed by one Beta-Bernoulli bandit per context.

    Parameters
    ----------
    n_arms : int, default=4
        Number of treatments.
    policy : {"thompson", "ucb", "greedy", "random"}, default="thompson"
        Selection rule applied inside each context's bandit.
    n_context_bits : int, default=0
        Length of the binary context vector. ``0`` gives a plain multi-armed bandit.
    random_state : int, numpy Generator or None
        Seed for the selection stream.

    Attributes
    ----------
    bandit_ : ContextualBandit
        Posterior state, one entry per context seen so far.
    n_observations_ : int
        Outcomes absorbed since the last :meth:`fit`.
    """

    def __init__(self, n_arms=4, policy="thompson", n_context_bits=0, random_state=None):
        self.n_arms = n_arms
        self.policy = policy
        self.n_context_bits = n_context_bits
        self.random_state = random_state

    def _reset(self):
        if not 0 <= self.n_context_bits <= MAX_CONTEXT_BITS:
            raise ValueError(f"n_context_bits must be in [0, {MAX_CONTEXT_BITS}]")
        self.policy_ = PolicyKind.parse(self.policy)
        self.bandit_ = ContextualBandit(self.n_context_bits, self.n_arms)
        self.rng_ = np.random.default_rng(self.random_state)
        self.n_observations_ = 0

    def fit(self, X, y, arms):
        """Start from the priors and absorb the observed (context, arm, outcome) rows."""
        self._reset()
        return self.partial_fit(X, y, arms)

    def partial_fit(self, X, y, arms):
        """Absorb more observations in row order without resetting."""
        if not hasattr(self, "bandit_"):
            self._reset()
        y = check_labels(y, "y", 2)
        X = check_contexts(X, self.n_context_bits, n=len(y))
        arms = check_labels(arms, "arms", self.n_arms, n_samples=len(y))
        if len(X) != len(y):
            raise ValueError(f"X has {len(X)} rows but y has {len(y)}")
        for m, u, c in zip(_indices(X), arms.tolist(), y.tolist()):
            update(self.bandit_.cell(m), u, c)
        self.n_observations_ += len(y)
        return self

    def predict(self, X):
        """Choose a treatment for each row of ``X``.

        Each choice draws from the selection stream. No state is updated.
        """
        check_is_fitted(self, "bandit_")
        X = check_contexts(X, self.n_context_bits)
        return np.array(
            [select_arm(self.policy_, self.bandit_.cell(m), self.rng_) for m in _indices(X)],
            dtype=np.int64,
        )

    def posterior_means(self, X):
        """Posterior mean success probability per arm, shape ``(n_samples, n_arms)``."""
        check_is_fitted(self, "bandit_")
        X = check_contexts(X, self.n_context_bits)
        return np.array([self.bandit_.peek(row).means for row in X.tolist()], dtype=float)


class CellOutcomeModel(BaseEstimator):
    """Empirical success probability per (context, arm) cell.

    Parameters
    ----------
    n_arms : int, default=4
    smoothing : bool, default=False
        Use ``(s + 1) / (n + 2)`` instead of ``s / n``; empty cells read as 0.5.
    """

    def __init__(self, n_arms=4, smoothing=False):
        self.n_arms = n_arms
        self.smoothing = smoothing

    def fit(self, X, y, arms):
        y = check_labels(y, "y", 2)
        arms = check_labels(arms, "arms", self.n_arms, n_samples=len(y))
        X = np.zeros((len(y), 0), dtype=np.int64) if X is None else np.asarray(X)
        X = check_contexts(X, X.shape[1] if X.ndim == 2 else -1)
        if len(X) != len(y):
            raise ValueError(f"X has {len(X)} rows but y has {len(y)}")
        records = [
            TrialRecord(tuple(x), u, c, i)
            for i, (x, u, c) in enumerate(zip(X.tolist(), arms.tolist(), y.tolist()))
        ]
        self.model_: OutcomeModel = estimate_model(records, self.smoothing, d=X.shape[1], k=self.n_arms)
        self.n_context_bits_ = X.shape[1]
        return self

    def predict_proba(self, X, arms):
        """Success probability of ``arms[i]`` in context ``X[i]``."""
        check_is_fitted(self, "model_")
        X = check_contexts(X, self.n_context_bits_)
        arms = check_labels(arms, "arms", self.n_arms, n_samples=len(X))
        return np.array([self.model_.theta_at(m, u) for m, u in zip(_indices(X), arms.tolist())])

    def optimal_arm(self, X):
        """``(best arm, its success probability)`` per row; lowest arm wins ties."""
        check_is_fitted(self, "model_")
        X = check_contexts(X, self.n_context_bits_)
        best = [self.model_.best(m) for m in _indices(X)]
        return (
            np.array([b[0] for b in best], dtype=np.int64),
            np.array([b[1] for b in best], dtype=float),
        )

    def sample(self, X, arms, random_state=None):
        """Bernoulli outcomes for the given (context, arm) rows."""
        check_is_fitted(self, "model_")
        rng = np.random.default_rng(random_state)
        X = check_contexts(X, self.n_context_bits_)
        arms = check_labels(arms, "arms", self.n_arms, n_samples=len(X))
        return np.array(
            [self.model_.draw(m, u, rng) for m, u in zip(_indices(X), arms.tolist())],
            dtype=np.int64,
        )
