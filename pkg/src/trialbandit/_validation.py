"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, column_or_1d


def check_contexts(X, d: int, n: int | None = None) -> np.ndarray:
    """Validate a 2-D binary context matrix with ``d`` columns.

    ``X=None`` is accepted when ``d == 0`` and ``n`` is known (every row is the
    empty context).
    """
    if X is None:
        if d != 0 or n is None:
            raise ValueError("X is required when contexts have bits")
        return np.zeros((n, 0), dtype=np.int64)
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[1] == 0:
        # sklearn refuses zero-feature arrays; the empty context is legitimate here
        arr = X.astype(np.int64)
    else:
        arr = check_array(X, dtype=None, ensure_2d=True, ensure_all_finite=True, ensure_min_samples=0)
    if arr.shape[1] != d:
        raise ValueError(f"X has {arr.shape[1]} context bits, expected {d}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("context bits must be 0 or 1")
    return arr.astype(np.int64)


def check_labels(y, name: str, n_values: int, n_samples: int | None = None) -> np.ndarray:
    """1-D integer vector with entries in ``[0, n_values)``."""
    arr = column_or_1d(np.asarray(y), warn=True)
    if arr.size and not np.all(np.mod(arr, 1) == 0):
        raise ValueError(f"{name} must be integers")
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= n_values):
        raise ValueError(f"{name} must lie in [0, {n_values})")
    if n_samples is not None and len(arr) != n_samples:
        raise ValueError(f"{name} has {len(arr)} entries, expected {n_samples}")
    return arr
