"""Input validation helpers shared across the package.

All probability batches flowing into a loss are clamped to
``[EPS, 1 - EPS]`` so that logarithms stay finite.
"""

from __future__ import annotations

import numpy as np

# Clamp bound applied to every scorer output before a log is taken.
EPS = 1e-7


def check_prob_batch(values, name: str = "values") -> np.ndarray:
    """Validate and clamp a batch of probabilities.

    Args:
        values: array-like of scorer outputs, expected in [0, 1].
        name: argument name used in error messages.

    Returns:
        1-D float64 array with every entry clamped to [EPS, 1 - EPS].

    Raises:
        ValueError: on empty input, NaN/inf entries, or values outside [0, 1].
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} has entries outside [0, 1]; pass probabilities, not logits")
    return np.clip(arr, EPS, 1.0 - EPS)


def check_order(order) -> int:
    """Validate a truncation order (positive integer)."""
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise ValueError(f"order must be a positive integer, got {order!r}")
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    return int(order)


def check_feature_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 feature matrix with finite entries."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def check_index_array(indices, n_total: int, name: str = "indices") -> np.ndarray:
    """Validate an index set into a dataset of ``n_total`` rows."""
    arr = np.asarray(indices, dtype=np.int64).reshape(-1)
    if arr.size and (arr.min() < 0 or arr.max() >= n_total):
        raise ValueError(f"{name} out of range [0, {n_total})")
    if arr.size != np.unique(arr).size:
        raise ValueError(f"{name} contains duplicates")
    return arr
