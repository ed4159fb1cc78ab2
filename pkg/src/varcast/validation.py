"""Input validation helpers shared by the estimators.

Small, estimator-agnostic checks in the spirit of scikit-learn's
``check_array``, but tailored to 1-d return series and with this package's
error types.
"""
from __future__ import annotations

import numpy as np

from .errors import EmptyInput, NonFiniteInput, SeriesTooShort


def check_series(x, min_len: int = 1, name: str = "series") -> np.ndarray:
    """Coerce ``x`` to a 1-d float array and validate it.

    Raises ``EmptyInput`` for length 0, ``SeriesTooShort`` when shorter than
    ``min_len`` and ``NonFiniteInput`` on NaN/inf entries.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise EmptyInput(f"{name} is empty")
    if arr.size < min_len:
        raise SeriesTooShort(f"{name} has {arr.size} observations, need >= {min_len}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contains non-finite values")
    return arr


def check_features(X, name: str = "X") -> np.ndarray:
    """Coerce ``X`` to a 2-d float array (n_samples, n_features)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyInput(f"{name} has no rows")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contains non-finite values")
    return arr


def check_alpha(alpha: float) -> float:
    from .errors import AlphaOutOfRange

    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    return alpha
