"""Input validation helpers shared by the estimators and functional API."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array


def check_square(w, name="w"):
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {w.shape}")
    return w


def check_nonneg_square(w, name="w"):
    w = check_square(w, name)
    if np.any(w < 0):
        raise ValueError(f"{name} must be entrywise nonnegative")
    return w


def check_finite_square(w, name="w"):
    w = check_square(w, name)
    if not np.all(np.isfinite(w)):
        raise ValueError(f"{name} contains non-finite entries")
    return w


def check_samples(X, min_samples=1, min_features=3):
    """Validate an ``(n, d + 2)`` sample matrix (exposure, mediators, outcome)."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=min_samples)
    if X.shape[1] < min_features:
        raise ValueError(
            f"expected at least {min_features} columns (exposure, mediator(s), "
            f"outcome), got {X.shape[1]}"
        )
    return X


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def check_mediator(q, d):
    q = int(q)
    if not 1 <= q <= d:
        raise ValueError(f"mediator index {q} outside 1..{d}")
    return q
