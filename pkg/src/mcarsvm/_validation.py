"""Input validation helpers shared by the estimators."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, check_X_y

PHISHING = -1
LEGITIMATE = 1
CLASSES = np.array([PHISHING, LEGITIMATE])
TERNARY = (-1, 0, 1)

CLASS_NAMES = {PHISHING: "PHISHING", LEGITIMATE: "LEGITIMATE"}


def class_name(label: int) -> str:
    return CLASS_NAMES[int(label)]


def check_ternary(X, n_features: int | None = None) -> np.ndarray:
    """Return ``X`` as a 2-D int8 array, rejecting values outside {-1, 0, 1}."""
    X = check_array(X, dtype=None, ensure_all_finite=True, ensure_min_samples=0)
    if X.dtype.kind == "f" and not np.all(np.mod(X, 1) == 0):
        raise ValueError("feature values must be integers in {-1, 0, 1}")
    bad = ~np.isin(X, TERNARY)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise ValueError(
            f"non-ternary value {X[row, col]!r} at row {row}, column {col}"
        )
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(
            f"X has {X.shape[1]} features, but the model expects {n_features}"
        )
    return X.astype(np.int8)


def check_labels(y) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError("y must be one-dimensional")
    bad = ~np.isin(y, CLASSES)
    if bad.any():
        raise ValueError(
            f"unknown label {y[bad][0]!r}; expected -1 (phishing) or 1 (legitimate)"
        )
    return y.astype(np.int8)


def check_ternary_X_y(X, y, require_both_classes: bool = True):
    X, y = check_X_y(X, y, dtype=None, ensure_all_finite=True)
    X = check_ternary(X)
    y = check_labels(y)
    if require_both_classes and np.unique(y).size < 2:
        raise ValueError("training data must contain both classes")
    return X, y
