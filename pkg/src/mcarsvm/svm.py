"""Linear soft-margin SVM and hyperplane geometry.

A hyperplane is the set of points ``x`` with ``W . x = C``.  ``W`` fixes its
orientation and is normal to it; ``C`` fixes its position.  The signed
distance of a point to the plane is ``(W . x - C) / ||W||`` and its
orthogonal projection onto the plane is ``x - (W . x - C) W / ||W||^2``.

Training minimises ``lam/2 ||W||^2 + mean(max(0, 1 - y (W . x - C)))`` with
mini-batch subgradient steps of size ``1 / (lam * t)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import CLASSES, LEGITIMATE, PHISHING, check_ternary, check_ternary_X_y


@dataclass(frozen=True)
class SvmTrainConfig:
    lam: float = 0.01
    epochs: int = 200
    seed: int = 0
    tol: float = 1e-6
    batch_size: int = 32

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam!r}")
        if not (isinstance(self.epochs, (int, np.integer)) and self.epochs > 0):
            raise ValueError(f"epochs must be a positive integer, got {self.epochs!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if not (isinstance(self.batch_size, (int, np.integer)) and self.batch_size > 0):
            raise ValueError(f"batch_size must be a positive integer, got {self.batch_size!r}")


@dataclass(frozen=True, eq=False)
class SvmModel:
    W: np.ndarray
    C: float
    feature_subset: tuple[int, ...]
    config: SvmTrainConfig = field(default_factory=SvmTrainConfig)
    objective_trace: tuple[float, ...] = ()

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float).reshape(-1)
        if self.feature_subset and len(self.feature_subset) != W.size:
            raise ValueError("W needs one weight per feature in the subset")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "C", float(self.C))
        if not self.feature_subset:
            object.__setattr__(self, "feature_subset", tuple(range(W.size)))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.W))

    def restrict(self, X) -> np.ndarray:
        """Columns of ``X`` this model consumes (1-D input is one row)."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return X[list(self.feature_subset)]
        return X[:, list(self.feature_subset)]

    def scaled(self, alpha: float) -> "SvmModel":
        return SvmModel(self.W * alpha, self.C * alpha, self.feature_subset, self.config)


# -- geometry ----------------------------------------------------------------


def _point(model: SvmModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] == model.W.size:
        return x
    if max(model.feature_subset) < x.shape[-1]:
        return model.restrict(x)
    raise ValueError(
        f"point has {x.shape[-1]} coordinates; model uses {model.W.size} "
        f"features with highest index {max(model.feature_subset)}"
    )


def _nonzero_norm(model: SvmModel) -> float:
    norm = model.norm
    if norm == 0.0:
        raise ValueError("weight vector is zero; the hyperplane is undefined")
    return norm


def decision_value(model: SvmModel, x):
    """``W . x - C``.  ``x`` is either already restricted to the model's
    feature subset or a full row from which the subset is taken."""
    return _point(model, x) @ model.W - model.C


def distance(model: SvmModel, x):
    """Signed distance to the hyperplane, positive on the side ``W`` points to."""
    return decision_value(model, x) / _nonzero_norm(model)


def project(model: SvmModel, x) -> np.ndarray:
    """Orthogonal projection of ``x`` (in subset coordinates) onto the plane."""
    norm = _nonzero_norm(model)
    p = _point(model, x)
    dv = p @ model.W - model.C
    return p - np.multiply.outer(dv, model.W) / norm**2


def predict_svm(model: SvmModel, x):
    """LEGITIMATE on the positive side; the plane itself counts as PHISHING."""
    dv = decision_value(model, x)
    return np.where(dv > 0, LEGITIMATE, PHISHING).astype(np.int8)


# -- training ----------------------------------------------------------------


def objective(W, C, X, y, lam) -> float:
    margins = y * (X @ W - C)
    return 0.5 * lam * float(W @ W) + float(np.mean(np.maximum(0.0, 1.0 - margins)))


def objective_gradient(W, C, X, y, lam):
    """Subgradient of :func:`objective` (the gradient away from hinge kinks)."""
    margins = y * (X @ W - C)
    active = margins < 1.0
    n = X.shape[0]
    gW = lam * W - (y[active] @ X[active]) / n
    gC = float(np.sum(y[active])) / n
    return gW, gC


def train_svm(X, y, subset=None, config: SvmTrainConfig | None = None) -> SvmModel:
    """Fit ``W, C`` on the columns ``subset`` of ``X``.

    Each epoch visits the rows in a seeded random order, in mini-batches,
    and ``W`` is projected back onto the ball of radius ``1/sqrt(lam)``
    after every step.
    The objective is evaluated after every epoch and the best iterate seen
    so far is the one returned.  Training stops after five consecutive
    epochs that fail to lower the best objective by a relative ``tol``.
    """
    cfg = config or SvmTrainConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("training set is empty")
    if np.unique(y).size < 2:
        raise ValueError("training set must contain both classes")
    subset = tuple(range(X.shape[1])) if subset is None else tuple(int(a) for a in subset)
    if not subset:
        raise ValueError("feature subset is empty")
    Xs = np.ascontiguousarray(X[:, list(subset)])
    n, d = Xs.shape
    lam, bs = cfg.lam, cfg.batch_size
    rng = np.random.default_rng(cfg.seed)

    W = np.zeros(d)
    C = 0.0
    radius = 1.0 / np.sqrt(lam)  # the optimal W lies inside this ball
    best = (np.inf, W, C)
    trace = []
    stale = 0
    t = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            xb, yb = Xs[idx], y[idx]
            t += 1
            eta = 1.0 / (lam * t)
            active = yb * (xb @ W - C) < 1.0
            gW = lam * W - (yb[active] @ xb[active]) / idx.size
            gC = float(np.sum(yb[active])) / idx.size
            W = W - eta * gW
            C = C - eta * gC
            norm = np.linalg.norm(W)
            if norm > radius:
                W *= radius / norm
        obj = objective(W, C, Xs, y, lam)
        if obj < best[0]:
            gain = np.inf if np.isinf(best[0]) else (best[0] - obj) / max(abs(best[0]), 1e-12)
            best = (obj, W.copy(), C)
            stale = 0 if gain >= cfg.tol else stale + 1
        else:
            stale += 1
        trace.append(best[0])
        if stale >= 5:
            break

    _, W, C = best
    if not np.any(W):
        # the optimum itself can be W = 0 (e.g. XOR-labelled data)
        warnings.warn("training produced a zero weight vector; every row gets the same score",
                      RuntimeWarning, stacklevel=2)
    return SvmModel(W, C, subset, cfg, tuple(trace))


class LinearSVM(ClassifierMixin, BaseEstimator):
    """Linear SVM on ternary features; positive decision values mean legitimate.

    Parameters
    ----------
    lam : float
        L2 regularisation strength.
    epochs : int
        Maximum passes over the training data.
    tol : float
        Relative objective improvement below which an epoch counts as stale.
    batch_size : int
        Rows per subgradient step.
    random_state : int
        Seed for the visiting order.
    feature_subset : sequence of int or None
        Columns to use; all when ``None``.
    """

    def __init__(self, lam=0.01, epochs=200, tol=1e-6, batch_size=32, random_state=0,
                 feature_subset=None):
        self.lam = lam
        self.epochs = epochs
        self.tol = tol
        self.batch_size = batch_size
        self.random_state = random_state
        self.feature_subset = feature_subset

    def _config(self) -> SvmTrainConfig:
        return SvmTrainConfig(self.lam, self.epochs, self.random_state, self.tol, self.batch_size)

    def fit(self, X, y):
        X, y = check_ternary_X_y(X, y)
        self.model_ = train_svm(X, y, self.feature_subset, self._config())
        self.classes_ = CLASSES.copy()
        self.n_features_in_ = X.shape[1]
        self.coef_ = self.model_.W
        self.intercept_ = -self.model_.C
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        return decision_value(self.model_, self.model_.restrict(check_ternary(X, self.n_features_in_)))

    def predict(self, X):
        return np.where(self.decision_function(X) > 0, LEGITIMATE, PHISHING).astype(np.int8)
