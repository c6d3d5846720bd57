"""Glue between configuration, estimators and evaluation."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, fields

import numpy as np

from .dataset import Dataset, kfold_indices
from .evaluation import EvaluationReport, ModelReport, evaluate_model
from .hybrid import MCARSVMClassifier
from .mcar import TIE_BREAKS, MCARClassifier
from .persistence import KINDS, model_size
from .svm import LinearSVM
from .tree import TernaryDecisionTree


@dataclass
class ModelSettings:
    """Hyperparameters for every model kind; each estimator takes what it needs."""

    min_support: float = 0.02
    min_confidence: float = 0.5
    max_length: int | None = 3
    tie_break: str = "random"
    lam: float = 0.01
    epochs: int = 200
    tol: float = 1e-6
    batch_size: int = 32
    max_depth: int = 10
    min_leaf: int = 5
    seed: int = 42

    def __post_init__(self):
        for name in ("min_support", "min_confidence"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v!r}")
        if self.max_length is not None and self.max_length < 1:
            raise ValueError("max_length must be at least 1")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"tie_break must be one of {TIE_BREAKS}")
        for name in ("lam", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("epochs", "batch_size", "max_depth", "min_leaf"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


def make_estimator(kind: str, s: ModelSettings | None = None):
    s = s or ModelSettings()
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}; choose from {sorted(KINDS)}")
    if kind == "svm":
        return LinearSVM(s.lam, s.epochs, s.tol, s.batch_size, s.seed)
    if kind == "mcar":
        return MCARClassifier(s.min_support, s.min_confidence, s.tie_break, s.seed, s.max_length)
    if kind == "tree":
        return TernaryDecisionTree(s.max_depth, s.min_leaf)
    return MCARSVMClassifier(s.min_support, s.min_confidence, s.tie_break, s.max_length,
                             s.lam, s.epochs, s.tol, s.batch_size, s.seed)


@dataclass
class FittedModel:
    kind: str
    estimator: object
    train_seconds: float
    extra: dict = field(default_factory=dict)


def fit_timed(kind: str, train: Dataset, s: ModelSettings | None = None) -> FittedModel:
    est = make_estimator(kind, s)
    t0 = time.perf_counter()
    est.fit(train.X, train.y)
    elapsed = time.perf_counter() - t0
    extra = {}
    if hasattr(est, "stage_times_"):
        extra["stage_seconds"] = {k: round(v, 3) for k, v in est.stage_times_.items()}
    if hasattr(est, "rule_classifier_"):
        rc = est.rule_classifier_
        extra["n_ruleitems"] = rc.params.get("n_ruleitems")
        extra["n_rules"] = rc.params.get("n_rules")
        extra["n_kept_rules"] = len(rc.rules)
    if hasattr(est, "feature_subset_"):
        extra["feature_subset"] = [train.feature_names[a] for a in est.feature_subset_]
    return FittedModel(kind, est, elapsed, extra)


def evaluate_fitted(fm: FittedModel, test: Dataset) -> ModelReport:
    est = fm.estimator
    return evaluate_model(est.predict, est.decision_function, test.X, test.y, fm.kind,
                          fm.train_seconds, model_size(est, test.feature_names))


def cross_validate(kinds, data: Dataset, k: int, s: ModelSettings | None = None) -> dict:
    """Per-fold reports and mean accuracy/AUC for each kind."""
    s = s or ModelSettings()
    out = {kind: [] for kind in kinds}
    for train_idx, test_idx in kfold_indices(len(data), k, s.seed):
        train, test = data.take(train_idx), data.take(test_idx)
        for kind in kinds:
            out[kind].append(evaluate_fitted(fit_timed(kind, train, s), test))
    summary = {}
    for kind, reports in out.items():
        summary[kind] = {
            "folds": [r.to_dict(include_roc=False) for r in reports],
            "mean_accuracy": float(np.mean([r.accuracy for r in reports])),
            "mean_auc": float(np.mean([r.auc for r in reports])),
            "mean_pseudo_r2": float(np.mean([r.pseudo_r2 for r in reports])),
        }
    return summary


def compare_kinds(kinds, train: Dataset, test: Dataset, s: ModelSettings | None = None) -> tuple[EvaluationReport, dict]:
    fitted = {kind: fit_timed(kind, train, s) for kind in kinds}
    reports = [evaluate_fitted(fm, test) for fm in fitted.values()]
    return EvaluationReport(reports, test.fingerprint()).sorted(), fitted
