"""Classifier evaluation: confusion counts, rates, ROC/AUC, pseudo-R², timing.

PHISHING is the positive class everywhere in this module.  Model scores
follow the estimator convention (positive means legitimate) and are negated
before building ROC curves, so that higher means "more phishing" there.
"""
from __future__ import annotations

import csv
import json
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.special import expit

from ._validation import PHISHING

REPORT_VERSION = 1
SLOPE_CAP = 50.0


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(preds, labels) -> ConfusionMatrix:
    preds = np.asarray(preds).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if preds.shape != labels.shape:
        raise ValueError(f"length mismatch: {preds.size} predictions, {labels.size} labels")
    if preds.size == 0:
        raise ValueError("cannot build a confusion matrix from no rows")
    pos_pred = preds == PHISHING
    pos_true = labels == PHISHING
    return ConfusionMatrix(
        tp=int(np.sum(pos_pred & pos_true)),
        fp=int(np.sum(pos_pred & ~pos_true)),
        tn=int(np.sum(~pos_pred & ~pos_true)),
        fn=int(np.sum(~pos_pred & pos_true)),
    )


def _ratio(num, den, name, undefined):
    if den == 0:
        undefined.append(name)
        return 0.0
    return num / den


def scalar_metrics(cm: ConfusionMatrix) -> dict:
    """Accuracy and the per-class rates; zero denominators give 0 and are
    listed under ``"undefined"``."""
    if cm.total == 0:
        raise ValueError("confusion matrix is empty")
    undefined: list[str] = []
    accuracy = (cm.tp + cm.tn) / cm.total
    tp_rate = _ratio(cm.tp, cm.tp + cm.fn, "tp_rate", undefined)
    out = {
        "accuracy": accuracy,
        "tp_rate": tp_rate,
        "fp_rate": _ratio(cm.fp, cm.fp + cm.tn, "fp_rate", undefined),
        "precision": _ratio(cm.tp, cm.tp + cm.fp, "precision", undefined),
        "recall": tp_rate,
        "error_rate": 1.0 - accuracy,
    }
    if "tp_rate" in undefined:
        undefined.append("recall")
    out["undefined"] = sorted(undefined)
    return out


@dataclass(frozen=True)
class RocCurve:
    fpr: tuple[float, ...]
    tpr: tuple[float, ...]
    thresholds: tuple[float, ...]
    auc: float

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["fpr", "tpr", "threshold"])
            for row in zip(self.fpr, self.tpr, self.thresholds):
                writer.writerow([repr(float(v)) for v in row])


def _check_binary(scores, labels):
    scores = np.asarray(scores, dtype=float).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape != labels.shape:
        raise ValueError(f"length mismatch: {scores.size} scores, {labels.size} labels")
    pos = labels == PHISHING
    if pos.all() or not pos.any():
        raise ValueError("both classes must be present")
    return scores, pos


def roc(scores, labels) -> RocCurve:
    """ROC of ``scores`` (higher = more likely PHISHING) against ``labels``.

    One point per distinct score, so tied rows move the curve diagonally;
    the area is the trapezoidal sum over those points.
    """
    scores, pos = _check_binary(scores, labels)
    order = np.argsort(-scores, kind="stable")
    s, p = scores[order], pos[order]
    last_of_group = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tps = np.cumsum(p)[last_of_group]
    fps = np.cumsum(~p)[last_of_group]
    tpr = np.r_[0.0, tps / p.sum()]
    fpr = np.r_[0.0, fps / (~p).sum()]
    thresholds = np.r_[np.inf, s[last_of_group]]
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(tuple(fpr.tolist()), tuple(tpr.tolist()), tuple(thresholds.tolist()), auc)


def _neg_loglik(a, b, s, t):
    z = a * s + b
    # -log sigma(z) for positives, -log(1 - sigma(z)) for negatives
    return float(np.sum(np.logaddexp(0.0, np.where(t, -z, z))))


def fit_logistic(scores, is_positive, cap: float = SLOPE_CAP, max_iter: int = 200):
    """Maximum-likelihood ``(a, b)`` for ``P(positive | s) = sigmoid(a s + b)``
    with ``|a| <= cap``, by projected Newton steps with backtracking.

    Returns ``(a, b, converged)``.
    """
    s = np.asarray(scores, dtype=float)
    t = np.asarray(is_positive, dtype=bool)
    prior = t.mean()
    a, b = 0.0, float(np.log(prior / (1.0 - prior)))
    f = _neg_loglik(a, b, s, t)
    for _ in range(max_iter):
        p = expit(a * s + b)
        r = p - t
        w = p * (1.0 - p)
        g = np.array([r @ s, r.sum()])
        H = np.array([[w @ (s * s), w @ s], [w @ s, w.sum()]]) + 1e-12 * np.eye(2)
        at_cap = abs(a) >= cap and np.sign(-g[0]) == np.sign(a)
        if at_cap:
            step = np.array([0.0, -g[1] / H[1, 1]])
        else:
            step = -np.linalg.solve(H, g)
        scale = 1.0
        while True:
            na = float(np.clip(a + scale * step[0], -cap, cap))
            nb = b + scale * step[1]
            nf = _neg_loglik(na, nb, s, t)
            if nf <= f or scale < 1e-10:
                break
            scale *= 0.5
        if nf > f:  # no descent left along the Newton direction
            return a, b, True
        moved = abs(na - a) + abs(nb - b)
        improved = f - nf
        a, b, f = na, nb, nf
        if moved < 1e-10 or (0.0 <= improved < 1e-12 * max(1.0, abs(f))):
            return a, b, True
    return a, b, False


def pseudo_r2(scores, labels, cap: float = SLOPE_CAP) -> float:
    """McFadden pseudo-R² of a logistic calibration of ``scores``.

    ``1 - lnL(model) / lnL(null)``, the null model predicting the class
    prevalence for every row.  Invariant under negating the scores.
    """
    s, pos = _check_binary(scores, labels)
    a, b, converged = fit_logistic(s, pos, cap)
    if not converged:
        warnings.warn("logistic calibration did not converge; using the last iterate", RuntimeWarning)
    ll_model = -_neg_loglik(a, b, s, pos)
    prior = pos.mean()
    ll_null = pos.sum() * np.log(prior) + (~pos).sum() * np.log(1.0 - prior)
    return float(1.0 - ll_model / ll_null)


# -- reports -----------------------------------------------------------------


@dataclass
class ModelReport:
    name: str
    confusion: ConfusionMatrix
    metrics: dict
    roc: RocCurve
    pseudo_r2: float
    train_seconds: float | None
    eval_seconds: float
    model_bytes: int | None = None
    n_rows: int = 0

    @property
    def accuracy(self) -> float:
        return self.metrics["accuracy"]

    @property
    def auc(self) -> float:
        return self.roc.auc

    def to_dict(self, include_roc: bool = True) -> dict:
        d = {
            "name": self.name,
            "n_rows": self.n_rows,
            "confusion": asdict(self.confusion),
            "metrics": self.metrics,
            "auc": self.roc.auc,
            "pseudo_r2": self.pseudo_r2,
            "train_seconds": None if self.train_seconds is None else round(self.train_seconds, 3),
            "eval_seconds": round(self.eval_seconds, 3),
            "model_bytes": self.model_bytes,
        }
        if include_roc:
            d["roc"] = {"fpr": list(self.roc.fpr), "tpr": list(self.roc.tpr),
                        "thresholds": [None if np.isinf(v) else v for v in self.roc.thresholds]}
        return d


def evaluate_model(
    predict: Callable,
    score: Callable,
    X,
    y,
    name: str = "model",
    train_seconds: float | None = None,
    model_bytes: int | None = None,
) -> ModelReport:
    """Run ``predict`` and ``score`` on ``(X, y)`` and gather every metric.

    ``score`` must return larger values for more legitimate-looking rows.
    """
    X = np.asarray(X)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("test set is empty")
    t0 = time.perf_counter()
    preds = np.asarray(predict(X))
    scores = np.asarray(score(X), dtype=float)
    eval_seconds = time.perf_counter() - t0
    cm = confusion(preds, y)
    phishing_scores = -scores
    return ModelReport(
        name=name,
        confusion=cm,
        metrics=scalar_metrics(cm),
        roc=roc(phishing_scores, y),
        pseudo_r2=pseudo_r2(phishing_scores, y),
        train_seconds=train_seconds,
        eval_seconds=eval_seconds,
        model_bytes=model_bytes,
        n_rows=int(y.size),
    )


@dataclass
class EvaluationReport:
    models: list[ModelReport]
    dataset_fingerprint: str = ""
    config: dict = field(default_factory=dict)

    def sorted(self) -> "EvaluationReport":
        rows = sorted(self.models, key=lambda m: -m.accuracy)
        return EvaluationReport(rows, self.dataset_fingerprint, self.config)

    def to_dict(self, include_roc: bool = True) -> dict:
        return {
            "version": REPORT_VERSION,
            "dataset_fingerprint": self.dataset_fingerprint,
            "config": self.config,
            "models": [m.to_dict(include_roc) for m in self.models],
        }

    def to_json(self, include_roc: bool = True) -> str:
        return json.dumps(self.to_dict(include_roc), indent=2, sort_keys=True)

    def to_text(self) -> str:
        header = ["Algorithm", "Accuracy", "Train(s)", "Eval(s)", "TP rate", "FP rate",
                  "Precision", "Recall", "Error", "AUC", "PseudoR2"]
        rows = [header]
        for m in self.models:
            k = m.metrics
            rows.append([
                m.name,
                f"{k['accuracy']:.4f}",
                "-" if m.train_seconds is None else f"{m.train_seconds:.3f}",
                f"{m.eval_seconds:.3f}",
                f"{k['tp_rate']:.3f}",
                f"{k['fp_rate']:.3f}",
                f"{k['precision']:.3f}",
                f"{k['recall']:.3f}",
                f"{k['error_rate']:.3f}",
                f"{m.auc:.4f}",
                f"{m.pseudo_r2:.4f}",
            ])
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = []
        for r in rows:
            cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
            lines.append("  ".join(cells))
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines) + "\n"


def recompute_metrics(report: Mapping) -> dict:
    """Metrics rebuilt from a serialized model entry's confusion counts."""
    return scalar_metrics(ConfusionMatrix(**report["confusion"]))


def compare(models: Mapping[str, object], X, y, train_seconds: Mapping[str, float] | None = None,
            model_bytes: Mapping[str, int] | None = None, fingerprint: str = "",
            config: dict | None = None) -> EvaluationReport:
    """Evaluate fitted estimators on one test set; rows sorted by accuracy, best first."""
    if not models:
        raise ValueError("nothing to compare")
    train_seconds = train_seconds or {}
    model_bytes = model_bytes or {}
    reports = [
        evaluate_model(est.predict, est.decision_function, X, y, name,
                       train_seconds.get(name), model_bytes.get(name))
        for name, est in models.items()
    ]
    return EvaluationReport(reports, fingerprint, dict(config or {})).sorted()
