"""MCAR-SVM: association rules choose the features, a linear SVM decides.

Training runs MCAR rule generation and database coverage pruning, keeps the
attributes that appear in at least one surviving rule, and fits the SVM on
those columns only.  At prediction time the SVM's verdict is final; the
first firing rule is returned next to it as an explanation.
"""
from __future__ import annotations

import hashlib
import json
import time

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import CLASSES, LEGITIMATE, PHISHING, check_ternary, check_ternary_X_y
from .mcar import DEFAULT, RuleClassifier, database_coverage_prune, find_frequent_ruleitems, generate_rules, rank_rules
from .svm import SvmTrainConfig, decision_value, train_svm

STAGES = ("frequent_ruleitems", "generate_rules", "rank_and_prune", "train_svm")


def select_features(classifier: RuleClassifier, n_features: int) -> tuple[int, ...]:
    """Sorted attributes used by the kept rules; every attribute if none survive."""
    used = sorted({a for rule in classifier.rules for a in rule.attributes})
    return tuple(used) if used else tuple(range(n_features))


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:16]


class MCARSVMClassifier(ClassifierMixin, BaseEstimator):
    """Hybrid rule-mining / linear-SVM phishing classifier.

    Parameters
    ----------
    min_support, min_confidence : float
        MCAR thresholds.
    tie_break : {"random", "lexicographic"}
        Ordering of fully tied rules.
    max_length : int or None
        Largest antecedent size to mine.
    lam, epochs, tol, batch_size :
        SVM training settings, see :class:`mcarsvm.svm.LinearSVM`.
    random_state : int
        Seeds both the rule tie-break and the SVM visiting order.

    Attributes
    ----------
    rule_classifier_ : RuleClassifier
    feature_subset_ : tuple of int
    svm_ : SvmModel
    stage_times_ : dict
        Wall-clock seconds per training stage, in execution order.
    stage_digests_ : dict
        Short hash of each stage's output.
    """

    def __init__(self, min_support=0.02, min_confidence=0.5, tie_break="random", max_length=None,
                 lam=0.01, epochs=200, tol=1e-6, batch_size=32, random_state=0):
        self.min_support = min_support
        self.min_confidence = min_confidence
        self.tie_break = tie_break
        self.max_length = max_length
        self.lam = lam
        self.epochs = epochs
        self.tol = tol
        self.batch_size = batch_size
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_ternary_X_y(X, y)
        times, digests, stamps = {}, {}, []

        def stage(name, fn, *args):
            t0 = time.perf_counter()
            out = fn(*args)
            t1 = time.perf_counter()
            times[name] = t1 - t0
            stamps.append(t1)
            return out

        # Step 1: frequent ruleitems
        items = stage("frequent_ruleitems", find_frequent_ruleitems, X, y, self.min_support, self.max_length)
        digests["frequent_ruleitems"] = _digest([(ri.antecedent, ri.label, ri.count) for ri in items])
        # Step 2: class association rules above min_confidence
        rules = stage("generate_rules", generate_rules, items, self.min_confidence, len(y))
        digests["generate_rules"] = _digest([(r.antecedent, r.consequent) for r in rules])
        # Step 3: rank, then keep the rules surviving coverage pruning
        params = dict(min_support=self.min_support, min_confidence=self.min_confidence,
                      seed=self.random_state, tie_break=self.tie_break, max_length=self.max_length,
                      n_ruleitems=len(items), n_rules=len(rules))
        clf = stage(
            "rank_and_prune",
            lambda: database_coverage_prune(rank_rules(rules, self.random_state, self.tie_break), X, y, params),
        )
        digests["rank_and_prune"] = _digest([(r.antecedent, r.consequent) for r in clf.rules])
        subset = select_features(clf, X.shape[1])
        # Step 4: hyperplane on the selected attributes
        cfg = SvmTrainConfig(self.lam, self.epochs, self.random_state, self.tol, self.batch_size)
        svm = stage("train_svm", train_svm, X, y, subset, cfg)
        digests["train_svm"] = _digest([svm.W.tolist(), svm.C])

        if svm.feature_subset != subset or set(subset) != (
            {a for r in clf.rules for a in r.attributes} or set(range(X.shape[1]))
        ):
            raise AssertionError("feature subset of the rules and the SVM disagree")

        self.rule_classifier_ = clf
        self.feature_subset_ = subset
        self.svm_ = svm
        self.stage_times_ = times
        self.stage_timestamps_ = stamps
        self.stage_digests_ = digests
        self.classes_ = CLASSES.copy()
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        """SVM decision value on the selected features; positive means legitimate."""
        check_is_fitted(self, "svm_")
        X = check_ternary(X, self.n_features_in_)
        return decision_value(self.svm_, self.svm_.restrict(X))

    def predict(self, X):
        return np.where(self.decision_function(X) > 0, LEGITIMATE, PHISHING).astype(np.int8)

    def explain(self, X) -> list:
        """First firing rule per row, or ``DEFAULT``; never changes the verdict."""
        check_is_fitted(self, "svm_")
        X = check_ternary(X, self.n_features_in_)
        idx = self.rule_classifier_.firing_index(X)
        rules = self.rule_classifier_.rules
        return [rules[i] if i >= 0 else DEFAULT for i in idx]

    def predict_explain(self, X):
        """``(class, explanation)`` pairs."""
        return list(zip(self.predict(X).tolist(), self.explain(X)))


def train_hybrid(X, y, **params) -> MCARSVMClassifier:
    return MCARSVMClassifier(**params).fit(X, y)


def predict_hybrid(model: MCARSVMClassifier, x):
    label, explanation = model.predict_explain(np.atleast_2d(x))[0]
    return label, explanation


def score_hybrid(model: MCARSVMClassifier, x) -> float:
    return float(model.decision_function(np.atleast_2d(x))[0])
