"""Multi-class classification based on association rules (MCAR).

Rule generation mines frequent ruleitems level by level on a vertical
(TID-list) layout: size-1 TID lists come from one scan of the training data
and every larger candidate's list is the intersection of two parent lists.
The classifier builder ranks the resulting class association rules and keeps
those that survive database coverage pruning.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    CLASSES,
    LEGITIMATE,
    PHISHING,
    check_ternary,
    check_ternary_X_y,
    class_name,
)

DEFAULT = "DEFAULT"
TIE_BREAKS = ("random", "lexicographic")

Item = tuple[int, int]  # (attribute index, value)


@dataclass(frozen=True, eq=False)
class RuleItem:
    """An antecedent paired with a class, plus where the antecedent holds."""

    antecedent: tuple[Item, ...]
    label: int
    tid_list: np.ndarray
    class_counts: dict[int, int]

    @property
    def count(self) -> int:
        return self.class_counts.get(self.label, 0)

    @property
    def size(self) -> int:
        return len(self.antecedent)


@dataclass(frozen=True)
class Rule:
    antecedent: tuple[Item, ...]
    consequent: int
    support: float
    confidence: float
    support_count: int = field(default=0, compare=False)
    cover_count: int = field(default=0, compare=False)

    @property
    def size(self) -> int:
        return len(self.antecedent)

    @property
    def attributes(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.antecedent)

    def matches(self, x) -> bool:
        return all(x[a] == v for a, v in self.antecedent)

    def match_mask(self, X: np.ndarray) -> np.ndarray:
        mask = np.ones(X.shape[0], dtype=bool)
        for a, v in self.antecedent:
            mask &= X[:, a] == v
        return mask

    def describe(self, feature_names: Sequence[str] | None = None) -> str:
        def name(a):
            return feature_names[a] if feature_names is not None else f"f{a}"

        body = ", ".join(f"{name(a)}={v}" for a, v in self.antecedent)
        return f"<{{{body}}} -> {class_name(self.consequent)}>"


@dataclass(frozen=True)
class RuleClassifier:
    rules: tuple[Rule, ...]
    default_class: int
    default_fraction: float
    n_features: int
    params: dict = field(default_factory=dict, compare=False)

    def classify(self, x):
        """(class, firing rule) for one row, or (default_class, DEFAULT)."""
        x = _check_row(x, self.n_features)
        for rule in self.rules:
            if rule.matches(x):
                return rule.consequent, rule
        return self.default_class, DEFAULT

    def score(self, x) -> float:
        label, rule = self.classify(x)
        return _signed_score(label, rule, self.default_fraction)

    def firing_index(self, X: np.ndarray) -> np.ndarray:
        """Index of the first rule firing on each row; -1 where none fires."""
        out = np.full(X.shape[0], -1, dtype=np.intp)
        pending = np.arange(X.shape[0])
        for i, rule in enumerate(self.rules):
            if pending.size == 0:
                break
            hit = rule.match_mask(X[pending])
            out[pending[hit]] = i
            pending = pending[~hit]
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        idx = self.firing_index(X)
        labels = np.array([r.consequent for r in self.rules] + [self.default_class], dtype=np.int8)
        return labels[idx]

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        idx = self.firing_index(X)
        scores = np.array(
            [r.confidence * r.consequent for r in self.rules]
            + [0.5 * self.default_fraction * self.default_class]
        )
        return scores[idx]


def _signed_score(label, rule, default_fraction) -> float:
    if rule is DEFAULT:
        return 0.5 * default_fraction * (1.0 if label == LEGITIMATE else -1.0)
    return rule.confidence if label == LEGITIMATE else -rule.confidence


def _check_row(x, n_features) -> np.ndarray:
    x = np.asarray(x.values if hasattr(x, "values") else x).reshape(-1)
    if x.shape[0] != n_features:
        raise ValueError(f"expected {n_features} feature values, got {x.shape[0]}")
    return x


# -- rule generation ---------------------------------------------------------


def _check_fraction(value, name):
    if not 0.0 < value <= 1.0:
        raise ValueError(f"{name} must lie in (0, 1], got {value!r}")


def item_tid_lists(X: np.ndarray) -> dict[Item, np.ndarray]:
    """Sorted TID list of every (attribute, value) item present in ``X``.

    One pass per column: a stable argsort groups row ids by value while
    keeping them in ascending order.
    """
    lists = {}
    for a in range(X.shape[1]):
        col = X[:, a]
        order = np.argsort(col, kind="stable")
        values, starts = np.unique(col[order], return_index=True)
        bounds = list(starts) + [len(order)]
        for k, v in enumerate(values):
            lists[(a, int(v))] = order[bounds[k]:bounds[k + 1]]
    return lists


def _class_counts(y_sub: np.ndarray) -> dict[int, int]:
    n_leg = int(np.count_nonzero(y_sub == LEGITIMATE))
    return {PHISHING: int(y_sub.size - n_leg), LEGITIMATE: n_leg}


def find_frequent_ruleitems(X, y, min_support: float, max_length: int | None = None) -> list[RuleItem]:
    """All ruleitems whose support is at least ``min_support``.

    Support of <antecedent, class> is the number of rows matching both,
    divided by the number of rows.  Size-k candidates join two frequent
    size-(k-1) ruleitems of the same class whose antecedents share their
    first k-2 items.  Results come back grouped by size, then sorted by
    antecedent and class.
    """
    _check_fraction(min_support, "min_support")
    X = np.asarray(X)
    y = np.asarray(y)
    n = X.shape[0]
    if n == 0:
        raise ValueError("cannot mine rules from an empty training set")

    def frequent(count):
        return count / n >= min_support

    tid_cache: dict[tuple[Item, ...], np.ndarray] = {}
    level: dict[int, list[RuleItem]] = defaultdict(list)
    for item, tids in sorted(item_tid_lists(X).items()):
        counts = _class_counts(y[tids])
        tid_cache[(item,)] = tids
        for label in CLASSES.tolist():
            if frequent(counts[label]):
                level[label].append(RuleItem((item,), label, tids, counts))

    found: list[RuleItem] = []
    size = 1
    while any(level.values()):
        for label in CLASSES.tolist():
            found.extend(level[label])
        if max_length is not None and size >= max_length:
            break
        size += 1
        next_level: dict[int, list[RuleItem]] = defaultdict(list)
        next_cache: dict[tuple[Item, ...], np.ndarray] = {}
        for label in CLASSES.tolist():
            parents = level[label]
            known = {ri.antecedent for ri in parents}
            by_prefix: dict[tuple[Item, ...], list[RuleItem]] = defaultdict(list)
            for ri in parents:
                by_prefix[ri.antecedent[:-1]].append(ri)
            for group in by_prefix.values():
                for i, left in enumerate(group):
                    for right in group[i + 1:]:
                        if left.antecedent[-1][0] == right.antecedent[-1][0]:
                            continue
                        ante = left.antecedent + (right.antecedent[-1],)
                        if size > 2 and not _all_subsets_known(ante, known):
                            continue
                        tids = next_cache.get(ante)
                        if tids is None:
                            tids = np.intersect1d(left.tid_list, right.tid_list, assume_unique=True)
                            next_cache[ante] = tids
                        counts = _class_counts(y[tids])
                        if frequent(counts[label]):
                            next_level[label].append(RuleItem(ante, label, tids, counts))
            next_level[label].sort(key=lambda ri: ri.antecedent)
        level = next_level
    return found


def _all_subsets_known(ante, known) -> bool:
    # the two parents are known already; check the remaining (k-1)-subsets
    for drop in range(len(ante) - 2):
        if ante[:drop] + ante[drop + 1:] not in known:
            return False
    return True


def generate_rules(ruleitems: Iterable[RuleItem], min_confidence: float, n_rows: int) -> list[Rule]:
    """One rule per ruleitem whose confidence reaches ``min_confidence``."""
    _check_fraction(min_confidence, "min_confidence")
    rules = []
    for ri in ruleitems:
        cover = int(ri.tid_list.size)
        if cover == 0:
            continue
        confidence = ri.count / cover
        if confidence >= min_confidence:
            rules.append(
                Rule(ri.antecedent, ri.label, ri.count / n_rows, confidence, ri.count, cover)
            )
    return rules


# -- classifier builder ------------------------------------------------------


def _lex_key(rule: Rule):
    # every field takes part, so the order never depends on the input order
    return (rule.antecedent, rule.consequent, rule.confidence, rule.support,
            rule.support_count, rule.cover_count)


def rank_key(rule: Rule):
    """Confidence first, then support, then fewer antecedent items."""
    return (-rule.confidence, -rule.support, rule.size)


def rank_rules(rules: Iterable[Rule], seed: int = 0, tie_break: str = "random") -> list[Rule]:
    """Sort rules best-first.

    Full ties (same confidence, support and size) are ordered by a seeded
    shuffle under ``tie_break="random"`` or by (attribute, value, class)
    under ``"lexicographic"``.  Either way the result does not depend on the
    input order.
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"tie_break must be one of {TIE_BREAKS}, got {tie_break!r}")
    ordered = sorted(rules, key=_lex_key)
    if tie_break == "random":
        perm = np.random.default_rng(seed).permutation(len(ordered))
        ordered = [ordered[i] for i in perm]
    return sorted(ordered, key=rank_key)


def _majority(y: np.ndarray) -> tuple[int, float]:
    counts = _class_counts(y)
    # ties go to PHISHING
    label = LEGITIMATE if counts[LEGITIMATE] > counts[PHISHING] else PHISHING
    return label, counts[label] / y.size


def database_coverage_prune(rules: Sequence[Rule], X, y, params: dict | None = None) -> RuleClassifier:
    """Keep, in rank order, each rule that correctly classifies at least one
    still-uncovered training row; the rows a kept rule matches become covered.
    """
    X = np.asarray(X)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("database coverage pruning needs a nonempty training set")
    remaining = np.arange(X.shape[0])
    kept = []
    for rule in rules:
        if remaining.size == 0:
            break
        hit = rule.match_mask(X[remaining])
        if not hit.any():
            continue
        if not np.any(y[remaining[hit]] == rule.consequent):
            continue
        kept.append(rule)
        remaining = remaining[~hit]
    default, frac = _majority(y[remaining] if remaining.size else y)
    return RuleClassifier(tuple(kept), default, frac, X.shape[1], dict(params or {}))


def classify_rule(classifier: RuleClassifier, x):
    return classifier.classify(x)


def rule_score(classifier: RuleClassifier, x) -> float:
    return classifier.score(x)


def build_rule_classifier(
    X,
    y,
    min_support: float = 0.02,
    min_confidence: float = 0.5,
    seed: int = 0,
    tie_break: str = "random",
    max_length: int | None = None,
    stage_times: dict | None = None,
) -> RuleClassifier:
    """Run both MCAR phases end to end."""
    import time

    t0 = time.perf_counter()
    items = find_frequent_ruleitems(X, y, min_support, max_length)
    t1 = time.perf_counter()
    rules = generate_rules(items, min_confidence, len(y))
    t2 = time.perf_counter()
    ranked = rank_rules(rules, seed, tie_break)
    params = dict(
        min_support=min_support,
        min_confidence=min_confidence,
        seed=seed,
        tie_break=tie_break,
        max_length=max_length,
        n_ruleitems=len(items),
        n_rules=len(rules),
    )
    clf = database_coverage_prune(ranked, X, y, params)
    t3 = time.perf_counter()
    if stage_times is not None:
        stage_times.update(
            frequent_ruleitems=t1 - t0, generate_rules=t2 - t1, rank_and_prune=t3 - t2
        )
    return clf


class MCARClassifier(ClassifierMixin, BaseEstimator):
    """Rule-list classifier built by MCAR.

    Parameters
    ----------
    min_support, min_confidence : float
        Thresholds in (0, 1].
    tie_break : {"random", "lexicographic"}
        How rules tied on confidence, support and size are ordered.
    random_state : int
        Seed for the ``"random"`` tie-break.
    max_length : int or None
        Largest antecedent size to mine; ``None`` mines until no frequent
        ruleitems remain.
    """

    def __init__(self, min_support=0.02, min_confidence=0.5, tie_break="random",
                 random_state=0, max_length=None):
        self.min_support = min_support
        self.min_confidence = min_confidence
        self.tie_break = tie_break
        self.random_state = random_state
        self.max_length = max_length

    def fit(self, X, y):
        X, y = check_ternary_X_y(X, y, require_both_classes=False)
        self.stage_times_ = {}
        self.rule_classifier_ = build_rule_classifier(
            X, y, self.min_support, self.min_confidence, self.random_state,
            self.tie_break, self.max_length, self.stage_times_,
        )
        self.classes_ = CLASSES.copy()
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "rule_classifier_")
        return self.rule_classifier_.predict(check_ternary(X, self.n_features_in_))

    def decision_function(self, X):
        """Signed confidence of the firing rule; positive means legitimate."""
        check_is_fitted(self, "rule_classifier_")
        return self.rule_classifier_.decision_function(check_ternary(X, self.n_features_in_))

    def explain(self, X) -> list:
        """Firing rule per row, or ``DEFAULT``."""
        check_is_fitted(self, "rule_classifier_")
        idx = self.rule_classifier_.firing_index(check_ternary(X, self.n_features_in_))
        rules = self.rule_classifier_.rules
        return [rules[i] if i >= 0 else DEFAULT for i in idx]
