"""Multiway Gini decision tree over ternary attributes (comparison baseline)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import CLASSES, LEGITIMATE, PHISHING, check_ternary, check_ternary_X_y


@dataclass
class TreeNode:
    counts: tuple[int, int]  # (phishing, legitimate)
    attribute: int | None = None
    children: dict[int, "TreeNode"] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return self.attribute is None

    @property
    def proba(self) -> float:
        """Laplace-smoothed probability of LEGITIMATE."""
        n_p, n_l = self.counts
        return (n_l + 1) / (n_p + n_l + 2)

    @property
    def label(self) -> int:
        return LEGITIMATE if self.proba > 0.5 else PHISHING

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(c.depth() for c in self.children.values())

    def route(self, x) -> "TreeNode":
        node = self
        while not node.is_leaf:
            v = int(x[node.attribute])
            node = node.children.get(v, node.children.get(0))
        return node


def gini(y: np.ndarray) -> float:
    if y.size == 0:
        return 0.0
    p = np.count_nonzero(y == LEGITIMATE) / y.size
    return 1.0 - p * p - (1.0 - p) ** 2


def split_impurity(column: np.ndarray, y: np.ndarray) -> float:
    """Size-weighted Gini of the children produced by splitting on ``column``."""
    total = 0.0
    for v in np.unique(column):
        part = y[column == v]
        total += part.size * gini(part)
    return total / y.size


def _counts(y) -> tuple[int, int]:
    n_l = int(np.count_nonzero(y == LEGITIMATE))
    return (int(y.size - n_l), n_l)


def best_split(X, y, min_leaf: int = 1):
    """(attribute, impurity) of the lowest-impurity admissible split.

    A split is admissible when every nonempty child keeps ``min_leaf`` rows.
    Ties go to the lowest attribute index.  Returns ``(None, parent gini)``
    when nothing beats the parent.
    """
    parent = gini(y)
    best_attr, best_imp = None, parent
    for a in range(X.shape[1]):
        col = X[:, a]
        _, sizes = np.unique(col, return_counts=True)
        if sizes.size < 2 or sizes.min() < min_leaf:
            continue
        imp = split_impurity(col, y)
        if imp < best_imp - 1e-12:
            best_attr, best_imp = a, imp
    return best_attr, best_imp


def train_tree(X, y, max_depth: int = 10, min_leaf: int = 5, domains=None) -> TreeNode:
    X = np.asarray(X)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("cannot grow a tree on an empty training set")
    if domains is None:
        domains = [sorted(set(np.unique(X[:, a]).tolist()) | {0}) for a in range(X.shape[1])]

    def grow(rows, depth):
        ys = y[rows]
        node = TreeNode(_counts(ys))
        if depth >= max_depth or gini(ys) == 0.0 or rows.size < 2 * min_leaf:
            return node
        attr, _ = best_split(X[rows], ys, min_leaf)
        if attr is None:
            return node
        node.attribute = attr
        col = X[rows, attr]
        for v in domains[attr]:
            sub = rows[col == v]
            node.children[v] = grow(sub, depth + 1) if sub.size else TreeNode(node.counts)
        return node

    return grow(np.arange(X.shape[0]), 0)


def predict_tree(root: TreeNode, x) -> int:
    return root.route(x).label


def score_tree(root: TreeNode, x) -> float:
    """``2p - 1`` for the leaf's smoothed probability ``p`` of LEGITIMATE."""
    return 2.0 * root.route(x).proba - 1.0


class TernaryDecisionTree(ClassifierMixin, BaseEstimator):
    """Decision tree with one branch per ternary value.

    Unseen values at prediction time follow the ``0`` branch.
    """

    def __init__(self, max_depth=10, min_leaf=5):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, y):
        X, y = check_ternary_X_y(X, y, require_both_classes=False)
        self.tree_ = train_tree(X, y, self.max_depth, self.min_leaf)
        self.classes_ = CLASSES.copy()
        self.n_features_in_ = X.shape[1]
        return self

    def _leaves(self, X):
        check_is_fitted(self, "tree_")
        X = check_ternary(X, self.n_features_in_)
        return [self.tree_.route(x) for x in X]

    def predict(self, X):
        return np.array([leaf.label for leaf in self._leaves(X)], dtype=np.int8)

    def predict_proba(self, X):
        p = np.array([leaf.proba for leaf in self._leaves(X)])
        return np.column_stack([1.0 - p, p])

    def decision_function(self, X):
        return 2.0 * self.predict_proba(X)[:, 1] - 1.0
