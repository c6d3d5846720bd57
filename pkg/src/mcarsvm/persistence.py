"""Versioned JSON documents for fitted models.

Documents are written with sorted keys and a fixed layout, so identical
models always serialize to identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from ._validation import CLASSES, LEGITIMATE, PHISHING, class_name
from .hybrid import MCARSVMClassifier
from .mcar import MCARClassifier, Rule, RuleClassifier
from .svm import LinearSVM, SvmModel, SvmTrainConfig
from .tree import TernaryDecisionTree, TreeNode

FORMAT = "mcarsvm-model"
VERSION = 1

KINDS = {
    "svm": LinearSVM,
    "mcar": MCARClassifier,
    "tree": TernaryDecisionTree,
    "hybrid": MCARSVMClassifier,
}
_CLASS_BY_NAME = {"PHISHING": PHISHING, "LEGITIMATE": LEGITIMATE}


class ModelFormatError(ValueError):
    pass


def kind_of(estimator) -> str:
    for kind, cls in KINDS.items():
        if type(estimator) is cls:
            return kind
    raise TypeError(f"unsupported estimator type {type(estimator).__name__}")


# -- rules -----------------------------------------------------------------------


def rules_to_dict(clf: RuleClassifier, names: Sequence[str]) -> dict:
    return {
        "default_class": class_name(clf.default_class),
        "default_fraction": clf.default_fraction,
        "params": clf.params,
        "rules": [
            {
                "antecedent": [{"feature": names[a], "index": a, "value": v} for a, v in r.antecedent],
                "class": class_name(r.consequent),
                "support": r.support,
                "confidence": r.confidence,
                "support_count": r.support_count,
                "cover_count": r.cover_count,
            }
            for r in clf.rules
        ],
    }


def rules_from_dict(d: dict, n_features: int) -> RuleClassifier:
    rules = tuple(
        Rule(
            tuple((int(it["index"]), int(it["value"])) for it in r["antecedent"]),
            _CLASS_BY_NAME[r["class"]],
            float(r["support"]),
            float(r["confidence"]),
            int(r.get("support_count", 0)),
            int(r.get("cover_count", 0)),
        )
        for r in d["rules"]
    )
    return RuleClassifier(rules, _CLASS_BY_NAME[d["default_class"]], float(d["default_fraction"]),
                          n_features, dict(d.get("params", {})))


# -- svm -------------------------------------------------------------------------


def svm_to_dict(model: SvmModel, names: Sequence[str]) -> dict:
    cfg = model.config
    return {
        "W": [float(w) for w in model.W],
        "C": float(model.C),
        "feature_subset": [names[a] for a in model.feature_subset],
        "feature_indices": list(model.feature_subset),
        "hyperparameters": {"lam": cfg.lam, "epochs": cfg.epochs, "tol": cfg.tol,
                            "batch_size": cfg.batch_size},
        "seed": cfg.seed,
        "objective_trace": [float(v) for v in model.objective_trace],
    }


def svm_from_dict(d: dict) -> SvmModel:
    hp = d["hyperparameters"]
    cfg = SvmTrainConfig(float(hp["lam"]), int(hp["epochs"]), int(d["seed"]), float(hp["tol"]),
                         int(hp["batch_size"]))
    return SvmModel(np.array(d["W"], dtype=float), float(d["C"]),
                    tuple(int(a) for a in d["feature_indices"]), cfg,
                    tuple(float(v) for v in d.get("objective_trace", ())))


# -- tree ------------------------------------------------------------------------


def tree_to_dict(node: TreeNode, names: Sequence[str]) -> dict:
    d = {"counts": {"PHISHING": node.counts[0], "LEGITIMATE": node.counts[1]}}
    if node.is_leaf:
        d["class"] = class_name(node.label)
        d["proba_legitimate"] = node.proba
    else:
        d["feature"] = names[node.attribute]
        d["index"] = node.attribute
        d["children"] = {str(v): tree_to_dict(c, names) for v, c in sorted(node.children.items())}
    return d


def tree_from_dict(d: dict) -> TreeNode:
    node = TreeNode((int(d["counts"]["PHISHING"]), int(d["counts"]["LEGITIMATE"])))
    if "children" in d:
        node.attribute = int(d["index"])
        node.children = {int(v): tree_from_dict(c) for v, c in d["children"].items()}
    return node


# -- documents -------------------------------------------------------------------


def model_to_dict(estimator, feature_names: Sequence[str], label_column: str = "Result") -> dict:
    kind = kind_of(estimator)
    names = list(feature_names)
    if len(names) != estimator.n_features_in_:
        raise ValueError("feature_names does not match the fitted model")
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "feature_names": names,
        "label_column": label_column,
        "params": estimator.get_params(),
    }
    if kind == "svm":
        doc["svm"] = svm_to_dict(estimator.model_, names)
    elif kind == "mcar":
        doc["rules"] = rules_to_dict(estimator.rule_classifier_, names)
    elif kind == "tree":
        doc["tree"] = tree_to_dict(estimator.tree_, names)
    else:
        doc["rules"] = rules_to_dict(estimator.rule_classifier_, names)
        doc["feature_subset"] = [names[a] for a in estimator.feature_subset_]
        doc["svm"] = svm_to_dict(estimator.svm_, names)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def model_from_dict(doc: dict):
    """Rebuild ``(estimator, feature_names)`` from a model document."""
    if doc.get("format") != FORMAT:
        raise ModelFormatError("not a model document")
    if doc.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    names = list(doc["feature_names"])
    est = KINDS[kind](**doc["params"])
    est.classes_ = CLASSES.copy()
    est.n_features_in_ = len(names)
    if kind == "svm":
        est.model_ = svm_from_dict(doc["svm"])
        est.coef_ = est.model_.W
        est.intercept_ = -est.model_.C
    elif kind == "mcar":
        est.rule_classifier_ = rules_from_dict(doc["rules"], len(names))
    elif kind == "tree":
        est.tree_ = tree_from_dict(doc["tree"])
    else:
        est.rule_classifier_ = rules_from_dict(doc["rules"], len(names))
        est.svm_ = svm_from_dict(doc["svm"])
        est.feature_subset_ = est.svm_.feature_subset
    return est, names


def save_model(estimator, feature_names, path, label_column: str = "Result") -> int:
    """Write the model document; returns its size in bytes."""
    text = dumps(model_to_dict(estimator, feature_names, label_column))
    data = text.encode("utf-8")
    Path(path).write_bytes(data)
    return len(data)


def load_model(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(doc)


def model_size(estimator, feature_names) -> int:
    return len(dumps(model_to_dict(estimator, feature_names)).encode("utf-8"))
