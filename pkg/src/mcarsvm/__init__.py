"""Phishing-website classification with MCAR association rules and a linear SVM."""
from ._validation import LEGITIMATE, PHISHING
from .dataset import (
    Dataset,
    FeatureSchema,
    FeatureVector,
    SplitSpec,
    kfold,
    load_arff,
    load_csv,
    load_dataset,
    split,
    write_csv,
)
from .evaluation import compare, evaluate_model
from .hybrid import MCARSVMClassifier
from .mcar import MCARClassifier
from .svm import LinearSVM
from .tree import TernaryDecisionTree

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FeatureSchema",
    "FeatureVector",
    "LEGITIMATE",
    "LinearSVM",
    "MCARClassifier",
    "MCARSVMClassifier",
    "PHISHING",
    "SplitSpec",
    "TernaryDecisionTree",
    "compare",
    "evaluate_model",
    "kfold",
    "load_arff",
    "load_csv",
    "load_dataset",
    "split",
    "write_csv",
]
