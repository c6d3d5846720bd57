import csv

import numpy as np
import pytest
from hypothesis import strategies as st

from mcarsvm.extractor import FEATURE_NAMES


def ternary_matrix(rng, n, d):
    return rng.choice(np.array([-1, 0, 1], dtype=np.int8), size=(n, d))


def linear_labels(rng, X, noise=0.5):
    w = rng.normal(size=X.shape[1])
    y = np.where(X @ w + rng.normal(scale=noise, size=X.shape[0]) > 0, 1, -1)
    return y.astype(np.int8)


def write_labelled_csv(path, names, X, y, label="Result"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*names, label])
        for row, lab in zip(np.asarray(X).tolist(), np.asarray(y).tolist()):
            w.writerow([*row, lab])
    return path


@st.composite
def small_datasets(draw, max_rows=8, max_cols=4, min_rows=1):
    n = draw(st.integers(min_rows, max_rows))
    d = draw(st.integers(1, max_cols))
    cells = draw(st.lists(st.sampled_from([-1, 0, 1]), min_size=n * d, max_size=n * d))
    labels = draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
    return np.array(cells, dtype=np.int8).reshape(n, d), np.array(labels, dtype=np.int8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def toy_corpus(tmp_path):
    """A 400-row labelled CSV with the 30 website feature columns."""
    rng = np.random.default_rng(7)
    X = ternary_matrix(rng, 400, len(FEATURE_NAMES))
    y = linear_labels(rng, X)
    return write_labelled_csv(tmp_path / "toy.csv", FEATURE_NAMES, X, y)
