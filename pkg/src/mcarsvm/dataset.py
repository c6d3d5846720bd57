"""Datasets of ternary website features, read from CSV or ARFF.

Rows are websites, columns are features valued in {-1, 0, 1} plus one label
column.  Row positions double as transaction ids (TIDs) for rule mining.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from ._validation import LEGITIMATE, PHISHING, TERNARY

DEFAULT_LABEL_COLUMN = "Result"
DEFAULT_LABEL_ENCODING = {"-1": PHISHING, "1": LEGITIMATE}


class DatasetError(ValueError):
    """Raised for unreadable or malformed dataset files."""


@dataclass(frozen=True)
class FeatureSchema:
    feature_names: tuple[str, ...]
    domains: tuple[tuple[int, ...], ...]
    label_name: str = DEFAULT_LABEL_COLUMN

    def __post_init__(self):
        names = self.feature_names
        if any(not n for n in names):
            raise DatasetError("feature names must be nonempty")
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DatasetError(f"duplicate feature names: {dupes}")
        if len(self.domains) != len(names):
            raise DatasetError("one value domain per feature is required")
        for name, dom in zip(names, self.domains):
            if not dom or not set(dom) <= set(TERNARY):
                raise DatasetError(f"invalid domain {dom!r} for feature {name!r}")

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def index(self, name: str) -> int:
        return self.feature_names.index(name)

    @classmethod
    def from_values(cls, names: Sequence[str], X: np.ndarray, label_name: str = DEFAULT_LABEL_COLUMN):
        """Build a schema whose domains are the values observed in ``X``.

        A feature with no observations gets the full ternary domain.
        """
        domains = []
        for j in range(len(names)):
            seen = tuple(int(v) for v in np.unique(X[:, j])) if len(X) else ()
            domains.append(seen or TERNARY)
        return cls(tuple(names), tuple(domains), label_name)


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[int, ...]
    label: int | None = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable feature matrix with labels; row ``i`` has TID ``i``."""

    schema: FeatureSchema
    X: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.int8).reshape(-1, self.schema.n_features)
        y = np.ascontiguousarray(self.y, dtype=np.int8).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise DatasetError("X and y have different row counts")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.schema == other.schema
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )

    @property
    def tids(self) -> np.ndarray:
        return np.arange(len(self))

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.schema.feature_names

    def __iter__(self) -> Iterator[FeatureVector]:
        for row, label in zip(self.X, self.y):
            yield FeatureVector(tuple(int(v) for v in row), int(label))

    def take(self, tids: Sequence[int]) -> "Dataset":
        """Rows ``tids`` as a new dataset (TIDs renumbered from 0)."""
        tids = np.asarray(tids, dtype=np.intp)
        return Dataset(self.schema, self.X[tids], self.y[tids])

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(",".join(self.schema.feature_names).encode())
        h.update(self.X.tobytes())
        h.update(self.y.tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    validate_fraction: float = 0.15
    test_fraction: float = 0.15
    seed: int = 42

    def __post_init__(self):
        fracs = (self.train_fraction, self.validate_fraction, self.test_fraction)
        if any(not 0.0 <= f <= 1.0 for f in fracs):
            raise ValueError(f"split fractions must lie in [0, 1], got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)!r}")


def _parse_label(raw: str, encoding: dict[str, int]) -> int:
    key = raw.strip()
    if key in encoding:
        return encoding[key]
    raise DatasetError(f"unknown label value {raw!r}; expected one of {sorted(encoding)}")


def _read_table(path, label_column, label_encoding, drop_columns, require_label):
    encoding = DEFAULT_LABEL_ENCODING if label_encoding is None else label_encoding
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path}: missing header row") from None
        if label_column in header:
            label_at = header.index(label_column)
        elif require_label:
            raise DatasetError(f"{path}: label column {label_column!r} not in header")
        else:
            label_at = None
        keep = [j for j, h in enumerate(header) if j != label_at and h not in drop_columns]
        names = [header[j] for j in keep]

        rows, labels = [], []
        for line_no, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise DatasetError(
                    f"{path}: row {line_no} has {len(record)} cells, expected {len(header)}"
                )
            values = []
            for j in keep:
                cell = record[j].strip()
                try:
                    v = int(cell)
                except ValueError:
                    v = None
                if v not in TERNARY:
                    raise DatasetError(
                        f"{path}: row {line_no}, column {header[j]!r}: "
                        f"value {cell!r} is not in {{-1, 0, 1}}"
                    )
                values.append(v)
            if require_label:
                try:
                    labels.append(_parse_label(record[label_at], encoding))
                except DatasetError as exc:
                    raise DatasetError(f"{path}: row {line_no}: {exc}") from None
            rows.append(values)

    X = np.array(rows, dtype=np.int8).reshape(len(rows), len(names))
    return path, names, X, labels


def load_csv(
    path,
    label_column: str = DEFAULT_LABEL_COLUMN,
    label_encoding: dict[str, int] | None = None,
    drop_columns: Sequence[str] = (),
) -> Dataset:
    """Read a ternary feature CSV.

    The schema comes from the header; every non-label column not listed in
    ``drop_columns`` is a feature.  Rows are 1-based in error messages,
    counting the header as row 1.
    """
    path, names, X, labels = _read_table(path, label_column, label_encoding, drop_columns, True)
    schema = FeatureSchema.from_values(names, X, label_column)
    return Dataset(schema, X, np.array(labels, dtype=np.int8), meta={"path": str(path)})


def load_arff(
    path,
    label_column: str = DEFAULT_LABEL_COLUMN,
    label_encoding: dict[str, int] | None = None,
    drop_columns: Sequence[str] = (),
) -> Dataset:
    """Read an ARFF file whose attributes are nominal ``{-1,0,1}`` values."""
    from scipy.io import arff

    encoding = DEFAULT_LABEL_ENCODING if label_encoding is None else label_encoding
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}")
    try:
        data, meta = arff.loadarff(str(path))
    except (ValueError, NotImplementedError, arff.ParseArffError) as exc:
        raise DatasetError(f"{path}: unreadable ARFF ({exc})") from None
    header = list(meta.names())
    if label_column not in header:
        raise DatasetError(f"{path}: label column {label_column!r} not in attributes")
    names = [h for h in header if h != label_column and h not in drop_columns]

    def cell(v):
        return v.decode() if isinstance(v, bytes) else str(int(v)) if float(v).is_integer() else str(v)

    rows, labels = [], []
    for i, rec in enumerate(data, start=1):
        values = []
        for name in names:
            raw = cell(rec[name])
            try:
                v = int(raw)
            except ValueError:
                v = None
            if v not in TERNARY:
                raise DatasetError(f"{path}: instance {i}, attribute {name!r}: value {raw!r} is not in {{-1, 0, 1}}")
            values.append(v)
        try:
            labels.append(_parse_label(cell(rec[label_column]), encoding))
        except DatasetError as exc:
            raise DatasetError(f"{path}: instance {i}: {exc}") from None
        rows.append(values)
    X = np.array(rows, dtype=np.int8).reshape(len(rows), len(names))
    schema = FeatureSchema.from_values(names, X, label_column)
    return Dataset(schema, X, np.array(labels, dtype=np.int8), meta={"path": str(path)})


def load_dataset(path, label_column: str = DEFAULT_LABEL_COLUMN, **kwargs) -> Dataset:
    """:func:`load_arff` for ``.arff`` files, :func:`load_csv` otherwise."""
    loader = load_arff if Path(path).suffix.lower() == ".arff" else load_csv
    return loader(path, label_column=label_column, **kwargs)


def load_features(
    path,
    label_column: str = DEFAULT_LABEL_COLUMN,
    drop_columns: Sequence[str] = (),
) -> tuple[tuple[str, ...], np.ndarray]:
    """Feature names and matrix of a CSV that may lack the label column.

    A label column, when present, is ignored rather than validated.
    """
    _, names, X, _ = _read_table(path, label_column, None, drop_columns, False)
    return tuple(names), X


def write_features_csv(feature_names: Sequence[str], rows, path) -> None:
    """Write an unlabeled feature CSV (header plus one line per row)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(feature_names))
        for row in rows:
            writer.writerow([int(v) for v in row])


def write_csv(dataset: Dataset, path, label_encoding: dict[str, int] | None = None) -> None:
    encoding = DEFAULT_LABEL_ENCODING if label_encoding is None else label_encoding
    decode = {v: k for k, v in encoding.items()}
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*dataset.schema.feature_names, dataset.schema.label_name])
        for row, label in zip(dataset.X.tolist(), dataset.y.tolist()):
            writer.writerow([*row, decode[label]])


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Disjoint sorted index sets; validate/test get floor(n * fraction)."""
    n_val = math.floor(n * spec.validate_fraction + 1e-9)
    n_test = math.floor(n * spec.test_fraction + 1e-9)
    n_train = n - n_val - n_test
    perm = np.random.default_rng(spec.seed).permutation(n)
    train = np.sort(perm[:n_train])
    val = np.sort(perm[n_train:n_train + n_val])
    test = np.sort(perm[n_train + n_val:])
    return train, val, test


def split(dataset: Dataset, spec: SplitSpec | None = None) -> tuple[Dataset, Dataset, Dataset]:
    spec = spec or SplitSpec()
    n = len(dataset)
    if n < 3 and all(f > 0 for f in (spec.train_fraction, spec.validate_fraction, spec.test_fraction)):
        raise DatasetError("a three-way split needs at least 3 rows")
    return tuple(dataset.take(idx) for idx in split_indices(n, spec))


def kfold_indices(n: int, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    if not 2 <= k <= n:
        raise ValueError(f"k must satisfy 2 <= k <= {n}, got {k}")
    perm = np.random.default_rng(seed).permutation(n)
    folds = [np.sort(f) for f in np.array_split(perm, k)]
    out = []
    for i, test in enumerate(folds):
        train = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
        out.append((train, test))
    return out


def kfold(dataset: Dataset, k: int, seed: int = 42) -> list[tuple[Dataset, Dataset]]:
    return [
        (dataset.take(tr), dataset.take(te))
        for tr, te in kfold_indices(len(dataset), k, seed)
    ]
