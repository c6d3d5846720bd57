import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcarsvm import LEGITIMATE, PHISHING
from mcarsvm.dataset import (
    Dataset,
    DatasetError,
    FeatureSchema,
    FeatureVector,
    SplitSpec,
    kfold,
    kfold_indices,
    load_arff,
    load_csv,
    load_dataset,
    load_features,
    split,
    split_indices,
    write_csv,
    write_features_csv,
)

from conftest import write_labelled_csv


def _write(path, text):
    path.write_text(text)
    return path


def test_load_small_csv(tmp_path):
    p = _write(tmp_path / "d.csv", "a,b,Result\n1,-1,-1\n0,1,1\n")
    ds = load_csv(p)
    assert ds.feature_names == ("a", "b")
    assert ds.X.tolist() == [[1, -1], [0, 1]]
    assert ds.y.tolist() == [PHISHING, LEGITIMATE]
    assert ds.schema.domains == ((0, 1), (-1, 1))
    assert ds.tids.tolist() == [0, 1]


def test_label_column_need_not_be_last(tmp_path):
    p = _write(tmp_path / "d.csv", "Result,a\n1,0\n-1,1\n")
    ds = load_csv(p)
    assert ds.feature_names == ("a",)
    assert ds.y.tolist() == [1, -1]


def test_custom_label_column_and_encoding(tmp_path):
    p = _write(tmp_path / "d.csv", "a,cls\n1,phish\n0,ok\n")
    ds = load_csv(p, label_column="cls", label_encoding={"phish": PHISHING, "ok": LEGITIMATE})
    assert ds.y.tolist() == [PHISHING, LEGITIMATE]


def test_drop_columns(tmp_path):
    p = _write(tmp_path / "d.csv", "id,a,Result\n1,1,1\n1,0,-1\n")
    assert load_csv(p, drop_columns=("id",)).feature_names == ("a",)


def test_bad_value_names_row_and_column(tmp_path):
    p = _write(tmp_path / "d.csv", "a,b,Result\n1,1,1\n0,2,1\n")
    with pytest.raises(DatasetError, match=r"row 3, column 'b'.*'2'"):
        load_csv(p)


def test_non_integer_value(tmp_path):
    p = _write(tmp_path / "d.csv", "a,Result\nx,1\n")
    with pytest.raises(DatasetError, match="row 2"):
        load_csv(p)


def test_unknown_label(tmp_path):
    p = _write(tmp_path / "d.csv", "a,Result\n1,0\n")
    with pytest.raises(DatasetError, match="row 2.*unknown label"):
        load_csv(p)


def test_ragged_row(tmp_path):
    p = _write(tmp_path / "d.csv", "a,b,Result\n1,1\n")
    with pytest.raises(DatasetError, match="row 2 has 2 cells"):
        load_csv(p)


def test_missing_label_column(tmp_path):
    p = _write(tmp_path / "d.csv", "a,b\n1,1\n")
    with pytest.raises(DatasetError, match="label column 'Result'"):
        load_csv(p)


def test_missing_file_and_header(tmp_path):
    with pytest.raises(DatasetError, match="not found"):
        load_csv(tmp_path / "nope.csv")
    with pytest.raises(DatasetError, match="header"):
        load_csv(_write(tmp_path / "e.csv", ""))


def test_duplicate_feature_names(tmp_path):
    p = _write(tmp_path / "d.csv", "a,a,Result\n1,1,1\n")
    with pytest.raises(DatasetError, match="duplicate"):
        load_csv(p)


def test_blank_lines_skipped(tmp_path):
    p = _write(tmp_path / "d.csv", "a,Result\n1,1\n\n0,-1\n")
    assert len(load_csv(p)) == 2


def test_header_only_file_gives_empty_dataset(tmp_path):
    ds = load_csv(_write(tmp_path / "d.csv", "a,b,Result\n"))
    assert len(ds) == 0 and ds.X.shape == (0, 2)
    assert ds.schema.domains == ((-1, 0, 1), (-1, 0, 1))


def test_round_trip(tmp_path, rng):
    X = rng.choice([-1, 0, 1], size=(30, 4))
    y = rng.choice([-1, 1], size=30)
    ds = load_csv(write_labelled_csv(tmp_path / "a.csv", list("wxyz"), X, y))
    write_csv(ds, tmp_path / "b.csv")
    again = load_csv(tmp_path / "b.csv")
    assert again == ds
    assert again.fingerprint() == ds.fingerprint()


def test_load_features_with_and_without_label(tmp_path):
    names, X = load_features(_write(tmp_path / "u.csv", "a,b\n1,0\n-1,1\n"))
    assert names == ("a", "b") and X.tolist() == [[1, 0], [-1, 1]]
    names, X = load_features(_write(tmp_path / "l.csv", "a,Result\n1,1\n"))
    assert names == ("a",) and X.tolist() == [[1]]
    write_features_csv(("p", "q"), [(1, -1)], tmp_path / "w.csv")
    assert (tmp_path / "w.csv").read_text() == "p,q\n1,-1\n"


def test_dataset_is_immutable(rng):
    schema = FeatureSchema(("a",), ((-1, 0, 1),))
    ds = Dataset(schema, np.array([[1], [0]]), np.array([1, -1]))
    with pytest.raises(ValueError):
        ds.X[0, 0] = -1
    assert list(ds) == [FeatureVector((1,), 1), FeatureVector((0,), -1)]


def test_schema_validation():
    with pytest.raises(DatasetError):
        FeatureSchema(("a", ""), ((1,), (1,)))
    with pytest.raises(DatasetError):
        FeatureSchema(("a",), ((2,),))
    with pytest.raises(DatasetError):
        FeatureSchema(("a",), ())


def test_mismatched_rows():
    schema = FeatureSchema(("a",), ((0, 1),))
    with pytest.raises(DatasetError):
        Dataset(schema, np.zeros((2, 1)), np.ones(3))


def test_take_renumbers():
    schema = FeatureSchema(("a",), ((-1, 0, 1),))
    ds = Dataset(schema, np.array([[1], [0], [-1]]), np.array([1, -1, 1]))
    sub = ds.take([2, 0])
    assert sub.X.ravel().tolist() == [-1, 1] and sub.tids.tolist() == [0, 1]


def test_split_spec_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        SplitSpec(0.5, 0.2, 0.2)
    with pytest.raises(ValueError):
        SplitSpec(1.2, -0.1, -0.1)


def test_default_split_sizes():
    tr, va, te = split_indices(100, SplitSpec())
    assert (len(tr), len(va), len(te)) == (70, 15, 15)
    tr, va, te = split_indices(11055, SplitSpec())
    assert (len(tr), len(va), len(te)) == (7739, 1658, 1658)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(3, 400), seed=st.integers(0, 2**31 - 1))
def test_split_partitions_rows(n, seed):
    parts = split_indices(n, SplitSpec(seed=seed))
    joined = np.concatenate(parts)
    assert sorted(joined.tolist()) == list(range(n))
    for p in parts:
        assert np.all(np.diff(p) > 0)


def test_split_depends_only_on_seed():
    a = split_indices(50, SplitSpec(seed=1))
    b = split_indices(50, SplitSpec(seed=1))
    c = split_indices(50, SplitSpec(seed=2))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))


def test_split_too_small():
    schema = FeatureSchema(("a",), ((0, 1),))
    ds = Dataset(schema, np.array([[1], [0]]), np.array([1, -1]))
    with pytest.raises(DatasetError):
        split(ds)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 200), data=st.data())
def test_kfold_partitions(n, data):
    k = data.draw(st.integers(2, n))
    folds = kfold_indices(n, k, seed=3)
    tests = np.concatenate([te for _, te in folds])
    assert sorted(tests.tolist()) == list(range(n))
    sizes = [len(te) for _, te in folds]
    assert max(sizes) - min(sizes) <= 1
    for tr, te in folds:
        assert not set(tr.tolist()) & set(te.tolist())
        assert len(tr) + len(te) == n


def test_kfold_bounds():
    with pytest.raises(ValueError):
        kfold_indices(5, 1, 0)
    with pytest.raises(ValueError):
        kfold_indices(5, 6, 0)


def test_kfold_datasets(rng):
    schema = FeatureSchema(("a",), ((-1, 0, 1),))
    ds = Dataset(schema, rng.choice([-1, 0, 1], size=(10, 1)), rng.choice([-1, 1], size=10))
    folds = kfold(ds, 5, seed=0)
    assert [len(te) for _, te in folds] == [2] * 5


ARFF = """@relation phishing
@attribute having_IP_Address {-1,1}
@attribute SFH {-1,0,1}
@attribute Result {-1,1}
@data
-1,0,-1
1,1,1
1,-1,-1
"""


def test_arff_matches_csv(tmp_path):
    (tmp_path / "d.arff").write_text(ARFF)
    (tmp_path / "d.csv").write_text("having_IP_Address,SFH,Result\n-1,0,-1\n1,1,1\n1,-1,-1\n")
    a = load_dataset(tmp_path / "d.arff")
    b = load_dataset(tmp_path / "d.csv")
    assert a.feature_names == b.feature_names == ("having_IP_Address", "SFH")
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    assert a.fingerprint() == b.fingerprint()


def test_arff_errors(tmp_path):
    bad = tmp_path / "bad.arff"
    bad.write_text(ARFF.replace("@attribute Result {-1,1}", "@attribute Label {-1,1}"))
    with pytest.raises(DatasetError, match="label column"):
        load_arff(bad)
    bad.write_text("@relation x\n@attribute a numeric\n@attribute Result {-1,1}\n@data\n2,1\n")
    with pytest.raises(DatasetError, match="not in"):
        load_arff(bad)
