import numpy as np
import pytest

from seedlabel.data import (
    FeatureMatrix,
    LabelTable,
    fmt_float,
    load_features,
    load_labels,
    load_predictions,
    save_features,
    save_labels,
    save_predictions,
)
from seedlabel.errors import (
    DuplicateId,
    EmptyFile,
    EmptyLabelSet,
    InputError,
    MalformedRow,
    SingleClass,
    UnknownId,
)


def test_load_features_basic(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("id,f0,f1\na,1.0,2.0\nb,3.5,-1.0\nc,0.0,0.25\n")
    fm = load_features(p)
    assert fm.n == 3 and fm.d == 2
    assert fm.ids == ("a", "b", "c")
    np.testing.assert_array_equal(fm.values[1], [3.5, -1.0])


def test_load_features_duplicate_id(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("id,f0\nimg7,1.0\nimg7,2.0\n")
    with pytest.raises(DuplicateId):
        load_features(p)


def test_load_features_nan_is_malformed(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("id,f0\na,NaN\n")
    with pytest.raises(MalformedRow):
        load_features(p)


@pytest.mark.parametrize(
    "body",
    ["id,f0\na,1.0,9.0\n", "id,f0\na,\n", "id,f0\na,xyz\n", "id,f0\na,inf\n"],
)
def test_load_features_malformed_rows(tmp_path, body):
    p = tmp_path / "f.csv"
    p.write_text(body)
    with pytest.raises(MalformedRow):
        load_features(p)


def test_load_features_empty_and_missing(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("")
    with pytest.raises(EmptyFile):
        load_features(p)
    p.write_text("id,f0\n")
    with pytest.raises(EmptyFile):
        load_features(p)
    with pytest.raises(InputError):
        load_features(tmp_path / "nope.csv")


def test_features_round_trip_is_lossless(tmp_path):
    rng = np.random.default_rng(11)
    fm = FeatureMatrix(
        ids=tuple(f"x{k}" for k in range(20)),
        values=rng.standard_normal((20, 7)) * 10.0 ** rng.integers(-8, 8, size=(20, 7)),
    )
    p = tmp_path / "f.csv"
    save_features(p, fm)
    back = load_features(p)
    assert back.ids == fm.ids
    np.testing.assert_array_equal(back.values, fm.values)


def test_feature_matrix_invariants():
    with pytest.raises(ValueError):
        FeatureMatrix(ids=("a",), values=np.array([[np.inf]]))
    with pytest.raises(DuplicateId):
        FeatureMatrix(ids=("a", "a"), values=np.zeros((2, 1)))
    fm = FeatureMatrix(ids=("a", "b"), values=np.zeros((2, 2)))
    with pytest.raises(UnknownId):
        fm.index_of("zzz")


def test_load_labels_sorted_indices(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("id,label\na,normal\nb,pneumonia\n")
    table = load_labels(p, {"a", "b"})
    assert table.K == 2
    assert table.label_names == ("normal", "pneumonia")
    assert table.class_of("a") == 1 and table.class_of("b") == 2


def test_load_labels_single_class_rejected(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("id,label\na,normal\nb,normal\n")
    with pytest.raises(SingleClass):
        load_labels(p, {"a", "b"})


def test_load_labels_unknown_id(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("id,label\na,x\nz,y\n")
    with pytest.raises(UnknownId):
        load_labels(p, {"a", "b"})


def test_load_labels_empty_and_blank(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("id,label\n")
    with pytest.raises(EmptyLabelSet):
        load_labels(p, {"a"})
    p.write_text("id,label\na,\n")
    with pytest.raises(MalformedRow):
        load_labels(p, {"a"})
    p.write_text("id,label\na,x\na,y\n")
    with pytest.raises(DuplicateId):
        load_labels(p, {"a"})


def test_label_table_reserves_abstain_index():
    with pytest.raises(ValueError):
        LabelTable(entries={"a": 0}, label_names=("x",))
    with pytest.raises(ValueError):
        LabelTable(entries={"a": 3}, label_names=("x", "y"))


def test_save_predictions_round_trip(tmp_path):
    p = tmp_path / "pred.csv"
    post = np.array([[0.25, 0.75], [1.0 / 3.0, 2.0 / 3.0]])
    save_predictions(p, ["a", "b"], ["pos", "pos"], post)
    lines = p.read_text().splitlines()
    assert lines[0] == "id,predicted_label,p_1,p_2"
    assert len(lines) == 3 and len(lines[1].split(",")) == 4
    ids, labels, back = load_predictions(p)
    assert ids == ["a", "b"] and labels == ["pos", "pos"]
    np.testing.assert_array_equal(back, post)


def test_save_predictions_empty_and_errors(tmp_path):
    p = tmp_path / "pred.csv"
    save_predictions(p, [], [], np.zeros((0, 2)))
    assert p.read_text() == "id,predicted_label,p_1,p_2\n"
    with pytest.raises(ValueError):
        save_predictions(p, ["a"], [], np.array([[1.0]]))
    with pytest.raises(ValueError):
        save_predictions(p, ["a"], ["x"], np.array([[0.7, 0.7]]))


def test_labels_round_trip(tmp_path):
    p = tmp_path / "l.csv"
    save_labels(p, [("a", "x"), ("b", "y")])
    table = load_labels(p, {"a", "b"})
    assert table.label_names == ("x", "y")


def test_fmt_float_lossless():
    rng = np.random.default_rng(5)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-300, 300, size=200):
        assert float(fmt_float(x)) == x
