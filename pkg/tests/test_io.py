import json

import numpy as np
import pytest

from capsel import io
from capsel.baselines import train_adaboost, train_foba
from capsel.experiments import train_method
from capsel.model import DataError, SolverConfig
from capsel.preprocess import encode_targets
from capsel.simulation import make_feature_pool


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_with_header(tmp_path):
    p = _write(tmp_path, "a,b,label\n0.1,0.2,0\n0.3,0.4,1\n0.5,0.6,1\n")
    F, y = io.load_dataset(p)
    assert F.values.shape == (3, 2)
    assert F.feature_names == ("a", "b")
    assert y.labels.tolist() == [0, 1, 1]


def test_load_without_header_and_label_by_name(tmp_path):
    F, y = io.load_dataset(_write(tmp_path, "1,0.5,0.25\n0,1,0\n"), label_col=0)
    assert F.feature_names is None
    assert y.labels.tolist() == [1, 0]
    assert F.values.tolist() == [[0.5, 0.25], [1.0, 0.0]]
    F, y = io.load_dataset(_write(tmp_path, "y,a\n1,0.5\n", "n.csv"), label_col="y")
    assert F.feature_names == ("a",)
    with pytest.raises(DataError, match="no column named"):
        io.load_dataset(_write(tmp_path, "y,a\n1,0.5\n", "n.csv"), label_col="z")


def test_unlabeled(tmp_path):
    F, y = io.load_dataset(_write(tmp_path, "0.1,0.2\n0.3,0.4\n"), label_col=None)
    assert y is None and F.n_features == 2


def test_out_of_range_names_row(tmp_path):
    rows = ["0.1,0.2,0"] * 4 + ["0.1,1.2,1"]
    with pytest.raises(DataError, match=r"row 5 .*column 2.*1\.2"):
        io.load_dataset(_write(tmp_path, "a,b,y\n" + "\n".join(rows) + "\n"))


def test_ragged_and_non_numeric(tmp_path):
    with pytest.raises(DataError, match="row 2.*expected 3 columns"):
        io.load_dataset(_write(tmp_path, "0.1,0.2,0\n0.1,1\n"))
    with pytest.raises(DataError, match="row 1.*non-numeric"):
        io.load_dataset(_write(tmp_path, "a,b,y\n0.1,x,0\n"))
    with pytest.raises(DataError, match="not an integer"):
        io.load_dataset(_write(tmp_path, "0.1,0.2,0.5\n"))
    with pytest.raises(DataError):
        io.load_dataset(_write(tmp_path, ""))
    with pytest.raises(DataError):
        io.load_dataset(_write(tmp_path, "a,b,y\n"))


def test_write_load_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.random((25, 4))
    y = rng.integers(0, 3, 25)
    p = tmp_path / "r.csv"
    io.write_dataset(p, X, y)
    F, lab = io.load_dataset(p)
    assert np.max(np.abs(F.values - X)) <= 1e-12
    assert np.array_equal(F.values, X)
    assert np.array_equal(lab.labels, y)


def _random_rows(n, count=1000, seed=99):
    return np.random.default_rng(seed).random((count, n))


@pytest.mark.parametrize("method", ["ours", "average", "foba", "adaboost"])
@pytest.mark.parametrize("n_classes", [2, 3])
def test_model_round_trip_preserves_predictions(tmp_path, method, n_classes):
    rng = np.random.default_rng(n_classes)
    F, y = make_feature_pool(120, 4, 6, seed=n_classes)
    if n_classes == 3:
        y = np.where(rng.random(120) < 0.3, 2, y)
    model, _ = train_method(method, F, y, SolverConfig(3, max_iters=20))
    path = tmp_path / "m.json"
    io.save_model(path, model, method)
    loaded, m2 = io.load_model(path)
    assert m2 == method
    X = _random_rows(10)
    assert np.array_equal(loaded.predict(X), model.predict(X))
    if hasattr(model, "scores"):
        assert np.array_equal(loaded.scores(X), model.scores(X))


def test_selection_file_layout(tmp_path):
    F, y = make_feature_pool(200, 5, 15, seed=3)
    model, _ = train_method("ours", F, y, SolverConfig(5))
    path = tmp_path / "m.json"
    io.save_model(path, model, "ours")
    d = json.loads(path.read_text())
    assert d["k"] == 5 and d["p0"] == 0.0 and d["p1"] == 0.5 and d["theta"] == 0.25
    assert set(d["flip_mask"]) <= {0, 1}
    idx = [j for j, _ in d["weights"]]
    assert idx == sorted(idx)
    assert [(j, w) for j, w in d["weights"]] == [(j, w) for j, w in model.selected]


def test_bad_model_files(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("not json")
    with pytest.raises(DataError):
        io.load_model(p)
    p.write_text(json.dumps({"format": 1, "method": "svm"}))
    with pytest.raises(DataError):
        io.load_model(p)


def test_baseline_dicts_round_trip():
    rng = np.random.default_rng(1)
    X = rng.random((40, 5))
    y = rng.integers(0, 2, 40)
    fo = train_foba(X, encode_targets(y), 3, flip_mask=rng.random(5) < 0.5)
    ad = train_adaboost(X, y, rounds=5)
    fo2, _ = io.model_from_dict(io.model_to_dict(fo, "foba"))
    ad2, _ = io.model_from_dict(io.model_to_dict(ad, "adaboost"))
    assert fo2.selected == fo.selected and np.array_equal(fo2.coef, fo.coef)
    assert np.array_equal(fo2.flip_mask, fo.flip_mask)
    assert ad2.stumps == ad.stumps
