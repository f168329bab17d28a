import numpy as np
import pytest

from capsel.baselines import (
    AdaBoostModel,
    StumpClassifier,
    predict_adaboost,
    predict_foba,
    train_adaboost,
    train_average,
    train_foba,
)
from capsel.model import ConfigError, DataError, accuracy, predict_score
from capsel.preprocess import encode_targets


# -- averaging ------------------------------------------------------------------

def test_average_weights():
    m = train_average(np.random.rand(5, 4))
    assert m.weights.tolist() == [0.25] * 4
    for n in range(1, 200):
        w = train_average(np.full((1, n), 0.5)).weights
        assert w.sum() == 1.0
        assert w.max() <= 1.0 / n + 1e-12


def test_average_score_is_row_mean():
    X = np.random.default_rng(0).random((3, 7))
    m = train_average(X)
    for row in X:
        assert predict_score(m, row) == pytest.approx(row.mean(), abs=1e-15)


# -- FoBa -----------------------------------------------------------------------

def _sse(X, t, subset):
    D = np.column_stack([np.ones(len(t))] + [X[:, j] for j in subset])
    beta = np.linalg.solve(D.T @ D, D.T @ t)
    r = t - D @ beta
    return r @ r


def test_foba_perfect_feature_first():
    rng = np.random.default_rng(1)
    y = rng.integers(0, 2, 60)
    t = encode_targets(y)
    X = rng.random((60, 6))
    X[:, 4] = t.t
    m = train_foba(X, t, 3)
    assert m.selected[0] == 4
    assert np.allclose(m.scores(X), t.t, atol=1e-9)
    assert accuracy(m.predict(X), y) == 1.0


def test_foba_duplicate_column_never_selected():
    rng = np.random.default_rng(2)
    y = rng.integers(0, 2, 50)
    X = rng.random((50, 5))
    X[:, 1] = np.clip(0.3 * y + 0.5 * rng.random(50), 0, 1)
    X[:, 3] = X[:, 1]
    m = train_foba(X, encode_targets(y), 5)
    assert not ({1, 3} <= set(m.selected))
    assert len(set(m.selected)) == len(m.selected)


def test_foba_forward_path_matches_brute_force():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        X = rng.random((40, 8))
        t = rng.random(40)
        # a ratio this small disables removals, leaving the pure forward path
        m = train_foba(X, t, 3, backward_ratio=1e-9, threshold=0.5)
        path = []
        for _ in range(3):
            rest = [j for j in range(8) if j not in path]
            path.append(min(rest, key=lambda j: _sse(X, t, path + [j])))
        assert list(m.selected) == path


def test_foba_forward_steps_never_raise_error():
    rng = np.random.default_rng(7)
    X = rng.random((30, 12))
    t = X[:, :4] @ rng.random(4) + 0.3 * rng.random(30)
    m = train_foba(X, t / t.max(), 8, backward_ratio=0.9, threshold=0.5)
    prev = None
    for op, _, e in m.history:
        if op == "add" and prev is not None:
            assert e <= prev + 1e-12
        prev = e


def test_foba_backward_step_within_ratio():
    removals = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = rng.random((25, 10))
        t = rng.random(25)
        ratio = 0.8
        m = train_foba(X, t, 9, backward_ratio=ratio, threshold=0.5)
        gains = []
        err = _sse(X, t, [])
        for op, j, e in m.history:
            if op == "add":
                gains.append(err - e)
            else:
                removals += 1
                assert e - err < ratio * gains.pop() + 1e-12
            err = e
    assert removals > 0


def test_foba_intercept_only_when_no_gain():
    X = np.full((10, 3), 0.5)
    m = train_foba(X, np.linspace(0, 0.5, 10), 2, threshold=0.25)
    assert m.selected == ()
    assert m.intercept == pytest.approx(0.25)
    assert predict_foba(m, X[0]) == 0


def test_foba_argument_checks():
    X = np.random.rand(5, 3)
    with pytest.raises(ConfigError):
        train_foba(X, np.zeros(5), 4)
    with pytest.raises(ConfigError):
        train_foba(X, np.zeros(5), 2, backward_ratio=1.0)
    m = train_foba(X, np.random.rand(5), 1, threshold=0.2)
    with pytest.raises(DataError):
        m.predict(np.random.rand(2, 4))


# -- AdaBoost -------------------------------------------------------------------

def _stump_enumeration(X, y):
    """Best single-stump training accuracy over every threshold and polarity."""
    best = 0.0
    for j in range(X.shape[1]):
        v = np.unique(X[:, j])
        for thr in np.concatenate([[-np.inf], (v[:-1] + v[1:]) / 2, [np.inf]]):
            for pol in (1, -1):
                pred = np.where(X[:, j] > thr, pol, -pol) > 0
                best = max(best, np.mean(pred == (y == 1)))
    return best


def test_adaboost_separable_single_feature_one_round():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, 80)
    y[:2] = [0, 1]
    X = np.column_stack([rng.random(80), np.where(y == 1, 0.6, 0.3) + 0.05 * rng.random(80)])
    m = train_adaboost(X, y, rounds=10)
    assert len(m.stumps) == 1
    assert m.stumps[0].feature_index == 1
    assert accuracy(m.predict(X), y) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_adaboost_xor(seed):
    # a sum of one-feature stumps cannot represent XOR itself; on a small
    # sample with distinct values it can still fit every training point
    rng = np.random.default_rng(seed)
    q = np.repeat(np.arange(4), 5)
    centers = np.array([[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]])
    X = centers[q] + rng.uniform(-0.2, 0.2, (20, 2))
    y = np.array([0, 1, 1, 0])[q]
    assert _stump_enumeration(X, y) <= 0.75
    m = train_adaboost(X, y, rounds=50)
    assert accuracy(m.predict(X), y) > 0.9


def test_adaboost_weighted_error_below_half_each_round():
    rng = np.random.default_rng(5)
    X = rng.random((60, 4))
    y = (X[:, 0] + 0.3 * rng.random(60) > 0.6).astype(int)
    m = train_adaboost(X, y, rounds=25)
    ys = np.where(y == 1, 1.0, -1.0)
    d = np.full(60, 1 / 60)
    for s in m.stumps:
        assert d[s.vote(X) != ys].sum() < 0.5
        d = d * np.exp(-s.alpha * ys * s.vote(X))
        d /= d.sum()


def test_adaboost_random_labels_near_chance():
    accs = []
    for seed in range(30):
        rng = np.random.default_rng(seed)
        X = rng.random((200, 5))
        y = rng.integers(0, 2, 200)
        m = train_adaboost(X[:100], y[:100], rounds=20)
        accs.append(accuracy(m.predict(X[100:]), y[100:]))
    assert 0.4 <= np.mean(accs) <= 0.6


def test_adaboost_stops_when_nothing_helps():
    X = np.full((10, 3), 0.5)
    y = np.array([0, 1] * 5)
    m = train_adaboost(X, y, rounds=10)
    assert m.stumps == ()
    assert predict_adaboost(m, X[0]) == 0


def test_adaboost_one_class_rejected():
    with pytest.raises(DataError):
        train_adaboost(np.random.rand(4, 2), [1, 1, 1, 1])


def test_empty_and_single_stump_predictions():
    assert predict_adaboost(AdaBoostModel((), 2), [0.9, 0.9]) == 0
    m = AdaBoostModel((StumpClassifier(1, 0.5, 1, 0.7),), 2)
    assert predict_adaboost(m, [0.1, 0.6]) == 1
    assert predict_adaboost(m, [0.1, 0.5]) == 0


def test_vote_matches_scalar_loop():
    rng = np.random.default_rng(8)
    X = rng.random((40, 3))
    y = rng.integers(0, 2, 40)
    mask = np.array([True, False, True])
    m = train_adaboost(np.where(mask, 1 - X, X), y, rounds=15, flip_mask=mask)
    for row in X:
        f = [1 - row[j] if mask[j] else row[j] for j in range(3)]
        total = 0.0
        for s in m.stumps:
            total += s.alpha * (s.polarity if f[s.feature_index] > s.threshold else -s.polarity)
        assert predict_adaboost(m, row) == int(total > 0)


def test_stump_search_backends_agree(kernels):
    from capsel import _pykernels
    rng = np.random.default_rng(9)
    for _ in range(20):
        X = np.round(rng.random((50, 6)), 1)  # repeated values exercise tie handling
        ys = np.where(rng.random(50) < 0.5, 1.0, -1.0)
        d = rng.random(50)
        d /= d.sum()
        order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.intp))
        wneg = float(d[ys < 0].sum())
        a = kernels.best_stump(X, order, ys, d, wneg, 1.0)
        b = _pykernels.best_stump(X, order, ys, d, wneg, 1.0)
        assert a[:3] == b[:3]
        assert a[3] == pytest.approx(b[3], abs=1e-12)


def test_stump_search_is_exhaustive():
    rng = np.random.default_rng(10)
    X = np.round(rng.random((30, 3)), 1)
    y = rng.integers(0, 2, 30)
    m = train_adaboost(X, y, rounds=1)
    s = m.stumps[0]
    acc = np.mean((s.vote(X) > 0) == (y == 1))
    assert acc == pytest.approx(_stump_enumeration(X, y))
