"""Training dispatch and repeated train/test experiments behind the CLI.

Every randomized routine takes an explicit integer seed. Repeat ``r`` draws
its split from the ``r``-th child of ``SeedSequence(seed)``, so results do not
depend on how many repeats run or in which order.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .baselines import OneVsRestModel, train_adaboost, train_average, train_foba
from .model import (
    ConfigError,
    DataError,
    FeatureMatrix,
    LabelVector,
    MulticlassModel,
    SolverConfig,
    accuracy,
)
from .preprocess import apply_flip, compute_flip_mask, encode_targets
from .solver import train_binary

log = logging.getLogger(__name__)

METHODS = ("ours", "average", "foba", "adaboost")


@dataclass
class SelectedFeature:
    index: int
    name: str
    weight: float
    frequency: Optional[float] = None


@dataclass
class RunReport:
    """What a training run produced: selections, accuracy, timing, solver traces."""

    method: str
    classes: list
    selected: dict = field(default_factory=dict)
    train_accuracy: Optional[float] = None
    test_accuracy: Optional[float] = None
    train_seconds: float = 0.0
    iterations: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["selected"] = {str(c): rows for c, rows in d["selected"].items()}
        return d


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose one of {', '.join(METHODS)}")


def _as_inputs(F, labels):
    if not isinstance(F, FeatureMatrix):
        F = FeatureMatrix(F)
    if not isinstance(labels, LabelVector):
        labels = LabelVector(np.asarray(labels))
    if len(labels) != F.n_samples:
        raise DataError(f"{F.n_samples} rows but {len(labels)} labels")
    return F, labels


def _is_binary(classes) -> bool:
    return list(classes) == [0, 1]


def _train_binary_method(method, F: FeatureMatrix, y, config, p0, p1, theta):
    """One positive-vs-rest model; returns (model, solver result or None)."""
    if method == "ours":
        return train_binary(F, y, config, p0, p1, theta)
    mask = compute_flip_mask(F, y)
    Ff = apply_flip(F, mask)
    if method == "average":
        return train_average(Ff, mask, p0, p1, theta), None
    if method == "foba":
        t = encode_targets(y, p0, p1)
        thr = theta if theta is not None else 0.5 * (p0 + p1)
        return train_foba(Ff, t, min(config.k, F.n_features), flip_mask=mask, threshold=thr), None
    return train_adaboost(Ff, y, rounds=config.max_iters, flip_mask=mask), None


def train_method(method: str, F, labels, config: SolverConfig, p0: float = 0.0, p1: float = 0.5,
                 theta=None):
    """Train ``method`` on all rows; returns ``(model, RunReport)``.

    Labels ``{0, 1}`` give one binary model; any other label set trains one
    model per class against the rest. For FoBa ``config.k`` bounds the number
    of selected features; for AdaBoost ``config.max_iters`` is the number of
    boosting rounds.
    """
    _check_method(method)
    F, labels = _as_inputs(F, labels)
    classes = labels.classes()
    if len(classes) < 2:
        raise DataError("training needs at least two classes")
    if method in ("ours", "foba"):
        config.check_n(F.n_features)
    targets = [None] if _is_binary(classes) else classes
    names = F.names()
    start = time.perf_counter()
    fitted = []
    for c in targets:
        y = labels.labels if c is None else labels.binary(c)
        fitted.append(_train_binary_method(method, F, y, config, p0, p1, theta))
    elapsed = time.perf_counter() - start

    models = [m for m, _ in fitted]
    if targets == [None]:
        model = models[0]
    elif method in ("ours", "average"):
        model = MulticlassModel(tuple(classes), tuple(models))
    else:
        model = OneVsRestModel(tuple(classes), tuple(models))

    report = RunReport(method=method, classes=classes, train_seconds=elapsed)
    for c, (m, res) in zip(targets, fitted):
        key = 1 if c is None else c
        report.selected[key] = [asdict(s) for s in describe_selection(m, names)]
        if res is not None:
            report.iterations.append(res.iterations_used)
            report.traces.append([float(v) for v in res.objective_trace])
    report.train_accuracy = accuracy(model.predict(F.values), labels.labels)
    return model, report


def describe_selection(model, names) -> list:
    """Selected features of one binary model, by index."""
    if hasattr(model, "weights"):
        return [SelectedFeature(j, names[j], w) for j, w in model.selected]
    if hasattr(model, "coef"):
        pairs = sorted(zip(model.selected, model.coef))
        return [SelectedFeature(int(j), names[j], float(c)) for j, c in pairs]
    votes: dict = {}
    for s in model.stumps:
        votes[s.feature_index] = votes.get(s.feature_index, 0.0) + s.alpha
    return [SelectedFeature(j, names[j], votes[j]) for j in sorted(votes)]


# -- splits ------------------------------------------------------------------

def _class_counts(y, size: int) -> dict:
    """Per-class share of ``size`` rows, proportional to class frequency.

    Largest-remainder rounding; ties go to the lower class id.
    """
    classes, counts = np.unique(y, return_counts=True)
    exact = size * counts / counts.sum()
    take = np.floor(exact).astype(int)
    order = sorted(range(len(classes)), key=lambda i: (-(exact[i] - take[i]), classes[i]))
    for i in order[: size - take.sum()]:
        take[i] += 1
    return {int(c): int(t) for c, t in zip(classes, take)}


def stratified_subsample(y, size: int, rng: np.random.Generator, min_per_class: int = 1) -> np.ndarray:
    """Sorted row indices of a class-stratified subsample of ``size`` rows."""
    y = np.asarray(y)
    if not 0 < size <= len(y):
        raise ConfigError(f"subsample size {size} must be in [1, {len(y)}]")
    counts = _class_counts(y, size)
    short = {c: n for c, n in counts.items() if n < min_per_class}
    if short:
        raise DataError(
            f"a subsample of {size} rows gives fewer than {min_per_class} rows to class(es) "
            f"{sorted(short)}"
        )
    picks = []
    for c, n in counts.items():
        rows = np.flatnonzero(y == c)
        picks.append(rng.choice(rows, size=n, replace=False))
    return np.sort(np.concatenate(picks))


def _resolve_size(train_size, n_rows: int) -> int:
    if isinstance(train_size, float) and 0.0 < train_size < 1.0:
        return max(1, int(round(train_size * n_rows)))
    size = int(train_size)
    if not 0 < size < n_rows:
        raise ConfigError(f"train size {train_size} must leave at least one held-out row of {n_rows}")
    return size


def _repeat_rngs(seed: int, repeats: int) -> list:
    if repeats < 1:
        raise ConfigError("repeats must be at least 1")
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(repeats)]


def _split(labels: LabelVector, size: int, rng):
    train = stratified_subsample(labels.labels, size, rng, min_per_class=2)
    test = np.setdiff1d(np.arange(len(labels)), train)
    return train, test


# -- experiments -------------------------------------------------------------

def sweep_k(F, labels, k_list, repeats: int, seed: int, train_size=0.5, p0: float = 0.0,
            p1: float = 0.5, theta=None, max_iters: int = 100) -> list:
    """Held-out accuracy of the solver ensemble as a function of ``k``.

    Returns rows ``(k, mean_accuracy, std_accuracy, mean_iterations)``. The
    same ``repeats`` stratified splits are reused for every ``k``. Entries of
    ``k_list`` above the number of features are dropped with a warning.
    """
    F, labels = _as_inputs(F, labels)
    n = F.n_features
    ks = []
    for k in k_list:
        k = int(k)
        if k > n:
            log.warning("dropping k=%d: only %d features", k, n)
        elif k < 1:
            raise ConfigError(f"k must be positive, got {k}")
        else:
            ks.append(k)
    size = _resolve_size(train_size, F.n_samples)
    splits = [_split(labels, size, rng) for rng in _repeat_rngs(seed, repeats)]
    rows = []
    for k in ks:
        config = SolverConfig(k, max_iters=max_iters)
        accs, iters = [], []
        for train, test in splits:
            model, report = train_method("ours", F.take_rows(train), labels.labels[train], config,
                                         p0, p1, theta)
            accs.append(accuracy(model.predict(F.values[test]), labels.labels[test]))
            iters.append(np.mean(report.iterations))
        rows.append((k, float(np.mean(accs)), float(np.std(accs)), float(np.mean(iters))))
    return rows


def selection_stability(F, labels, k: int, repeats: int, subsample_size: int, seed: int,
                        p0: float = 0.0, p1: float = 0.5, max_iters: int = 100) -> list:
    """How often each feature is selected across random subsamples.

    Returns rows ``(class, index, name, frequency)``: all ``n`` features for
    each positive class, most frequent first (lower index first on ties).
    """
    F, labels = _as_inputs(F, labels)
    config = SolverConfig(k, max_iters=max_iters)
    config.check_n(F.n_features)
    classes = labels.classes()
    targets = [1] if _is_binary(classes) else classes
    counts = {c: np.zeros(F.n_features) for c in targets}
    for rng in _repeat_rngs(seed, repeats):
        rows = stratified_subsample(labels.labels, int(subsample_size), rng, min_per_class=2)
        sub = labels.labels[rows]
        Fs = F.take_rows(rows)
        for c in targets:
            model, _ = train_binary(Fs, (sub == c).astype(np.int64), config, p0, p1)
            for j, _w in model.selected:
                counts[c][j] += 1
    names = F.names()
    out = []
    for c in targets:
        freq = counts[c] / repeats
        for j in sorted(range(F.n_features), key=lambda j: (-freq[j], j)):
            out.append((c, j, names[j], float(freq[j])))
    return out


def compare(F, labels, k: int, repeats: int, seed: int, train_size=0.5, p0: float = 0.0,
            p1: float = 0.5, theta=None, max_iters: int = 100, methods=METHODS) -> list:
    """Mean test/train accuracy and training time of each method on shared splits.

    Returns rows ``(method, mean_test_accuracy, std_test_accuracy,
    mean_train_accuracy, mean_train_seconds)``.
    """
    F, labels = _as_inputs(F, labels)
    for m in methods:
        _check_method(m)
    size = _resolve_size(train_size, F.n_samples)
    splits = [_split(labels, size, rng) for rng in _repeat_rngs(seed, repeats)]
    config = SolverConfig(k, max_iters=max_iters)
    rows = []
    for method in methods:
        test_acc, train_acc, secs = [], [], []
        for train, test in splits:
            model, report = train_method(method, F.take_rows(train), labels.labels[train], config,
                                         p0, p1, theta)
            test_acc.append(accuracy(model.predict(F.values[test]), labels.labels[test]))
            train_acc.append(report.train_accuracy)
            secs.append(report.train_seconds)
        rows.append((method, float(np.mean(test_acc)), float(np.std(test_acc)),
                     float(np.mean(train_acc)), float(np.mean(secs))))
    return rows
