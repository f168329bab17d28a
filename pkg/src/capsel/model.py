"""Data model: feature matrices, labels, targets, trained ensembles and prediction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class DataError(ValueError):
    """Input data violates a documented contract (range, shape, labels)."""


class ConfigError(ValueError):
    """Invalid configuration values."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def check_unit_interval(values: np.ndarray, what: str = "feature") -> None:
    """Raise :class:`DataError` naming the first column with a value outside [0, 1]."""
    values = np.asarray(values, dtype=np.float64)
    finite = np.isfinite(values)
    bad = ~finite | (values < 0.0) | (values > 1.0)
    if bad.any():
        pos = np.argwhere(bad)[0]
        col = int(pos[-1])
        if values.ndim == 2:
            row = int(pos[0])
            raise DataError(
                f"{what} column {col} has value {values[row, col]!r} at row {row}; "
                "expected a finite value in [0, 1]"
            )
        raise DataError(
            f"{what} column {col} has value {values[col]!r}; expected a finite value in [0, 1]"
        )


@dataclass(frozen=True)
class FeatureMatrix:
    """N x n soft feature outputs in [0, 1], one row per sample."""

    values: np.ndarray
    feature_names: Optional[tuple] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DataError(f"feature matrix must be 2-D with at least one row and column, got shape {v.shape}")
        check_unit_interval(v)
        object.__setattr__(self, "values", _frozen(v))
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != v.shape[1]:
                raise DataError(f"{len(names)} feature names for {v.shape[1]} columns")
            object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def names(self) -> tuple:
        if self.feature_names is not None:
            return self.feature_names
        return tuple(f"f{j}" for j in range(self.n_features))

    def take_rows(self, rows) -> "FeatureMatrix":
        return FeatureMatrix(self.values[rows], self.feature_names)


@dataclass(frozen=True)
class LabelVector:
    """Integer class ids, one per sample."""

    labels: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.labels)
        if y.ndim != 1:
            raise DataError("labels must be one-dimensional")
        if y.size and not np.all(np.equal(np.mod(y, 1), 0)):
            raise DataError("labels must be integer class ids")
        object.__setattr__(self, "labels", _frozen(y.astype(np.int64)))

    def __len__(self) -> int:
        return len(self.labels)

    def classes(self) -> list:
        return sorted(int(c) for c in np.unique(self.labels))

    def binary(self, positive: int) -> np.ndarray:
        """0/1 indicator of ``positive``."""
        return (self.labels == positive).astype(np.int64)


@dataclass(frozen=True)
class TargetVector:
    """Regression targets: ``p1`` for positives and ``p0`` for negatives."""

    t: np.ndarray
    p0: float
    p1: float

    def __post_init__(self):
        if not (0.0 <= self.p0 <= self.p1 <= 1.0):
            raise ConfigError(f"need 0 <= p0 <= p1 <= 1, got p0={self.p0}, p1={self.p1}")
        object.__setattr__(self, "t", _frozen(np.asarray(self.t, dtype=np.float64)))


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the capped-simplex least-squares solver.

    ``k`` caps every weight at ``1/k``. The solver stops when the
    conditional-gradient gap, which bounds the distance to the optimal
    objective, falls below ``rel_tol`` times the objective, or after
    ``max_iters`` iterations. ``fixed_iters`` disables the early stop.
    ``face_steps`` adds a Newton-type move inside the current face after each
    conditional-gradient step.
    """

    k: int
    max_iters: int = 100
    rel_tol: float = 1e-9
    selection_eps: float = 1e-6
    fixed_iters: bool = False
    face_steps: bool = True
    max_cg: int = 50

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ConfigError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not self.rel_tol > 0:
            raise ConfigError(f"rel_tol must be positive, got {self.rel_tol!r}")
        if not self.selection_eps > 0:
            raise ConfigError(f"selection_eps must be positive, got {self.selection_eps!r}")
        if self.max_cg < 1:
            raise ConfigError("max_cg must be at least 1")

    def check_n(self, n: int) -> None:
        if self.k > n:
            raise ConfigError(f"k={self.k} exceeds the number of features n={n}")


def default_theta(p0: float, p1: float) -> float:
    return 0.5 * (p0 + p1)


def sparsify_weights(w: np.ndarray, k: int, eps: float) -> np.ndarray:
    """Zero weights at or below ``eps`` and hand their mass to the kept ones.

    The freed mass is spread in proportion to each kept weight's headroom
    below ``1/k``, so the sum stays 1 and no weight passes the cap.
    """
    w = np.asarray(w, dtype=np.float64).copy()
    cap = 1.0 / k
    np.clip(w, 0.0, cap, out=w)
    drop = w <= eps
    keep = ~drop
    freed = 1.0 - w[keep].sum()
    w[drop] = 0.0
    room = np.where(keep, cap - w, 0.0)
    total_room = room.sum()
    if total_room > 0.0 and freed != 0.0:
        w += room * (freed / total_room)
        np.clip(w, 0.0, cap, out=w)
    return w


@dataclass(frozen=True)
class SelectionModel:
    """A trained sparse averaging ensemble for one positive class.

    ``weights`` is dense (length n) but normally supported on about ``k``
    features. ``flip_mask[j]`` means feature ``j`` is read as ``1 - f``.
    """

    weights: np.ndarray
    flip_mask: np.ndarray
    k: int
    p0: float = 0.0
    p1: float = 0.5
    theta: Optional[float] = None
    selection_eps: float = 1e-6
    feature_names: Optional[tuple] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        m = np.asarray(self.flip_mask, dtype=bool)
        if w.ndim != 1 or m.shape != w.shape:
            raise DataError("weights and flip_mask must be 1-D of equal length")
        if self.k < 1 or self.k > len(w):
            raise ConfigError(f"k={self.k} out of range for n={len(w)}")
        if np.any(w < 0) or np.any(w > 1.0 / self.k + 1e-12):
            raise DataError("weights must lie in [0, 1/k]")
        if abs(w.sum() - 1.0) > 1e-9:
            raise DataError(f"weights must sum to 1, got {w.sum()!r}")
        theta = default_theta(self.p0, self.p1) if self.theta is None else float(self.theta)
        if not (self.p0 < theta < self.p1):
            raise ConfigError(f"theta={theta} must lie strictly between p0={self.p0} and p1={self.p1}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "flip_mask", _frozen(m))
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_features(self) -> int:
        return len(self.weights)

    @property
    def selected(self) -> list:
        """(index, weight) pairs with weight above ``selection_eps``, by index."""
        idx = np.flatnonzero(self.weights > self.selection_eps)
        return [(int(j), float(self.weights[j])) for j in idx]

    def scores(self, X) -> np.ndarray:
        """Ensemble scores for the rows of ``X``."""
        X = _as_rows(X, self.n_features)
        Xf = np.where(self.flip_mask, 1.0 - X, X)
        s = Xf @ self.weights
        return np.clip(s, 0.0, 1.0)

    def predict(self, X) -> np.ndarray:
        return (self.scores(X) > self.theta).astype(np.int64)


def _as_rows(X, n: int) -> np.ndarray:
    if isinstance(X, FeatureMatrix):
        X = X.values
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n:
        raise DataError(f"expected {n} feature values per sample, got shape {X.shape}")
    check_unit_interval(X)
    return X


def predict_score(model: SelectionModel, sample) -> float:
    """Weighted average of the (flipped) feature values of one sample."""
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim != 1:
        raise DataError("predict_score takes a single sample")
    return float(model.scores(sample)[0])


def predict_binary(model: SelectionModel, sample) -> int:
    """1 when the score exceeds ``theta``; a score equal to ``theta`` is class 0."""
    return int(predict_score(model, sample) > model.theta)


@dataclass(frozen=True)
class MulticlassModel:
    """One-vs-all collection: one :class:`SelectionModel` per class id."""

    classes: tuple
    models: tuple = field(default=())

    def __post_init__(self):
        classes = tuple(int(c) for c in self.classes)
        models = tuple(self.models)
        if not classes:
            raise ConfigError("a multiclass model needs at least one class")
        if len(classes) != len(models):
            raise ConfigError("one model per class is required")
        ref = models[0]
        for m in models[1:]:
            if (m.k, m.p0, m.p1) != (ref.k, ref.p0, ref.p1):
                raise ConfigError("all per-class models must share k, p0 and p1")
            if m.n_features != ref.n_features:
                raise DataError("all per-class models must have the same number of features")
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "models", models)

    @property
    def n_features(self) -> int:
        return self.models[0].n_features

    def score_matrix(self, X) -> np.ndarray:
        """(N, n_classes) scores."""
        return np.column_stack([m.scores(X) for m in self.models])

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. the earliest declared class
        best = np.argmax(self.score_matrix(X), axis=1)
        return np.asarray(self.classes, dtype=np.int64)[best]


def predict_multiclass(mc: MulticlassModel, sample) -> int:
    """Class with the highest score; ties go to the earliest class in ``mc.classes``."""
    return int(mc.predict(np.asarray(sample, dtype=np.float64))[0])


def accuracy(pred: Sequence, truth: Sequence) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if len(truth) == 0:
        raise DataError("accuracy of an empty set is undefined")
    return float(np.mean(pred == truth))
