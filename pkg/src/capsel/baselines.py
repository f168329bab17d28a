"""Comparison methods: plain averaging, forward-backward greedy selection, boosted stumps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from .model import ConfigError, DataError, FeatureMatrix, SelectionModel, check_unit_interval

GAIN_TOL = 1e-12
EPS_CLAMP = 1e-10


def _values(F) -> np.ndarray:
    if isinstance(F, FeatureMatrix):
        return F.values
    return np.asarray(F, dtype=np.float64)


def _exact_uniform(n: int) -> np.ndarray:
    """``1/n`` everywhere, with ulp nudges so that ``w.sum()`` is exactly 1."""
    w = np.full(n, 1.0 / n)
    j = 0
    # each nudge moves one weight by a single ulp towards closing the gap
    while w.sum() != 1.0 and j < 4 * n:
        w[j % n] = np.nextafter(w[j % n], np.inf if w.sum() < 1.0 else -np.inf)
        j += 1
    return w


def train_average(F_flipped, flip_mask=None, p0: float = 0.0, p1: float = 0.5,
                  theta=None) -> SelectionModel:
    """Uniform weights over every feature."""
    X = _values(F_flipped)
    n = X.shape[1]
    mask = np.zeros(n, dtype=bool) if flip_mask is None else np.asarray(flip_mask, dtype=bool)
    w = _exact_uniform(n)
    names = F_flipped.feature_names if isinstance(F_flipped, FeatureMatrix) else None
    return SelectionModel(weights=w, flip_mask=mask, k=n, p0=p0, p1=p1, theta=theta,
                          feature_names=names)


# -- forward-backward greedy least squares ---------------------------------

@dataclass(frozen=True)
class FobaModel:
    """Least-squares fit with intercept on a greedily chosen feature subset."""

    selected: tuple
    intercept: float
    coef: np.ndarray
    n_features: int
    threshold: float
    flip_mask: Optional[np.ndarray] = None
    history: tuple = ()

    def scores(self, X) -> np.ndarray:
        X = _rows(X, self.n_features)
        if self.flip_mask is not None:
            X = np.where(self.flip_mask, 1.0 - X, X)
        if not self.selected:
            return np.full(X.shape[0], self.intercept)
        return self.intercept + X[:, list(self.selected)] @ self.coef

    def predict(self, X) -> np.ndarray:
        return (self.scores(X) > self.threshold).astype(np.int64)


def _rows(X, n):
    X = _values(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != n:
        raise DataError(f"expected {n} feature values per sample, got {X.shape[1]}")
    check_unit_interval(X)
    return X


def _fit(X, t, subset):
    """Exact least squares with intercept on ``subset``; returns (intercept, coef, sse)."""
    design = np.column_stack([np.ones(len(t)), X[:, list(subset)]])
    sol, *_ = np.linalg.lstsq(design, t, rcond=None)
    resid = t - design @ sol
    return float(sol[0]), sol[1:], float(resid @ resid)


def train_foba(F_flipped, t, max_features: int, backward_ratio: float = 0.5,
               flip_mask=None, threshold: Optional[float] = None) -> FobaModel:
    """Adaptive forward-backward greedy selection for least squares.

    Each forward step adds the feature whose inclusion lowers the refit
    squared error the most and records that gain. After it, features are
    removed one at a time while the cheapest removal costs less than
    ``backward_ratio`` times the gain recorded when the selection had its
    current size.
    """
    X = _values(F_flipped)
    tv = np.asarray(getattr(t, "t", t), dtype=np.float64)
    n = X.shape[1]
    if not 1 <= max_features <= n:
        raise ConfigError(f"max_features must be in [1, {n}], got {max_features}")
    if not 0.0 < backward_ratio < 1.0:
        raise ConfigError("backward_ratio must lie in (0, 1)")
    if threshold is None:
        p0 = getattr(t, "p0", None)
        p1 = getattr(t, "p1", None)
        threshold = 0.5 * (p0 + p1) if p0 is not None else 0.5 * (tv.min() + tv.max())

    selected: list = []
    gains: list = []
    history = []
    _, _, err = _fit(X, tv, selected)
    while len(selected) < max_features:
        best_j, best_err = None, err
        for j in range(n):
            if j in selected:
                continue
            _, _, e = _fit(X, tv, selected + [j])
            if e < best_err:
                best_j, best_err = j, e
        gain = err - best_err
        if best_j is None or gain <= GAIN_TOL:
            break
        selected.append(best_j)
        gains.append(gain)
        err = best_err
        history.append(("add", best_j, err))
        while len(selected) > 1:
            costs = []
            for j in selected:
                _, _, e = _fit(X, tv, [s for s in selected if s != j])
                costs.append(e - err)
            drop = int(np.argmin(costs))
            if costs[drop] >= backward_ratio * gains[-1]:
                break
            removed = selected.pop(drop)
            gains.pop()
            err = err + costs[drop]
            history.append(("remove", removed, err))
    b0, coef, _ = _fit(X, tv, selected)
    mask = None if flip_mask is None else np.asarray(flip_mask, dtype=bool)
    return FobaModel(tuple(selected), b0, coef, n, float(threshold), mask, tuple(history))


def predict_foba(model: FobaModel, sample) -> int:
    return int(model.predict(sample)[0])


# -- AdaBoost over single-feature stumps ------------------------------------

@dataclass(frozen=True)
class StumpClassifier:
    """Predicts ``polarity`` when ``x[feature_index] > threshold``, else ``-polarity``."""

    feature_index: int
    threshold: float
    polarity: int
    alpha: float

    def vote(self, X) -> np.ndarray:
        above = X[:, self.feature_index] > self.threshold
        return np.where(above, self.polarity, -self.polarity)


@dataclass(frozen=True)
class AdaBoostModel:
    stumps: tuple
    n_features: int
    flip_mask: Optional[np.ndarray] = None

    def margin(self, X) -> np.ndarray:
        X = _rows(X, self.n_features)
        if self.flip_mask is not None:
            X = np.where(self.flip_mask, 1.0 - X, X)
        out = np.zeros(X.shape[0])
        for s in self.stumps:
            out += s.alpha * s.vote(X)
        return out

    scores = margin

    def predict(self, X) -> np.ndarray:
        # a zero margin (including the empty ensemble) is class 0
        return (self.margin(X) > 0.0).astype(np.int64)


def train_adaboost(F_flipped, y, rounds: int = 100, flip_mask=None, kernels=None) -> AdaBoostModel:
    """Discrete AdaBoost with exhaustive stump search each round.

    Stops early when the best stump is no better than chance, and after a
    round whose stump makes no weighted error.
    """
    X = np.asarray(_values(F_flipped), dtype=np.float64)
    yv = np.asarray(getattr(y, "labels", y))
    if not np.all(np.isin(yv, (0, 1))):
        raise DataError("binary labels must be 0 or 1")
    if yv.min() == yv.max():
        raise DataError("both classes must be present")
    if rounds < 1:
        raise ConfigError("rounds must be at least 1")
    kern = kernels or _backend.kernels
    N, n = X.shape
    ys = np.where(yv == 1, 1.0, -1.0)
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.intp))
    d = np.full(N, 1.0 / N)
    stumps = []
    for _ in range(rounds):
        wneg = float(np.sum(d[ys < 0]))
        total = float(np.sum(d))
        j, thr, pol, err = kern.best_stump(X, order, ys, d, wneg, total)
        eps = err / total
        if eps >= 0.5 - 1e-12:
            break
        eps = min(max(eps, EPS_CLAMP), 1.0 - EPS_CLAMP)
        alpha = 0.5 * np.log((1.0 - eps) / eps)
        stump = StumpClassifier(int(j), float(thr), int(pol), float(alpha))
        stumps.append(stump)
        d = d * np.exp(-alpha * ys * stump.vote(X))
        d = d / d.sum()
        if err <= 0.0:
            break
    mask = None if flip_mask is None else np.asarray(flip_mask, dtype=bool)
    return AdaBoostModel(tuple(stumps), n, mask)


def predict_adaboost(model: AdaBoostModel, sample) -> int:
    return int(model.predict(sample)[0])


# -- one-vs-rest wrapper -----------------------------------------------------

@dataclass(frozen=True)
class OneVsRestModel:
    """One binary FoBa or AdaBoost model per class; predicts the top-scoring class."""

    classes: tuple
    models: tuple

    def __post_init__(self):
        if len(self.classes) != len(self.models) or not self.classes:
            raise ConfigError("one model per class is required")
        object.__setattr__(self, "classes", tuple(int(c) for c in self.classes))
        object.__setattr__(self, "models", tuple(self.models))

    @property
    def n_features(self) -> int:
        return self.models[0].n_features

    def score_matrix(self, X) -> np.ndarray:
        return np.column_stack([m.scores(X) for m in self.models])

    def predict(self, X) -> np.ndarray:
        best = np.argmax(self.score_matrix(X), axis=1)
        return np.asarray(self.classes, dtype=np.int64)[best]
