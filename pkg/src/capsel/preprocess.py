"""Canonical training form: flip negatively correlated features, encode targets."""
import logging

import numpy as np

from .model import ConfigError, DataError, FeatureMatrix, TargetVector

log = logging.getLogger(__name__)


def _values(F) -> np.ndarray:
    if isinstance(F, FeatureMatrix):
        return F.values
    return np.asarray(F, dtype=np.float64)


def _binary_labels(y) -> np.ndarray:
    y = np.asarray(getattr(y, "labels", y))
    if not np.all(np.isin(y, (0, 1))):
        raise DataError("binary labels must be 0 or 1")
    if y.min() == y.max():
        raise DataError("both classes must be present to decide feature orientation")
    return y.astype(np.float64)


def compute_flip_mask(F, y) -> np.ndarray:
    """Flag features whose Pearson correlation with ``y`` is strictly negative.

    Constant columns have no defined correlation and stay unflipped.
    """
    X = _values(F)
    yb = _binary_labels(y)
    if X.shape[0] != len(yb):
        raise DataError(f"{X.shape[0]} rows but {len(yb)} labels")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ (yb - yb.mean())
    spread = np.sqrt((Xc * Xc).sum(axis=0))
    constant = spread == 0.0
    if constant.any():
        log.warning("%d constant feature column(s) left unflipped", int(constant.sum()))
    # correlation and covariance share their sign when the column varies
    return (cov < 0.0) & ~constant


def apply_flip(F, mask):
    """Map flagged columns ``x -> 1 - x``; returns the same type it was given."""
    X = _values(F)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (X.shape[-1],):
        raise DataError(f"flip mask of length {mask.size} for {X.shape[-1]} features")
    out = np.where(mask, 1.0 - X, X)
    if isinstance(F, FeatureMatrix):
        return FeatureMatrix(out, F.feature_names)
    return out


def encode_targets(y, p0: float = 0.0, p1: float = 0.5) -> TargetVector:
    """``p1`` where ``y == 1``, ``p0`` elsewhere."""
    if p0 > p1:
        raise ConfigError(f"p0={p0} exceeds p1={p1}")
    y = np.asarray(getattr(y, "labels", y))
    return TargetVector(np.where(y == 1, p1, p0).astype(np.float64), p0, p1)


def minmax_rescale(F, lo=None, hi=None):
    """Stretch each column to span [0, 1].

    Returns ``(rescaled, lo, hi)``; pass the training ``lo``/``hi`` back in
    to transform test rows consistently (results are clipped to [0, 1]).
    Constant columns map to 0.
    """
    X = _values(F)
    if lo is None:
        lo = X.min(axis=0)
        hi = X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    out = np.clip((X - lo) / span, 0.0, 1.0)
    out = np.where(hi > lo, out, 0.0)
    if isinstance(F, FeatureMatrix):
        out = FeatureMatrix(out, F.feature_names)
    return out, lo, hi
