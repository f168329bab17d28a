"""Monte Carlo studies of equal-weight averages of independent soft classifiers.

Feature outputs are Gaussians truncated to [0, 1] (drawn by rejection), with
one location/scale pair per class. The location parameters are the means of
the untruncated law; :func:`truncated_moments` gives the actual moments.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .model import ConfigError

# Rows drawn per batch are capped so a batch holds about this many values.
BATCH_VALUES = 2_000_000


@dataclass(frozen=True)
class SimulationSpec:
    n_features: int
    p0: float = 0.05
    p1: float = 0.5
    sigma0: float = 0.2
    sigma1: float = 0.2
    n_samples: int = 10_000
    theta: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.n_features < 1 or self.n_samples < 1:
            raise ConfigError("n_features and n_samples must be positive")
        if not (0.0 <= self.p0 < self.theta < self.p1 <= 1.0):
            raise ConfigError(
                f"need 0 <= p0 < theta < p1 <= 1, got p0={self.p0}, theta={self.theta}, p1={self.p1}"
            )
        if not (self.sigma0 > 0 and self.sigma1 > 0):
            raise ConfigError("standard deviations must be positive")


def sample_truncated_normal(rng: np.random.Generator, mean: float, sigma: float, size) -> np.ndarray:
    """Gaussian draws restricted to [0, 1] by rejection."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    total = int(np.prod(shape))
    out = np.empty(total)
    filled = 0
    while filled < total:
        need = total - filled
        draw = rng.normal(mean, sigma, size=max(2 * need, 64))
        keep = draw[(draw >= 0.0) & (draw <= 1.0)][:need]
        out[filled:filled + len(keep)] = keep
        filled += len(keep)
    return out.reshape(shape)


def truncated_moments(mean: float, sigma: float) -> tuple[float, float]:
    """Mean and standard deviation of N(mean, sigma^2) truncated to [0, 1]."""
    a, b = (0.0 - mean) / sigma, (1.0 - mean) / sigma
    law = stats.truncnorm(a, b, loc=mean, scale=sigma)
    return float(law.mean()), float(law.std())


def location_for_mean(target: float, sigma: float) -> float:
    """Location parameter whose [0, 1]-truncated Gaussian has mean ``target``."""
    if not 0.0 < target < 1.0:
        raise ConfigError("a truncated law on [0, 1] has its mean strictly inside (0, 1)")
    f = lambda loc: truncated_moments(loc, sigma)[0] - target
    return float(optimize.brentq(f, -10.0 - 50 * sigma, 11.0 + 50 * sigma, xtol=1e-14))


def _class_averages(seq: np.random.SeedSequence, n_rows: int, n_features: int,
                    mean: float, sigma: float, weights=None) -> np.ndarray:
    """Weighted feature averages for ``n_rows`` simulated samples of one class."""
    per_batch = max(1, BATCH_VALUES // n_features)
    n_batches = -(-n_rows // per_batch)
    out = np.empty(n_rows)
    for i, child in enumerate(seq.spawn(n_batches)):
        lo = i * per_batch
        hi = min(n_rows, lo + per_batch)
        rng = np.random.default_rng(child)
        F = sample_truncated_normal(rng, mean, sigma, (hi - lo, n_features))
        out[lo:hi] = F.mean(axis=1) if weights is None else F @ weights / weights.sum()
    return out


def simulate_scores(spec: SimulationSpec, weights=None) -> tuple[np.ndarray, np.ndarray]:
    """Simulated ensemble scores ``(negatives, positives)``."""
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (spec.n_features,):
            raise ConfigError("one weight per simulated feature is required")
    neg_seq, pos_seq = np.random.SeedSequence(spec.seed).spawn(2)
    neg = _class_averages(neg_seq, spec.n_samples, spec.n_features, spec.p0, spec.sigma0, weights)
    pos = _class_averages(pos_seq, spec.n_samples, spec.n_features, spec.p1, spec.sigma1, weights)
    return neg, pos


def simulate_error_rate(spec: SimulationSpec) -> float:
    """Misclassification rate of the uniform average thresholded at ``theta``."""
    neg, pos = simulate_scores(spec)
    mistakes = np.count_nonzero(neg > spec.theta) + np.count_nonzero(pos <= spec.theta)
    return mistakes / (2 * spec.n_samples)


def error_curve(spec: SimulationSpec, n_features_list) -> list[tuple[int, float, float]]:
    """``(n_features, error_rate, stderr)`` rows; every size reuses ``spec.seed``."""
    rows = []
    for n in n_features_list:
        s = SimulationSpec(int(n), spec.p0, spec.p1, spec.sigma0, spec.sigma1,
                           spec.n_samples, spec.theta, spec.seed)
        e = simulate_error_rate(s)
        rows.append((int(n), e, float(np.sqrt(e * (1.0 - e) / (2 * spec.n_samples)))))
    return rows


def variance_of_weighted_average(weights, sigma: float) -> float:
    """Variance of ``sum(w f) / sum(w)`` for independent features of equal variance.

    Equals ``sum(w^2) / sum(w)^2 * sigma^2``.
    """
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ConfigError("weights must be non-negative")
    s = w.sum()
    if s <= 0:
        raise ConfigError("at least one weight must be positive")
    return float((w @ w) / (s * s) * sigma * sigma)


def make_feature_pool(n_rows: int, n_informative: int, n_noise: int, gap: float = 0.3,
                      neg_mean: float = 0.1, noise_mean: float = 0.1, sigma: float = 0.3,
                      seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic pool of soft classifier outputs with balanced 0/1 labels.

    Informative features have mean ``neg_mean`` on negatives and
    ``neg_mean + gap`` on positives; noise features have mean
    ``noise_mean`` on both. All are truncated Gaussians with scale
    ``sigma``, located so the stated means are the actual ones. Informative
    columns come first.
    """
    loc_neg = location_for_mean(neg_mean, sigma)
    loc_pos = location_for_mean(neg_mean + gap, sigma)
    loc_noise = location_for_mean(noise_mean, sigma)
    rng = np.random.default_rng(seed)
    y = np.zeros(n_rows, dtype=np.int64)
    y[: n_rows // 2] = 1
    rng.shuffle(y)
    n = n_informative + n_noise
    F = np.empty((n_rows, n))
    pos = y == 1
    F[:, :n_informative] = sample_truncated_normal(rng, loc_neg, sigma, (n_rows, n_informative))
    if n_informative:
        F[pos, :n_informative] = sample_truncated_normal(
            rng, loc_pos, sigma, (int(pos.sum()), n_informative)
        )
    F[:, n_informative:] = sample_truncated_normal(rng, loc_noise, sigma, (n_rows, n_noise))
    return F, y
