"""Least squares over the capped simplex ``{w : sum(w) = 1, 0 <= w <= 1/k}``.

The objective ``J(w) = ||F w - t||^2`` is rewritten through the Gram matrix
as ``w.A.w - 2 b.w + c`` with ``A = F'F``, ``b = F't`` and ``c = t't``, so
each iteration costs O(n^2) regardless of the number of samples.

:func:`solve` runs conditional-gradient iterations: linearize ``J`` at the
current point, minimize the linear model over the capped simplex (the
minimizer puts ``1/k`` on the ``k`` smallest gradient entries), then move
towards it with an exact line search. After each such step an optional
Newton-type move inside the current face polishes the coordinates that are
strictly between their bounds; without it convergence near an optimum with
fractional weights is sublinear.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _backend, _pykernels
from .model import (
    ConfigError,
    DataError,
    FeatureMatrix,
    MulticlassModel,
    SelectionModel,
    SolverConfig,
    TargetVector,
    sparsify_weights,
)
from .preprocess import apply_flip, compute_flip_mask, encode_targets

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
CAP_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticProblem:
    gram: np.ndarray
    linear: np.ndarray
    const_term: float

    @property
    def n(self) -> int:
        return len(self.linear)

    def objective(self, w) -> float:
        w = np.asarray(w, dtype=np.float64)
        return float(w @ self.gram @ w - 2.0 * (self.linear @ w) + self.const_term)


@dataclass(frozen=True)
class KKTReport:
    lambda_hat: float
    interior_spread: float
    boundary_violation: float
    cap_violation: float
    zero_violation: float
    n_at_cap: int
    n_at_zero: int
    n_interior: int


@dataclass(frozen=True)
class SolverResult:
    weights: np.ndarray
    objective: float
    iterations_used: int
    objective_trace: np.ndarray
    converged: bool
    kkt: KKTReport


def build_problem(F, t) -> QuadraticProblem:
    """Gram-matrix form of ``||F w - t||^2`` (``F`` already flipped)."""
    X = F.values if isinstance(F, FeatureMatrix) else np.asarray(F, dtype=np.float64)
    tv = t.t if isinstance(t, TargetVector) else np.asarray(t, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != len(tv):
        raise DataError(f"matrix with shape {X.shape} does not match {len(tv)} targets")
    M = X.T @ X
    A = np.ascontiguousarray(0.5 * (M + M.T))
    return QuadraticProblem(A, X.T @ tv, float(tv @ tv))


def gradient(problem: QuadraticProblem, w) -> np.ndarray:
    """Exact gradient ``2 A w - 2 b``."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (problem.n,):
        raise DataError(f"weight vector of length {w.size} for n={problem.n}")
    return 2.0 * (problem.gram @ w - problem.linear)


def lp_oracle(d, k: int) -> np.ndarray:
    """Minimize ``d.x`` over the capped simplex.

    The minimizer is the vertex with ``1/k`` on the ``k`` smallest entries of
    ``d`` (lowest index first among ties).
    """
    d = np.asarray(d, dtype=np.float64)
    n = len(d)
    if int(k) != k or k < 1 or k > n:
        raise ConfigError(f"k={k} must be an integer in [1, {n}]")
    x = np.zeros(n)
    x[_pykernels.k_smallest(d, int(k))] = 1.0 / k
    return x


def line_search(problem: QuadraticProblem, w, x) -> float:
    """Exact minimizer over ``[0, 1]`` of ``J(w + a (x - w))``."""
    w = np.asarray(w, dtype=np.float64)
    p = np.asarray(x, dtype=np.float64) - w
    g = gradient(problem, w)
    return _closed_form_step(g @ p, p @ problem.gram @ p)


def _closed_form_step(gp: float, pAp: float) -> float:
    if pAp > _pykernels.FLAT_CURVATURE:
        return min(max(-gp / (2.0 * pAp), 0.0), 1.0)
    return 1.0 if gp < 0.0 else 0.0


def check_feasible(w, k: int) -> None:
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < -CAP_TOL) or np.any(w > 1.0 / k + CAP_TOL) or abs(w.sum() - 1.0) > FEASIBILITY_TOL:
        raise DataError("weights are outside the capped simplex")


def kkt_check(problem: QuadraticProblem, w, k: int, eps: float = 1e-9) -> KKTReport:
    """First-order optimality diagnostics at a feasible ``w``.

    Coordinates strictly between the bounds must share one gradient value;
    coordinates at the cap must have gradients no larger than it and zero
    coordinates no smaller. ``lambda_hat`` is the mean interior gradient, or
    the midpoint of the cap/zero gradient gap when no coordinate is interior.
    """
    w = np.asarray(w, dtype=np.float64)
    check_feasible(w, k)
    d = gradient(problem, w)
    cap = 1.0 / k
    at_zero = w < eps
    at_cap = ~at_zero & (w > cap - eps)
    interior = ~at_zero & ~at_cap
    if interior.any():
        lam = float(d[interior].mean())
        spread = float(d[interior].max() - d[interior].min())
    else:
        hi = d[at_cap].max() if at_cap.any() else None
        lo = d[at_zero].min() if at_zero.any() else None
        if hi is None:
            lam = float(lo)
        elif lo is None:
            lam = float(hi)
        else:
            lam = float(0.5 * (hi + lo))
        spread = 0.0
    cap_v = float(max(0.0, (d[at_cap] - lam).max())) if at_cap.any() else 0.0
    zero_v = float(max(0.0, (lam - d[at_zero]).max())) if at_zero.any() else 0.0
    return KKTReport(
        lambda_hat=lam,
        interior_spread=spread,
        boundary_violation=max(cap_v, zero_v),
        cap_violation=cap_v,
        zero_violation=zero_v,
        n_at_cap=int(at_cap.sum()),
        n_at_zero=int(at_zero.sum()),
        n_interior=int(interior.sum()),
    )


def solve(problem: QuadraticProblem, config: SolverConfig, kernels=None) -> SolverResult:
    """Minimize the problem over the capped simplex with ``k = config.k``.

    Starts from the uniform vector ``1/n``. ``kernels`` overrides the
    compiled/numpy backend choice.
    """
    if not isinstance(config, SolverConfig):
        raise ConfigError("config must be a SolverConfig")
    config.check_n(problem.n)
    kern = kernels or _backend.kernels
    A = np.ascontiguousarray(problem.gram, dtype=np.float64)
    b = np.ascontiguousarray(problem.linear, dtype=np.float64)
    w, trace, iters, converged = kern.fw_solve(
        A, b, float(problem.const_term), config.k, config.max_iters, config.rel_tol,
        config.fixed_iters, config.face_steps, config.max_cg,
    )
    w = np.asarray(w)
    return SolverResult(
        weights=w,
        objective=float(trace[-1]),
        iterations_used=int(iters),
        objective_trace=np.asarray(trace),
        converged=bool(converged),
        kkt=kkt_check(problem, w, config.k, eps=min(config.selection_eps, 1e-9)),
    )


def project_capped_simplex(v, k: int) -> np.ndarray:
    return _backend.kernels.project_capped_simplex(np.asarray(v, dtype=np.float64), int(k))


def reference_solve(problem: QuadraticProblem, k: int, n_iter: int = 100_000, kernels=None) -> np.ndarray:
    """Slow independent solution by projected gradient descent.

    Uses the exact sort-based projection onto the capped simplex and the step
    ``1/(2 L)`` where ``L`` is the spectral norm of the Gram matrix restricted
    to sum-zero directions (every feasible displacement has zero sum).
    """
    n = problem.n
    if int(k) != k or k < 1 or k > n:
        raise ConfigError(f"k={k} must be an integer in [1, {n}]")
    if k == n:
        return np.full(n, 1.0 / n)
    P = np.eye(n) - 1.0 / n
    L = float(np.linalg.eigvalsh(P @ problem.gram @ P)[-1])
    if L <= 0.0:
        # objective is affine on the feasible set
        L = max(float(np.linalg.eigvalsh(problem.gram)[-1]), 1.0)
    kern = kernels or _backend.kernels
    A = np.ascontiguousarray(problem.gram, dtype=np.float64)
    b = np.ascontiguousarray(problem.linear, dtype=np.float64)
    return np.asarray(kern.pgd_capped(A, b, int(k), 1.0 / (2.0 * L), int(n_iter)))


def train_binary(F, y, config: SolverConfig, p0: float = 0.0, p1: float = 0.5,
                 theta=None, flip_mask=None) -> tuple[SelectionModel, SolverResult]:
    """Flip, encode, solve and package one positive-vs-rest model.

    ``y`` holds 0/1 labels. The flip mask is learned from these rows unless
    given.
    """
    if not isinstance(F, FeatureMatrix):
        F = FeatureMatrix(F)
    y = np.asarray(getattr(y, "labels", y))
    config.check_n(F.n_features)
    mask = compute_flip_mask(F, y) if flip_mask is None else np.asarray(flip_mask, dtype=bool)
    Ff = apply_flip(F, mask)
    t = encode_targets(y, p0, p1)
    result = solve(build_problem(Ff, t), config)
    w = sparsify_weights(result.weights, config.k, config.selection_eps)
    model = SelectionModel(
        weights=w, flip_mask=mask, k=config.k, p0=p0, p1=p1, theta=theta,
        selection_eps=config.selection_eps, feature_names=F.feature_names,
    )
    return model, result


def train_one_vs_all(F, labels, config: SolverConfig, p0: float = 0.0, p1: float = 0.5,
                     theta=None) -> tuple[MulticlassModel, list]:
    """One model per class id, each trained against all other rows."""
    y = np.asarray(getattr(labels, "labels", labels))
    classes = sorted(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise DataError("need at least two classes")
    models, results = [], []
    for c in classes:
        m, r = train_binary(F, (y == c).astype(np.int64), config, p0, p1, theta)
        models.append(m)
        results.append(r)
    return MulticlassModel(tuple(classes), tuple(models)), results
