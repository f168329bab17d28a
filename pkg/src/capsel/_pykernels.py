"""Pure numpy implementations of the hot loops.

Every function here has a twin with the same signature in ``_kernels.pyx``.
``capsel._backend`` picks one of the two at import time.
"""
import numpy as np

NAME = "python"

# Interior coordinates are those farther than this from both bounds.
FACE_TOL = 1e-12
# Curvature below this is treated as flat in the closed-form line search.
FLAT_CURVATURE = 1e-14
# Face directions shorter than this fraction of the cap are rounding noise.
NEGLIGIBLE_MOVE = 1e-13


def k_smallest(d, k):
    """Indices of the ``k`` smallest entries of ``d``, ties to the lowest index."""
    return np.argsort(d, kind="stable")[:k]


def _face_direction(A, g, I, max_cg):
    """Projected conjugate gradient on the face spanned by ``I``.

    Approximately solves ``min g_I.D + D.A_II.D`` subject to ``sum(D) == 0``.
    """
    A_II = A[np.ix_(I, I)]
    r = -g[I]
    r = r - r.mean()
    rr = r @ r
    rr0 = rr
    delta = np.zeros(len(I))
    if rr0 == 0.0:
        return delta, A_II
    d = r.copy()
    for j in range(min(len(I) + 2, max_cg)):
        Hd = 2.0 * (A_II @ d)
        dHd = d @ Hd
        if dHd <= FLAT_CURVATURE * (d @ d):
            if j == 0:
                delta = d
            break
        a = rr / dHd
        delta = delta + a * d
        r = r - a * Hd
        r = r - r.mean()
        rr_new = r @ r
        if rr_new <= 1e-30 * rr0:
            break
        d = r + (rr_new / rr) * d
        rr = rr_new
    return delta, A_II


def _face_step(A, Aw, w, g, u, max_cg):
    """Exact line search along the face direction, clamped to stay feasible.

    Updates ``w`` and ``Aw`` in place and returns the objective decrease.
    """
    I = np.flatnonzero((w > FACE_TOL) & (w < u - FACE_TOL))
    if len(I) < 2:
        return 0.0
    delta, A_II = _face_direction(A, g, I, max_cg)
    delta -= delta.mean()
    if np.max(np.abs(delta)) <= NEGLIGIBLE_MOVE * u:
        return 0.0
    gD = g[I] @ delta
    if not gD < 0.0:
        return 0.0
    DAD = delta @ (A_II @ delta)
    wI = w[I]
    neg = delta < 0.0
    pos = delta > 0.0
    lim = np.full(len(I), np.inf)
    lim[neg] = wI[neg] / -delta[neg]
    lim[pos] = (u - wI[pos]) / delta[pos]
    block = int(np.argmin(lim))
    a_max = lim[block]
    if DAD > 0.0:
        a = min(-gD / (2.0 * DAD), a_max)
    else:
        a = a_max
    if not (a > 0.0 and np.isfinite(a)):
        return 0.0
    change = a * gD + a * a * DAD
    if not change < 0.0:
        return 0.0
    wI = wI + a * delta
    if a == a_max:
        wI[block] = 0.0 if delta[block] < 0.0 else u
    np.clip(wI, 0.0, u, out=wI)
    step = wI - w[I]
    w[I] = wI
    Aw += A[:, I] @ step
    return -change


def fw_solve(A, b, c, k, max_iters, rel_tol, fixed_iters, face_steps, max_cg):
    """Conditional-gradient iterations with optional face refinement.

    Returns ``(w, trace, iterations, converged)``.
    """
    n = A.shape[0]
    u = 1.0 / k
    w = np.full(n, 1.0 / n)
    Aw = A @ w
    J = w @ Aw - 2.0 * (b @ w) + c
    trace = [J]
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        w_prev = w.copy()
        g = 2.0 * (Aw - b)
        S = k_smallest(g, k)
        Ax = u * A[S].sum(axis=0)
        x = np.zeros(n)
        x[S] = u
        p = x - w
        Ap = Ax - Aw
        gp = g @ p
        # -gp bounds J - J* from above
        if not fixed_iters and -gp <= rel_tol * max(J, 1e-12):
            trace.append(J)
            converged = True
            break
        pAp = p @ Ap
        if pAp > FLAT_CURVATURE:
            alpha = min(max(-gp / (2.0 * pAp), 0.0), 1.0)
        else:
            alpha = 1.0 if gp < 0.0 else 0.0
        if alpha > 0.0:
            w = w + alpha * p
            Aw = Aw + alpha * Ap
        if face_steps:
            w_fw = w.copy()
            g = 2.0 * (Aw - b)
            _face_step(A, Aw, w, g, u, max_cg)
            Aw = A @ w
            J_new = w @ Aw - 2.0 * (b @ w) + c
            if J_new > J:
                w = w_fw
        Aw = A @ w
        J_new = w @ Aw - 2.0 * (b @ w) + c
        if J_new > J:
            # no representable progress left
            w = w_prev
            Aw = A @ w
            trace.append(J)
            if not fixed_iters:
                converged = True
                break
            continue
        trace.append(J_new)
        J = J_new
    return w, np.asarray(trace), it, converged


def project_capped_simplex(v, k):
    """Euclidean projection onto ``{x : sum(x) == 1, 0 <= x <= 1/k}`` by sorting.

    The projection is ``clip(v - tau, 0, 1/k)`` where ``tau`` solves a
    piecewise-linear equation whose breakpoints are ``v`` and ``v - 1/k``.
    """
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    u = 1.0 / k
    # Each coordinate enters the free range at v - u and leaves it at v.
    points = np.concatenate([v - u, v])
    kinds = np.concatenate([np.ones(n), -np.ones(n)])
    order = np.argsort(points, kind="stable")
    points = points[order]
    kinds = kinds[order]
    # phi(tau) = sum(clip(v - tau, 0, u)); at tau <= min(points) it is n*u.
    slopes = -np.cumsum(kinds)
    phi = np.empty(2 * n)
    phi[0] = n * u
    phi[1:] = n * u + np.cumsum(slopes[:-1] * np.diff(points))
    # phi is non-increasing from n*u >= 1 down to 0
    j = int(np.searchsorted(-phi, -1.0, side="right")) - 1
    j = min(max(j, 0), 2 * n - 2)
    if slopes[j] != 0.0:
        tau = points[j] + (phi[j] - 1.0) / -slopes[j]
    else:
        tau = points[j]
    return np.clip(v - tau, 0.0, u)


def pgd_capped(A, b, k, step, n_iter):
    """Projected gradient descent on ``w.A.w - 2 b.w`` over the capped simplex."""
    n = A.shape[0]
    w = np.full(n, 1.0 / n)
    for _ in range(n_iter):
        g = 2.0 * (A @ w - b)
        w = project_capped_simplex(w - step * g, k)
    return w


def best_stump(X, order, y, d, wneg, total):
    """Search all single-feature threshold classifiers for the lowest weighted error.

    ``X`` is (N, n), ``order[j]`` sorts column ``j`` ascending, ``y`` holds
    +1/-1 labels and ``d`` the sample weights. A stump predicts ``polarity``
    when ``x > threshold`` and ``-polarity`` otherwise. Candidates are visited
    by feature, then ascending threshold, then polarity +1 before -1; the
    first strictly best one wins.

    Returns ``(feature, threshold, polarity, error)``.
    """
    N, n = X.shape
    best = (0, -np.inf, 1, np.inf)
    best_err = np.inf
    for j in range(n):
        idx = order[j]
        vals = X[idx, j]
        steps = np.where(y[idx] > 0, d[idx], -d[idx])
        run = np.cumsum(np.concatenate(([wneg], steps)))
        # run[m] = error of polarity +1 with the m smallest values at or below the threshold
        cand = np.flatnonzero(np.diff(vals) > 0) + 1
        ms = np.concatenate(([0], cand, [N]))
        errs = run[ms]
        both = np.empty(2 * len(ms))
        both[0::2] = errs
        both[1::2] = total - errs
        m = int(np.argmin(both))
        if both[m] < best_err:
            best_err = both[m]
            pos = ms[m // 2]
            if pos == 0:
                thr = -np.inf
            elif pos == N:
                thr = np.inf
            else:
                thr = 0.5 * (vals[pos - 1] + vals[pos])
            best = (j, thr, 1 if m % 2 == 0 else -1, best_err)
    return best
