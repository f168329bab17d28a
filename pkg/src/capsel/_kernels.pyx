# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the loops in ``_pykernels``.

Matrix-vector products are hand-written loops so results do not depend on the
BLAS build or thread count.
"""
import numpy as np

from libc.math cimport INFINITY, fabs
from libc.stdlib cimport free, malloc

NAME = "cython"

cdef double FACE_TOL = 1e-12
cdef double FLAT_CURVATURE = 1e-14
cdef double NEGLIGIBLE_MOVE = 1e-13


cdef void _argsort(const double* key, Py_ssize_t* idx, Py_ssize_t* tmp,
                   Py_ssize_t n) noexcept nogil:
    """Stable bottom-up merge sort of ``idx`` by ``key[idx]``."""
    cdef Py_ssize_t width = 1, lo, mid, hi, i, j, t
    cdef Py_ssize_t* src = idx
    cdef Py_ssize_t* dst = tmp
    cdef Py_ssize_t* swap
    while width < n:
        lo = 0
        while lo < n:
            mid = lo + width
            if mid > n:
                mid = n
            hi = lo + 2 * width
            if hi > n:
                hi = n
            i = lo
            j = mid
            t = lo
            while i < mid and j < hi:
                if key[src[j]] < key[src[i]]:
                    dst[t] = src[j]
                    j += 1
                else:
                    dst[t] = src[i]
                    i += 1
                t += 1
            while i < mid:
                dst[t] = src[i]
                i += 1
                t += 1
            while j < hi:
                dst[t] = src[j]
                j += 1
                t += 1
            lo = hi
        swap = src
        src = dst
        dst = swap
        width *= 2
    if src != idx:
        for i in range(n):
            idx[i] = src[i]


cdef void _matvec(const double[:, ::1] A, const double* x, double* out,
                  Py_ssize_t n) noexcept nogil:
    # four accumulators break the add latency chain; order is still fixed
    cdef Py_ssize_t i, j, m = n - n % 4
    cdef double s0, s1, s2, s3
    cdef const double* row
    for i in range(n):
        row = &A[i, 0]
        s0 = s1 = s2 = s3 = 0.0
        for j in range(0, m, 4):
            s0 += row[j] * x[j]
            s1 += row[j + 1] * x[j + 1]
            s2 += row[j + 2] * x[j + 2]
            s3 += row[j + 3] * x[j + 3]
        for j in range(m, n):
            s0 += row[j] * x[j]
        out[i] = (s0 + s1) + (s2 + s3)


cdef inline double _dot(const double* x, const double* y, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(n):
        s += x[i] * y[i]
    return s


cdef double _face_step(const double[:, ::1] A, double* Aw, double* w, const double* g,
                       double u, Py_ssize_t n, Py_ssize_t max_cg,
                       Py_ssize_t* I, double* buf) noexcept nogil:
    """Projected CG direction on the current face plus a clamped exact line search.

    ``buf`` needs room for 6*n doubles. Returns the objective decrease.
    """
    cdef Py_ssize_t m = 0, i, j, q, block = 0
    cdef double* r = buf
    cdef double* d = buf + n
    cdef double* Hd = buf + 2 * n
    cdef double* delta = buf + 3 * n
    cdef double* wI = buf + 4 * n
    cdef double* gI = buf + 5 * n
    cdef double rr, rr0, rr_new, dHd, a, mean, s, gD, DAD, a_max, lim, change
    for i in range(n):
        if w[i] > FACE_TOL and w[i] < u - FACE_TOL:
            I[m] = i
            m += 1
    if m < 2:
        return 0.0
    mean = 0.0
    for q in range(m):
        gI[q] = g[I[q]]
        wI[q] = w[I[q]]
        r[q] = -gI[q]
        mean += r[q]
    mean /= m
    for q in range(m):
        r[q] -= mean
        delta[q] = 0.0
        d[q] = r[q]
    rr = _dot(r, r, m)
    rr0 = rr
    if rr0 == 0.0:
        return 0.0
    j = 0
    while j < m + 2 and j < max_cg:
        for q in range(m):
            s = 0.0
            for i in range(m):
                s += A[I[q], I[i]] * d[i]
            Hd[q] = 2.0 * s
        dHd = _dot(d, Hd, m)
        if dHd <= FLAT_CURVATURE * _dot(d, d, m):
            if j == 0:
                for q in range(m):
                    delta[q] = d[q]
            break
        a = rr / dHd
        mean = 0.0
        for q in range(m):
            delta[q] += a * d[q]
            r[q] -= a * Hd[q]
            mean += r[q]
        mean /= m
        for q in range(m):
            r[q] -= mean
        rr_new = _dot(r, r, m)
        if rr_new <= 1e-30 * rr0:
            break
        for q in range(m):
            d[q] = r[q] + (rr_new / rr) * d[q]
        rr = rr_new
        j += 1
    mean = 0.0
    for q in range(m):
        mean += delta[q]
    mean /= m
    s = 0.0
    for q in range(m):
        delta[q] -= mean
        if fabs(delta[q]) > s:
            s = fabs(delta[q])
    if s <= NEGLIGIBLE_MOVE * u:
        return 0.0
    gD = _dot(gI, delta, m)
    if not gD < 0.0:
        return 0.0
    DAD = 0.0
    for q in range(m):
        s = 0.0
        for i in range(m):
            s += A[I[q], I[i]] * delta[i]
        DAD += delta[q] * s
    a_max = INFINITY
    for q in range(m):
        if delta[q] < 0.0:
            lim = wI[q] / -delta[q]
        elif delta[q] > 0.0:
            lim = (u - wI[q]) / delta[q]
        else:
            continue
        if lim < a_max:
            a_max = lim
            block = q
    if DAD > 0.0:
        a = -gD / (2.0 * DAD)
        if a > a_max:
            a = a_max
    else:
        a = a_max
    if not (a > 0.0 and a < INFINITY):
        return 0.0
    change = a * gD + a * a * DAD
    if not change < 0.0:
        return 0.0
    for q in range(m):
        s = wI[q] + a * delta[q]
        if a == a_max and q == block:
            s = 0.0 if delta[q] < 0.0 else u
        if s < 0.0:
            s = 0.0
        elif s > u:
            s = u
        d[q] = s - w[I[q]]
        w[I[q]] = s
    for i in range(n):
        s = 0.0
        for q in range(m):
            s += A[i, I[q]] * d[q]
        Aw[i] += s
    return -change


def fw_solve(const double[:, ::1] A, const double[::1] b, double c, Py_ssize_t k,
             Py_ssize_t max_iters, double rel_tol, bint fixed_iters, bint face_steps,
             Py_ssize_t max_cg):
    """Conditional-gradient iterations with optional face refinement.

    Returns ``(w, trace, iterations, converged)``.
    """
    cdef Py_ssize_t n = A.shape[0], i, j, it = 0, s_j
    cdef double u = 1.0 / k
    cdef double J, J_new, gp, pAp, alpha
    cdef bint converged = False
    w_arr = np.full(n, 1.0 / n)
    trace_arr = np.empty(max_iters + 1)
    cdef double[::1] w = w_arr
    cdef double[::1] trace = trace_arr
    cdef double* Aw = <double*> malloc(n * sizeof(double))
    cdef double* g = <double*> malloc(n * sizeof(double))
    cdef double* Ax = <double*> malloc(n * sizeof(double))
    cdef double* w_prev = <double*> malloc(n * sizeof(double))
    cdef double* buf = <double*> malloc(6 * n * sizeof(double))
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t* tmp = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    if not (Aw and g and Ax and w_prev and buf and idx and tmp):
        free(Aw); free(g); free(Ax); free(w_prev); free(buf); free(idx); free(tmp)
        raise MemoryError()
    try:
        with nogil:
            _matvec(A, &w[0], Aw, n)
            J = _dot(&w[0], Aw, n) - 2.0 * _dot(&b[0], &w[0], n) + c
            trace[0] = J
            for it in range(1, max_iters + 1):
                for i in range(n):
                    w_prev[i] = w[i]
                    g[i] = 2.0 * (Aw[i] - b[i])
                    idx[i] = i
                _argsort(g, idx, tmp, n)
                for i in range(n):
                    Ax[i] = 0.0
                for j in range(k):
                    s_j = idx[j]
                    for i in range(n):
                        Ax[i] += A[s_j, i]
                # p = x - w and Ap = Ax - Aw, formed on the fly
                gp = 0.0
                pAp = 0.0
                for i in range(n):
                    Ax[i] = u * Ax[i] - Aw[i]
                    gp -= g[i] * w[i]
                    pAp -= w[i] * Ax[i]
                for j in range(k):
                    s_j = idx[j]
                    gp += g[s_j] * u
                    pAp += u * Ax[s_j]
                if not fixed_iters and -gp <= rel_tol * (J if J > 1e-12 else 1e-12):
                    trace[it] = J
                    converged = True
                    break
                if pAp > FLAT_CURVATURE:
                    alpha = -gp / (2.0 * pAp)
                    if alpha < 0.0:
                        alpha = 0.0
                    elif alpha > 1.0:
                        alpha = 1.0
                else:
                    alpha = 1.0 if gp < 0.0 else 0.0
                if alpha > 0.0:
                    for i in range(n):
                        w[i] -= alpha * w[i]
                        Aw[i] += alpha * Ax[i]
                    for j in range(k):
                        w[idx[j]] += alpha * u
                if face_steps:
                    for i in range(n):
                        g[i] = 2.0 * (Aw[i] - b[i])
                        Ax[i] = w[i]
                    _face_step(A, Aw, &w[0], g, u, n, max_cg, idx, buf)
                    _matvec(A, &w[0], Aw, n)
                    J_new = _dot(&w[0], Aw, n) - 2.0 * _dot(&b[0], &w[0], n) + c
                    if J_new > J:
                        for i in range(n):
                            w[i] = Ax[i]
                _matvec(A, &w[0], Aw, n)
                J_new = _dot(&w[0], Aw, n) - 2.0 * _dot(&b[0], &w[0], n) + c
                if J_new > J:
                    for i in range(n):
                        w[i] = w_prev[i]
                    _matvec(A, &w[0], Aw, n)
                    trace[it] = J
                    if not fixed_iters:
                        converged = True
                        break
                    continue
                trace[it] = J_new
                J = J_new
    finally:
        free(Aw); free(g); free(Ax); free(w_prev); free(buf); free(idx); free(tmp)
    return w_arr, trace_arr[:it + 1].copy(), it, converged


cdef void _project(const double* v, double* out, Py_ssize_t n, double u,
                   double* points, Py_ssize_t* idx,
                   Py_ssize_t* tmp) noexcept nogil:
    """Sort-based projection onto the capped simplex (see ``_pykernels``)."""
    cdef Py_ssize_t i, j, m = 2 * n
    cdef double phi, slope, nxt, tau, x
    for i in range(n):
        points[i] = v[i] - u
        points[n + i] = v[i]
    for i in range(m):
        idx[i] = i
    _argsort(points, idx, tmp, m)
    phi = n * u
    slope = 0.0
    tau = points[idx[m - 1]]
    for j in range(m - 1):
        slope += -1.0 if idx[j] < n else 1.0
        nxt = phi + slope * (points[idx[j + 1]] - points[idx[j]])
        if nxt < 1.0:
            if slope != 0.0:
                tau = points[idx[j]] + (phi - 1.0) / -slope
            else:
                tau = points[idx[j]]
            break
        phi = nxt
        tau = points[idx[j + 1]]
    for i in range(n):
        x = v[i] - tau
        if x < 0.0:
            x = 0.0
        elif x > u:
            x = u
        out[i] = x


def project_capped_simplex(v, Py_ssize_t k):
    """Euclidean projection onto ``{x : sum(x) == 1, 0 <= x <= 1/k}`` by sorting."""
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef double* points = <double*> malloc(2 * n * sizeof(double))
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(2 * n * sizeof(Py_ssize_t))
    cdef Py_ssize_t* tmp = <Py_ssize_t*> malloc(2 * n * sizeof(Py_ssize_t))
    try:
        _project(&vv[0], &out[0], n, 1.0 / k, points, idx, tmp)
    finally:
        free(points); free(idx); free(tmp)
    return out_arr


def pgd_capped(const double[:, ::1] A, const double[::1] b, Py_ssize_t k,
               double step, Py_ssize_t n_iter):
    """Projected gradient descent on ``w.A.w - 2 b.w`` over the capped simplex."""
    cdef Py_ssize_t n = A.shape[0], i, t
    w_arr = np.full(n, 1.0 / n)
    cdef double[::1] w = w_arr
    cdef double* Aw = <double*> malloc(n * sizeof(double))
    cdef double* v = <double*> malloc(n * sizeof(double))
    cdef double* points = <double*> malloc(2 * n * sizeof(double))
    cdef Py_ssize_t* idx = <Py_ssize_t*> malloc(2 * n * sizeof(Py_ssize_t))
    cdef Py_ssize_t* tmp = <Py_ssize_t*> malloc(2 * n * sizeof(Py_ssize_t))
    try:
        with nogil:
            for t in range(n_iter):
                _matvec(A, &w[0], Aw, n)
                for i in range(n):
                    v[i] = w[i] - step * 2.0 * (Aw[i] - b[i])
                _project(v, &w[0], n, 1.0 / k, points, idx, tmp)
    finally:
        free(Aw); free(v); free(points); free(idx); free(tmp)
    return w_arr


def best_stump(const double[:, :] X, const Py_ssize_t[:, :] order, const double[::1] y,
               const double[::1] d, double wneg, double total):
    """Search all single-feature threshold classifiers for the lowest weighted error.

    Same candidate order and tie rule as the numpy version.
    """
    cdef Py_ssize_t N = X.shape[0], n = X.shape[1], j, m, r
    cdef Py_ssize_t best_j = 0, best_pos = 0, best_pol = 1
    cdef double best_err = INFINITY, err, thr
    with nogil:
        for j in range(n):
            err = wneg
            # m = number of sorted values at or below the threshold
            for m in range(N + 1):
                if m > 0:
                    r = order[j, m - 1]
                    if y[r] > 0:
                        err += d[r]
                    else:
                        err -= d[r]
                    if m < N and not X[order[j, m - 1], j] < X[order[j, m], j]:
                        continue
                if err < best_err:
                    best_err = err
                    best_j = j
                    best_pos = m
                    best_pol = 1
                if total - err < best_err:
                    best_err = total - err
                    best_j = j
                    best_pos = m
                    best_pol = -1
    if best_pos == 0:
        thr = -INFINITY
    elif best_pos == N:
        thr = INFINITY
    else:
        thr = 0.5 * (X[order[best_j, best_pos - 1], best_j] + X[order[best_j, best_pos], best_j])
    return int(best_j), thr, int(best_pol), best_err
