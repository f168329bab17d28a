"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeats 5]

Both backends are fed identical inputs; results are checked to agree before
timings are printed.
"""
import argparse
import time

import numpy as np

from capsel import _pykernels
from capsel.preprocess import encode_targets
from capsel.simulation import make_feature_pool
from capsel.solver import build_problem

try:
    from capsel import _kernels
except ImportError:
    _kernels = None


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times)), out


def _cases():
    for n in (100, 400):
        F, y = make_feature_pool(2000, n // 10, n - n // 10, seed=n)
        prob = build_problem(F, encode_targets(y))
        A = np.ascontiguousarray(prob.gram)
        b = np.ascontiguousarray(prob.linear)
        k = n // 10
        yield (f"fw_solve n={n} k={k}",
               lambda kern, A=A, b=b, c=float(prob.const_term), k=k:
               kern.fw_solve(A, b, c, k, 200, 1e-10, True, True, 50)[0])
        yield (f"pgd_capped n={n} 500 iters",
               lambda kern, A=A, b=b, k=k: kern.pgd_capped(A, b, k, 1e-3, 500))
        yield (f"project_capped_simplex n={n} x200",
               lambda kern, v=np.random.default_rng(n).normal(size=n), k=k:
               [kern.project_capped_simplex(v + i, k) for i in range(200)][-1])
        X = np.ascontiguousarray(F)
        order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.intp))
        ys = np.where(y == 1, 1.0, -1.0)
        d = np.full(len(y), 1.0 / len(y))
        wneg = float(d[ys < 0].sum())
        yield (f"best_stump N=2000 n={n}",
               lambda kern, X=X, order=order, ys=ys, d=d, wneg=wneg:
               np.array(kern.best_stump(X, order, ys, d, wneg, 1.0)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    print(f"{'kernel':38s} {'cython s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, fn in _cases():
        tc, oc = _median_time(lambda: fn(_kernels), args.repeats)
        tp, op = _median_time(lambda: fn(_pykernels), args.repeats)
        if not np.allclose(np.asarray(oc), np.asarray(op), atol=1e-8):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:38s} {tc:10.5f} {tp:10.5f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
