import sys

import numpy as np
import pytest

from capsel import _pykernels

try:
    from capsel import _kernels
except ImportError:
    _kernels = None

BACKENDS = [_pykernels] + ([_kernels] if _kernels is not None else [])


def random_instance(rng, n_max=30, N_max=200):
    """Labelled soft-feature matrix with per-feature signal, plus a k in [1, n]."""
    N = int(rng.integers(20, N_max + 1))
    n = int(rng.integers(2, n_max + 1))
    k = int(rng.integers(1, n + 1))
    y = rng.integers(0, 2, N)
    y[0], y[1] = 0, 1
    gap = rng.uniform(0.0, 0.5, n)
    base = rng.uniform(0.1, 0.5, n)
    sd = rng.uniform(0.05, 0.3, n)
    F = np.clip(base + gap * y[:, None] + sd * rng.standard_normal((N, n)), 0.0, 1.0)
    return F, y, k


def random_feasible(rng, n, k):
    """A point of the capped simplex: a random convex combination of random vertices."""
    m = 5
    lam = rng.dirichlet(np.ones(m))
    w = np.zeros(n)
    for a in lam:
        v = np.zeros(n)
        v[rng.choice(n, size=k, replace=False)] = 1.0 / k
        w += a * v
    return w


@pytest.fixture(params=BACKENDS, ids=lambda m: m.NAME)
def kernels(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
