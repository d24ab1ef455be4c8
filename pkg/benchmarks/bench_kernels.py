"""Compare the compiled and numpy kernel backends.

Run ``python3 benchmarks/bench_kernels.py``.  Each kernel is timed on a
problem the size the estimator and oracle actually use, and the two
backends' outputs are compared.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from sdfc_lvt import _pykernels

try:
    from sdfc_lvt import _ckernels
except ImportError:
    _ckernels = None


def problems(n=2048, n_range=384, hyps=400, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, n_range)) + 1j * rng.standard_normal((n, n_range))
    # Keystone-style resampling: one row per range bin
    rows = x[:, : n_range // 2].T.copy()
    pos = np.clip(np.arange(n)[None, :] * rng.uniform(0.99, 1.01, (rows.shape[0], 1)), 0, n - 1)
    # oracle tracks
    tpos = n_range / 2 + rng.uniform(-40, 40, (hyps, 1)) * np.linspace(0, 1, n)[None, :]
    phase = rng.uniform(-np.pi, np.pi, (hyps, n))
    # LVT lag products (q = 1, all lags)
    d = np.arange(1, n, dtype=np.int64)
    lens = n - d
    offsets = np.concatenate([[0], np.cumsum(lens)[:-1]]).astype(np.int64)
    r = rng.standard_normal(lens.sum()) + 1j * rng.standard_normal(lens.sum())
    lag = d * 5e-4
    t0 = (d / 2 - (n - 1) / 2) * 5e-4
    return {
        "sinc_interp_rows": (lambda m: m.sinc_interp_rows(rows, pos)),
        "trajectory_sum": (lambda m: m.trajectory_sum(x, tpos, phase)),
        "chirp_rowsums": (lambda m: m.chirp_rowsums(r, offsets, lag, t0, 5e-4, -10.0, 0.5, 41)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pulses", type=int, default=2048)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is available")
    print(f"{'kernel':<18}{'numpy s':>10}{'cython s':>10}{'speed-up':>10}{'max rel diff':>14}")
    for name, call in problems(a.pulses).items():
        tp = min(timeit.repeat(lambda: call(_pykernels), number=1, repeat=a.repeat))
        if _ckernels is None:
            print(f"{name:<18}{tp:>10.4f}{'-':>10}{'-':>10}{'-':>14}")
            continue
        tc = min(timeit.repeat(lambda: call(_ckernels), number=1, repeat=a.repeat))
        yp, yc = call(_pykernels), call(_ckernels)
        diff = float(np.max(np.abs(yp - yc)) / np.max(np.abs(yp)))
        print(f"{name:<18}{tp:>10.4f}{tc:>10.4f}{tp / tc:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
