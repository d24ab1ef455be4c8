# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpolation kernels (same contract as ``_pykernels``)."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport floor, sin, cos, sqrt, fabs, M_PI

cnp.import_array()

DEF TAPS = 16
DEF HALF = 8
DEF MAXCOUNT = 64
cdef double BETA = 6.0


cdef double _i0(double x) nogil:
    # power series, converges fast for the arguments used (|x| <= BETA)
    cdef double s = 1.0, term = 1.0, q = 0.25 * x * x
    cdef int k
    for k in range(1, 40):
        term *= q / (k * k)
        s += term
        if term < 1e-17 * s:
            break
    return s


cdef double _i0_beta = _i0(BETA)


cdef inline double _window(double d) nogil:
    cdef double u = d / HALF
    if u <= -1.0 or u >= 1.0:
        return 1.0 / _i0_beta if fabs(u) == 1.0 else 0.0
    return _i0(BETA * sqrt(1.0 - u * u)) / _i0_beta


cdef inline double complex _interp(const double complex* row, Py_ssize_t n, double p) nogil:
    cdef double base = floor(p)
    cdef double frac = p - base
    cdef Py_ssize_t b = <Py_ssize_t> base
    cdef Py_ssize_t k, idx
    cdef double complex acc = 0
    cdef double d, sc
    # sin(pi (frac - k)) = (-1)^k sin(pi frac): one sine per output sample
    # 1 - frac is exact for frac >= 1/2, which keeps the sine accurate near 1
    cdef double s = sin(M_PI * frac) if frac <= 0.5 else sin(M_PI * (1.0 - frac))
    cdef double sgn = 1.0 if (HALF - 1) % 2 == 0 else -1.0
    for k in range(-HALF + 1, HALF + 1):
        idx = b + k
        if idx >= 0 and idx < n:
            d = frac - k
            sc = 1.0 if d == 0.0 else sgn * s / (M_PI * d)
            acc = acc + row[idx] * (sc * _window(d))
        sgn = -sgn
    return acc


def sinc_interp_rows(x, pos, int threads=1):
    cdef const double complex[:, ::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef const double[:, ::1] pv = np.ascontiguousarray(pos, dtype=np.float64)
    out = np.zeros((pv.shape[0], pv.shape[1]), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef Py_ssize_t r, j, n = xv.shape[1]
    if pv.shape[0] == 0 or pv.shape[1] == 0:
        return out
    for r in prange(pv.shape[0], nogil=True, num_threads=max(1, threads), schedule="static"):
        for j in range(pv.shape[1]):
            ov[r, j] = _interp(&xv[r, 0], n, pv[r, j])
    return out


def trajectory_sum(x, pos, phase, int threads=1):
    cdef const double complex[:, ::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef const double[:, ::1] pv = np.ascontiguousarray(pos, dtype=np.float64)
    cdef const double[:, ::1] ph = np.ascontiguousarray(phase, dtype=np.float64)
    out = np.zeros(pv.shape[0], dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t h, n, m = xv.shape[1]
    cdef double complex acc, v
    if pv.shape[0] == 0 or pv.shape[1] == 0:
        return out
    # each hypothesis is summed by one thread in pulse order, so the result
    # does not depend on the thread count
    for h in prange(pv.shape[0], nogil=True, num_threads=max(1, threads), schedule="static"):
        acc = 0
        for n in range(pv.shape[1]):
            v = _interp(&xv[n, 0], m, pv[h, n])
            acc = acc + v * (cos(ph[h, n]) + 1j * sin(ph[h, n]))
        ov[h] = acc
    return out


cdef inline double complex _cis(double cycles) nogil:
    cdef double u = cycles - floor(cycles)
    return cos(-2.0 * M_PI * u) + 1j * sin(-2.0 * M_PI * u)


def chirp_rowsums(r, offsets, lag, t0, double pri, double g0, double dg, int count):
    """Per-run sums of ``r * exp(-2j pi (g0 + k dg) lt)`` for k < count.

    Run ``i`` starts at ``offsets[i]`` (the last ends at ``len(r)``) and its
    ``p``-th sample has ``lt = lag[i] * (t0[i] + p * pri)``.  The phase
    factors are advanced by recurrence along ``p`` and re-seeded exactly
    every 32 samples.  Returns shape ``(len(offsets), count)``.
    """
    cdef const double complex[::1] rv = np.ascontiguousarray(r, dtype=np.complex128)
    cdef const long long[::1] ov = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const double[::1] lv = np.ascontiguousarray(lag, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(t0, dtype=np.float64)
    cdef Py_ssize_t m = ov.shape[0], total = rv.shape[0]
    out = np.zeros((m, count), dtype=np.complex128)
    cdef double complex[:, ::1] zv = out
    cdef Py_ssize_t i, j, k, p, stop
    cdef double lt, dlt
    cdef double complex e0, de0, s, ds, cur
    cdef double complex acc[MAXCOUNT]
    if count > MAXCOUNT:
        raise ValueError(f"count must be <= {MAXCOUNT}")
    with nogil:
        for i in range(m):
            stop = ov[i + 1] if i + 1 < m else total
            dlt = lv[i] * pri
            de0 = _cis(g0 * dlt)
            ds = _cis(dg * dlt)
            for k in range(count):
                acc[k] = 0
            for j in range(ov[i], stop):
                p = j - ov[i]
                if p % 32 == 0:
                    lt = lv[i] * (tv[i] + p * pri)
                    e0 = _cis(g0 * lt)
                    s = _cis(dg * lt)
                cur = rv[j] * e0
                for k in range(count):
                    acc[k] = acc[k] + cur
                    cur = cur * s
                e0 = e0 * de0
                s = s * ds
            for k in range(count):
                zv[i, k] = acc[k]
    return out
