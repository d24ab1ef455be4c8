"""Pure numpy implementations of the interpolation kernels.

Reference behaviour for the compiled module ``_ckernels``; both must agree to
rounding error.
"""
import numpy as np

TAPS = 16
BETA = 6.0


def _weights(frac):
    """Kaiser-windowed sinc weights for offsets ``frac - k``, k = -7..8."""
    k = np.arange(-TAPS // 2 + 1, TAPS // 2 + 1)
    d = frac[..., None] - k
    u = d / (TAPS / 2)
    win = np.i0(BETA * np.sqrt(np.clip(1 - u * u, 0, None))) / np.i0(BETA)
    return np.sinc(d) * win, k


def _gather(x, pos):
    """Interpolate rows ``x[r]`` at ``pos[r, j]``; x is (R, n), pos (R, M)."""
    n = x.shape[-1]
    base = np.floor(pos)
    w, k = _weights(pos - base)
    idx = base.astype(np.int64)[..., None] + k
    valid = (idx >= 0) & (idx < n)
    rows = np.arange(x.shape[0])[:, None, None]
    vals = x[rows, np.clip(idx, 0, n - 1)]
    return np.sum(np.where(valid, vals * w, 0), axis=-1)


def sinc_interp_rows(x, pos, threads=1):
    x = np.ascontiguousarray(x, dtype=np.complex128)
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    out = np.zeros(pos.shape, dtype=np.complex128)
    step = max(1, 2**20 // max(1, pos.shape[1] * TAPS))
    for r0 in range(0, x.shape[0], step):
        out[r0:r0 + step] = _gather(x[r0:r0 + step], pos[r0:r0 + step])
    return out


def trajectory_sum(x, pos, phase, threads=1):
    """sum_n interp(x[n], pos[h, n]) * exp(1j * phase[h, n]) for every h.

    ``threads`` is accepted for signature parity with the compiled kernel.
    """
    x = np.ascontiguousarray(x, dtype=np.complex128)
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    phase = np.ascontiguousarray(phase, dtype=np.float64)
    n_hyp, n_pulse = pos.shape
    out = np.empty(n_hyp, dtype=np.complex128)
    step = max(1, 2**20 // max(1, n_pulse * TAPS))
    for h0 in range(0, n_hyp, step):
        p = pos[h0:h0 + step]
        # rows of x are pulses: gather pulse n at every hypothesis position
        vals = _gather(x, p.T).T
        out[h0:h0 + step] = np.sum(vals * np.exp(1j * phase[h0:h0 + step]), axis=1)
    return out


def chirp_rowsums(r, offsets, lag, t0, pri, g0, dg, count):
    """Per-run sums of ``r * exp(-2j pi (g0 + k dg) lt)`` for k < count.

    Run ``i`` starts at ``offsets[i]`` (the last ends at ``len(r)``) and its
    ``p``-th sample has ``lt = lag[i] * (t0[i] + p * pri)``.  Returns shape
    ``(len(offsets), count)``.
    """
    r = np.asarray(r, dtype=np.complex128)
    offsets = np.asarray(offsets, dtype=np.int64)
    sizes = np.diff(np.append(offsets, r.size))
    rows = np.repeat(np.arange(offsets.size), sizes)
    p = np.arange(r.size) - offsets[rows]
    lt = np.asarray(lag)[rows] * (np.asarray(t0)[rows] + p * pri)
    cur = r * np.exp(-2j * np.pi * np.mod(g0 * lt, 1.0))
    step = np.exp(-2j * np.pi * np.mod(dg * lt, 1.0))
    out = np.empty((offsets.size, count), dtype=np.complex128)
    for k in range(count):
        out[:, k] = np.add.reduceat(cur, offsets)
        cur = cur * step
    return out
