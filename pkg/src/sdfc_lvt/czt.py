"""Batched chirp-z transform (Bluestein) on arbitrary uniform frequency grids.

Both the Keystone slow-time rescaling and the chirp-rate axis of the LVT are
scaled Fourier sums; they share this kernel.
"""
from __future__ import annotations

import numpy as np
from scipy.fft import fft, ifft, next_fast_len


def dtft_grid(x, n_out, start, step):
    """Evaluate ``sum_n x[..., n] * exp(-2j*pi*(start + k*step)*n)`` for k < n_out.

    ``start`` and ``step`` are in cycles per input sample and broadcast
    against the leading axes of ``x``, so every row may use its own grid.
    """
    x = np.asarray(x, dtype=np.complex128)
    n_in = x.shape[-1]
    start = np.asarray(start, dtype=float)[..., None]
    step = np.asarray(step, dtype=float)[..., None]
    n = np.arange(n_in)
    k = np.arange(n_out)
    # n*k = (n^2 + k^2 - (k - n)^2) / 2; fold the quadratic phases modulo 1
    # before multiplying by 2*pi to keep precision for long transforms.
    pre = np.exp(-2j * np.pi * (np.mod(start * n, 1.0) + np.mod(0.5 * step * n * n, 1.0)))
    post = np.exp(-1j * np.pi * np.mod(step * k * k, 2.0))
    size = next_fast_len(n_in + n_out - 1)
    j = np.arange(size)
    j = np.where(j < n_out, j, j - size)  # lags -(n_in-1) .. n_out-1 on a circle
    kernel = np.exp(1j * np.pi * np.mod(step * j * j, 2.0))
    kernel[..., (j < -(n_in - 1))] = 0
    conv = ifft(fft(x * pre, n=size, axis=-1) * fft(kernel, axis=-1), axis=-1)
    return conv[..., :n_out] * post
