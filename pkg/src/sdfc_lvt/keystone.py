"""Keystone transform: per-range-frequency rescaling of slow time.

For a reference frequency f_ref, the slow-time signal of range bin f is
resampled at t = f_ref / (f_ref + f) * t_a, which removes the linear range
walk of every target at once.  The default resampler is spectral (band-limited
interpolation evaluated with a chirp-z transform); a 16-tap Kaiser-windowed
sinc interpolator is available as a cross-check.
"""
from __future__ import annotations

import logging

import numpy as np

from . import kernels
from .czt import dtft_grid
from .errors import MetricError
from .model import FAST_TIME, DataMatrix

log = logging.getLogger(__name__)

KAPPA = 0.95


def keystone_scale(freqs, reference_frequency):
    return reference_frequency / (reference_frequency + np.asarray(freqs, dtype=float))


def rescale_rows(rows: np.ndarray, scale, origin: float = 0.0, method: str = "czt") -> np.ndarray:
    """Resample each row ``x[r, :]`` at positions ``origin + scale[r] * (m - origin)``.

    Positions are in samples.  Outputs whose position falls outside
    ``[0, n - 1]`` are zero-filled.
    """
    rows = np.asarray(rows, dtype=np.complex128)
    n = rows.shape[-1]
    scale = np.asarray(scale, dtype=float)
    m = np.arange(n)
    pos = origin + scale[:, None] * (m - origin)
    if method == "czt":
        # Band-limited interpolant x(p) = 1/N sum_k X_k exp(2j pi k p / N),
        # k centred on [-N/2, N/2), evaluated on the scaled output grid.
        spec = np.fft.fftshift(np.fft.fft(rows, axis=-1), axes=-1)
        start = -origin * (1 - scale) / n
        step = -scale / n
        out = dtft_grid(spec, n, start, step)
        out *= np.exp(-1j * np.pi * (n // 2) * 2 * np.mod(pos / n, 1.0)) / n
    elif method == "sinc":
        out = kernels.sinc_interp_rows(rows, pos)
    else:
        raise ValueError(f"unknown resampling method {method!r}")
    out[(pos < -1e-9) | (pos > n - 1 + 1e-9)] = 0
    return out


def keystone_transform(data: DataMatrix, reference_frequency: float, kappa: float = KAPPA,
                       method: str = "czt", origin: str = "start") -> DataMatrix:
    """Keystone-resample ``data`` about ``reference_frequency``; return fast time.

    ``data`` may be in either domain.  Range-frequency bins with
    ``|f| >= kappa * reference_frequency`` are zeroed.  ``origin`` places
    the slow-time origin of the stretch at the first pulse (``"start"``) or
    at the aperture centre (``"center"``).
    """
    spec = data.to_range_frequency()
    f = spec.freqs
    keep = np.abs(f) < kappa * reference_frequency
    values = spec.values
    total = float(np.sum(np.abs(values) ** 2))
    if total > 0:
        lost = float(np.sum(np.abs(values[:, ~keep]) ** 2)) / total
        log.debug("keystone: %.4f%% of energy in zeroed bins", 100 * lost)
    else:
        lost = 0.0
    n = spec.n_pulses
    org = 0.0 if origin == "start" else (n - 1) / 2.0
    out = np.zeros_like(values)
    cols = np.flatnonzero(keep)
    if cols.size:
        res = rescale_rows(values[:, cols].T, keystone_scale(f[cols], reference_frequency), org, method)
        out[:, cols] = res.T
    meta = dict(spec.meta, keystone_reference=reference_frequency, keystone_discarded=lost,
                keystone_origin=org)
    return DataMatrix(np.fft.ifft(out, axis=1), FAST_TIME, spec.pri, spec.fs, spec.gate_start, meta)


def peak_track(matrix: DataMatrix) -> np.ndarray:
    """Per-pulse range bin of maximum magnitude."""
    return np.argmax(np.abs(matrix.to_fast_time().values), axis=1)


def residual_walk(matrix: DataMatrix) -> float:
    """Largest deviation (cells) of the per-pulse peak from its median bin."""
    v = np.abs(matrix.to_fast_time().values)
    if not np.any(v):
        raise MetricError("residual walk undefined for an all-zero matrix")
    live = v.max(axis=1) > 0
    peaks = np.argmax(v[live], axis=1)
    return float(np.max(np.abs(peaks - np.median(peaks))))


def chirp_mixture_correction(matrix: DataMatrix, acceleration: float, c: float) -> DataMatrix:
    """Equalise the per-bin chirp rate left by the exact Keystone transform.

    After resampling, bin ``f`` carries the quadratic phase
    ``2 pi a f_ref^2 / (f_ref + f) u^2 / c`` (``u`` slow time from the stretch
    origin) instead of ``2 pi a f_ref u^2 / c``.  Given an acceleration
    hypothesis ``a`` this multiplies every bin by the conjugate of the
    difference, which also removes the residual range curvature.  The
    input must come from :func:`keystone_transform`.
    """
    ref = matrix.meta["keystone_reference"]
    org = matrix.meta["keystone_origin"]
    spec = matrix.to_range_frequency()
    f = spec.freqs
    u = (np.arange(spec.n_pulses) - org) * spec.pri
    live = np.abs(f) < ref
    excess = np.zeros_like(f)
    excess[live] = ref * ref / (ref + f[live]) - ref
    phase = np.mod(np.outer(u * u, excess) * (acceleration / c), 1.0)
    return spec.with_values(spec.values * np.exp(-2j * np.pi * phase)).to_fast_time()
