"""Lv's transform (LVT), peak extraction and the end-to-end estimator.

Discrete LVT used here
----------------------
For a slow-time sequence ``x[n]`` on the centred time axis
``t_n = (n - (N-1)/2) T`` the symmetric instantaneous autocorrelation at an
integer lag ``d`` (lag time ``L = d T``) is

    R_d[p] = x[p + d] * conj(x[p]),   centre time  t_p = t_0(d) + p T.

For an LFM ``exp(j 2 pi (f0 t + gamma t^2 / 2))`` this is the 2-D tone
``exp(j 2 pi (f0 L + gamma L t))``.  The lags are ``d = q, q+2, ..., <= N-1``
(the constant delay ``q`` plays the role of the LVT delay constant).  The
transform evaluates, on a rectangular (frequency, chirp-rate) grid,

    LVT(f, g) = sum_d exp(-j 2 pi f L) sum_p R_d[p] exp(-j 2 pi (g / h) h L t_p),

i.e. the lag-dependent time scaling ``t -> h L t`` (Keystone-like) followed by
a 2-D Fourier transform.  The inner sum is a per-lag chirp-z transform, the
outer one an FFT over lags with step ``2T``, so the frequency axis spans
``[-1/(4T), 1/(4T))``.  The chirp-rate axis spans ``[-1/(2T), 1/(2T))``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from . import kernels
from .czt import dtft_grid
from .errors import PeakCountError, PrincipalIntervalError
from .keystone import chirp_mixture_correction, keystone_transform
from .model import (FAST_TIME, DataMatrix, RadarParams, Scene, TargetMotion,
                    synthesize_compressed_spectrum)
from .rangeproc import check_walk_constraint, sdfc_preprocess

log = logging.getLogger(__name__)


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class LVTConfig:
    """LVT parameters.

    Attributes
    ----------
    q : int
        Delay constant in samples (delay constant ``a = q T``).
    h : float
        Time-scaling factor.  It only rescales the internal chirp axis; the
        reported chirp rates do not depend on it.
    zero_pad_freq, zero_pad_chirp : int
        Grid oversampling factors (powers of two).
    chirp_limit : float or None
        Half-width of the chirp-rate axis in Hz/s.  ``None`` uses the full
        principal interval ``1/(2T)``.
    window : {"hann", "none"}
        Taper of the autocorrelation domain.  ``"hann"`` weights the samples
        of every lag by a Hann window over that lag's centre-time support.
        It removes the -14 dB sidelobes of the untapered transform; lags are
        left unweighted, which keeps bilinear cross-terms spread out.
    """

    q: int = 1
    h: float = 1.0
    zero_pad_freq: int = 4
    zero_pad_chirp: int = 4
    chirp_limit: Optional[float] = None
    window: str = "hann"

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not (_is_pow2(self.zero_pad_freq) and _is_pow2(self.zero_pad_chirp)):
            raise ValueError("zero-pad factors must be powers of two")
        if self.chirp_limit is not None and not self.chirp_limit > 0:
            raise ValueError("chirp_limit must be positive")
        if self.window not in ("hann", "none"):
            raise ValueError(f"unknown window {self.window!r}")

    def delay_constant(self, pri: float) -> float:
        return self.q * pri


@dataclass(frozen=True)
class LVTPlane:
    """Magnitude of the LVT on a (frequency, chirp-rate) grid.

    ``magnitude[i, j]`` belongs to ``freqs[i]`` (Hz) and ``chirps[j]`` (Hz/s).
    """

    magnitude: np.ndarray
    freqs: np.ndarray
    chirps: np.ndarray
    pri: float
    n: int
    q: int
    window: str = "hann"

    @property
    def freq_cell(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    @property
    def chirp_cell(self) -> float:
        return float(self.chirps[1] - self.chirps[0])


def natural_cells(n: int, pri: float):
    """Unpadded (frequency, chirp-rate) resolution cells of an N-pulse LVT.

    The frequency cell is the DFT bin ``1/(N T)`` of the lag axis.  The
    chirp cell ``4/(N T)^2`` is the DFT bin of the best-resolved lag
    (``L = NT/2`` observed over ``NT/2``); the main lobe half-width at half
    amplitude is about 0.87 of it.
    """
    span = n * pri
    return 1.0 / span, 4.0 / span**2


def _lags(n, q):
    d = np.arange(q, n, 2)
    if d.size < 2:
        raise ValueError(f"sequence of length {n} too short for q={q}")
    return d


def _taper(d, rows, n, window):
    """Weights of the autocorrelation samples ``R_d[p]``, p < n, for lags ``d[rows]``."""
    dd = d[rows]
    p = np.arange(n)[None, :]
    support = (n - dd)[:, None]
    if window == "none":
        return (p < support).astype(float)
    return np.where(p < support, np.sin(np.pi * (p + 1) / (support + 1)) ** 2, 0.0)


def lvt(signal, pri: float, cfg: LVTConfig = LVTConfig()) -> LVTPlane:
    """Lv's transform of a slow-time sequence.

    Parameters
    ----------
    signal : array_like, complex, shape (N,)
    pri : float
        Sample spacing T in s.
    cfg : LVTConfig

    Returns
    -------
    LVTPlane
    """
    x = np.asarray(signal, dtype=np.complex128)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    n = x.size
    if n < 4 * cfg.q:
        raise ValueError(f"signal length {n} < 4*q = {4 * cfg.q}")
    d = _lags(n, cfg.q)
    m = d.size
    cell_f, cell_g = natural_cells(n, pri)
    dg = cell_g / cfg.zero_pad_chirp
    lim = 1.0 / (2 * pri) if cfg.chirp_limit is None else min(cfg.chirp_limit, 1.0 / (2 * pri))
    n_g = 2 * int(math.floor(lim / dg))
    chirps = (np.arange(n_g) - n_g // 2) * dg
    # internal axis eta = h * gamma, scaled time h * L * t
    h = cfg.h
    eta0, deta = h * chirps[0], h * dg

    y = np.empty((m, n_g), dtype=np.complex128)
    block = max(1, (1 << 22) // (n + n_g))
    for b in range(0, m, block):
        dd = d[b:b + block]
        lag_t = dd * pri / h
        idx = np.arange(n)[None, :]
        valid = idx + dd[:, None] < n
        r = np.where(valid, x[np.minimum(idx + dd[:, None], n - 1)] * np.conj(x[idx]), 0)
        r *= _taper(d, slice(b, b + block), n, cfg.window)
        t0 = (dd / 2 - (n - 1) / 2) * pri
        # cycles per sample of exp(-j 2 pi eta (L/h) t) with t = t0 + p T
        start = eta0 * lag_t * pri
        step = deta * lag_t * pri
        z = dtft_grid(r, n_g, start, step)
        ph = np.mod(np.outer(lag_t * t0, eta0 + deta * np.arange(n_g)), 1.0)
        y[b:b + block] = z * np.exp(-2j * np.pi * ph)

    n_f = m * cfg.zero_pad_freq
    freqs = np.fft.fftshift(np.fft.fftfreq(n_f, 2 * pri))
    # lag d = q + 2 k: exp(-j 2 pi f q T) times an FFT over k with step 2T
    corr = np.exp(-2j * np.pi * np.mod(freqs * cfg.q * pri, 1.0))[:, None]
    mag = np.empty((n_f, n_g), dtype=np.float64)
    cblock = max(1, (1 << 22) // n_f)
    for c0 in range(0, n_g, cblock):
        sl = slice(c0, c0 + cblock)
        spec = np.fft.fftshift(np.fft.fft(y[:, sl], n=n_f, axis=0), axes=0)
        mag[:, sl] = np.abs(spec * corr)
    return LVTPlane(mag, freqs, chirps, pri, n, cfg.q, cfg.window)


def lvt_value(signal, pri: float, freq: float, chirp: float, q: int = 1,
              window: str = "hann") -> complex:
    """Direct (grid-free) evaluation of the LVT at one point."""
    x = np.asarray(signal, dtype=np.complex128)
    n = x.size
    d = _lags(n, q)
    w = _taper(d, slice(None), n, window)
    total = 0j
    for i, dd in enumerate(d):
        lag = dd * pri
        t = (np.arange(n - dd) + dd / 2 - (n - 1) / 2) * pri
        r = x[dd:] * np.conj(x[:n - dd]) * w[i, :n - dd]
        total += np.exp(-2j * np.pi * freq * lag) * np.sum(r * np.exp(-2j * np.pi * chirp * lag * t))
    return complex(total)


# -- peaks ---------------------------------------------------------------------

@dataclass(frozen=True)
class Peak:
    freq: float       # Hz
    chirp: float      # Hz/s
    amplitude: float
    index: tuple      # (freq index, chirp index) of the grid maximum


def _parabolic(ym, y0, yp):
    den = ym - 2 * y0 + yp
    if den >= 0:
        return 0.0, y0
    off = 0.5 * (ym - yp) / den
    return off, y0 - 0.25 * (ym - yp) * off


def extract_peaks(plane: LVTPlane, count: int, guard_cells: Optional[int] = None) -> List[Peak]:
    """Iterative maximum extraction with three-point quadratic refinement.

    After each maximum, a ``(2 guard + 1)^2`` neighbourhood is zeroed.  The
    default guard is two natural cells on the padded grid.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    mag = np.array(plane.magnitude, dtype=float)
    nonzero = int(np.count_nonzero(mag))
    if count > nonzero:
        raise PeakCountError(f"requested {count} peaks but only {nonzero} nonzero cells")
    if guard_cells is None:
        nf, ng = natural_cells(plane.n, plane.pri)
        guard_cells = 2 * max(int(round(nf / plane.freq_cell)), int(round(ng / plane.chirp_cell)))
    g = int(guard_cells)
    nfq, nch = mag.shape
    orig = plane.magnitude
    out = []
    for _ in range(count):
        i, j = np.unravel_index(int(np.argmax(mag)), mag.shape)
        if mag[i, j] <= 0:
            raise PeakCountError("ran out of nonzero cells while extracting peaks")
        y0 = float(orig[i, j])
        di = dj = 0.0
        gain = 0.0
        if 0 < i < nfq - 1:
            di, a1 = _parabolic(orig[i - 1, j], y0, orig[i + 1, j])
            gain += a1 - y0
        if 0 < j < nch - 1:
            dj, a2 = _parabolic(orig[i, j - 1], y0, orig[i, j + 1])
            gain += a2 - y0
        amp = y0 + gain
        f = plane.freqs[i] + di * plane.freq_cell
        c = plane.chirps[j] + dj * plane.chirp_cell
        out.append(Peak(float(f), float(c), float(amp), (int(i), int(j))))
        mag[max(0, i - g):i + g + 1, max(0, j - g):j + g + 1] = 0
    return out


class _LagProducts:
    """Tapered autocorrelation samples of one sequence, flattened over (lag, time).

    Holds only the valid samples ``p < N - d`` so that repeated small-grid
    evaluations cost ``O(N^2 / 4)`` each.
    """

    def __init__(self, x, pri, q, window):
        x = np.asarray(x, dtype=np.complex128)
        n = x.size
        d = _lags(n, q)
        w = _taper(d, slice(None), n, window)
        rows, p = np.nonzero(np.arange(n)[None, :] < (n - d)[:, None])
        dd = d[rows]
        # rows come out sorted; each lag is one contiguous run
        self.offsets = np.concatenate(([0], np.cumsum(n - d)[:-1]))
        self.lag = d * pri
        self.t0 = (d / 2 - (n - 1) / 2) * pri     # centre time of the first sample
        self.pri = pri
        self.r = x[p + dd] * np.conj(x[p]) * w[rows, p]

    def evaluate(self, freqs, chirps):
        freqs = np.asarray(freqs, dtype=float)
        chirps = np.asarray(chirps, dtype=float)
        if freqs.size == 0 or chirps.size == 0:
            raise ValueError("empty frequency or chirp grid")
        dg = float(chirps[1] - chirps[0]) if chirps.size > 1 else 0.0
        z = kernels.chirp_rowsums(self.r, self.offsets, self.lag, self.t0, self.pri,
                                  float(chirps[0]), dg, chirps.size)
        return np.exp(-2j * np.pi * np.mod(np.outer(freqs, self.lag), 1.0)) @ z


def zoom_lvt(signal, pri: float, freqs, chirps, q: int = 1, window: str = "hann") -> np.ndarray:
    """Complex LVT on an arbitrary small uniform (frequency, chirp) grid.

    ``chirps`` must be uniformly spaced.  Returns an array of shape
    ``(len(freqs), len(chirps))``.
    """
    return _LagProducts(signal, pri, q, window).evaluate(freqs, chirps)


def refine_peak(signal, pri: float, peak: Peak, plane: LVTPlane, passes: int = 3) -> Peak:
    """Polish a peak by repeated local zooms of the LVT magnitude.

    Each pass evaluates a 9 x 9 grid spanning one grid cell either side of the
    current estimate (the span shrinks by four per pass) and applies the
    three-point quadratic fit on both axes.
    """
    f, g = peak.freq, peak.chirp
    sf, sc = plane.freq_cell, plane.chirp_cell
    amp = peak.amplitude
    lp = _LagProducts(signal, pri, plane.q, plane.window)
    for _ in range(passes):
        fs = f + np.linspace(-1, 1, 9) * sf
        gs = g + np.linspace(-1, 1, 9) * sc
        mag = np.abs(lp.evaluate(fs, gs))
        i, j = np.unravel_index(int(np.argmax(mag)), mag.shape)
        di = dj = 0.0
        gain = 0.0
        if 0 < i < 8:
            di, a1 = _parabolic(mag[i - 1, j], mag[i, j], mag[i + 1, j])
            gain += a1 - mag[i, j]
        if 0 < j < 8:
            dj, a2 = _parabolic(mag[i, j - 1], mag[i, j], mag[i, j + 1])
            gain += a2 - mag[i, j]
        f = fs[i] + di * (fs[1] - fs[0])
        g = gs[j] + dj * (gs[1] - gs[0])
        amp = float(mag[i, j] + gain)
        sf, sc = sf / 4, sc / 4
    return Peak(float(f), float(g), amp, peak.index)


def map_to_motion(f0: float, chirp: float, delta_f: float, c: float, pri: Optional[float] = None):
    """(centroid frequency, chirp rate) of the product signal to (v, a).

    If ``pri`` is given the pair is checked against the principal intervals
    ``|f0| <= 1/(4T)`` and ``|chirp| <= 1/(2T)``.
    """
    if pri is not None:
        if abs(f0) > 1 / (4 * pri) or abs(chirp) > 1 / (2 * pri):
            raise PrincipalIntervalError(
                f"({f0:g} Hz, {chirp:g} Hz/s) outside the principal intervals for T={pri:g} s")
    k = c / (2.0 * delta_f)
    return k * f0, k * chirp


# -- end-to-end estimator ------------------------------------------------------

@dataclass(frozen=True)
class TargetEstimate:
    velocity: float        # m/s, at the first pulse
    acceleration: float    # m/s^2
    amplitude: float
    range_cell: int
    freq: float            # Hz, LVT centroid frequency (aperture centre)
    chirp: float           # Hz/s
    peak_index: tuple
    below_floor: bool = False


@dataclass
class EstimateReport:
    targets: List[TargetEstimate]
    velocity_cell: float       # m/s per LVT frequency cell
    acceleration_cell: float   # m/s^2 per LVT chirp cell
    noise_floor: float
    range_cells: List[int]
    diagnostics: dict = field(default_factory=dict)
    plane: Optional[LVTPlane] = field(default=None, repr=False)

    def as_dict(self):
        return {
            "targets": [dict(velocity_mps=t.velocity, acceleration_mps2=t.acceleration,
                             amplitude=t.amplitude, range_cell=t.range_cell, freq_hz=t.freq,
                             chirp_hzps=t.chirp, peak_index=list(t.peak_index),
                             below_floor=t.below_floor) for t in self.targets],
            "velocity_cell_mps": self.velocity_cell,
            "acceleration_cell_mps2": self.acceleration_cell,
            "noise_floor": self.noise_floor,
            "range_cells": list(self.range_cells),
            "diagnostics": self.diagnostics,
        }


def select_range_cells(matrix: DataMatrix, width: int = 1) -> List[int]:
    """Maximum-energy range cell and ``width`` neighbours on each side."""
    e = np.sum(np.abs(matrix.values) ** 2, axis=0)
    k = int(np.argmax(e))
    return [c for c in range(k - width, k + width + 1) if 0 <= c < matrix.n_range]


def azimuth_signal(matrix: DataMatrix, width: int = 1, mode: str = "fractional",
                   centre: Optional[float] = None):
    """Coherent sum of the ``2 width + 1`` range cells around the energy peak.

    With ``mode="integer"`` the cells are the maximum-energy cell and its
    neighbours.  With ``mode="fractional"`` the same three-cell kernel is
    centred on the sub-cell energy peak (parabolic fit of the log energy)
    and evaluated by band-limited interpolation.  Centring removes the
    spurious phase modulation that appears when Keystone zero-fill switches
    range-frequency bins off during the aperture.

    Returns
    -------
    x : ndarray, complex, shape (N,)
    centre : float
        Range-cell position of the kernel centre.  Passing ``centre`` skips
        the peak search and uses it directly.
    """
    n = matrix.n_range
    m = np.fft.fftfreq(n)
    if centre is not None:
        kern = sum(np.exp(2j * np.pi * m * c) for c in range(-width, width + 1))
        kern = kern * np.exp(2j * np.pi * m * centre) / n
        return matrix.to_range_frequency().values @ kern, float(centre)
    v = matrix.to_fast_time().values
    e = np.sum(np.abs(v) ** 2, axis=0)
    k = int(np.argmax(e))
    if mode == "integer":
        cells = [c for c in range(k - width, k + width + 1) if 0 <= c < n]
        return v[:, cells].sum(axis=1), float(k)
    if mode != "fractional":
        raise ValueError(f"unknown cell mode {mode!r}")
    off = 0.0
    ym, y0, yp = e[(k - 1) % n], e[k], e[(k + 1) % n]
    if ym > 0 and yp > 0:
        lm, l0, lp = np.log(ym), np.log(y0), np.log(yp)
        den = lm - 2 * l0 + lp
        if den < 0:
            off = float(np.clip(0.5 * (lm - lp) / den, -0.5, 0.5))
    return azimuth_signal(matrix, width, mode, k + off)


def _centred_times(n, pri):
    return (np.arange(n) - (n - 1) / 2) * pri


def fit_component(x, pri: float, freq: float, chirp: float, order: int = 3) -> np.ndarray:
    """Least-squares fit of ``env(t) * exp(j 2 pi (f t + chirp t^2 / 2))``.

    ``env`` is a complex Legendre polynomial of degree ``order`` on the
    centred aperture.  The envelope absorbs slow amplitude and phase
    modulation (Keystone zero-fill, residual curvature) that a pure LFM
    would leave behind after subtraction.
    """
    x = np.asarray(x, dtype=np.complex128)
    t = _centred_times(x.size, pri)
    u = t / max(abs(t[0]), pri)
    lfm = np.exp(2j * np.pi * np.mod(freq * t + 0.5 * chirp * t * t, 1.0))
    basis = lfm[:, None] * np.polynomial.legendre.legvander(u, order)
    coef, *_ = np.linalg.lstsq(basis, x, rcond=None)
    return basis @ coef


def fit_components(x, pri: float, params, order: int = 3):
    """Joint least-squares fit of several :func:`fit_component` models.

    Returns one fitted component per ``(freq, chirp)`` pair.
    """
    x = np.asarray(x, dtype=np.complex128)
    t = _centred_times(x.size, pri)
    u = t / max(abs(t[0]), pri)
    leg = np.polynomial.legendre.legvander(u, order)
    blocks = [np.exp(2j * np.pi * np.mod(f * t + 0.5 * g * t * t, 1.0))[:, None] * leg
              for f, g in params]
    basis = np.hstack(blocks)
    coef, *_ = np.linalg.lstsq(basis, x, rcond=None)
    w = order + 1
    return [b @ coef[i * w:(i + 1) * w] for i, b in enumerate(blocks)]


def clean_peaks(x, pri: float, count: int, cfg: LVTConfig = LVTConfig(), guard_cells=None,
                refine: bool = False, envelope_order: int = 3, relax: int = 1):
    """Successive-cancellation peak extraction on the LVT.

    The strongest peak is taken from the LVT of the residual, its component
    is fitted (:func:`fit_component`) and subtracted, and the next peak is
    searched on the new residual.  This removes both the main lobe and the
    bilinear cross-terms of every extracted component before the next,
    weaker one is looked for.  ``relax`` further passes re-estimate every
    component by grid-free refinement against the signal minus all other
    fitted components.

    Returns
    -------
    peaks : list of Peak
        In extraction (descending amplitude) order.
    plane : LVTPlane
        The LVT of the untouched signal.
    """
    x = np.asarray(x, dtype=np.complex128)
    resid = x.copy()
    plane0 = None
    peaks, comps = [], []
    for _ in range(count):
        plane = lvt(resid, pri, cfg)
        if plane0 is None:
            plane0 = plane
        pk = extract_peaks(plane, 1, guard_cells)[0]
        if refine:
            pk = refine_peak(resid, pri, pk, plane)
        comp = fit_component(resid, pri, pk.freq, pk.chirp, envelope_order)
        resid = resid - comp
        peaks.append(pk)
        comps.append(comp)
    for _ in range(relax if count > 1 or refine else 0):
        for k in range(count):
            others = sum((comps[j] for j in range(count) if j != k), np.zeros_like(x))
            xk = x - others
            pk = refine_peak(xk, pri, peaks[k], plane0)
            peaks[k] = Peak(pk.freq, pk.chirp, peaks[k].amplitude, peaks[k].index)
            comps[k] = fit_component(xk, pri, pk.freq, pk.chirp, envelope_order)
    return peaks, plane0


def _equalised_peaks(ks, radar, peaks, plane, cell_width, cell_mode, passes, tol=1e-4):
    """Solve ``estimate(equalise(ks, a)) = a`` per target by secant steps.

    Without equalisation the LVT sees the exact Keystone output, whose
    range-frequency bins carry chirp rates ``gamma f_ref / (f_ref + f)``;
    the fitted chirp rate is then a shrunken mixture.  The map from the
    hypothesis to the re-estimated chirp is close to affine, so the secant
    iteration converges in two or three passes.
    """
    k = radar.c / (2 * radar.bandwidth / 2)
    hyp = [p.chirp for p in peaks]
    prev = [None] * len(peaks)
    out = list(peaks)
    for _ in range(passes):
        done = True
        for i, p in enumerate(out):
            y, _ = azimuth_signal(chirp_mixture_correction(ks, k * hyp[i], radar.c),
                                  cell_width, cell_mode)
            comps = fit_components(y, radar.pri, [(q.freq, q.chirp) for q in out])
            yk = y - sum((comps[j] for j in range(len(out)) if j != i), np.zeros_like(y))
            r = refine_peak(yk, radar.pri, p, plane)
            out[i] = Peak(r.freq, r.chirp, p.amplitude, p.index)
            resid = r.chirp - hyp[i]
            if prev[i] is not None and resid != prev[i][1]:
                h0, r0 = prev[i]
                step = -resid * (hyp[i] - h0) / (resid - r0)
            else:
                step = resid
            prev[i] = (hyp[i], resid)
            hyp[i] += step
            if abs(step) > tol * plane.chirp_cell:
                done = False
        if done:
            break
    return out


def sdfc_lvt_estimate(source: Union[DataMatrix, Scene], radar: RadarParams, count: int,
                      cfg: LVTConfig = LVTConfig(), *, equalize: bool = False,
                      keystone_method: str = "czt", keystone_origin: str = "start",
                      cell_width: int = 1, cell_mode: str = "fractional",
                      extraction: str = "clean", refine: bool = False, relax: int = 1,
                      mixture_passes: int = 4, guard_cells=None, floor_factor: float = 6.0,
                      truth: Optional[Sequence[TargetMotion]] = None,
                      keep_plane: bool = False) -> EstimateReport:
    """Full chain: compression, sub-band product, Keystone, LVT, peaks, motion.

    Parameters
    ----------
    source : DataMatrix or Scene
        Raw fast-time echo, range-compressed spectrum, or a scene to be
        synthesised on the compressed-spectrum path.
    count : int
        Number of targets K to extract.
    extraction : {"clean", "plane"}
        ``"clean"`` uses :func:`clean_peaks`; ``"plane"`` reads all K peaks
        from one LVT plane with :func:`extract_peaks`.
    mixture_passes : int
        Maximum passes of per-target chirp-rate equalisation
        (:func:`~sdfc_lvt.keystone.chirp_mixture_correction`) followed by
        grid-free re-estimation.  Zero reads the estimates off the plain
        Keystone output, whose chirp rates are biased low.
    truth : sequence of TargetMotion, optional
        When given, the walk and principal-interval constraints are checked
        for each true target and a warning is issued on violation.

    Returns
    -------
    EstimateReport
        Velocities refer to the first pulse.
    """
    if isinstance(source, Scene):
        source = synthesize_compressed_spectrum(radar, source)
    delta_f = radar.bandwidth / 2
    diag = {}
    if truth is not None:
        checks = [check_walk_constraint(radar, delta_f, tm.as_quadratic().v0, tm.as_quadratic().a0)
                  for tm in truth]
        diag["truth_constraints_ok"] = all(bool(c) for c in checks)
        if not diag["truth_constraints_ok"]:
            warnings.warn("a true target violates the walk or principal-interval constraint")
    product = sdfc_preprocess(source, radar, equalize)
    ks = keystone_transform(product, delta_f, method=keystone_method, origin=keystone_origin)
    diag["keystone_discarded"] = ks.meta["keystone_discarded"]
    x, centre = azimuth_signal(ks, cell_width, cell_mode)
    diag["range_centre"] = centre
    cells = [int(round(centre)) + c for c in range(-cell_width, cell_width + 1)]
    if extraction == "clean":
        peaks, plane = clean_peaks(x, radar.pri, count, cfg, guard_cells, refine, relax=relax)
    elif extraction == "plane":
        plane = lvt(x, radar.pri, cfg)
        peaks = extract_peaks(plane, count, guard_cells)
        if refine:
            peaks = [refine_peak(x, radar.pri, p, plane) for p in peaks]
    else:
        raise ValueError(f"unknown extraction {extraction!r}")
    k = radar.c / (2 * delta_f)
    if mixture_passes:
        peaks = _equalised_peaks(ks, radar, peaks, plane, cell_width, cell_mode, mixture_passes)
    floor = floor_factor * float(np.median(plane.magnitude))
    t_mid = (radar.pulse_count - 1) * radar.pri / 2
    out = []
    for p in peaks:
        v_mid, a = map_to_motion(p.freq, p.chirp, delta_f, radar.c)
        v0 = v_mid - a * t_mid
        if not check_walk_constraint(radar, delta_f, v0, a):
            log.warning("estimate (%.3f m/s, %.3f m/s^2) violates the walk constraint", v0, a)
        out.append(TargetEstimate(v0, a, p.amplitude, cells[len(cells) // 2], p.freq, p.chirp,
                                  p.index, p.amplitude < floor))
    return EstimateReport(out, k * plane.freq_cell, k * plane.chirp_cell, floor, cells, diag,
                          plane if keep_plane else None)
