"""Range compression and sub-band dual-frequency conjugate preprocessing."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SupportError
from .model import FAST_TIME, RANGE_FREQUENCY, DataMatrix, RadarParams, fft_length, in_band


def reference_chirp(radar: RadarParams, n: int) -> np.ndarray:
    """Transmit chirp sampled on a circular grid centred on index 0."""
    k = np.arange(n)
    k = np.where(k < (n + 1) // 2, k, k - n)
    x = k / radar.sampling_frequency
    keep = np.abs(x / radar.pulse_width) <= 0.5 + 1e-9
    if 2 * int(keep.sum()) - 1 > 2 * n:
        raise SupportError("FFT length shorter than the transmit pulse")
    return keep * np.exp(1j * np.pi * radar.chirp_rate * x**2)


def range_compress(raw: DataMatrix, radar: RadarParams, equalize: bool = False) -> DataMatrix:
    """Matched-filter each pulse; return the range-frequency matrix.

    The filter is scaled so a unit-reflectivity target sampled on-grid peaks
    at sqrt(B*T_p) after an inverse FFT.  With ``equalize=True`` the in-band
    spectrum is divided by the chirp spectrum instead (flat passband,
    out-of-band bins zeroed), which reproduces the ideal compressed
    spectrum exactly for on-grid delays.
    """
    if raw.domain != FAST_TIME:
        raise DomainError("range_compress expects a fast-time matrix")
    n = fft_length(raw.n_range, radar)
    h = reference_chirp(radar, n)
    spec = np.fft.fft(raw.values, n=n, axis=1)
    hf = np.fft.fft(h)
    if equalize:
        band = in_band(np.fft.fftfreq(n, 1 / radar.sampling_frequency), radar.bandwidth)
        gain = math.sqrt(radar.time_bandwidth) * n / band.sum()
        filt = np.zeros(n, dtype=complex)
        filt[band] = gain / hf[band]
    else:
        filt = np.conj(hf) * (math.sqrt(radar.time_bandwidth) / np.sum(np.abs(h) ** 2))
    return DataMatrix(spec * filt, RANGE_FREQUENCY, raw.pri, raw.fs, raw.gate_start, dict(raw.meta))


@dataclass(frozen=True)
class SubbandPair:
    """Lower (part1) and upper (part2) half-band signals, recentred, in fast time."""

    part1: DataMatrix
    part2: DataMatrix
    delta_f: float
    fc1: float
    fc2: float
    gain: float

    @property
    def gains(self):
        return self.gain, self.gain


def subband_masks(freqs: np.ndarray, bandwidth: float):
    """Disjoint masks for [-B/2, 0) and [0, B/2); the DC bin goes to the upper half."""
    band = in_band(freqs, bandwidth)
    return band & (freqs < 0), band & (freqs >= 0)


def split_subbands(spectrum: DataMatrix, radar: RadarParams) -> SubbandPair:
    """Split the range spectrum in two halves and shift each to zero centre.

    The shifts (+B/4 for the lower half, -B/4 for the upper) are applied as
    complex modulations on the absolute fast-time axis, so each part carries
    the carrier phase of its own sub-band centre f_c -/+ B/4.
    """
    if spectrum.domain != RANGE_FREQUENCY:
        raise DomainError("split_subbands expects a range-frequency matrix")
    f = spectrum.freqs
    m1, m2 = subband_masks(f, radar.bandwidth)
    if spectrum.fs < radar.bandwidth * (1 - 1e-12) or m1.sum() < 2 or m2.sum() < 2:
        raise SupportError("range spectrum does not cover [-B/2, B/2]")
    delta_f = radar.bandwidth / 2
    tau = spectrum.fast_times
    shift = np.exp(1j * np.pi * delta_f * tau)
    p1 = np.fft.ifft(spectrum.values * m1, axis=1) * shift
    p2 = np.fft.ifft(spectrum.values * m2, axis=1) * np.conj(shift)
    meta = dict(spectrum.meta, delta_f=delta_f)
    mk = lambda v: DataMatrix(v, FAST_TIME, spectrum.pri, spectrum.fs, spectrum.gate_start, meta)
    fc = radar.carrier_frequency
    return SubbandPair(mk(p1), mk(p2), delta_f, fc - radar.bandwidth / 4,
                       fc + radar.bandwidth / 4, math.sqrt(radar.time_bandwidth) / 2)


def unshift_subbands(pair: SubbandPair):
    """Inverse of the recentring: the two half-band spectra on the original grid."""
    shift = np.exp(1j * np.pi * pair.delta_f * pair.part1.fast_times)
    s1 = np.fft.fft(pair.part1.values * np.conj(shift), axis=1)
    s2 = np.fft.fft(pair.part2.values * shift, axis=1)
    return s1, s2


def conjugate_product(pair: SubbandPair) -> DataMatrix:
    """Upper sub-band times the conjugate of the lower, sample by sample."""
    v = pair.part2.values * np.conj(pair.part1.values)
    return pair.part1.with_values(v, FAST_TIME)


def sdfc_preprocess(data: DataMatrix, radar: RadarParams, equalize: bool = False) -> DataMatrix:
    """Raw or range-compressed data to the conjugate-product signal."""
    spec = range_compress(data, radar, equalize) if data.domain == FAST_TIME else data
    return conjugate_product(split_subbands(spec, radar))


def max_unambiguous_velocity(reference_frequency: float, pri: float, c: float) -> float:
    """Blind speed limit c / (4 f T) for carrier ``reference_frequency``."""
    if not (reference_frequency > 0 and pri > 0 and c > 0):
        raise ValueError("inputs must be positive")
    return c / (4.0 * reference_frequency * pri)


@dataclass(frozen=True)
class WalkCheck:
    ok: bool
    walk_margin: float       # m/s
    frequency_margin: float  # Hz
    chirp_margin: float      # Hz/s (bound taken literally as 1/(2T))

    def __bool__(self):
        return self.ok


def check_walk_constraint(radar: RadarParams, delta_f: float, v0: float, a0: float) -> WalkCheck:
    """Keystone walk bound and the two LVT principal-interval bounds."""
    c, T, N = radar.c, radar.pri, radar.pulse_count
    walk = max_unambiguous_velocity(delta_f, T, c) - abs(v0 + a0 * N * T)
    freq = 1 / (4 * T) - abs(2 * v0 * delta_f / c)
    chirp = 1 / (2 * T) - abs(2 * a0 * delta_f / c)
    return WalkCheck(bool(walk >= 0 and freq >= 0 and chirp >= 0), float(walk), float(freq), float(chirp))
