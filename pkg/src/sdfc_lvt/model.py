"""Domain types and echo synthesis.

Two synthesis paths are provided: the raw de-chirped-on-receive echo in the
fast-time domain, and the range-compressed echo written directly in the
range-frequency domain.  Noise power ``noise_variance`` (V^2) is always the
power of the complex white noise inside the signal band B, so that after
range compression ``SNR_PC = B * T_p * sigma^2 / V^2`` on both paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .errors import GateError, GeometryError

C_LIGHT = 2.99792458e8
FAST_TIME = "fast_time"
RANGE_FREQUENCY = "range_frequency"


@dataclass(frozen=True)
class RadarParams:
    """Waveform and system constants of a pulse-Doppler radar.

    Attributes
    ----------
    carrier_frequency : float
        f_c in Hz.
    bandwidth : float
        Chirp bandwidth B in Hz.
    pulse_width : float
        T_p in s.
    sampling_frequency : float
        Complex range sampling rate f_s in Hz.
    pri : float
        Pulse repetition interval T in s.
    pulse_count : int
        Number of coherently integrated pulses N.
    c : float
        Propagation speed in m/s.
    """

    carrier_frequency: float
    bandwidth: float
    pulse_width: float
    sampling_frequency: float
    pri: float
    pulse_count: int
    c: float = C_LIGHT

    def __post_init__(self):
        for name in ("carrier_frequency", "bandwidth", "pulse_width",
                     "sampling_frequency", "pri", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.pulse_count < 2:
            raise ValueError("pulse_count must be >= 2")
        if self.bandwidth > self.sampling_frequency * (1 + 1e-12):
            raise ValueError("bandwidth exceeds complex sampling frequency")

    @property
    def chirp_rate(self) -> float:
        return self.bandwidth / self.pulse_width

    @property
    def wavelength(self) -> float:
        return self.c / self.carrier_frequency

    @property
    def time_bandwidth(self) -> float:
        """Pulse-compression gain B*T_p (written B*tau in the SNR formulas)."""
        return self.bandwidth * self.pulse_width

    @property
    def aperture(self) -> float:
        return self.pulse_count * self.pri

    def slow_times(self) -> np.ndarray:
        return np.arange(self.pulse_count) * self.pri

    def with_pulses(self, n: int) -> "RadarParams":
        return replace(self, pulse_count=int(n))


@dataclass(frozen=True)
class Quadratic:
    """Radial motion R(t) = R0 - v0 t - a0 t^2 / 2."""

    r0: float
    v0: float = 0.0
    a0: float = 0.0


@dataclass(frozen=True)
class SarGeometry:
    """Side-looking SAR geometry with along/cross-track target velocities."""

    r0: float
    v_along: float = 0.0
    v_cross: float = 0.0
    v_platform: float = 0.0


@dataclass(frozen=True)
class TargetMotion:
    model: Union[Quadratic, SarGeometry]
    reflectivity: complex = 1.0

    def __post_init__(self):
        if not self.model.r0 > 0:
            raise ValueError("initial range must be positive")
        v = self.model.v0 if isinstance(self.model, Quadratic) else self.model.v_cross
        if abs(v) >= 1e5:
            raise ValueError("radial speed must be far below c")

    @classmethod
    def quadratic(cls, r0, v0=0.0, a0=0.0, reflectivity=1.0) -> "TargetMotion":
        return cls(Quadratic(float(r0), float(v0), float(a0)), complex(reflectivity))

    @property
    def r0(self) -> float:
        return self.model.r0

    def as_quadratic(self) -> Quadratic:
        if isinstance(self.model, Quadratic):
            return self.model
        v0, a0 = sar_to_quadratic(self.model)
        return Quadratic(self.model.r0, v0, a0)


@dataclass(frozen=True)
class Scene:
    targets: Sequence[TargetMotion]
    noise_variance: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.targets) < 1:
            raise ValueError("a scene needs at least one target")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")
        object.__setattr__(self, "targets", tuple(self.targets))

    def rng(self, stream: int = 0) -> np.random.Generator:
        return derived_rng(self.rng_seed, stream)


def derived_rng(seed: int, *counters: int) -> np.random.Generator:
    """Counter-based stream: the generator for ``(seed, *counters)``.

    Every random draw in the package goes through here, so a result depends
    only on the seed and the counters, never on evaluation order.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & (2**64 - 1), *map(int, counters)])))


@dataclass(frozen=True)
class DataMatrix:
    """Pulse x range sample grid.

    Rows are pulses (slow time, step ``pri``).  Columns are fast-time samples
    ``gate_start + m / fs`` or, for ``range_frequency``, the DFT bins of those
    samples stored in numpy FFT order (``np.fft.fftfreq``).
    """

    values: np.ndarray
    domain: str
    pri: float
    fs: float
    gate_start: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("values must be 2-D (pulses x range)")
        if self.domain not in (FAST_TIME, RANGE_FREQUENCY):
            raise ValueError(f"unknown domain {self.domain!r}")
        if v.shape[1] < 8:
            raise ValueError("need at least 8 range columns")
        if not (self.pri > 0 and self.fs > 0):
            raise ValueError("axis steps must be positive")
        v = v.astype(np.complex128, copy=False)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_pulses(self) -> int:
        return self.values.shape[0]

    @property
    def n_range(self) -> int:
        return self.values.shape[1]

    @property
    def freqs(self) -> np.ndarray:
        return np.fft.fftfreq(self.n_range, 1.0 / self.fs)

    @property
    def fast_times(self) -> np.ndarray:
        return self.gate_start + np.arange(self.n_range) / self.fs

    @property
    def slow_times(self) -> np.ndarray:
        return np.arange(self.n_pulses) * self.pri

    def with_values(self, values, domain=None) -> "DataMatrix":
        return DataMatrix(np.asarray(values), domain or self.domain, self.pri,
                          self.fs, self.gate_start, dict(self.meta))

    def to_fast_time(self) -> "DataMatrix":
        if self.domain == FAST_TIME:
            return self
        return self.with_values(np.fft.ifft(self.values, axis=1), FAST_TIME)

    def to_range_frequency(self) -> "DataMatrix":
        if self.domain == RANGE_FREQUENCY:
            return self
        return self.with_values(np.fft.fft(self.values, axis=1), RANGE_FREQUENCY)


# -- motion ------------------------------------------------------------------

def instantaneous_range(motion, t):
    """Target range at slow time ``t`` (scalar or array)."""
    m = motion.model if isinstance(motion, TargetMotion) else motion
    t = np.asarray(t, dtype=float)
    if isinstance(m, Quadratic):
        r = m.r0 - m.v0 * t - 0.5 * m.a0 * t**2
    else:
        r = np.hypot((m.v_platform - m.v_along) * t, m.r0 - m.v_cross * t)
    if np.any(r <= 0):
        raise GeometryError("target passes through the radar within the aperture")
    return r if r.ndim else float(r)


def sar_to_quadratic(geom: SarGeometry):
    """Second-order expansion of the SAR slant range: returns ``(v0, a0)``."""
    return float(geom.v_cross), float(-((geom.v_platform - geom.v_along) ** 2) / geom.r0)


# -- synthesis ---------------------------------------------------------------

def rect(x):
    """Unit window: one for |x| <= 1/2, else zero (edge tolerance 1e-9)."""
    return (np.abs(x) <= 0.5 + 1e-9).astype(float)


def default_gate(radar: RadarParams, scene: Scene):
    """Fast-time gate covering every target delay, padded by T_p each side."""
    t = radar.slow_times()
    delays = np.concatenate([2 * instantaneous_range(tg, t) / radar.c for tg in scene.targets])
    return float(delays.min() - radar.pulse_width), float(delays.max() + radar.pulse_width)


def fft_length(n: int, radar: RadarParams, limit: int = 8) -> int:
    """Smallest length >= n on which a quarter-band shift is a whole number of bins.

    Falls back to ``n`` when no such length exists below ``limit * n``.
    """
    step = radar.sampling_frequency / (radar.bandwidth / 4)
    for m in range(n, limit * n + 1):
        k = m / step
        if abs(k - round(k)) < 1e-9:
            return m
    return n


def _delays(radar, scene):
    t = radar.slow_times()
    return [2 * instantaneous_range(tg, t) / radar.c for tg in scene.targets]


def synthesize_raw_echo(radar: RadarParams, scene: Scene, range_gate=None) -> DataMatrix:
    """Received baseband echo (pulses x fast-time samples) under stop-and-hop.

    Noise: complex white Gaussian with per-sample variance ``V^2 f_s / B``
    (in-band power V^2).
    """
    start, stop = range_gate if range_gate is not None else default_gate(radar, scene)
    fs = radar.sampling_frequency
    n_r = int(round((stop - start) * fs))
    if n_r < 8:
        raise GateError("range gate shorter than 8 samples")
    tau = start + np.arange(n_r) / fs
    last = tau[-1]
    out = np.zeros((radar.pulse_count, n_r), dtype=np.complex128)
    for tg, td in zip(scene.targets, _delays(radar, scene)):
        half = radar.pulse_width / 2
        if td.min() - half < start - 1e-12 or td.max() + half > last + 1 / fs + 1e-12:
            raise GateError("range gate clips a target envelope; widen the gate")
        x = tau[None, :] - td[:, None]
        r = td * radar.c / 2
        out += (tg.reflectivity * rect(x / radar.pulse_width)
                * np.exp(-4j * np.pi * r / radar.wavelength)[:, None]
                * np.exp(1j * np.pi * radar.chirp_rate * x**2))
    if scene.noise_variance > 0:
        sigma2 = scene.noise_variance * fs / radar.bandwidth
        out += complex_noise(scene.rng(0), out.shape, sigma2)
    return DataMatrix(out, FAST_TIME, radar.pri, fs, start)


def in_band(freqs, bandwidth):
    """Half-open band mask [-B/2, B/2) on a frequency grid."""
    tol = 1e-9 * bandwidth
    return (freqs >= -bandwidth / 2 - tol) & (freqs < bandwidth / 2 - tol)


def synthesize_compressed_spectrum(radar: RadarParams, scene: Scene,
                                   range_gate=None, n_range=None) -> DataMatrix:
    """Range-compressed echo evaluated directly in the range-frequency domain.

    Normalised so that the inverse FFT of a unit-reflectivity, on-grid target
    peaks at sqrt(B T_p).  Columns use an FFT length from :func:`fft_length`.
    """
    start, stop = range_gate if range_gate is not None else default_gate(radar, scene)
    fs = radar.sampling_frequency
    if n_range is None:
        n_range = fft_length(int(round((stop - start) * fs)), radar)
    f = np.fft.fftfreq(n_range, 1 / fs)
    band = in_band(f, radar.bandwidth)
    n_band = int(band.sum())
    gain = math.sqrt(radar.time_bandwidth) * n_range / n_band
    out = np.zeros((radar.pulse_count, n_range), dtype=np.complex128)
    fb = f[band]
    for tg, td in zip(scene.targets, _delays(radar, scene)):
        r = td * radar.c / 2
        phase = (-4 * np.pi / radar.c) * np.outer(r, radar.carrier_frequency + fb) \
            + 2 * np.pi * fb[None, :] * start
        out[:, band] += tg.reflectivity * gain * np.exp(1j * phase)
    if scene.noise_variance > 0:
        sigma2 = scene.noise_variance * n_range**2 / n_band
        out += complex_noise(scene.rng(0), out.shape, sigma2)
    return DataMatrix(out, RANGE_FREQUENCY, radar.pri, fs, start)


def complex_noise(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """Circular complex Gaussian samples with total variance ``variance``."""
    s = math.sqrt(variance / 2)
    return s * rng.standard_normal(shape) + 1j * s * rng.standard_normal(shape)


# -- bundled scenario ----------------------------------------------------------

def table2_radar(c: float = 3e8, pulse_count: int = 2048) -> RadarParams:
    """Simulation radar of the reference experiment (L-band, 15 MHz chirp)."""
    return RadarParams(carrier_frequency=1e9, bandwidth=15e6, pulse_width=4e-6,
                       sampling_frequency=37.5e6, pri=500e-6,
                       pulse_count=pulse_count, c=c)


def table1_targets(amplitude_ratio: float = 2.0):
    """The fast (197.87 m/s) and slow (70.92 m/s) targets at 15.3 km.

    ``amplitude_ratio`` is sigma_1^2 / sigma_2^2.
    """
    return (TargetMotion.quadratic(15300.0, 197.87, 4.88, 1.0),
            TargetMotion.quadratic(15300.0, 70.92, 4.88, 1.0 / math.sqrt(amplitude_ratio)))
