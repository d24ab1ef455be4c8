"""Monte Carlo measurement of the conjugate-product SNR and its moments.

One trial is one independent noise realisation of a single compressed pulse.
The target is placed on a fast-time sample so that the signal-only product
attains its ideal peak ``sigma^2 B T_p / 4`` at the sample ``tau_0``.  Noise
is added in the range-frequency domain with the package convention (in-band
power V^2), then the pulse goes through the same sub-band split as the
estimator, so the two sub-band noises are independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..model import (RadarParams, Scene, TargetMotion, complex_noise, derived_rng,
                     fft_length, in_band, instantaneous_range,
                     synthesize_compressed_spectrum)
from ..rangeproc import split_subbands
from .closed_form import snr_sdfc_closed_form

SNR_STREAM = 0x534E52  # counter namespace for SNR trials


def db(x):
    return 10.0 * math.log10(x) if x > 0 else (math.inf if x == math.inf else -math.inf)


@dataclass(frozen=True)
class SnrCurvePoint:
    """One point of the measured-versus-predicted output SNR curve (dB)."""

    snr_in: float
    snr_pc: float
    snr_sdfc_predicted: float
    snr_sdfc_measured: float
    stderr: float
    trials: int

    def __post_init__(self):
        if self.trials < 100:
            raise ValueError("an SNR point needs at least 100 trials")


@dataclass(frozen=True)
class ProductSamples:
    """Signal and noise sub-band samples at ``tau_0``, one entry per trial."""

    s1: complex
    s2: complex
    n1: np.ndarray
    n2: np.ndarray
    noise_variance: float
    peak: float          # sigma^2 B T_p / 4 for the synthesised target

    @property
    def signal(self) -> complex:
        return self.s2 * np.conj(self.s1)

    @property
    def noisy(self) -> np.ndarray:
        return (self.s2 + self.n2) * np.conj(self.s1 + self.n1)


def product_samples(radar: RadarParams, target: TargetMotion, snr_in_db: float,
                    trials: int, seed: int) -> ProductSamples:
    """Draw ``trials`` noisy conjugate-product values at the signal peak.

    ``snr_in_db`` is ``10 log10(|sigma|^2 / V^2)``; ``inf`` gives V^2 = 0.
    """
    one = radar.with_pulses(2)
    r0 = float(instantaneous_range(target, 0.0))
    fs = radar.sampling_frequency
    # put the first-pulse delay exactly on sample 32 of the gate
    start = 2 * r0 / radar.c - 32 / fs
    n_range = fft_length(64 + int(math.ceil(radar.pulse_width * fs)), radar)
    gate = (start, start + n_range / fs)
    spec = synthesize_compressed_spectrum(one, Scene([target]), gate, n_range)
    sig = split_subbands(spec.with_values(spec.values[:1]), radar)
    prod = sig.part2.values[0] * np.conj(sig.part1.values[0])
    k0 = int(np.argmax(np.abs(prod)))
    s1, s2 = sig.part1.values[0, k0], sig.part2.values[0, k0]
    sigma2 = abs(target.reflectivity) ** 2
    v2 = 0.0 if math.isinf(snr_in_db) else sigma2 / 10 ** (snr_in_db / 10)
    f = np.fft.fftfreq(n_range, 1 / fs)
    n_band = int(in_band(f, radar.bandwidth).sum())
    noise = np.empty((trials, n_range), dtype=np.complex128)
    for i in range(trials):
        noise[i] = complex_noise(derived_rng(seed, SNR_STREAM, i), n_range,
                                 v2 * n_range**2 / n_band)
    nz = split_subbands(spec.with_values(noise), radar)
    return ProductSamples(s1, s2, nz.part1.values[:, k0], nz.part2.values[:, k0], v2,
                          sigma2 * radar.time_bandwidth / 4)


def measure_snr_sdfc(radar: RadarParams, target: TargetMotion, snr_in: float,
                     trials: int = 1000, seed: int = 0) -> SnrCurvePoint:
    """Measured output SNR of the conjugate product versus the closed form.

    The measurement is ``|product of signals at tau_0|^2`` over the sample
    variance of the noisy product at ``tau_0``.  The standard error follows
    from the spread of the squared deviations (delta method, in dB).

    Parameters
    ----------
    snr_in : float
        Input SNR in dB.
    """
    if trials < 100:
        raise ValueError("trials must be >= 100")
    snr_in = float(snr_in)
    snr_pc = snr_in + 10 * math.log10(radar.time_bandwidth)
    pred = db(snr_sdfc_closed_form(10 ** (snr_pc / 10))) if not math.isinf(snr_in) else math.inf
    smp = product_samples(radar, target, snr_in, trials, seed)
    x = smp.noisy
    dev = np.abs(x - x.mean()) ** 2
    var = float(dev.sum() / (trials - 1))
    if smp.noise_variance == 0.0:
        return SnrCurvePoint(snr_in, snr_pc, pred, math.inf, 0.0, trials)
    power = float(abs(smp.signal) ** 2)
    se = 10 / math.log(10) * float(dev.std(ddof=1)) / math.sqrt(trials) / var
    return SnrCurvePoint(snr_in, snr_pc, pred, db(power / var), se, trials)


def snr_curve(radar, target, snr_pc_db, trials=1000, seed=0):
    """:func:`measure_snr_sdfc` over a list of compressed-pulse SNRs (dB)."""
    off = 10 * math.log10(radar.time_bandwidth)
    return [measure_snr_sdfc(radar, target, s - off, trials, derived_rng(seed, i).integers(2**63))
            for i, s in enumerate(snr_pc_db)]


@dataclass(frozen=True)
class Moment:
    """Sample estimate of one expectation alongside its published value."""

    name: str
    estimate: complex
    stderr: float
    printed: complex

    @property
    def z(self) -> float:
        """Deviation from the printed value in standard errors."""
        d = abs(self.estimate - self.printed)
        if self.stderr > 0:
            return d / self.stderr
        # deterministic term: only rounding error is allowed
        return 0.0 if d <= 1e-9 * max(abs(self.printed), 1.0) else math.inf


def _moment(name, samples, printed):
    samples = np.asarray(samples)
    if samples.ndim == 0:
        return Moment(name, complex(samples), 0.0, complex(printed))
    n = samples.size
    se = math.sqrt(float(np.var(samples.real, ddof=1) + np.var(samples.imag, ddof=1)) / n)
    return Moment(name, complex(samples.mean()), se, complex(printed))


def sdfc_moments(radar: RadarParams, target: TargetMotion, snr_in: float,
                 trials: int = 10000, seed: int = 0) -> Dict[str, Moment]:
    """Sample moments of the noisy product against the published identities.

    Keys ``m1`` .. ``m6`` are the six expectations in the expansion of the
    product's second moment (signal-signal, the four signal-noise terms and
    noise-noise), ``mean`` is the first moment and ``variance`` the
    variance.  ``printed`` holds the published value of each, written with
    the actual signal samples so the phase factors match.
    """
    smp = product_samples(radar, target, snr_in, trials, seed)
    s1, s2, n1, n2 = smp.s1, smp.s2, smp.n1, smp.n2
    v2 = smp.noise_variance
    pk = smp.peak
    out = {
        "m1": _moment("s2 s2* s1* s1", s2 * np.conj(s2) * np.conj(s1) * s1, pk**2),
        "m2": _moment("s2 s2* n1* n1", s2 * np.conj(s2) * np.conj(n1) * n1, pk * v2 / 2),
        "m3": _moment("s2 s1* n2* n1", s2 * np.conj(s1) * np.conj(n2) * n1,
                      s2 * np.conj(s1) * v2 / 2),
        "m4": _moment("s1 s2* n1* n2", s1 * np.conj(s2) * np.conj(n1) * n2,
                      s1 * np.conj(s2) * v2 / 2),
        "m5": _moment("s1 s1* n2* n2", s1 * np.conj(s1) * np.conj(n2) * n2, pk * v2 / 2),
        "m6": _moment("n1* n2 n2* n1", np.abs(n1 * n2) ** 2, v2 * v2 / 2),
    }
    x = smp.noisy
    out["mean"] = _moment("E[x]", x, smp.signal + v2 / 2)
    dev = np.abs(x - x.mean()) ** 2
    out["variance"] = _moment("var[x]", dev * trials / (trials - 1), pk * v2 + v2 * v2 / 4)
    return out
