"""Cross-terms of the conjugate product: predicted loci and measurements."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..keystone import keystone_transform
from ..lvt import LVTConfig, azimuth_signal, lvt
from ..model import (DataMatrix, RadarParams, Scene, TargetMotion, default_gate,
                     synthesize_compressed_spectrum)
from ..rangeproc import conjugate_product, split_subbands


def crossterm_locus(target_i: TargetMotion, target_j: TargetMotion, radar: RadarParams,
                    delta_f: Optional[float] = None, t=None):
    """Fast-time centres of the two cross-term envelopes after Keystone.

    Uses the first-order Keystone expansion::

        tau(t) = [R0i + R0j + (a_i + a_j) t^2 / 2] / c
                 +/- (f_c1 + f_c2) [(v_i - v_j) t + (a_i - a_j) t^2] / (c delta_f)

    with ``f_c1, f_c2 = f_c -/+ delta_f / 2``.  For identical motions both
    curves reduce to the auto-term locus ``2 (R0 + a t^2 / 2) / c``.

    Parameters
    ----------
    t : array_like, optional
        Keystone slow time; defaults to the pulse times ``n T``.

    Returns
    -------
    (tau_plus, tau_minus) : tuple of ndarray, in seconds
    """
    if delta_f is None:
        delta_f = radar.bandwidth / 2
    t = radar.slow_times() if t is None else np.asarray(t, dtype=float)
    qi, qj = target_i.as_quadratic(), target_j.as_quadratic()
    c = radar.c
    fsum = 2 * radar.carrier_frequency
    base = (qi.r0 + qj.r0 + 0.5 * (qi.a0 + qj.a0) * t * t) / c
    split = fsum * ((qi.v0 - qj.v0) * t + (qi.a0 - qj.a0) * t * t) / (c * delta_f)
    return base + split, base - split


def crossterm_matrices(radar: RadarParams, target_i: TargetMotion, target_j: TargetMotion,
                       gate=None):
    """The two cross-terms ``s2_i conj(s1_j)`` and ``s2_j conj(s1_i)`` (fast time).

    Their sum equals the two-target product minus both single-target
    products.
    """
    if gate is None:
        gate = default_gate(radar, Scene([target_i, target_j]))
    a = split_subbands(synthesize_compressed_spectrum(radar, Scene([target_i]), gate), radar)
    b = split_subbands(synthesize_compressed_spectrum(radar, Scene([target_j]), gate), radar)
    xij = a.part2.with_values(a.part2.values * np.conj(b.part1.values))
    xji = a.part2.with_values(b.part2.values * np.conj(a.part1.values))
    return xij, xji


@dataclass(frozen=True)
class LocusCheck:
    """Per-pulse comparison of a measured cross-term track with the loci."""

    peak_cell: np.ndarray      # measured per-pulse argmax bin
    peak_value: np.ndarray     # its magnitude
    cell_plus: np.ndarray      # predicted bins, wrapped onto the FFT grid
    cell_minus: np.ndarray
    deviation: np.ndarray      # cells, nearest of the two loci, circular
    significant: np.ndarray    # pulses whose peak is within ``floor_db`` of the max

    @property
    def fraction_within(self) -> float:
        """Share of significant pulses within one cell of a locus."""
        return float(np.mean(self.deviation[self.significant] <= 1.0))

    @property
    def max_deviation(self) -> float:
        return float(self.deviation[self.significant].max())


def _wrap(d, n):
    return np.abs((d + n / 2) % n - n / 2)


def check_locus(matrix: DataMatrix, radar: RadarParams, target_i, target_j,
                delta_f=None, floor_db: float = 20.0) -> LocusCheck:
    """Compare the per-pulse peak of ``matrix`` with the predicted cross-term loci.

    Delays beyond the gate alias onto the circular range-FFT grid, so the
    predicted bins and the deviations are taken modulo the FFT length.
    """
    v = np.abs(matrix.to_fast_time().values)
    n = matrix.n_range
    arg = np.argmax(v, axis=1)
    pk = v[np.arange(v.shape[0]), arg]
    tp, tm = crossterm_locus(target_i, target_j, radar, delta_f)
    cp = np.mod((tp - matrix.gate_start) * matrix.fs, n)
    cm = np.mod((tm - matrix.gate_start) * matrix.fs, n)
    dev = np.minimum(_wrap(arg - cp, n), _wrap(arg - cm, n))
    sig = pk >= pk.max() * 10 ** (-floor_db / 20) if pk.max() > 0 else np.zeros(len(pk), bool)
    return LocusCheck(arg, pk, cp, cm, dev, sig)


def measured_crossterm_locus(radar: RadarParams, target_i: TargetMotion,
                             target_j: TargetMotion, gate=None, keystone: bool = True,
                             floor_db: float = 20.0) -> LocusCheck:
    """Simulate the pair's cross-term, optionally Keystone it, and check the loci."""
    xij, xji = crossterm_matrices(radar, target_i, target_j, gate)
    x = xij.with_values(xij.values + xji.values)
    if keystone:
        x = keystone_transform(x, radar.bandwidth / 2)
    return check_locus(x, radar, target_i, target_j, floor_db=floor_db)


@dataclass(frozen=True)
class CrosstermMargin:
    """Weaker auto-term peak versus the strongest cross-term plane value."""

    auto_weak_clean: float
    auto_weak_noisy: float
    cross_max: float
    cross_plane: np.ndarray
    weak_index: tuple

    @property
    def margin_db(self) -> float:
        if self.cross_max <= 0:
            return math.inf
        return 20 * math.log10(self.auto_weak_noisy / self.cross_max)


def crossterm_margin(radar: RadarParams, targets: Sequence[TargetMotion],
                     snr_in_db: Optional[float] = None, seed: int = 0,
                     cfg: LVTConfig = LVTConfig()) -> CrosstermMargin:
    """Cross-term plane of a two-target scene by subtracting single-target planes.

    All azimuth signals are taken at the range centre of the two-target
    Keystone output.  The cross-term plane is
    ``|LVT(x_12)| - |LVT(x_1)| - |LVT(x_2)|`` on noise-free data; its
    maximum is compared with the value of the noisy two-target plane at the
    weaker target's auto-term peak.  ``snr_in_db`` is relative to the
    strongest target (``None`` means noise-free).
    """
    if len(targets) != 2:
        raise ValueError("crossterm_margin needs exactly two targets")
    gate = default_gate(radar, Scene(list(targets)))
    df = radar.bandwidth / 2

    def ks(scene):
        spec = synthesize_compressed_spectrum(radar, scene, gate)
        return keystone_transform(conjugate_product(split_subbands(spec, radar)), df)

    k12 = ks(Scene(list(targets)))
    _, centre = azimuth_signal(k12)
    planes = [lvt(azimuth_signal(ks(Scene([tg])), centre=centre)[0], radar.pri, cfg).magnitude
              for tg in targets]
    p12 = lvt(azimuth_signal(k12, centre=centre)[0], radar.pri, cfg).magnitude
    cross = p12 - planes[0] - planes[1]
    weak = int(np.argmin([abs(t.reflectivity) for t in targets]))
    idx = np.unravel_index(int(np.argmax(planes[weak])), planes[weak].shape)
    noisy = p12
    if snr_in_db is not None and not math.isinf(snr_in_db):
        v2 = max(abs(t.reflectivity) for t in targets) ** 2 / 10 ** (snr_in_db / 10)
        kn = ks(Scene(list(targets), v2, seed))
        noisy = lvt(azimuth_signal(kn, centre=centre)[0], radar.pri, cfg).magnitude
    return CrosstermMargin(float(planes[weak][idx]), float(noisy[idx]), float(cross.max()),
                           cross, tuple(int(i) for i in idx))
