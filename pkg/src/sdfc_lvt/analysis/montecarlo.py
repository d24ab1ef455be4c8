"""Monte Carlo RMSE of the SDFC-LVT estimator versus input SNR."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

from ..lvt import LVTConfig, sdfc_lvt_estimate
from ..model import RadarParams, Scene, derived_rng
from .closed_form import variance_bounds

RMSE_STREAM = 0x524D5345


@dataclass(frozen=True)
class RmsePoint:
    """RMSE of one target at one input SNR, with the published bounds.

    ``snr_in`` is the scene SNR in dB (relative to the strongest target);
    the bounds use the target's own SNR.  RMSEs are over successful
    associations only.
    """

    snr_in: float
    target: int
    rmse_v: float
    rmse_a: float
    bound_v: float
    bound_a: float
    trials: int
    successes: int
    stderr_v: float
    stderr_a: float
    flagged: bool

    def __post_init__(self):
        if self.trials < 100:
            raise ValueError("an RMSE point needs at least 100 trials")

    @property
    def failure_rate(self) -> float:
        return 1.0 - self.successes / self.trials


def associate(estimates, truths, v_cell: float, a_cell: float, gate: float = 1.0):
    """Greedy nearest-neighbour association, strongest estimate first.

    ``estimates`` are ``(v, a, amplitude)`` triples, ``truths`` ``(v, a)``
    pairs.  Distances are measured in cells, ``(dv / v_cell, da / a_cell)``;
    a pair is accepted only if both components are within ``gate`` cells.
    Returns, for every truth, the index of its estimate or ``None``.
    """
    order = sorted(range(len(estimates)), key=lambda i: -estimates[i][2])
    free = set(range(len(truths)))
    out: List[Optional[int]] = [None] * len(truths)
    for i in order:
        v, a, _ = estimates[i]
        best, dist = None, math.inf
        for k in free:
            dv = (v - truths[k][0]) / v_cell
            da = (a - truths[k][1]) / a_cell
            d = math.hypot(dv, da)
            if d < dist and abs(dv) <= gate and abs(da) <= gate:
                best, dist = k, d
        if best is not None:
            out[best] = i
            free.discard(best)
    return out


def _rms(errors):
    """RMS and its standard error, with compensated summation."""
    e2 = [e * e for e in errors]
    n = len(e2)
    if n == 0:
        return math.nan, math.nan
    mse = math.fsum(e2) / n
    if n < 2 or mse == 0:
        return math.sqrt(mse), 0.0
    var = math.fsum((x - mse) ** 2 for x in e2) / (n - 1)
    rmse = math.sqrt(mse)
    return rmse, math.sqrt(var / n) / (2 * rmse)


def trial_seed(seed: int, point: int, trial: int) -> int:
    """Seed of one trial; independent of execution order."""
    return int(derived_rng(seed, RMSE_STREAM, point, trial).integers(2**63))


def monte_carlo_rmse(radar: RadarParams, scene: Scene, snr_list: Sequence[float],
                     trials: int = 200, seed: int = 0, cfg: LVTConfig = LVTConfig(),
                     gate: float = 1.0, max_failure: float = 0.5, threads: int = 1,
                     **estimate_kw) -> List[RmsePoint]:
    """RMSE of velocity and acceleration per target over noisy realisations.

    For every SNR (dB, relative to the strongest target) ``trials`` scenes
    with independent noise are estimated with :func:`sdfc_lvt_estimate`,
    estimates are associated with the truths by :func:`associate`, and the
    RMSE over successful associations is reported with the
    variance bounds.  A point whose association failure rate exceeds
    ``max_failure`` is flagged.

    Results depend only on ``seed``: trial ``k`` of point ``i`` uses
    :func:`trial_seed` ``(seed, i, k)`` whatever ``threads`` is.
    """
    if trials < 100:
        raise ValueError("trials must be >= 100")
    if len(snr_list) == 0:
        raise ValueError("snr_list is empty")
    truths = [(t.as_quadratic().v0, t.as_quadratic().a0) for t in scene.targets]
    powers = [abs(t.reflectivity) ** 2 for t in scene.targets]
    strongest = max(powers)
    count = len(truths)
    out = []
    for i, snr in enumerate(snr_list):
        v2 = strongest / 10 ** (snr / 10)

        def run(k, v2=v2, i=i):
            sc = replace(scene, noise_variance=v2, rng_seed=trial_seed(seed, i, k))
            rep = sdfc_lvt_estimate(sc, radar, count, cfg, **estimate_kw)
            est = [(e.velocity, e.acceleration, e.amplitude) for e in rep.targets]
            idx = associate(est, truths, rep.velocity_cell, rep.acceleration_cell, gate)
            return [None if j is None else (est[j][0] - truths[k2][0], est[j][1] - truths[k2][1])
                    for k2, j in enumerate(idx)]

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(run, range(trials)))
        else:
            results = [run(k) for k in range(trials)]
        for k in range(count):
            errs = [r[k] for r in results if r[k] is not None]
            rv, sv = _rms([e[0] for e in errs])
            ra, sa = _rms([e[1] for e in errs])
            if v2 > 0:
                bv, ba = variance_bounds(radar.pulse_count, radar.pri, radar.bandwidth / 2, cfg.q,
                                         radar.time_bandwidth, powers[k] / v2, cfg.h, radar.c)
            else:
                bv = ba = 0.0       # both bounds vanish without noise
            ok = len(errs)
            out.append(RmsePoint(float(snr), k, rv, ra, math.sqrt(bv), math.sqrt(ba), trials, ok,
                                 sv, sa, (1 - ok / trials) > max_failure))
    return out


def above_threshold(points: Sequence[RmsePoint], max_failure: float = 0.1):
    """Points of one target at or above the first SNR whose failure rate is
    at most ``max_failure`` and stays so for every higher SNR."""
    pts = sorted(points, key=lambda p: p.snr_in)
    keep = []
    for p in reversed(pts):
        if p.failure_rate > max_failure:
            break
        keep.append(p)
    return list(reversed(keep))


def monotone_violations(points: Sequence[RmsePoint], attr: str = "rmse_v", k: float = 2.0):
    """Adjacent pairs where RMSE rises by more than ``k`` combined standard errors."""
    pts = sorted(points, key=lambda p: p.snr_in)
    se = "stderr_v" if attr == "rmse_v" else "stderr_a"
    bad = []
    for lo, hi in zip(pts, pts[1:]):
        tol = k * math.hypot(getattr(lo, se), getattr(hi, se))
        if getattr(hi, attr) > getattr(lo, attr) + tol:
            bad.append((lo.snr_in, hi.snr_in))
    return bad
