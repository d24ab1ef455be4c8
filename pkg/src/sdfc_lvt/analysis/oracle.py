"""Brute-force (v, a) grid search on the conjugate-product signal.

An estimator independent of the Keystone and LVT stages: for every
hypothesis it interpolates the product along the hypothesised delay track
``2 (R0 - v t - a t^2 / 2) / c`` (``t`` measured from a reference pulse)
with the Kaiser-sinc kernel, removes the
hypothesised phase history and sums coherently over all pulses.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import GridCoverageError
from ..model import DataMatrix, RadarParams


@dataclass(frozen=True)
class OracleResult:
    velocity: float          # m/s at the reference time
    acceleration: float      # m/s^2
    score: float             # |coherent sum| at the argmax
    surface: np.ndarray      # scores, shape (len(v_grid), len(a_grid))
    v_grid: np.ndarray
    a_grid: np.ndarray
    r0: float                # range at the reference time used for the tracks (m)
    reliable: bool
    at_edge: bool            # argmax on the boundary of a multi-point axis
    reference_time: float = 0.0

    @property
    def initial_velocity(self) -> float:
        """Velocity at the first pulse."""
        return self.velocity - self.acceleration * self.reference_time

    @property
    def index(self):
        return np.unravel_index(int(np.argmax(self.surface)), self.surface.shape)


def _check_grid(g, name, limit):
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or g.size == 0 or not np.all(np.isfinite(g)):
        raise GridCoverageError(f"{name} grid must be a nonempty 1-D finite array")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise GridCoverageError(f"{name} grid must be strictly increasing")
    if np.max(np.abs(g)) > limit * (1 + 1e-12):
        raise GridCoverageError(
            f"{name} grid reaches {np.max(np.abs(g)):g}, beyond the principal limit {limit:g}")
    return g


def initial_range(product: DataMatrix, c: float, pulse: int = 0) -> float:
    """Range of the strongest cell of one pulse, refined by a parabolic fit."""
    v = np.abs(product.to_fast_time().values[pulse])
    k = int(np.argmax(v))
    off = 0.0
    if 0 < k < len(v) - 1:
        den = v[k - 1] - 2 * v[k] + v[k + 1]
        if den < 0:
            off = 0.5 * (v[k - 1] - v[k + 1]) / den
    return c / 2 * (product.gate_start + (k + off) / product.fs)


def oracle_grid_search(product: DataMatrix, radar: RadarParams, delta_f: float,
                       v_grid, a_grid, r0: float = None, reference_pulse: int = 0,
                       threads: int = 1, reliability_ratio: float = 4.0) -> OracleResult:
    """Score every (v, a) pair of the grids; return the argmax and the surface.

    Parameters
    ----------
    product : DataMatrix
        Conjugate-product signal (either domain).
    v_grid, a_grid : array_like
        Strictly increasing hypotheses inside the principal intervals
        ``|2 v delta_f / c| <= 1/(4T)`` and ``|2 a delta_f / c| <= 1/(2T)``.
    r0 : float, optional
        Range at the reference pulse; by default from :func:`initial_range`.
    reference_pulse : int
        Pulse at which ``r0`` and the hypothesised velocities apply.  A
        mid-aperture reference decorrelates velocity and acceleration.
    reliability_ratio : float
        The result is flagged unreliable unless the maximum score exceeds
        this multiple of the median score (and is nonzero).

    Raises
    ------
    GridCoverageError
        Malformed grid or hypotheses outside the principal intervals.
    """
    c, T = radar.c, radar.pri
    k = c / (2 * delta_f)
    vg = _check_grid(v_grid, "velocity", k / (4 * T))
    ag = _check_grid(a_grid, "acceleration", k / (2 * T))
    x = product.to_fast_time()
    if r0 is None:
        r0 = initial_range(x, c, reference_pulse)
    t = x.slow_times - reference_pulse * T
    vv, aa = np.meshgrid(vg, ag, indexing="ij")
    disp = vv.reshape(-1, 1) * t + 0.5 * aa.reshape(-1, 1) * t * t    # r0 - R(t)
    pos = (2 * (r0 - disp) / c - x.gate_start) * x.fs
    phase = -2 * np.pi * np.mod(2 * delta_f * disp / c, 1.0)
    score = np.abs(kernels.trajectory_sum(x.values, pos, phase, threads))
    surface = score.reshape(vv.shape)
    i, j = np.unravel_index(int(np.argmax(surface)), surface.shape)
    top = float(surface[i, j])
    reliable = bool(top > 0 and top > reliability_ratio * float(np.median(surface)))
    edge = (vg.size > 1 and i in (0, vg.size - 1)) or (ag.size > 1 and j in (0, ag.size - 1))
    return OracleResult(float(vg[i]), float(ag[j]), top, surface, vg, ag, float(r0),
                        reliable, bool(edge), reference_pulse * T)


def refine_range(product: DataMatrix, radar: RadarParams, delta_f: float, velocity: float,
                 acceleration: float, r0: float, reference_pulse: int = 0,
                 span: float = 1.0, steps: int = 41, threads: int = 1) -> float:
    """Range at the reference pulse that maximises the coherent sum of one track.

    Scores ``steps`` offsets within ``span`` range samples either side of
    ``r0`` and refines the best by a parabolic fit.  Integrating all pulses
    gives a far less noisy range than a single pulse's peak, and an offset
    track biases the acceleration hypothesis that wins.
    """
    x = product.to_fast_time()
    c, T = radar.c, radar.pri
    t = x.slow_times - reference_pulse * T
    disp = velocity * t + 0.5 * acceleration * t * t
    cell = c / (2 * x.fs)
    offs = np.linspace(-span, span, steps) * cell
    pos = (2 * (r0 + offs[:, None] - disp) / c - x.gate_start) * x.fs
    phase = np.broadcast_to(-2 * np.pi * np.mod(2 * delta_f * disp / c, 1.0), pos.shape)
    score = np.abs(kernels.trajectory_sum(x.values, pos, np.ascontiguousarray(phase), threads))
    k = int(np.argmax(score))
    off = 0.0
    if 0 < k < steps - 1:
        den = score[k - 1] - 2 * score[k] + score[k + 1]
        if den < 0:
            off = 0.5 * (score[k - 1] - score[k + 1]) / den
    return float(r0 + offs[k] + off * (offs[1] - offs[0]))


def oracle_estimate(product: DataMatrix, radar: RadarParams, delta_f: float,
                    v_range, a_range, coarse=(5.0, 5.0), fine=(0.5, 0.5),
                    threads: int = 1, range_passes: int = 3) -> OracleResult:
    """Two-stage grid search: a coarse grid over the box, then a fine one.

    Both stages reference the mid-aperture pulse, where velocity and
    acceleration are nearly uncorrelated; ``v_range`` is a box on that
    mid-aperture velocity.  The fine grid spans one coarse cell either side
    of the coarse argmax with steps ``fine``; its step is the oracle cell.
    Between the stages the reference range is refined by
    :func:`refine_range` on the coarse track; range refinement and the fine
    search then alternate, up to ``range_passes`` times, until the fine
    argmax stops moving.
    Reliability is taken from the coarse surface.  Use
    :attr:`OracleResult.initial_velocity` for the first-pulse velocity.

    Raises
    ------
    GridCoverageError
        If a reliable coarse maximum lies on the boundary of the box.
    """
    def axis(lo, hi, step):
        n = int(np.floor((hi - lo) / step + 1e-9))
        return lo + step * np.arange(n + 1)

    vg = axis(v_range[0], v_range[1], coarse[0])
    ag = axis(a_range[0], a_range[1], coarse[1])
    mid = product.n_pulses // 2
    res = oracle_grid_search(product, radar, delta_f, vg, ag, reference_pulse=mid, threads=threads)
    if res.reliable and res.at_edge:
        raise GridCoverageError("coarse maximum on the search-box boundary; widen the box")
    fv = res.velocity + fine[0] * np.arange(-round(coarse[0] / fine[0]), round(coarse[0] / fine[0]) + 1)
    fa = res.acceleration + fine[1] * np.arange(-round(coarse[1] / fine[1]), round(coarse[1] / fine[1]) + 1)
    # the best range depends on the track, so alternate range and fine search
    v, a, r0 = res.velocity, res.acceleration, res.r0
    for _ in range(range_passes):
        r0 = refine_range(product, radar, delta_f, v, a, r0, mid, threads=threads)
        out = oracle_grid_search(product, radar, delta_f, fv, fa, r0=r0, reference_pulse=mid,
                                 threads=threads)
        if (out.velocity, out.acceleration) == (v, a):
            break
        v, a = out.velocity, out.acceleration
    return OracleResult(out.velocity, out.acceleration, out.score, out.surface, fv, fa, out.r0,
                        res.reliable, out.at_edge, out.reference_time)
