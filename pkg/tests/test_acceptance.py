"""Acceptance suite: the eight end-to-end criteria at their stated tolerances.

Each test records its outcome; a summary line per criterion is printed at
the end of the run (see ``conftest.pytest_terminal_summary``).
"""
import math
import time

import numpy as np
import pytest

from conftest import dechirp_fft_oracle, lfm
from sdfc_lvt import cli, io
from sdfc_lvt.analysis import (above_threshold, crossterm_margin, measured_crossterm_locus,
                               monotone_violations, monte_carlo_rmse, oracle_estimate,
                               sdfc_moments, snr_curve)
from sdfc_lvt.keystone import keystone_scale, keystone_transform, rescale_rows, residual_walk
from sdfc_lvt.lvt import LVTConfig, extract_peaks, lvt, natural_cells, sdfc_lvt_estimate
from sdfc_lvt.model import (Scene, TargetMotion, derived_rng, synthesize_compressed_spectrum,
                            table1_targets, table2_radar)
from sdfc_lvt.rangeproc import (check_walk_constraint, conjugate_product,
                                max_unambiguous_velocity, sdfc_preprocess, split_subbands)

SEED = 20240601
TRUTH = [(197.87, 4.88), (70.92, 4.88)]


def _within_cells(rep):
    """Per truth: |dv| / cell_v and |da| / cell_a of the nearest estimate."""
    out = []
    for v, a in TRUTH:
        e = min(rep.targets, key=lambda t: abs(t.velocity - v))
        out.append((abs(e.velocity - v) / rep.velocity_cell,
                    abs(e.acceleration - a) / rep.acceleration_cell, e))
    return out


# -- 1 -------------------------------------------------------------------------------

@pytest.mark.parametrize("snr", [None, 10.0], ids=["noise-free", "10dB"])
def test_1_reference_pair_recovered(record, snr):
    radar = table2_radar()
    targets = table1_targets()
    v2 = 0.0 if snr is None else 1.0 / 10 ** (snr / 10)
    t0 = time.perf_counter()
    rep = sdfc_lvt_estimate(Scene(targets, v2, SEED), radar, 2, truth=targets)
    elapsed = time.perf_counter() - t0
    cells = _within_cells(rep)
    beyond = TRUTH[0][0] > max_unambiguous_velocity(radar.carrier_frequency, radar.pri, radar.c)
    ok = beyond and elapsed <= 300 and all(dv <= 1 and da <= 1 for dv, da, _ in cells)
    est = ", ".join(f"({e.velocity:.3f} m/s, {e.acceleration:.3f} m/s^2)" for _, _, e in cells)
    record(1, "noise-free" if snr is None else f"{snr:g} dB", ok,
           f"{est}; cells v {rep.velocity_cell:.3f} a {rep.acceleration_cell:.3f}; "
           f"{elapsed:.1f} s")
    assert beyond
    assert elapsed <= 300
    for dv, da, _ in cells:
        assert dv <= 1 and da <= 1


# -- 2 -------------------------------------------------------------------------------

def test_2_ambiguity_demonstration(record):
    radar = table2_radar()
    t1 = table1_targets()[0]
    spec = synthesize_compressed_spectrum(radar, Scene([t1]))
    conventional = residual_walk(keystone_transform(spec, radar.carrier_frequency))
    product = conjugate_product(split_subbands(spec, radar))
    sdfc = residual_walk(keystone_transform(product, radar.bandwidth / 2))
    ok = conventional > 5 and sdfc <= 2
    record(2, "walk", ok, f"Keystone at f_c leaves {conventional:g} cells, SDFC path {sdfc:g}")
    assert conventional > 5
    assert sdfc <= 2


# -- 3 -------------------------------------------------------------------------------

SNR_PC = [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0]


@pytest.fixture(scope="module")
def snr_points():
    return snr_curve(table2_radar(), TargetMotion.quadratic(15300.0), SNR_PC, 1000, SEED)


def test_3a_snr_curve(record, snr_points):
    dev = [p.snr_sdfc_measured - p.snr_sdfc_predicted for p in snr_points]
    ok = all(abs(d) <= 1.0 for d in dev)
    record(3, "3a curve", ok, "measured - predicted = " +
           ", ".join(f"{d:+.2f}" for d in dev) + " dB")
    assert ok


def test_3b_high_snr_loss(record, snr_points):
    p = snr_points[-1]
    loss = p.snr_pc - p.snr_sdfc_measured
    ok = abs(loss - 6.0) <= 0.5
    record(3, "3b loss", ok, f"{loss:.2f} dB at {p.snr_pc:g} dB")
    assert ok


def test_3c_moment_identities(record):
    m = sdfc_moments(table2_radar(), TargetMotion.quadratic(15300.0), 0.0, 10_000, SEED)
    keys = ["m1", "m2", "m3", "m4", "m5", "m6", "variance"]
    bad = [k for k in keys if not m[k].z <= 3.0]
    record(3, "3c moments", not bad,
           ", ".join(f"{k} z={m[k].z:.1f}" for k in keys))
    assert not bad, f"identities off by more than 3 standard errors: {bad}"


# -- 4 -------------------------------------------------------------------------------

def test_4a_identical_pair_merges(record):
    radar = table2_radar()
    t1 = table1_targets()[0]
    twin = TargetMotion(t1.model, 1 / math.sqrt(2))
    cfg = LVTConfig()
    ks = lambda sc: keystone_transform(sdfc_preprocess(synthesize_compressed_spectrum(
        radar, sc), radar), radar.bandwidth / 2)
    from sdfc_lvt.lvt import azimuth_signal
    k_one = ks(Scene([t1]))
    _, centre = azimuth_signal(k_one)
    single = lvt(azimuth_signal(k_one, centre=centre)[0], radar.pri, cfg).magnitude
    pair = lvt(azimuth_signal(ks(Scene([t1, twin])), centre=centre)[0], radar.pri, cfg).magnitude
    # a merged pair is the single-target plane scaled by |s1 + s2|^4
    scale = (1 + 1 / math.sqrt(2)) ** 4
    rel = float(np.max(np.abs(pair - scale * single)) / np.max(pair))
    rep = sdfc_lvt_estimate(Scene([t1, twin]), radar, 1)
    e = rep.targets[0]
    ok = rel < 1e-6 and abs(e.velocity - 197.87) <= rep.velocity_cell
    record(4, "4a merge", ok, f"plane deviation from scaled single {rel:.1e}, "
           f"one peak at {e.velocity:.3f} m/s")
    assert ok


def test_4b_crossterm_locus(record):
    radar = table2_radar()
    t1, t2 = table1_targets()
    chk = measured_crossterm_locus(radar, t1, t2)
    frac = chk.fraction_within
    ok = frac == 1.0
    record(4, "4b locus", ok, f"{100 * frac:.1f}% of {int(chk.significant.sum())} pulses within "
           f"1 cell of the predicted loci (median deviation "
           f"{np.median(chk.deviation[chk.significant]):.1f} cells)")
    assert ok


@pytest.mark.parametrize("snr", [0.0, 10.0])
def test_4b_crossterm_margin(record, snr):
    m = crossterm_margin(table2_radar(), table1_targets(), snr, SEED)
    ok = m.auto_weak_noisy > m.cross_max
    record(4, f"4b margin {snr:g} dB", ok, f"{m.margin_db:.2f} dB")
    assert ok


# -- 5 -------------------------------------------------------------------------------

def _random_scenes(count, radar):
    rng = derived_rng(SEED, 5)
    out = []
    while len(out) < count:
        v, a = float(rng.uniform(-400, 400)), float(rng.uniform(-40, 40))
        if check_walk_constraint(radar, radar.bandwidth / 2, v, a):
            # search boxes are offset so the oracle grid is not aligned with the truth
            out.append((v, a, int(rng.integers(2**63)), *rng.uniform(-2.5, 2.5, 2)))
    return out


def test_5_oracle_equivalence(record):
    radar = table2_radar()
    mid = (radar.pulse_count // 2) * radar.pri
    agree, worst = 0, (0.0, 0.0)
    for v, a, seed, ov, oa in _random_scenes(20, radar):
        scene = Scene([TargetMotion.quadratic(15300.0, v, a)], 0.1, seed)   # 10 dB
        spec = synthesize_compressed_spectrum(radar, scene)
        est = sdfc_lvt_estimate(spec, radar, 1).targets[0]
        vm = v + a * mid
        orc = oracle_estimate(sdfc_preprocess(spec, radar), radar, radar.bandwidth / 2,
                              (vm + ov - 20, vm + ov + 20), (a + oa - 20, a + oa + 20))
        dv = abs(est.velocity + est.acceleration * mid - orc.velocity)
        da = abs(est.acceleration - orc.acceleration)
        worst = (max(worst[0], dv), max(worst[1], da))
        agree += dv <= 0.5 and da <= 0.5
    ok = agree == 20
    record(5, "oracle", ok, f"{agree}/20 within one oracle cell (0.5 m/s, 0.5 m/s^2); "
           f"worst |dv| {worst[0]:.3f}, |da| {worst[1]:.3f}")
    assert ok


# -- 6 -------------------------------------------------------------------------------

RMSE_N = 1024
RMSE_SNR = [-10.0, -5.0, 0.0, 5.0, 10.0]


@pytest.fixture(scope="module")
def rmse_points():
    radar = table2_radar(pulse_count=RMSE_N)
    t0 = time.perf_counter()
    pts = monte_carlo_rmse(radar, Scene(table1_targets()), RMSE_SNR, trials=200, seed=SEED)
    return pts, time.perf_counter() - t0


def _per_target(pts):
    return [[p for p in pts if p.target == k] for k in (0, 1)]


def test_6a_rmse_monotone(record, rmse_points):
    pts, elapsed = rmse_points
    bad, thresholds = [], []
    for k, tp in enumerate(_per_target(pts)):
        above = above_threshold(tp)
        thresholds.append(above[0].snr_in if above else None)
        for attr in ("rmse_v", "rmse_a"):
            bad += [(k, attr, pair) for pair in monotone_violations(above, attr)]
    ok = not bad and elapsed <= 1800
    record(6, "6a monotone", ok, f"N={RMSE_N}, thresholds {thresholds} dB, "
           f"{len(bad)} violations, {elapsed / 60:.1f} min")
    assert not bad
    assert elapsed <= 1800


def test_6b_rmse_within_bounds(record, rmse_points):
    pts, _ = rmse_points
    worst = []
    bad = 0
    for tp in _per_target(pts):
        for p in above_threshold(tp):
            rv, ra = p.rmse_v ** 2 / p.bound_v ** 2, p.rmse_a ** 2 / p.bound_a ** 2
            bad += (rv > 1) + (ra > 1)
            worst.append((p.snr_in, p.target, rv, ra))
    w = max(worst, key=lambda x: max(x[2], x[3]))
    record(6, "6b bounds", bad == 0, f"{bad} of {2 * len(worst)} RMSE^2 values exceed the "
           f"bound; worst RMSE^2/bound {max(w[2], w[3]):.0f} (target {w[1]}, {w[0]:g} dB)")
    assert bad == 0


# -- 7 -------------------------------------------------------------------------------

def test_7a_czt_resampler(record):
    n = 2048
    radar = table2_radar()
    f = np.fft.fftfreq(384, 1 / radar.sampling_frequency)
    f = f[np.abs(f) < 0.95 * radar.bandwidth / 2]
    scale = keystone_scale(f[::8], radar.bandwidth / 2)
    rng = derived_rng(SEED, 7)
    ks = rng.integers(-n // 2, n // 2, 5)
    amp = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    m = np.arange(n)
    x = (amp[:, None] * np.exp(2j * math.pi * ks[:, None] * m / n)).sum(0)
    got = rescale_rows(np.tile(x, (scale.size, 1)), scale)
    pos = scale[:, None] * m
    ref = (amp[:, None, None] * np.exp(2j * math.pi * ks[:, None, None] * pos / n)).sum(0)
    ok_mask = pos <= n - 1
    err = np.sum(np.abs(got - ref)[ok_mask] ** 2) / np.sum(np.abs(ref)[ok_mask] ** 2)
    db = 10 * math.log10(err)
    record(7, "7a resampler", db <= -80, f"{db:.1f} dB over {scale.size} scales")
    assert db <= -80


def test_7b_lvt_grid(record):
    n, T = 512, 5e-4
    nf, ng = natural_cells(n, T)
    hits = 0
    worst = (0.0, 0.0)
    t_mid = (n - 1) * T / 2
    for fc in np.linspace(-200, 200, 5):
        for g in np.linspace(-800, 800, 5):
            f0 = fc - g * t_mid
            x = lfm(n, T, f0, g)
            pk = extract_peaks(lvt(x, T), 1)[0]
            fo, go = dechirp_fft_oracle(x, T, g + np.linspace(-ng, ng, 9))
            assert abs(fo - fc) <= nf and abs(go - g) <= ng      # the oracle itself
            df, dg = abs(pk.freq - fc) / nf, abs(pk.chirp - g) / ng
            worst = (max(worst[0], df), max(worst[1], dg))
            hits += df <= 1 and dg <= 1
    record(7, "7b LVT grid", hits == 25, f"{hits}/25 within one cell; worst "
           f"{worst[0]:.2f} freq cells, {worst[1]:.2f} chirp cells")
    assert hits == 25


# -- 8 -------------------------------------------------------------------------------

def test_8_selftest_determinism(record, tmp_path):
    codes = [cli.run("selftest", None, tmp_path / "a", seed=SEED),
             cli.run("selftest", None, tmp_path / "b", seed=SEED),
             cli.run("selftest", None, tmp_path / "c", seed=SEED, threads=4)]
    blobs = [(tmp_path / d / "selftest.csv").read_bytes() for d in "abc"]
    ok = codes == [0, 0, 0] and blobs[0] == blobs[1] == blobs[2]
    record(8, "selftest", ok, f"exit codes {codes}, identical CSVs: {blobs[0] == blobs[1] == blobs[2]}")
    assert ok
