import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dechirp_fft_oracle, lfm
from sdfc_lvt.errors import PeakCountError, PrincipalIntervalError
from sdfc_lvt.lvt import (LVTConfig, LVTPlane, Peak, extract_peaks, lvt, lvt_value,
                          map_to_motion, natural_cells, refine_peak, sdfc_lvt_estimate,
                          zoom_lvt)
from sdfc_lvt.model import Scene, TargetMotion, table2_radar

T = 5e-4


def argmax_fg(plane):
    i, j = np.unravel_index(int(np.argmax(plane.magnitude)), plane.magnitude.shape)
    return plane.freqs[i], plane.chirps[j]


def centre_freq(f0, gamma, n):
    return f0 + gamma * (n - 1) * T / 2


@pytest.mark.parametrize("kw", [dict(q=0), dict(h=0.0), dict(zero_pad_freq=3),
                                dict(chirp_limit=-1.0), dict(window="kaiser")])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        LVTConfig(**kw)


def test_short_signal_rejected():
    with pytest.raises(ValueError):
        lvt(np.ones(7), T, LVTConfig(q=2))
    with pytest.raises(ValueError):
        lvt(np.ones((4, 4)), T)


def test_constant_peaks_at_origin():
    f, g = argmax_fg(lvt(np.ones(256), T))
    assert (f, g) == (0.0, 0.0)


def test_plane_axes_and_cells():
    p = lvt(np.ones(256), T)
    nf, ng = natural_cells(256, T)
    assert nf == pytest.approx(1 / (256 * T)) and ng == pytest.approx(4 / (256 * T) ** 2)
    assert p.freq_cell == pytest.approx(nf / 4) and p.chirp_cell == pytest.approx(ng / 4)
    assert p.freqs.min() >= -1 / (4 * T) and p.freqs.max() < 1 / (4 * T)
    assert p.chirps.min() >= -1 / (2 * T) and p.chirps.max() < 1 / (2 * T)


def test_tone_at_100hz():
    # N = 2048, T = 0.5 ms; reference from a dechirp/FFT search
    n = 2048
    x = lfm(n, T, 100.0, 0.0)
    p = lvt(x, T)
    f, g = argmax_fg(p)
    fo, go = dechirp_fft_oracle(x, T, np.linspace(-2, 2, 9))
    nf, ng = natural_cells(n, T)
    assert abs(f - fo) <= nf and abs(f - 100.0) <= nf
    assert abs(g - go) <= ng and abs(g) <= ng


def test_reference_target_image_chirp():
    # 197.87 m/s, 4.88 m/s^2 on a 7.5 MHz carrier with c = 3e8: 9.8935 Hz, 0.2441 Hz/s
    f0, g0 = 2 * 197.87 * 7.5e6 / 3e8, 2 * 4.88 * 7.5e6 / 3e8
    assert (round(f0, 4), round(g0, 4)) == (9.8935, 0.244)
    n = 2048
    p = lvt(lfm(n, T, f0, g0), T)
    f, g = argmax_fg(p)
    assert abs(f - centre_freq(f0, g0, n)) <= p.freq_cell
    assert abs(g - g0) <= p.chirp_cell


def test_peak_grows_as_n_squared():
    a = lvt(lfm(256, T, 30.0, 40.0), T).magnitude.max()
    b = lvt(lfm(512, T, 30.0, 40.0), T).magnitude.max()
    assert b / a == pytest.approx(4.0, rel=0.05)


def test_zoom_matches_direct_and_plane():
    x = lfm(128, T, 20.0, 300.0) + 0.5 * lfm(128, T, -60.0, -900.0)
    p = lvt(x, T)
    i, j = np.unravel_index(int(np.argmax(p.magnitude)), p.magnitude.shape)
    si, sj = slice(i - 2, i + 2), slice(j - 1, j + 2)
    fs, gs = p.freqs[si], p.chirps[sj]
    z = zoom_lvt(x, T, fs, gs)
    direct = np.array([[lvt_value(x, T, f, g) for g in gs] for f in fs])
    np.testing.assert_allclose(z, direct, rtol=1e-10, atol=1e-9 * np.abs(direct).max())
    np.testing.assert_allclose(np.abs(z), p.magnitude[si, sj], rtol=1e-8,
                               atol=1e-10 * p.magnitude.max())
    with pytest.raises(ValueError):
        zoom_lvt(x, T, fs, [])


def test_h_only_rescales_internals():
    x = lfm(128, T, 20.0, 300.0)
    a = lvt(x, T, LVTConfig(h=1.0))
    b = lvt(x, T, LVTConfig(h=2.5))
    np.testing.assert_allclose(a.chirps, b.chirps)
    np.testing.assert_allclose(a.magnitude, b.magnitude, rtol=1e-8, atol=1e-9 * a.magnitude.max())


@settings(max_examples=15, deadline=None)
@given(f0=st.floats(-400, 400), g=st.floats(-1500, 1500), seed=st.integers(0, 100))
def test_plane_invariants(f0, g, seed):
    n = 64
    x = lfm(n, T, f0, g) + 0.1 * np.random.default_rng(seed).standard_normal(n)
    p = lvt(x, T)
    assert np.all(p.magnitude >= 0)
    assert np.all(np.abs(p.freqs) <= 1 / (4 * T)) and np.all(np.abs(p.chirps) <= 1 / (2 * T))


@settings(max_examples=10, deadline=None)
@given(f0=st.floats(-300, 300), g=st.floats(-1000, 1000))
def test_noiseless_lfm_within_one_cell(f0, g):
    n = 256
    fc = centre_freq(f0, g, n)
    if abs(fc) > 0.9 / (4 * T):
        return
    p = lvt(lfm(n, T, f0, g), T)
    f, gg = argmax_fg(p)
    nf, ng = natural_cells(n, T)
    assert abs(f - fc) <= nf and abs(gg - g) <= ng


def test_extract_two_peaks_and_refine():
    n = 256
    x = lfm(n, T, 100.0, 500.0) + 0.7 * lfm(n, T, -200.0, -800.0)
    p = lvt(x, T)
    pk = extract_peaks(p, 2)
    assert pk[0].amplitude > pk[1].amplitude
    assert abs(pk[0].freq - centre_freq(100.0, 500.0, n)) < p.freq_cell
    assert abs(pk[1].chirp + 800.0) < p.chirp_cell
    ref = refine_peak(x, T, pk[0], p)
    assert abs(ref.chirp - 500.0) <= abs(pk[0].chirp - 500.0) + 1e-9


def test_extract_errors():
    mag = np.zeros((8, 8))
    mag[2, 3] = 1.0
    p = LVTPlane(mag, np.arange(8.0), np.arange(8.0), T, 16, 1)
    assert extract_peaks(p, 1)[0].index == (2, 3)
    with pytest.raises(PeakCountError):
        extract_peaks(p, 2)
    with pytest.raises(ValueError):
        extract_peaks(p, 0)


def test_map_to_motion():
    v, a = map_to_motion(10.0, 0.25, 7.5e6, 3e8)
    assert (v, a) == pytest.approx((200.0, 5.0))
    with pytest.raises(PrincipalIntervalError):
        map_to_motion(600.0, 0.0, 7.5e6, 3e8, pri=T)
    with pytest.raises(PrincipalIntervalError):
        map_to_motion(0.0, 1500.0, 7.5e6, 3e8, pri=T)


@pytest.mark.parametrize("v,a", [(350.0, 30.0), (-120.0, -45.0)])
def test_single_target_estimate(v, a):
    r = table2_radar(pulse_count=512)
    tg = TargetMotion.quadratic(15300.0, v, a)
    rep = sdfc_lvt_estimate(Scene([tg]), r, 1, truth=[tg])
    e = rep.targets[0]
    assert rep.diagnostics["truth_constraints_ok"]
    assert abs(e.velocity - v) <= rep.velocity_cell
    assert abs(e.acceleration - a) <= rep.acceleration_cell
    assert not e.below_floor
    d = rep.as_dict()
    assert d["targets"][0]["velocity_mps"] == e.velocity


def test_estimate_plane_extraction_and_keep_plane():
    r = table2_radar(pulse_count=256)
    tg = TargetMotion.quadratic(15300.0, 250.0, 0.0)
    rep = sdfc_lvt_estimate(Scene([tg]), r, 1, extraction="plane", keep_plane=True,
                            mixture_passes=0)
    assert rep.plane is not None
    assert abs(rep.targets[0].velocity - 250.0) <= rep.velocity_cell
    with pytest.raises(ValueError):
        sdfc_lvt_estimate(Scene([tg]), r, 1, extraction="grid")
