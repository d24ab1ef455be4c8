import csv
import json
import math
import os

import numpy as np
import pytest

from sdfc_lvt import cli, io
from sdfc_lvt.errors import IngestError
from sdfc_lvt.model import FAST_TIME, DataMatrix, table2_radar


def small_config(**over):
    cfg = io.bundled_config()
    cfg["radar"]["pulse_count"] = 256
    cfg["montecarlo"].update(trials=100, snr_pc_db=[-5, 0, 10], snr_in_db=[10], pulse_count=128)
    for k, v in over.items():
        cfg[k] = v
    return cfg


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_csv(path):
    with open(path) as f:
        return list(csv.DictReader(f))


# -- configuration --------------------------------------------------------------

def test_bundled_config_validates():
    cfg = io.bundled_config()
    io.validate_config(cfg)
    r = io.radar_from_config(cfg)
    assert (r.carrier_frequency, r.pulse_count, r.c) == (1e9, 2048, 3e8)
    assert len(io.targets_from_config(cfg)) == 2


def test_zero_targets_rejected(tmp_path, capsys):
    cfg = small_config()
    cfg["scene"]["targets"] = []
    assert cli.main(["simulate", "--config", write_cfg(tmp_path, cfg), "--out",
                     str(tmp_path)]) == 2
    assert "invalid" in capsys.readouterr().err


@pytest.mark.parametrize("mutate", [
    lambda c: c["radar"].update(carrier_frequency=1e9),          # key without unit suffix
    lambda c: c["radar"].update(pulse_count=1),
    lambda c: c["lvt"].update(zero_pad_freq=3),
    lambda c: c["radar"].update(bandwidth_hz=50e6),             # exceeds f_s: physics check
    lambda c: c["montecarlo"].update(trials=10),
])
def test_invalid_configs_exit_2(tmp_path, mutate):
    cfg = small_config()
    mutate(cfg)
    assert cli.run("simulate", write_cfg(tmp_path, cfg), tmp_path) == 2


def test_unreadable_config_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.run("simulate", str(p), tmp_path) == 2
    assert cli.run("simulate", str(tmp_path / "missing.json"), tmp_path) == 2


def test_bad_flags(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["frobnicate"])
    assert e.value.code == 2
    assert cli.run("selftest", None, tmp_path, threads=0) == 2
    assert cli.run("selftest", None, tmp_path, seed=-1) == 2


def test_runtime_error_exit_3(tmp_path, capsys):
    cfg = small_config()
    cfg["scene"]["range_gate_s"] = [1.0e-4, 1.0e-4 + 1e-7]     # clips the targets
    assert cli.run("simulate", write_cfg(tmp_path, cfg), tmp_path) == 3
    assert "GateError" in capsys.readouterr().err


# -- raw binary --------------------------------------------------------------

def test_raw_round_trip_is_bit_identical(tmp_path):
    rng = np.random.default_rng(0)
    v = (rng.standard_normal((6, 20)) + 1j * rng.standard_normal((6, 20))).astype(np.complex64)
    m = DataMatrix(v.astype(np.complex128), FAST_TIME, 5e-4, 37.5e6, 1e-4)
    io.write_raw_binary(tmp_path / "x.bin", m, table2_radar())
    back = io.load_raw_binary(tmp_path / "x.bin")
    np.testing.assert_array_equal(back.values, m.values)
    assert (back.pri, back.fs, back.gate_start) == (5e-4, 37.5e6, 1e-4)
    assert os.path.getsize(tmp_path / "x.bin") == 6 * 20 * 8


def test_truncated_file_names_byte_counts(tmp_path):
    m = DataMatrix(np.ones((4, 16)), FAST_TIME, 5e-4, 37.5e6)
    io.write_raw_binary(tmp_path / "x.bin", m)
    data = (tmp_path / "x.bin").read_bytes()
    (tmp_path / "x.bin").write_bytes(data[:-5])
    with pytest.raises(IngestError, match=r"expected 512 bytes.*found 507 bytes"):
        io.load_raw_binary(tmp_path / "x.bin")


def test_header_errors(tmp_path):
    (tmp_path / "h.json").write_text("[1, 2]")
    with pytest.raises(IngestError):
        io.read_header(tmp_path / "h.json")
    (tmp_path / "h.json").write_text(json.dumps({"pulses": 2, "range_samples": 8}))
    with pytest.raises(IngestError):
        io.read_header(tmp_path / "h.json")
    with pytest.raises(IngestError):
        io.read_header(tmp_path / "nothing.json")


def test_spaceborne_header_propagates():
    # RADARSAT-like parameters: f_s 32.317 MHz, PRF 1256.98 Hz, f_c 5.3 GHz
    h = {"pulses": 4096, "range_samples": 1024, "sampling_frequency_hz": 32.317e6,
         "prf_hz": 1256.98, "carrier_frequency_hz": 5.3e9}
    r = io.radar_from_header(h, table2_radar())
    assert r.sampling_frequency == 32.317e6
    assert r.pri == pytest.approx(1 / 1256.98)
    assert r.carrier_frequency == 5.3e9 and r.pulse_count == 4096
    with pytest.raises(IngestError):
        io.radar_from_header(h)             # no bandwidth and no base radar


# -- heatmaps --------------------------------------------------------------------

def test_heatmap_all_zero_is_black(tmp_path):
    io.write_heatmap(np.zeros((5, 7)), tmp_path / "z.pgm")
    img = io.read_pgm(tmp_path / "z.pgm")
    assert img.shape == (5, 7) and not img.any()


def test_heatmap_single_peak(tmp_path):
    v = np.zeros((6, 9))
    v[2, 5] = 3.0
    io.write_heatmap(v, tmp_path / "p.pgm", ["rows: test axis"])
    img = io.read_pgm(tmp_path / "p.pgm")
    assert img[2, 5] == 255 and np.count_nonzero(img) == 1
    head = (tmp_path / "p.pgm").read_bytes()[:200]
    assert head.startswith(b"P5\n# rows: test axis\n")


def test_heatmap_scale_and_validation():
    v = np.array([[1.0, 0.1, 1e-3, 1e-4]])
    body = io.heatmap_bytes(v)
    img = np.frombuffer(body[-4:], np.uint8)
    np.testing.assert_array_equal(img, [255, 170, 0, 0])    # 0, -20, -60, -80 dB
    with pytest.raises(ValueError):
        io.heatmap_bytes(np.array([[np.nan, 1.0]]))


# -- commands --------------------------------------------------------------------

def test_snr_curve_predicted_column(tmp_path):
    cfg = write_cfg(tmp_path, small_config())
    assert cli.run("snr-curve", cfg, tmp_path) == 0
    rows = read_csv(tmp_path / "snr_curve.csv")
    at0 = [r for r in rows if float(r["snr_pc_db"]) == 0.0][0]
    assert float(at0["snr_sdfc_predicted_db"]) == pytest.approx(-9.031, abs=5e-4)
    assert int(at0["trials"]) == 100


def test_csv_headers_carry_units(tmp_path):
    cfg = write_cfg(tmp_path, small_config())
    assert cli.run("rmse-curve", cfg, tmp_path) == 0
    head = (tmp_path / "rmse_curve.csv").read_text().splitlines()[0]
    assert "rmse_v_mps" in head and "rmse_a_mps2" in head and "snr_in_db" in head
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".")]     # no temp leftovers


def test_json_format(tmp_path):
    cfg = write_cfg(tmp_path, small_config())
    assert cli.run("snr-curve", cfg, tmp_path, fmt="json") == 0
    recs = json.loads((tmp_path / "snr_curve.json").read_text())
    assert len(recs) == 3 and "snr_sdfc_measured_db" in recs[0]


def test_estimate_bundled_config(tmp_path):
    assert cli.main(["estimate", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "estimate.csv")
    assert len(rows) == 2
    vs = sorted(float(r["velocity_mps"]) for r in rows)
    cell = float(rows[0]["velocity_cell_mps"])
    assert abs(vs[0] - 70.92) <= cell and abs(vs[1] - 197.87) <= cell
    img = io.read_pgm(tmp_path / "lvt_plane.pgm")
    assert img.max() == 255


def test_simulate_then_estimate_ingested(tmp_path):
    cfg = small_config()
    cfg["radar"]["pulse_count"] = 1024
    path = write_cfg(tmp_path, cfg)
    assert cli.run("simulate", path, tmp_path / "sim") == 0
    truth = read_csv(tmp_path / "sim" / "truth.csv")
    assert [float(t["velocity_mps"]) for t in truth] == [197.87, 70.92]
    assert cli.run("estimate", path, tmp_path / "est",
                   input=str(tmp_path / "sim" / "echo.bin")) == 0
    rows = read_csv(tmp_path / "est" / "estimate.csv")
    cell = float(rows[0]["velocity_cell_mps"])
    got = sorted(float(r["velocity_mps"]) for r in rows)
    assert abs(got[0] - 70.92) <= cell and abs(got[1] - 197.87) <= cell


def test_estimate_missing_input_is_invalid(tmp_path):
    assert cli.run("estimate", None, tmp_path, input=str(tmp_path / "none.bin")) == 2


def test_crossterm_outputs(tmp_path):
    cfg = write_cfg(tmp_path, small_config())
    assert cli.run("crossterm", cfg, tmp_path) == 0
    loc = read_csv(tmp_path / "crossterm_locus.csv")
    assert len(loc) == 256 and "deviation_cells" in loc[0]
    mg = read_csv(tmp_path / "crossterm_margin.csv")[0]
    assert math.isinf(float(mg["snr_in_db"]))
    assert io.read_pgm(tmp_path / "crossterm_plane.pgm").shape[0] > 0
    one = small_config()
    one["scene"]["targets"] = one["scene"]["targets"][:1]
    assert cli.run("crossterm", write_cfg(tmp_path, one, "one.json"), tmp_path) == 2


def test_selftest_deterministic_across_threads(tmp_path):
    assert cli.run("selftest", None, tmp_path / "a", seed=99) == 0
    assert cli.run("selftest", None, tmp_path / "b", seed=99, threads=3) == 0
    a = (tmp_path / "a" / "selftest.csv").read_bytes()
    assert a == (tmp_path / "b" / "selftest.csv").read_bytes()
    assert all(r["passed"] == "true" for r in read_csv(tmp_path / "a" / "selftest.csv"))
