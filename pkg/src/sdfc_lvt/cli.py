"""Command-line front end.

Commands: ``simulate``, ``estimate``, ``snr-curve``, ``rmse-curve``,
``crossterm`` and ``selftest``.  Exit status is 0 on success, 2 when the
configuration or input fails validation, 3 on a runtime or numeric error.

Randomness comes only from the 64-bit seed (config ``seed`` or ``--seed``):
the noisy scene uses ``derived_rng(seed, 0)``, SNR trial ``i`` of point
``j`` uses ``derived_rng(derived_rng(seed, j) -> s, SNR_STREAM, i)`` and
Monte Carlo trial ``k`` of point ``i`` uses ``trial_seed(seed, i, k)``.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, io, kernels
from .analysis import (crossterm_margin, measure_snr_sdfc, measured_crossterm_locus,
                       monte_carlo_rmse, oracle_estimate, snr_curve, snr_sdfc_closed_form)
from .errors import IngestError
from .keystone import rescale_rows
from .lvt import LVTConfig, lvt, natural_cells, sdfc_lvt_estimate
from .model import (Scene, TargetMotion, synthesize_compressed_spectrum,
                    synthesize_raw_echo, table2_radar)
from .rangeproc import sdfc_preprocess

log = logging.getLogger("sdfc_lvt")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3
COMMANDS = ("simulate", "estimate", "snr-curve", "rmse-curve", "crossterm", "selftest")


class _Invalid(Exception):
    pass


def _estimate_kw(cfg):
    ks = cfg.get("keystone", {})
    return dict(equalize=cfg.get("subband", {}).get("equalize", False),
                keystone_method=ks.get("method", "czt"),
                keystone_origin=ks.get("origin", "start"))


def _plane_comments(plane, delta_f, c):
    k = c / (2 * delta_f)
    return [f"rows: centroid frequency, row i = {float(plane.freqs[0])!r} + i * {plane.freq_cell!r} Hz"
            f" (velocity at aperture centre = {k!r} * frequency m/s)",
            f"cols: chirp rate, col j = {float(plane.chirps[0])!r} + j * {plane.chirp_cell!r} Hz/s"
            f" (acceleration = {k!r} * chirp rate m/s^2)"]


# -- commands ------------------------------------------------------------------

def cmd_simulate(cfg, out: Path, seed: int, threads: int, fmt: str, args) -> list:
    radar = io.radar_from_config(cfg)
    scene = io.scene_from_config(cfg, seed)
    gate = cfg["scene"].get("range_gate_s")
    echo = synthesize_raw_echo(radar, scene, tuple(gate) if gate else None)
    files = [io.write_raw_binary(out / "echo.bin", echo, radar)]
    rows = []
    for i, t in enumerate(scene.targets):
        q = t.as_quadratic()
        rows.append([i, q.r0, q.v0, q.a0, t.reflectivity.real, t.reflectivity.imag])
    files.append(io.write_table(out / "truth", ["target", "range_m", "velocity_mps",
                                                "acceleration_mps2", "reflectivity_re",
                                                "reflectivity_im"], rows, fmt))
    return files


def cmd_estimate(cfg, out: Path, seed: int, threads: int, fmt: str, args) -> list:
    lcfg = io.lvt_from_config(cfg)
    count = args.count or len(cfg["scene"]["targets"])
    if args.input:
        header = io.read_header(args.header or args.input + ".json")
        source = io.load_raw_binary(args.input, header)
        radar = io.radar_from_header(header, io.radar_from_config(cfg))
    else:
        radar = io.radar_from_config(cfg)
        source = io.scene_from_config(cfg, seed)
        gate = cfg["scene"].get("range_gate_s")
        if gate:
            source = synthesize_compressed_spectrum(radar, source, tuple(gate))
    rep = sdfc_lvt_estimate(source, radar, count, lcfg, keep_plane=True, **_estimate_kw(cfg))
    cols = ["target", "velocity_mps", "acceleration_mps2", "amplitude", "freq_hz",
            "chirp_hzps", "velocity_cell_mps", "acceleration_cell_mps2", "below_floor"]
    rows = [[i, t.velocity, t.acceleration, t.amplitude, t.freq, t.chirp, rep.velocity_cell,
             rep.acceleration_cell, t.below_floor] for i, t in enumerate(rep.targets)]
    files = [io.write_table(out / "estimate", cols, rows, fmt)]
    files.append(io.write_heatmap(rep.plane.magnitude, out / "lvt_plane.pgm",
                                  _plane_comments(rep.plane, radar.bandwidth / 2, radar.c)))
    return files


def cmd_snr_curve(cfg, out: Path, seed: int, threads: int, fmt: str, args) -> list:
    radar = io.radar_from_config(cfg)
    target = io.targets_from_config(cfg)[0]
    mc = cfg.get("montecarlo", {})
    pts = snr_curve(radar, target, mc.get("snr_pc_db", [-5, 0, 5, 10, 15, 20]),
                    mc.get("trials", 1000), seed)
    cols = ["snr_pc_db", "snr_in_db", "snr_sdfc_predicted_db", "snr_sdfc_measured_db",
            "stderr_db", "trials"]
    rows = [[p.snr_pc, p.snr_in, p.snr_sdfc_predicted, p.snr_sdfc_measured, p.stderr, p.trials]
            for p in pts]
    return [io.write_table(out / "snr_curve", cols, rows, fmt)]


def cmd_rmse_curve(cfg, out: Path, seed: int, threads: int, fmt: str, args) -> list:
    mc = cfg.get("montecarlo", {})
    radar = io.radar_from_config(cfg, mc.get("pulse_count"))
    scene = io.scene_from_config(cfg, seed)
    pts = monte_carlo_rmse(radar, scene, mc.get("snr_in_db", [-10, -5, 0, 5, 10]),
                           mc.get("trials", 200), seed, io.lvt_from_config(cfg),
                           threads=threads, **_estimate_kw(cfg))
    for p in pts:
        if p.flagged:
            log.warning("SNR %g dB, target %d: association failure rate %.0f%%",
                        p.snr_in, p.target, 100 * p.failure_rate)
    cols = ["snr_in_db", "target", "rmse_v_mps", "rmse_a_mps2", "bound_v_mps", "bound_a_mps2",
            "stderr_v_mps", "stderr_a_mps2", "trials", "failure_rate", "flagged", "pulse_count"]
    rows = [[p.snr_in, p.target, p.rmse_v, p.rmse_a, p.bound_v, p.bound_a, p.stderr_v,
             p.stderr_a, p.trials, p.failure_rate, p.flagged, radar.pulse_count] for p in pts]
    return [io.write_table(out / "rmse_curve", cols, rows, fmt)]


def cmd_crossterm(cfg, out: Path, seed: int, threads: int, fmt: str, args) -> list:
    radar = io.radar_from_config(cfg)
    targets = io.targets_from_config(cfg)
    if len(targets) != 2:
        raise _Invalid("crossterm needs exactly two targets in the scene")
    chk = measured_crossterm_locus(radar, targets[0], targets[1])
    cols = ["pulse", "measured_cell", "locus_plus_cell", "locus_minus_cell", "deviation_cells",
            "significant"]
    rows = [[n, int(chk.peak_cell[n]), chk.cell_plus[n], chk.cell_minus[n], chk.deviation[n],
             bool(chk.significant[n])] for n in range(len(chk.peak_cell))]
    files = [io.write_table(out / "crossterm_locus", cols, rows, fmt)]
    lcfg = io.lvt_from_config(cfg)
    snr = cfg["scene"].get("snr_in_db")
    m = crossterm_margin(radar, targets, snr, seed, lcfg)
    files.append(io.write_table(
        out / "crossterm_margin",
        ["snr_in_db", "auto_weak_clean", "auto_weak_noisy", "cross_max", "margin_db",
         "locus_fraction_within_1_cell"],
        [[math.inf if snr is None else snr, m.auto_weak_clean, m.auto_weak_noisy, m.cross_max,
          m.margin_db, chk.fraction_within]], fmt))
    plane = lvt(np.zeros(radar.pulse_count), radar.pri, lcfg)   # axes only
    files.append(io.write_heatmap(np.maximum(m.cross_plane, 0.0), out / "crossterm_plane.pgm",
                                  ["cross-term plane: |LVT(pair)| - |LVT(1)| - |LVT(2)|, "
                                   "negative values shown as zero"]
                                  + _plane_comments(plane, radar.bandwidth / 2, radar.c)))
    return files


def selftest_checks(seed: int, threads: int = 1):
    """Fast deterministic checks; rows ``(check, value, reference, tolerance, unit, passed)``."""
    rows = []

    def add(name, value, ref, tol, unit):
        rows.append([name, float(value), float(ref), float(tol), unit,
                     bool(abs(value - ref) <= tol)])

    add("snr_sdfc_at_snr_pc_0db", 10 * math.log10(snr_sdfc_closed_form(1.0)),
        10 * math.log10(1 / 8), 1e-12, "dB")

    radar = table2_radar(pulse_count=256)
    # LVT of a tone and of a chirp
    fc, cc = natural_cells(256, radar.pri)
    t = np.arange(256) * radar.pri
    for f0, g in ((100.0, 0.0), (-150.0, 120.0)):
        plane = lvt(np.exp(2j * math.pi * (f0 * t + 0.5 * g * t * t)), radar.pri, LVTConfig())
        i, j = np.unravel_index(int(np.argmax(plane.magnitude)), plane.magnitude.shape)
        tm = (256 - 1) * radar.pri / 2
        add(f"lvt_freq_f{f0:g}_g{g:g}", plane.freqs[i], f0 + g * tm, fc, "Hz")
        add(f"lvt_chirp_f{f0:g}_g{g:g}", plane.chirps[j], g, cc, "Hz/s")

    # resampler against closed-form scaled tones (bin-centred, so periodic)
    n = 128
    scale = np.array([0.9, 0.97, 1.05])
    m = np.arange(n)
    worst = -math.inf
    for k in (-21, 3, 17):
        rs = rescale_rows(np.tile(np.exp(2j * math.pi * k * m / n), (3, 1)), scale)
        ref = np.exp(2j * math.pi * k * scale[:, None] * m / n)
        ok = m[None, :] * scale[:, None] <= n - 1
        err = np.sum(np.abs(rs - ref)[ok] ** 2) / np.sum(np.abs(ref)[ok] ** 2)
        worst = max(worst, 10 * math.log10(max(err, 1e-300)))
    rows.append(["resampler_error", worst, -80.0, 0.0, "dB", bool(worst <= -80.0)])

    # output SNR of the conjugate product
    tgt = TargetMotion.quadratic(15300.0, 0.0, 0.0)
    p = measure_snr_sdfc(radar, tgt, 10 - 10 * math.log10(radar.time_bandwidth), 200, seed)
    add("snr_sdfc_measured_at_snr_pc_10db", p.snr_sdfc_measured, p.snr_sdfc_predicted, 1.0, "dB")

    # estimator against the oracle on a seeded single target
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 1])))
    v0, a0 = float(rng.uniform(-150, 150)), float(rng.uniform(-20, 20))
    tg = TargetMotion.quadratic(15300.0, v0, a0)
    scene = Scene([tg], 0.1, seed)
    rep = sdfc_lvt_estimate(scene, radar, 1)
    est = rep.targets[0]
    prod = sdfc_preprocess(synthesize_compressed_spectrum(radar, scene), radar)
    mid = (radar.pulse_count // 2) * radar.pri
    vm = v0 + a0 * mid
    orc = oracle_estimate(prod, radar, radar.bandwidth / 2, (vm - 20, vm + 20), (a0 - 40, a0 + 40),
                          coarse=(2.0, 4.0), fine=(0.5, 0.5), threads=threads)
    add("estimate_velocity_vs_truth", est.velocity, v0, rep.velocity_cell, "m/s")
    add("estimate_acceleration_vs_truth", est.acceleration, a0, rep.acceleration_cell, "m/s^2")
    add("oracle_velocity_vs_truth", orc.velocity, vm, 0.5, "m/s")
    add("estimate_velocity_vs_oracle", est.velocity + est.acceleration * mid, orc.velocity,
        rep.velocity_cell, "m/s")

    # a short Monte Carlo curve
    pts = monte_carlo_rmse(radar, Scene([tg]), [10.0], 100, seed, threads=threads)
    rows.append(["rmse_v_at_10db", pts[0].rmse_v, rep.velocity_cell, 0.0, "m/s",
                 bool(pts[0].rmse_v <= rep.velocity_cell)])
    rows.append(["rmse_failure_rate_at_10db", pts[0].failure_rate, 0.0, 0.0, "1",
                 bool(pts[0].failure_rate == 0.0)])
    return rows


def cmd_selftest(cfg, out: Path, seed: int, threads: int, fmt: str, args) -> list:
    rows = selftest_checks(seed, threads)
    path = io.write_table(out / "selftest", ["check", "value", "reference", "tolerance", "unit",
                                             "passed"], rows, fmt)
    failed = [r[0] for r in rows if not r[5]]
    if failed:
        raise RuntimeError(f"selftest checks failed: {', '.join(failed)}")
    return [path]


HANDLERS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "snr-curve": cmd_snr_curve,
            "rmse-curve": cmd_rmse_curve, "crossterm": cmd_crossterm, "selftest": cmd_selftest}


# -- entry points -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdfc-lvt", description=(
        "Sub-band dual-frequency conjugate LVT motion estimation: simulate, estimate and "
        "analyse."))
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON configuration (default: bundled table1 config)")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="64-bit seed, overrides the config seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not "
                   "depend on this)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    p.add_argument("--input", help="estimate: raw complex64 binary file to ingest")
    p.add_argument("--header", help="estimate: sidecar JSON (default: <input>.json)")
    p.add_argument("--count", type=int, help="estimate: number of targets to extract "
                   "(default: number of configured targets)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(command: str, config_path: Optional[str] = None, output_dir=".", *, seed=None,
        threads: int = 1, fmt: str = "csv", input=None, header=None, count=None) -> int:
    """Run one command; return the exit status (errors go to standard error)."""
    args = argparse.Namespace(input=input, header=header, count=count)
    try:
        if command not in HANDLERS:
            raise _Invalid(f"unknown command {command!r}")
        cfg = io.load_config(config_path) if config_path else io.bundled_config()
        io.validate_config(cfg)
        if seed is None:
            seed = cfg.get("seed", 0)
        if not 0 <= seed < 2**64:
            raise _Invalid("seed must be an unsigned 64-bit integer")
        if threads < 1:
            raise _Invalid("--threads must be >= 1")
        if count is not None and count < 1:
            raise _Invalid("--count must be >= 1")
        # build the objects once so parameter errors count as validation errors
        io.radar_from_config(cfg)
        io.scene_from_config(cfg, seed)
        io.lvt_from_config(cfg)
        if input is not None:
            io.read_header(header or input + ".json")
    except (io.ConfigError, IngestError, _Invalid, ValueError, TypeError) as e:
        print(f"sdfc-lvt: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    out = Path(output_dir)
    t0 = time.perf_counter()
    try:
        files = HANDLERS[command](cfg, out, int(seed), int(threads), fmt, args)
    except (_Invalid, IngestError) as e:
        print(f"sdfc-lvt: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:  # runtime or numeric failure
        print(f"sdfc-lvt: {command} failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("%s finished in %.1f s (kernels: %s)", command, time.perf_counter() - t0,
             kernels.BACKEND)
    for f in files:
        print(f)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    return run(a.command, a.config, a.out, seed=a.seed, threads=a.threads, fmt=a.fmt,
               input=a.input, header=a.header, count=a.count)


if __name__ == "__main__":
    sys.exit(main())
