"""Configuration, raw-binary ingestion, tables and P5 heatmaps.

Raw binary files hold ``pulses x range`` complex samples, row-major, as
interleaved little-endian float32 ``(re, im)`` pairs.  A JSON sidecar
(``<file>.json``) carries the axis calibration.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import jsonschema
import numpy as np

from .errors import IngestError
from .lvt import LVTConfig
from .model import (FAST_TIME, RANGE_FREQUENCY, DataMatrix, RadarParams, Scene,
                    TargetMotion)

_POS = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["radar", "scene"],
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "radar": {
            "type": "object",
            "additionalProperties": False,
            "required": ["carrier_frequency_hz", "bandwidth_hz", "pulse_width_s",
                         "sampling_frequency_hz", "pri_s", "pulse_count"],
            "properties": {
                "carrier_frequency_hz": _POS,
                "bandwidth_hz": _POS,
                "pulse_width_s": _POS,
                "sampling_frequency_hz": _POS,
                "pri_s": _POS,
                "pulse_count": {"type": "integer", "minimum": 2},
                "propagation_speed_mps": _POS,
            },
        },
        "scene": {
            "type": "object",
            "additionalProperties": False,
            "required": ["targets"],
            "properties": {
                "targets": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["range_m", "velocity_mps", "acceleration_mps2"],
                        "properties": {
                            "range_m": _POS,
                            "velocity_mps": {"type": "number"},
                            "acceleration_mps2": {"type": "number"},
                            "reflectivity_re": {"type": "number"},
                            "reflectivity_im": {"type": "number"},
                        },
                    },
                },
                "snr_in_db": {"type": ["number", "null"]},
                "range_gate_s": {"type": "array", "items": {"type": "number"},
                                 "minItems": 2, "maxItems": 2},
            },
        },
        "subband": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"equalize": {"type": "boolean"}},
        },
        "keystone": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["czt", "sinc"]},
                "origin": {"enum": ["start", "center"]},
            },
        },
        "lvt": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "q": {"type": "integer", "minimum": 1},
                "h": _POS,
                "zero_pad_freq": {"enum": [1, 2, 4, 8, 16]},
                "zero_pad_chirp": {"enum": [1, 2, 4, 8, 16]},
                "window": {"enum": ["hann", "none"]},
            },
        },
        "montecarlo": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "trials": {"type": "integer", "minimum": 100},
                "snr_in_db": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "snr_pc_db": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "pulse_count": {"type": "integer", "minimum": 2},
            },
        },
    },
}


class ConfigError(ValueError):
    """Configuration does not validate."""


def load_config(path) -> dict:
    """Parse and validate a JSON configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    validate_config(cfg)
    return cfg


def validate_config(cfg: Mapping) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {e.message}") from e


def bundled_config(name: str = "table1") -> dict:
    """A configuration shipped with the package (``table1``: the two-target scene)."""
    text = resources.files("sdfc_lvt").joinpath("configs", f"{name}.json").read_text()
    return json.loads(text)


def radar_from_config(cfg: Mapping, pulse_count: Optional[int] = None) -> RadarParams:
    r = cfg["radar"]
    kw = {}
    if "propagation_speed_mps" in r:
        kw["c"] = r["propagation_speed_mps"]
    return RadarParams(r["carrier_frequency_hz"], r["bandwidth_hz"], r["pulse_width_s"],
                       r["sampling_frequency_hz"], r["pri_s"],
                       int(pulse_count or r["pulse_count"]), **kw)


def targets_from_config(cfg: Mapping):
    return tuple(TargetMotion.quadratic(t["range_m"], t["velocity_mps"], t["acceleration_mps2"],
                                        complex(t.get("reflectivity_re", 1.0),
                                                t.get("reflectivity_im", 0.0)))
                 for t in cfg["scene"]["targets"])


def scene_from_config(cfg: Mapping, seed: int) -> Scene:
    """Scene with noise set from ``snr_in_db`` relative to the strongest target."""
    targets = targets_from_config(cfg)
    snr = cfg["scene"].get("snr_in_db")
    v2 = 0.0
    if snr is not None:
        v2 = max(abs(t.reflectivity) ** 2 for t in targets) / 10 ** (snr / 10)
    return Scene(targets, v2, seed)


def lvt_from_config(cfg: Mapping) -> LVTConfig:
    return LVTConfig(**cfg.get("lvt", {}))


# -- atomic output -------------------------------------------------------------

_UMASK = os.umask(0)
os.umask(_UMASK)


def atomic_write(path, data: bytes) -> None:
    """Write ``data`` to a temporary file beside ``path`` and rename it over."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.chmod(tmp, 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> Path:
    """Write a table as CSV (header row first) or as a JSON list of records.

    Column names carry their unit suffix.  Floats are written with ``repr``
    so the output is exact and reproducible.
    """
    rows = [list(r) for r in rows]
    path = Path(path).with_suffix("." + fmt)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        atomic_write(path, buf.getvalue().encode())
    elif fmt == "json":
        recs = [{k: _jsonable(v) for k, v in zip(columns, r)} for r in rows]
        atomic_write(path, (json.dumps(recs, indent=1) + "\n").encode())
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def write_json(path, obj) -> Path:
    path = Path(path)
    atomic_write(path, (json.dumps(obj, indent=1, default=_jsonable) + "\n").encode())
    return path


# -- raw binary ------------------------------------------------------------------

def _header_radar(h: Mapping) -> dict:
    """Radar fields of a sidecar; the PRI may be given as ``prf_hz``."""
    out = {}
    if "pri_s" in h:
        out["pri"] = float(h["pri_s"])
    elif "prf_hz" in h:
        out["pri"] = 1.0 / float(h["prf_hz"])
    for key, name in (("sampling_frequency_hz", "sampling_frequency"),
                      ("carrier_frequency_hz", "carrier_frequency"),
                      ("bandwidth_hz", "bandwidth"), ("pulse_width_s", "pulse_width"),
                      ("propagation_speed_mps", "c")):
        if key in h:
            out[name] = float(h[key])
    return out


def read_header(path) -> dict:
    """Read the JSON sidecar of a raw binary file."""
    try:
        h = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise IngestError(f"unreadable header {path}: {e}") from e
    if not isinstance(h, dict):
        raise IngestError(f"header {path} must be a JSON object")
    for key in ("pulses", "range_samples"):
        if not isinstance(h.get(key), int) or h[key] < 1:
            raise IngestError(f"header {path} needs a positive integer {key!r}")
    if "sampling_frequency_hz" not in h or not ("pri_s" in h or "prf_hz" in h):
        raise IngestError(f"header {path} needs sampling_frequency_hz and pri_s or prf_hz")
    if h.get("domain", FAST_TIME) not in (FAST_TIME, RANGE_FREQUENCY):
        raise IngestError(f"header {path}: unknown domain {h['domain']!r}")
    return h


def load_raw_binary(path, header=None) -> DataMatrix:
    """Load a raw complex binary file as a :class:`DataMatrix`.

    Parameters
    ----------
    path : path-like
        Binary file, ``pulses * range_samples * 8`` bytes.
    header : mapping or path-like, optional
        Sidecar contents or its path; defaults to ``<path>.json``.  Radar
        parameters found in it are kept in ``meta["radar"]``.

    Raises
    ------
    IngestError
        Length mismatch or unreadable header.
    """
    path = Path(path)
    if header is None or isinstance(header, (str, os.PathLike)):
        header = read_header(header or str(path) + ".json")
    n_p, n_r = int(header["pulses"]), int(header["range_samples"])
    expected = n_p * n_r * 8
    try:
        actual = path.stat().st_size
    except OSError as e:
        raise IngestError(f"cannot read {path}: {e}") from e
    if actual != expected:
        raise IngestError(f"{path}: expected {expected} bytes for {n_p} x {n_r} complex64 "
                          f"samples, found {actual} bytes")
    raw = np.fromfile(path, dtype="<f4").reshape(n_p, n_r, 2)
    values = raw[..., 0].astype(np.float64) + 1j * raw[..., 1].astype(np.float64)
    radar = _header_radar(header)
    return DataMatrix(values, header.get("domain", FAST_TIME), radar["pri"],
                      radar["sampling_frequency"], float(header.get("gate_start_s", 0.0)),
                      {"radar": radar})


def radar_from_header(header: Mapping, base: Optional[RadarParams] = None) -> RadarParams:
    """RadarParams from a sidecar; fields it lacks come from ``base``."""
    fields = _header_radar(header)
    if base is not None:
        full = dict(carrier_frequency=base.carrier_frequency, bandwidth=base.bandwidth,
                    pulse_width=base.pulse_width, sampling_frequency=base.sampling_frequency,
                    pri=base.pri, c=base.c)
        full.update(fields)
        fields = full
    missing = {"carrier_frequency", "bandwidth", "pulse_width"} - set(fields)
    if missing:
        raise IngestError(f"header lacks {sorted(missing)} and no base radar was given")
    try:
        return RadarParams(pulse_count=int(header["pulses"]), **fields)
    except ValueError as e:
        raise IngestError(f"header radar parameters invalid: {e}") from e


def write_raw_binary(path, matrix: DataMatrix, radar: Optional[RadarParams] = None) -> Path:
    """Write ``matrix`` as complex64 plus its JSON sidecar ``<path>.json``."""
    path = Path(path)
    v = matrix.values
    raw = np.empty(v.shape + (2,), dtype="<f4")
    raw[..., 0] = v.real
    raw[..., 1] = v.imag
    h = {"pulses": matrix.n_pulses, "range_samples": matrix.n_range, "domain": matrix.domain,
         "sampling_frequency_hz": matrix.fs, "pri_s": matrix.pri,
         "gate_start_s": matrix.gate_start, "sample_format": "complex64 little-endian, row-major"}
    if radar is not None:
        h.update(carrier_frequency_hz=radar.carrier_frequency, bandwidth_hz=radar.bandwidth,
                 pulse_width_s=radar.pulse_width, propagation_speed_mps=radar.c)
    atomic_write(path, raw.tobytes())
    write_json(str(path) + ".json", h)
    return path


# -- heatmaps ----------------------------------------------------------------------

def heatmap_bytes(values, comments: Sequence[str] = (), dynamic_range_db: float = 60.0) -> bytes:
    """8-bit P5 graymap of ``20 log10 |values|`` clipped to the top 60 dB.

    Row ``i`` of the image is row ``i`` of ``values``; pixel 255 is the
    peak and 0 is anything 60 dB or more below it.  An all-zero input gives
    a black image.
    """
    mag = np.abs(np.asarray(values))
    if mag.ndim != 2:
        raise ValueError("heatmap input must be 2-D")
    if not np.all(np.isfinite(mag)):
        raise ValueError("heatmap input must be finite")
    peak = mag.max() if mag.size else 0.0
    img = np.zeros(mag.shape, dtype=np.uint8)
    if peak > 0:
        with np.errstate(divide="ignore"):
            rel = 20 * np.log10(mag / peak)
        rel = np.clip(rel, -dynamic_range_db, 0.0)
        img = np.round((rel + dynamic_range_db) * 255 / dynamic_range_db).astype(np.uint8)
    head = "P5\n"
    head += "".join(f"# {c}\n" for c in comments)
    head += f"# 20log10 magnitude, 255 = peak, 0 = peak - {dynamic_range_db:g} dB\n"
    head += f"{mag.shape[1]} {mag.shape[0]}\n255\n"
    return head.encode("ascii") + img.tobytes()


def write_heatmap(values, path, comments: Sequence[str] = ()) -> Path:
    """Write :func:`heatmap_bytes` atomically to ``path``."""
    path = Path(path)
    atomic_write(path, heatmap_bytes(values, comments))
    return path


def read_pgm(path):
    """Read a P5 graymap written by :func:`write_heatmap` (comments skipped)."""
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end].decode())
        pos = end
    if tokens[0] != "P5":
        raise ValueError("not a P5 graymap")
    w, h = int(tokens[1]), int(tokens[2])
    return np.frombuffer(data[pos + 1:pos + 1 + w * h], dtype=np.uint8).reshape(h, w)
