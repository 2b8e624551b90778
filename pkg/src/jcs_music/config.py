"""JSON run configuration: schema, defaults, validation, object binding."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .channel import NoiseConfig, WaveformConfig
from .constants import speed_of_light
from .steering import ArrayConfig

SCHEMA_VERSION = 1

DEFAULTS: dict[str, Any] = {
    "schema": SCHEMA_VERSION,
    "array": {"rows": 8, "cols": 8},
    "waveform": {
        "n_subcarriers": 256,
        "n_symbols": 64,
        "subcarrier_spacing": 480e3,
        "guard_interval": 0.0,
        "carrier_freq": 63e9,
        "qam_order": 4,
    },
    "noise": {
        "noise_var": 4.9177e-12,
        "inr_sense_db": 3.0,
        "inr_comm_db": 3.0,
    },
    "scenario": {
        "n_scatterers": 2,
        "reflect_var": 1.0,
        "fading": "phase",
        "mue_x": None,
    },
    "sweep": {
        "sinr_grid_db": [-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0],
        "trials": 200,
    },
    "legacy_c": False,
}


class ConfigError(ValueError):
    """Configuration problem, annotated with the offending key path."""


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, val in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{here}: expected an object")
            out[key] = _merge(base[key], val, here)
        else:
            out[key] = val
    return out


def _validate(cfg: dict) -> None:
    def require(cond, msg):
        if not cond:
            raise ConfigError(msg)

    require(cfg["schema"] == SCHEMA_VERSION,
            f"schema: expected version {SCHEMA_VERSION}")
    arr = cfg["array"]
    require(int(arr["rows"]) >= 1 and int(arr["cols"]) >= 1,
            "array.rows/cols: must be >= 1")
    wf = cfg["waveform"]
    require(int(wf["n_subcarriers"]) >= 2, "waveform.n_subcarriers: must be >= 2")
    require(int(wf["n_symbols"]) >= 2, "waveform.n_symbols: must be >= 2")
    require(wf["subcarrier_spacing"] > 0, "waveform.subcarrier_spacing: must be > 0")
    require(wf["guard_interval"] >= 0, "waveform.guard_interval: must be >= 0")
    require(wf["carrier_freq"] > 0, "waveform.carrier_freq: must be > 0")
    require(int(wf["qam_order"]) in (4, 16, 64),
            "waveform.qam_order: must be one of 4, 16, 64")
    require(cfg["noise"]["noise_var"] > 0, "noise.noise_var: must be > 0")
    sc = cfg["scenario"]
    require(int(sc["n_scatterers"]) >= 0, "scenario.n_scatterers: must be >= 0")
    require(sc["fading"] in ("phase", "rayleigh"),
            "scenario.fading: must be 'phase' or 'rayleigh'")
    sw = cfg["sweep"]
    require(len(sw["sinr_grid_db"]) >= 1, "sweep.sinr_grid_db: must be nonempty")
    require(int(sw["trials"]) >= 1, "sweep.trials: must be >= 1")


def load_config(path: str | Path | None = None,
                overrides: dict | None = None) -> dict:
    """Defaults, optionally overlaid with a JSON file and a dict."""
    cfg = DEFAULTS
    if path is not None:
        with open(path) as fh:
            try:
                user = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        cfg = _merge(cfg, user)
    if overrides:
        cfg = _merge(cfg, overrides)
    _validate(cfg)
    return cfg


@dataclass(frozen=True)
class RunContext:
    """Validated config bound to typed objects."""

    config: dict
    array: ArrayConfig
    wave: WaveformConfig
    noise: NoiseConfig
    c: float


def bind(cfg: dict, legacy_c: bool | None = None) -> RunContext:
    legacy = cfg["legacy_c"] if legacy_c is None else legacy_c
    c = speed_of_light(legacy)
    wf = cfg["waveform"]
    wave = WaveformConfig(n_subcarriers=int(wf["n_subcarriers"]),
                          n_symbols=int(wf["n_symbols"]),
                          subcarrier_spacing=float(wf["subcarrier_spacing"]),
                          guard_interval=float(wf["guard_interval"]),
                          carrier_freq=float(wf["carrier_freq"]),
                          qam_order=int(wf["qam_order"]))
    arr = cfg["array"]
    array = ArrayConfig(rows=int(arr["rows"]), cols=int(arr["cols"]),
                        spacing=wave.wavelength(c) / 2.0,
                        wavelength=wave.wavelength(c))
    nz = cfg["noise"]
    noise = NoiseConfig(noise_var=float(nz["noise_var"]),
                        inr_sense_db=float(nz["inr_sense_db"]),
                        inr_comm_db=float(nz["inr_comm_db"]))
    return RunContext(config=cfg, array=array, wave=wave, noise=noise, c=c)
