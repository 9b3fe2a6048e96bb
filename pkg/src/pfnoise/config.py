"""Experiment configuration: JSON schema, named presets and layering.

Precedence, lowest first: preset, config file, command-line flags.  The
output directory can additionally be forced with ``$PFNOISE_OUT``.
"""
from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from . import analysis
from .errors import PFNoiseError
from .maps import GrowthMap, MapKind, map_from_dict
from .noise import KINDS as NOISE_KINDS
from .noise import NoiseSpec
from .sim import PF, AddNoise, MultNoise, Plain, SimConfig

OUT_ENV = "PFNOISE_OUT"
DEFAULT_OUT = "pfnoise-out"

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "preset": {"type": "string"},
        "description": {"type": "string"},
        "map": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": [k.value for k in MapKind if k is not MapKind.CUSTOM]},
                "params": {"type": "object", "additionalProperties": _pos},
                "b": _pos,
                "name": {"type": "string"},
            },
        },
        "xstar": _pos,
        "nu": _pos,
        "regime": {"enum": ["plain", "pf", "mult", "add"]},
        "ell": {"type": "number", "minimum": 0},
        "d": _pos,
        "delta": {"type": "number", "minimum": 0},
        "epsilon": _pos,
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(NOISE_KINDS)},
                "params": {"type": "object", "additionalProperties": _pos},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
            },
        },
        "x0": _pos,
        "steps": {"type": "integer", "minimum": 1},
        "runs": {"type": "integer", "minimum": 1},
        "ells": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "check_design": {"type": "boolean"},
        "require_gamma": {"type": "number", "minimum": 0, "maximum": 1},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "format": {"enum": ["csv", "json"]}},
        },
    },
}

DEFAULTS = {
    "regime": "mult",
    "ell": 0.0,
    "delta": 1e-6,
    "epsilon": 1e-3,
    "noise": {"kind": "uniform", "params": {}, "seed": 0},
    "x0": 0.5,
    "steps": 1000,
    "runs": 1,
    "check_design": True,
    "output": {"format": "csv"},
}


class ConfigError(PFNoiseError, ValueError):
    pass


def preset_names() -> list[str]:
    root = resources.files("pfnoise") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    path = resources.files("pfnoise") / "presets" / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return json.loads(path.read_text())


def _merge(base: dict, top: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in top.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve(
    config_path: str | Path | None = None,
    preset: str | None = None,
    overrides: dict | None = None,
) -> dict:
    """Layer defaults, preset, config file and overrides; validate the result."""
    file_cfg: dict = {}
    if config_path is not None:
        try:
            file_cfg = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    name = preset or file_cfg.get("preset")
    cfg = copy.deepcopy(DEFAULTS)
    if name:
        cfg = _merge(cfg, load_preset(name))
        cfg["preset"] = name
    cfg = _merge(cfg, file_cfg)
    cfg = _merge(cfg, overrides or {})
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    if "map" not in cfg:
        raise ConfigError("config needs a map (or a preset)")
    return cfg


def output_dir(cfg: dict, flag: str | None = None) -> Path:
    if flag:
        return Path(flag)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path(cfg.get("output", {}).get("dir", DEFAULT_OUT))


@dataclass
class Experiment:
    """A resolved configuration with its map and control gain."""

    cfg: dict
    map: GrowthMap
    xstar: float | None
    nu: float | None

    @classmethod
    def from_config(cls, cfg: dict) -> Experiment:
        m = map_from_dict(cfg["map"])
        xstar, nu = cfg.get("xstar"), cfg.get("nu")
        if nu is None and xstar is not None:
            nu = analysis.design_nu(m, xstar).nu
        return cls(cfg, m, xstar, nu)

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec.from_dict(self.cfg["noise"])

    def regime(self):
        kind = self.cfg["regime"]
        if kind == "plain":
            return Plain()
        if self.nu is None:
            raise ConfigError(f"regime {kind!r} needs xstar or nu")
        if kind == "pf":
            return PF(self.nu)
        if kind == "mult":
            return MultNoise(self.nu, self.cfg["ell"], self.noise)
        return AddNoise(self.nu, self.cfg["ell"], self.noise, self.cfg.get("d"))

    def sim_config(self) -> SimConfig:
        return SimConfig(
            self.map,
            self.regime(),
            self.cfg["x0"],
            self.cfg["steps"],
            self.cfg["runs"],
            check_design=self.cfg["check_design"],
        )

    def theory_interval(self) -> tuple[float, float] | None:
        """Guaranteed eventual interval for the configured regime, if one applies."""
        if not self.cfg["check_design"] or self.nu is None:
            return None
        kind = self.cfg["regime"]
        if kind == "mult":
            return analysis.mult_interval(self.map, self.nu, self.cfg["ell"], self.cfg["delta"])
        if kind == "add":
            d = self.cfg.get("d", self.cfg["ell"])
            add = analysis.additive_design(self.map, self.nu, d, self.cfg["epsilon"])
            return add.interval
        return None
