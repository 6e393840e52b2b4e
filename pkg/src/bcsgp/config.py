"""Run configuration: defaults, YAML loading, validation and overrides."""

from __future__ import annotations

import copy

import yaml

from .grids import ConfigurationError
from .model import GaussianWell, HarmonicTrap, PowerLawTrap, SphericalWell

DEFAULTS = {
    "model": {
        "interaction": None,  # None -> Gaussian well tuned to binding energy 1
        "trap": {"type": "harmonic", "coefficient": 1.0},
        "d": 2.0,
        "h": 0.2,
    },
    "grids": {
        "micro": {"n": 3600, "r_max": 18.0},
        "macro": {"n": 2400, "r_max": 12.0},
    },
    "twobody": {"epsilon": 0.5, "ell_max": 4, "p_max": 30.0, "n_p": 1500},
    "gp": {"tol": 1e-8, "max_iter": 20000},
    "mc": {"samples": 2_000_000, "batch": 500_000, "seed": 0},
    "sweep": {"h_values": [0.4, 0.32, 0.25, 0.2, 0.16, 0.125]},
    "mu_c": {"bracket": [1.505, 1.7], "tol": 1e-3},
    "output": {"directory": "runs"},
}

_INTERACTION_KEYS = {
    "gaussian-well": {"type", "depth", "width"},
    "spherical-well": {"type", "depth", "radius"},
}
_TRAP_KEYS = {
    "harmonic": {"type", "coefficient"},
    "power": {"type", "coefficient", "beta"},
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigurationError(f"unknown configuration key {here!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, here)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _check_section(section: dict, allowed: set, name: str):
    extra = set(section) - allowed
    if extra:
        raise ConfigurationError(f"unknown keys in {name}: {sorted(extra)}")


def validate(cfg: dict) -> dict:
    """Range and consistency checks; raises ConfigurationError with the key path."""
    h = cfg["model"]["h"]
    if not (0.0 < h < 1.0):
        raise ConfigurationError(f"model.h must lie in (0, 1), got {h}")
    for hv in cfg["sweep"]["h_values"]:
        if not (0.0 < hv < 1.0):
            raise ConfigurationError(f"sweep.h_values entries must lie in (0, 1), got {hv}")
    inter = cfg["model"]["interaction"]
    if inter is not None:
        kind = inter.get("type")
        if kind not in _INTERACTION_KEYS:
            raise ConfigurationError(
                f"model.interaction.type must be one of {sorted(_INTERACTION_KEYS)}"
            )
        _check_section(inter, _INTERACTION_KEYS[kind], "model.interaction")
        if inter.get("depth", 1.0) <= 0:
            raise ConfigurationError("model.interaction.depth must be positive")
    trap = cfg["model"]["trap"]
    kind = trap.get("type")
    if kind not in _TRAP_KEYS:
        raise ConfigurationError(f"model.trap.type must be one of {sorted(_TRAP_KEYS)}")
    _check_section(trap, _TRAP_KEYS[kind], "model.trap")
    for gname in ("micro", "macro"):
        g = cfg["grids"][gname]
        if g["n"] < 16 or g["r_max"] <= 0:
            raise ConfigurationError(f"grids.{gname} needs n >= 16 and r_max > 0")
    if cfg["mc"]["samples"] < 1 or cfg["mc"]["batch"] < 1:
        raise ConfigurationError("mc.samples and mc.batch must be positive")
    lo, hi = cfg["mu_c"]["bracket"]
    if not lo < hi:
        raise ConfigurationError("mu_c.bracket must be increasing")
    if not (0.0 < cfg["twobody"]["epsilon"] < 1.0):
        raise ConfigurationError("twobody.epsilon must lie in (0, 1)")
    return cfg


def load_config(path: str | None = None, overrides: list | None = None) -> dict:
    """Defaults, optionally merged with a YAML file and key=value overrides."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        with open(path) as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"configuration file {path} must hold a mapping")
        cfg = _merge(cfg, loaded)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form key.path=value")
        key, raw = item.split("=", 1)
        value = yaml.safe_load(raw)
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigurationError(f"unknown configuration key {key!r}")
            node = node[part]
        leaf = parts[-1]
        if not isinstance(node, dict) or (leaf not in node and key != "model.interaction"):
            raise ConfigurationError(f"unknown configuration key {key!r}")
        node[leaf] = value
    return validate(cfg)


def build_interaction(cfg: dict):
    """Interaction potential from configuration, or None for the tuned default."""
    inter = cfg["model"]["interaction"]
    if inter is None:
        return None
    if inter["type"] == "gaussian-well":
        return GaussianWell(inter["depth"], inter.get("width", 1.0))
    return SphericalWell(inter["depth"], inter.get("radius", 1.0))


def build_trap(cfg: dict):
    trap = cfg["model"]["trap"]
    if trap["type"] == "harmonic":
        return HarmonicTrap(trap.get("coefficient", 1.0))
    return PowerLawTrap(trap.get("coefficient", 1.0), trap.get("beta", 2.0))
