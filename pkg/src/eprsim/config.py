"""Flat key-value config files for experiment runs.

The format is deliberately simple so parameter sweeps can address any
field by key: one ``key = value`` per line, ``#`` comments, SI units as
plain numbers (documented per key below).  Unknown keys are rejected;
missing keys fall back to the defaults with a warning.
"""

import hashlib
import json
from dataclasses import fields

from .experiment import ExperimentConfig

__all__ = ["ConfigError", "KEY_DOCS", "parse_config", "emit_defaults", "config_hash"]


class ConfigError(ValueError):
    """Config file problem, with file and line context where known."""


KEY_DOCS = {
    "n": "grid points (power of two, >= 8)",
    "dy": "grid spacing [m]",
    "wavelength": "design wavelength [m]",
    "sigma_plus": "pair center-of-mass width [m]",
    "sigma_minus": "pair relative-coordinate width [m]",
    "y0": "transverse offset of Bob's photon [m]",
    "theta": "direction-filter design angle [rad]",
    "focal": "filter lens focal length [m]",
    "pinhole_radius": "focal-plane hole radius [m]",
    "aperture_radius": "lens entrance aperture radius [m]",
    "slit_separation": "double-slit center separation [m]",
    "slit_width": "single slit width [m]",
    "screen_distance": "slit-to-screen distance [m]",
    "alice_basis": "position | momentum | none",
    "n_photons": "Monte Carlo photon count (0 disables sampling)",
    "seed": "RNG seed (unsigned 64-bit)",
}

_INT_KEYS = ("n", "n_photons", "seed")
_STR_KEYS = ("alice_basis",)


def _parse_int(text):
    try:
        return int(text)
    except ValueError:
        v = float(text)
        if not v.is_integer():
            raise ValueError(f"expected an integer, got {text!r}") from None
        return int(v)


def _coerce(key, text):
    if key in _INT_KEYS:
        return _parse_int(text)
    if key in _STR_KEYS:
        return text.strip().lower()
    return float(text)


def parse_config(path):
    """Read a config file; returns ``(ExperimentConfig, warnings)``.

    Warnings list every key that was filled from the defaults.  Raises
    ConfigError with a ``path:line`` prefix for syntax problems, and
    ValueError naming the field for semantic ones.
    """
    seen = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in KEY_DOCS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in seen:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            if not value:
                raise ConfigError(f"{path}:{lineno}: empty value for {key!r}")
            try:
                seen[key] = _coerce(key, value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    warnings = [
        f"{name} not set, using default {getattr(ExperimentConfig(), name)!r}"
        for name in KEY_DOCS
        if name not in seen
    ]
    cfg = ExperimentConfig(**seen)
    cfg.validate()
    return cfg, warnings


def emit_defaults():
    """Render the default config as a parseable, commented file."""
    cfg = ExperimentConfig()
    lines = ["# eprsim experiment configuration (SI units, flat keys)"]
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}  # {KEY_DOCS[f.name]}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonicalized config; independent of key order."""
    payload = {f.name: getattr(cfg, f.name) for f in fields(ExperimentConfig)}
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
