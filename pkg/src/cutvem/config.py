"""Study configuration files (TOML with flat and dotted keys)."""

from __future__ import annotations

import dataclasses
import sys
from pathlib import Path
from typing import Any, Mapping, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .harness import StudyConfig

# config key -> StudyConfig field
KEY_MAP = {
    "n_values": "n_values",
    "alpha_plus": "alpha_plus",
    "alpha_minus": "alpha_minus",
    "beta_plus": "beta_plus",
    "beta_minus": "beta_minus",
    "gamma_k": "gamma_k",
    "cg_tol": "cg_tol",
    "quad_degree": "quad_degree",
    "r2": "r2",
    "k2": "k2",
    "interface.name": "interface_name",
    "interface.cx": "interface_cx",
    "interface.cy": "interface_cy",
    "interface.r": "interface_r",
    "output.path": "output_path",
    "output.format": "output_format",
}


def _flatten(data: Mapping[str, Any], prefix: str = "") -> dict:
    out = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def config_from_mapping(data: Mapping[str, Any], base: Optional[StudyConfig] = None) -> StudyConfig:
    """Apply (possibly nested) config keys on top of ``base``."""
    flat = _flatten(data)
    unknown = sorted(set(flat) - set(KEY_MAP))
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
    fields = {f.name: f for f in dataclasses.fields(StudyConfig)}
    updates = {}
    for key, value in flat.items():
        name = KEY_MAP[key]
        if name == "n_values":
            value = tuple(int(v) for v in (value if isinstance(value, (list, tuple)) else [value]))
            if any(v < 2 for v in value):
                raise ValueError("n_values must be integers >= 2")
        elif name == "quad_degree":
            value = int(value)
        elif fields[name].type in ("float", float):
            value = float(value)
        updates[name] = value
    return dataclasses.replace(base or StudyConfig(), **updates)


def load_config(path, base: Optional[StudyConfig] = None) -> StudyConfig:
    with open(Path(path), "rb") as fh:
        return config_from_mapping(tomllib.load(fh), base)
