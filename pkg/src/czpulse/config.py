"""Run configuration: strict TOML schema, unit conversion, hashing.

Configuration files carry plain GHz / MHz / ns / us values; loading converts
them to internal angular units in one place.  Unknown sections or keys are
rejected, never silently ignored, and malformed values never fall back to
defaults.  Every output file carries the 12-hex-digit hash of the resolved
configuration so identical configs are recognizable byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import dataclass, field, fields as dataclass_fields
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .units import ghz, mhz

__all__ = ["ConfigError", "RunConfig", "load_config"]


class ConfigError(ValueError):
    """Invalid, unknown or missing configuration content."""


_DEFAULTS = {
    "device": {
        "omega_a_ghz": 6.91,
        "omega_b_ghz": 5.69,
        "alpha_a_ghz": -0.331,
        "alpha_b_ghz": -0.300,
        "j1_mhz": 14.3,
        "j2_mhz": 20.2,
        "charge_cutoff": 12,
    },
    "control": {
        "family": "invariant",
        "T_ns": 2.0,
        "t_wait_ns": 0.0,
        "detuning_mhz": 0.0,
        "samples": 2048,
        "slepian_lambda2": 0.0,
    },
    "lindblad": {
        "t1_us": math.inf,
        "t2_star_us": math.inf,
        "per_qubit": True,
    },
    "filter": {
        "cutoff_mhz": 200.0,
        "output_dt_ns": 0.05,
    },
    "integrator": {
        "rel_tol": 1e-9,
        "abs_tol": 1e-12,
        "max_step_ns": math.inf,
        "truncation": 60,
    },
    "sweep": {
        "T_list_ns": [],
        "t_wait_list_ns": [],
        "detuning_list_mhz": [],
        "families": ["linear", "faquad", "slepian", "invariant", "variational"],
        "budget": 400,
        "jobs": 1,
    },
    "output": {
        "dir": "",
    },
}

_NUMERIC = (int, float)


def _check_types(section: str, key: str, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{section}.{key} must be a boolean")
    elif isinstance(default, _NUMERIC):
        if not isinstance(value, _NUMERIC) or isinstance(value, bool):
            raise ConfigError(f"{section}.{key} must be a number")
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{section}.{key} must be a string")
    elif isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{section}.{key} must be a list")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration tree with unit-converted accessors."""

    tree: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        merged = {}
        for section, defaults in _DEFAULTS.items():
            merged[section] = dict(defaults)
        for section, content in self.tree.items():
            if section not in _DEFAULTS:
                raise ConfigError(f"unknown config section '{section}'")
            if not isinstance(content, dict):
                raise ConfigError(f"section '{section}' must be a table")
            for key, value in content.items():
                if key not in _DEFAULTS[section]:
                    raise ConfigError(f"unknown config key '{section}.{key}'")
                _check_types(section, key, value, _DEFAULTS[section][key])
                merged[section][key] = value
        _validate(merged)
        object.__setattr__(self, "tree", merged)

    # -- raw access ---------------------------------------------------------

    def __getitem__(self, section: str) -> dict:
        return self.tree[section]

    def hash(self) -> str:
        canon = json.dumps(self.tree, sort_keys=True, default=str)
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    # -- converted views ----------------------------------------------------

    def spectral_targets(self):
        from .hamiltonian import SpectralTargets

        d = self.tree["device"]
        return SpectralTargets(
            omega_a=ghz(d["omega_a_ghz"]),
            omega_b=ghz(d["omega_b_ghz"]),
            alpha_a=ghz(d["alpha_a_ghz"]),
            alpha_b=ghz(d["alpha_b_ghz"]),
            J_1=mhz(d["j1_mhz"]),
            J_2=mhz(d["j2_mhz"]),
        )

    def propagation_config(self):
        from .propagation import PropagationConfig

        i = self.tree["integrator"]
        return PropagationConfig(
            rel_tol=i["rel_tol"],
            abs_tol=i["abs_tol"],
            max_step=i["max_step_ns"],
            truncation=int(i["truncation"]),
        )

    def lindblad_spec(self):
        from .propagation import LindbladSpec

        l = self.tree["lindblad"]
        if math.isinf(l["t1_us"]) and math.isinf(l["t2_star_us"]):
            return None
        return LindbladSpec(
            T1=l["t1_us"], T2_star=l["t2_star_us"], per_qubit=l["per_qubit"]
        )

    def filter_spec(self):
        from .signal import FilterSpec

        return FilterSpec(omega_c=mhz(self.tree["filter"]["cutoff_mhz"]))

    @property
    def family(self) -> str:
        return self.tree["control"]["family"]

    @property
    def detuning(self) -> float:
        return mhz(self.tree["control"]["detuning_mhz"])


def _validate(tree: dict) -> None:
    c = tree["control"]
    from .controls import FAMILIES

    if c["family"] not in FAMILIES:
        raise ConfigError(
            f"control.family must be one of {', '.join(FAMILIES)}"
        )
    if c["T_ns"] <= 0:
        raise ConfigError("control.T_ns must be positive")
    if c["t_wait_ns"] < 0:
        raise ConfigError("control.t_wait_ns must be non-negative")
    if c["samples"] < 64:
        raise ConfigError("control.samples must be at least 64")
    f = tree["filter"]
    if f["cutoff_mhz"] <= 0:
        raise ConfigError("filter.cutoff_mhz must be positive")
    if f["output_dt_ns"] <= 0:
        raise ConfigError("filter.output_dt_ns must be positive")
    l = tree["lindblad"]
    if l["t1_us"] <= 0 or l["t2_star_us"] <= 0:
        raise ConfigError("lindblad times must be positive (inf disables)")
    i = tree["integrator"]
    if i["truncation"] < 6:
        raise ConfigError("integrator.truncation must be at least 6")
    s = tree["sweep"]
    if s["jobs"] < 1:
        raise ConfigError("sweep.jobs must be at least 1")
    for name in ("T_list_ns", "t_wait_list_ns", "detuning_list_mhz"):
        if not all(isinstance(v, _NUMERIC) for v in s[name]):
            raise ConfigError(f"sweep.{name} must contain numbers")
    unknown = [x for x in s["families"] if x not in FAMILIES]
    if unknown:
        raise ConfigError(f"unknown families in sweep.families: {unknown}")


def load_config(
    path: Optional[str] = None, overrides: Optional[dict] = None
) -> RunConfig:
    """Load a TOML file (optional) and apply flag overrides (flags win).

    ``overrides`` maps "section.key" to values.
    """
    tree: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                tree = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file is not valid TOML: {exc}")
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, key = dotted.partition(".")
        if not key:
            raise ConfigError(f"override '{dotted}' must be section.key")
        tree.setdefault(section, {})[key] = value
    return RunConfig(tree)
