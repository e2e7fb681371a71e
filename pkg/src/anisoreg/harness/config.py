"""Experiment configuration.

A config file is YAML with either a single ``experiment:`` mapping or an
``experiments:`` list.  Top-level ``seed`` and ``out`` apply to every entry
that does not set its own.  Precedence, highest first: command-line flags,
config fields, experiment defaults.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

FIELDS = ("name", "exponents", "measure", "resolution", "samples", "seed", "tolerances", "out", "params")
MEASURE_FAMILIES = ("axes", "product-stable", "double-exponent", "cusp")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    exponents: tuple | None = None
    measure: dict | None = None
    resolution: tuple | None = None
    samples: int | None = None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out: str = "results"
    params: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Plain-data view for reports; ``out`` is left out so reports do not depend on paths."""
        return {
            "name": self.name,
            "exponents": _listify(self.exponents),
            "measure": copy.deepcopy(self.measure),
            "resolution": _listify(self.resolution),
            "samples": self.samples,
            "seed": self.seed,
            "tolerances": dict(sorted(self.tolerances.items())),
            "params": _listify(dict(sorted(self.params.items()))),
        }


def _listify(x):
    if isinstance(x, (tuple, list)):
        return [_listify(v) for v in x]
    if isinstance(x, dict):
        return {k: _listify(v) for k, v in x.items()}
    return x


def _number(value, where: str) -> float:
    # YAML 1.1 reads "1e-6" as a string
    if isinstance(value, bool):
        raise ConfigError(where, f"expected a number, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(where, f"expected a number, got {value!r}") from None
    if not isinstance(value, (int, float)) or math.isnan(value):
        raise ConfigError(where, f"expected a number, got {value!r}")
    return float(value)


def _integer(value, where: str, minimum: int = 0) -> int:
    if isinstance(value, bool):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, str):
        try:
            value = int(float(value)) if float(value).is_integer() else value
        except ValueError:
            pass
    if not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(where, f"must be >= {minimum}, got {value}")
    return value


def _alpha_vector(value, where: str) -> tuple:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(where, f"expected a non-empty list of exponents, got {value!r}")
    out = tuple(_number(a, f"{where}[{i}]") for i, a in enumerate(value))
    for i, a in enumerate(out):
        if not 0.0 < a < 2.0:
            raise ConfigError(f"{where}[{i}]", f"exponent must lie in (0, 2), got {a}")
    return out


def _exponents(value) -> tuple:
    """A single vector or a list of vectors; always returned as a tuple of vectors."""
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError("exponents", f"expected a vector or a list of vectors, got {value!r}")
    if all(isinstance(v, (list, tuple)) for v in value):
        return tuple(_alpha_vector(v, f"exponents[{i}]") for i, v in enumerate(value))
    return (_alpha_vector(value, "exponents"),)


def _measure(value) -> dict:
    if not isinstance(value, dict):
        raise ConfigError("measure", f"expected a mapping with 'family', got {value!r}")
    unknown = set(value) - {"family", "params"}
    if unknown:
        raise ConfigError("measure", f"unknown keys {sorted(unknown)}")
    family = str(value.get("family", "")).lower().replace("_", "-")
    if family not in MEASURE_FAMILIES:
        raise ConfigError("measure.family", f"unknown family {value.get('family')!r}; choose from {list(MEASURE_FAMILIES)}")
    params = value.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("measure.params", "expected a mapping")
    required = {
        "axes": ("alphas",),
        "product-stable": ("alpha", "beta"),
        "double-exponent": ("alphas", "betas"),
        "cusp": ("alphas",),
    }[family]
    for key in required:
        if key not in params:
            raise ConfigError(f"measure.params.{key}", f"required for family {family!r}")
    clean = {}
    for key, v in params.items():
        where = f"measure.params.{key}"
        if key in ("alphas", "betas"):
            clean[key] = list(_alpha_vector(v, where))
        elif key in ("alpha", "beta"):
            clean[key] = _number(v, where)
        elif key == "alpha0":
            clean[key] = _number(v, where)
        elif key == "coefficient":
            if isinstance(v, str):
                if v not in ("unit", "stock"):
                    raise ConfigError(where, f"expected 'unit', 'stock' or a number, got {v!r}")
                clean[key] = v
            else:
                clean[key] = _number(v, where)
        else:
            raise ConfigError(where, "unknown parameter")
    if family == "cusp" and len(clean["alphas"]) != 2:
        raise ConfigError("measure.params.alphas", "the cusp family is planar; give two exponents")
    return {"family": family, "params": clean}


def _resolution(value) -> tuple:
    if isinstance(value, (list, tuple)):
        if not value:
            raise ConfigError("resolution", "empty list")
        return tuple(_integer(v, f"resolution[{i}]", 2) for i, v in enumerate(value))
    return (_integer(value, "resolution", 2),)


def _tolerances(value, allowed: dict) -> dict:
    if not isinstance(value, dict):
        raise ConfigError("tolerances", "expected a mapping")
    out = {}
    for key, v in value.items():
        if key not in allowed:
            raise ConfigError(f"tolerances.{key}", f"unknown tolerance; known: {sorted(allowed)}")
        x = _number(v, f"tolerances.{key}")
        if not x > 0:
            raise ConfigError(f"tolerances.{key}", f"must be positive, got {x}")
        out[key] = x
    return out


def _params(value, allowed: dict) -> dict:
    if not isinstance(value, dict):
        raise ConfigError("params", "expected a mapping")
    out = {}
    for key, v in value.items():
        if key not in allowed:
            raise ConfigError(f"params.{key}", f"unknown parameter; known: {sorted(allowed)}")
        default = allowed[key]
        where = f"params.{key}"
        if isinstance(default, bool):
            if not isinstance(v, bool):
                raise ConfigError(where, f"expected true or false, got {v!r}")
            out[key] = v
        elif isinstance(default, int):
            out[key] = _integer(v, where, 1)
        elif isinstance(default, float):
            out[key] = _number(v, where)
        elif isinstance(default, (list, tuple)):
            if not isinstance(v, (list, tuple)) or not v:
                raise ConfigError(where, "expected a non-empty list")
            out[key] = [_number(x, f"{where}[{i}]") for i, x in enumerate(v)]
        else:
            out[key] = v
    return out


def build_config(entry: dict, defaults: dict | None = None) -> ExperimentConfig:
    """Validate one mapping against the named experiment and merge its defaults.

    ``defaults`` carries file-level ``seed`` and ``out``.
    """
    from .experiments import REGISTRY

    if not isinstance(entry, dict):
        raise ConfigError("experiment", f"expected a mapping, got {type(entry).__name__}")
    unknown = set(entry) - set(FIELDS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown field; known: {list(FIELDS)}")
    name = entry.get("name")
    if name not in REGISTRY:
        raise ConfigError("name", f"unknown experiment {name!r}; run 'anisoreg list'")
    spec = REGISTRY[name]
    merged = dict(defaults or {})
    merged.update({k: v for k, v in entry.items() if v is not None})

    exponents = _exponents(merged["exponents"]) if "exponents" in merged else spec.exponents
    measure = _measure(merged["measure"]) if "measure" in merged else spec.measure
    resolution = _resolution(merged["resolution"]) if "resolution" in merged else spec.resolution
    samples = _integer(merged["samples"], "samples", 1) if "samples" in merged else spec.samples
    seed = _integer(merged.get("seed", 0), "seed", 0)
    tolerances = dict(spec.tolerances)
    tolerances.update(_tolerances(merged.get("tolerances", {}) or {}, spec.tolerances))
    params = dict(spec.params)
    params.update(_params(merged.get("params", {}) or {}, spec.params))
    out = str(merged.get("out", "results"))
    cfg = ExperimentConfig(name, exponents, measure, resolution, samples, seed, tolerances, out, params)
    spec.validate(cfg)
    return cfg


def parse_config(data) -> list:
    """Configs from already-parsed YAML data."""
    if data is None:
        return []
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a mapping")
    unknown = set(data) - {"experiment", "experiments", "seed", "out"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown top-level key")
    if "experiment" in data and "experiments" in data:
        raise ConfigError("experiments", "give either 'experiment' or 'experiments', not both")
    defaults = {k: data[k] for k in ("seed", "out") if k in data}
    if "experiment" in data:
        entries = [data["experiment"]]
    else:
        entries = data.get("experiments") or []
        if not isinstance(entries, list):
            raise ConfigError("experiments", "expected a list")
    return [build_config(e, defaults) for e in entries]


def load_config(path) -> list:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"not valid YAML: {exc}") from None
    return parse_config(data)


def override(cfg: ExperimentConfig, seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    """Apply command-line overrides."""
    changes = {}
    if seed is not None:
        changes["seed"] = _integer(seed, "seed", 0)
    if out is not None:
        changes["out"] = str(out)
    if not changes:
        return cfg
    return replace(cfg, **changes)
