"""Experiment configuration: JSON schema, dotted overrides, hashing."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .kernels import KernelSpec
from .simulate import FrequencyGrid, SimOptions
from .spectral import ModelParams, SpectralSpec

_SECTIONS = {
    "model": {"alpha", "beta", "gamma", "mu"},
    "spectrum": {"kappa", "w", "A"},
    "kernel": {"family", "nu", "a"},
    "grid": {"delta", "n_modes", "offset"},
    "lattice": {"t_min", "t_max", "t_steps", "x_min", "x_max", "x_steps"},
    "seeds": {"base_seed", "ensemble_size"},
    "options": {"representation", "quadrature", "origin_constant", "singular_policy", "tail_tolerance"},
    "run": None,  # free-form, read by each subcommand
}
_REQUIRED = {
    "model": ("alpha", "beta", "gamma", "mu"),
    "spectrum": ("kappa", "w", "A"),
    "kernel": ("nu", "a"),
}
DEFAULTS = {
    "grid": {"delta": 0.01, "n_modes": 1000, "offset": 0.0},
    "lattice": {"t_min": 0.0, "t_max": 2.0, "t_steps": 21, "x_min": 0.0, "x_max": 40.0, "x_steps": 81},
    "seeds": {"base_seed": 0, "ensemble_size": 1},
    "options": {},
    "run": {},
}


@dataclass(frozen=True)
class Lattice:
    t_min: float
    t_max: float
    t_steps: int
    x_min: float
    x_max: float
    x_steps: int

    def t_grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_steps)

    def x_grid(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.x_steps)


@dataclass(frozen=True)
class Seeds:
    base_seed: int
    ensemble_size: int

    def seeds(self) -> list[int]:
        return [self.base_seed + k for k in range(self.ensemble_size)]


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    model: ModelParams
    spectrum: SpectralSpec
    kernel: KernelSpec
    grid: FrequencyGrid
    lattice: Lattice
    seeds: Seeds
    options: SimOptions
    run: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def hash(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def parse_value(text: str):
    """Command-line override value: JSON if it parses, otherwise the bare string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(raw: dict, overrides: dict[str, object]) -> dict:
    out = copy.deepcopy(raw)
    for path, value in overrides.items():
        keys = path.split(".")
        node = out
        for k in keys[:-1]:
            nxt = node.setdefault(k, {})
            if not isinstance(nxt, dict):
                raise ConfigError(path, f"{k!r} is not a section")
            node = nxt
        node[keys[-1]] = value
    return out


def _get(sec: dict, section: str, key: str, kind=float):
    if key not in sec:
        raise ConfigError(f"{section}.{key}", "missing required field")
    val = sec[key]
    try:
        if kind is int:
            if isinstance(val, bool) or float(val) != int(val):
                raise ValueError
            return int(val)
        if kind is list:
            if not isinstance(val, list):
                raise ValueError
            return [float(v) for v in val]
        if kind is str:
            if not isinstance(val, str):
                raise ValueError
            return val
        if isinstance(val, bool):
            raise ValueError
        return float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key}", f"expected {kind.__name__}, got {val!r}") from None


def _build(section: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ValueError as exc:
        raise ConfigError(section, str(exc)) from None


def load_config(raw: dict) -> ExperimentConfig:
    """Validate a raw configuration dictionary.

    Every problem becomes a :class:`ConfigError` naming the offending field.
    """
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    merged = copy.deepcopy(raw)
    for name in merged:
        if name not in _SECTIONS:
            raise ConfigError(name, "unknown section")
    for name, default in DEFAULTS.items():
        merged[name] = {**default, **merged.get(name, {})}
    for name, keys in _SECTIONS.items():
        if name not in merged and name in _REQUIRED:
            raise ConfigError(name, "missing required section")
        sec = merged.get(name, {})
        if not isinstance(sec, dict):
            raise ConfigError(name, "section must be an object")
        if keys is not None:
            for k in sec:
                if k not in keys:
                    raise ConfigError(f"{name}.{k}", "unknown field")

    m = merged["model"]
    model = _build("model", ModelParams, _get(m, "model", "alpha"), _get(m, "model", "beta"),
                   _get(m, "model", "gamma"), _get(m, "model", "mu"))
    s = merged["spectrum"]
    spectrum = _build("spectrum", SpectralSpec, _get(s, "spectrum", "kappa", list),
                      _get(s, "spectrum", "w", list), _get(s, "spectrum", "A", list))
    k = merged["kernel"]
    family = k.get("family", "matern")
    if family != "matern":
        raise ConfigError("kernel.family", "only 'matern' can be configured from a file")
    kernel = _build("kernel", KernelSpec, "matern", _get(k, "kernel", "nu"), _get(k, "kernel", "a"))
    g = merged["grid"]
    grid = _build("grid", FrequencyGrid, _get(g, "grid", "delta"), _get(g, "grid", "n_modes", int),
                  _get(g, "grid", "offset"))
    lt = merged["lattice"]
    lattice = Lattice(_get(lt, "lattice", "t_min"), _get(lt, "lattice", "t_max"),
                      _get(lt, "lattice", "t_steps", int), _get(lt, "lattice", "x_min"),
                      _get(lt, "lattice", "x_max"), _get(lt, "lattice", "x_steps", int))
    if lattice.t_min < 0:
        raise ConfigError("lattice.t_min", "times must be >= 0")
    if lattice.t_max < lattice.t_min:
        raise ConfigError("lattice.t_max", "must be >= t_min")
    if lattice.x_max < lattice.x_min:
        raise ConfigError("lattice.x_max", "must be >= x_min")
    for key in ("t_steps", "x_steps"):
        if getattr(lattice, key) < 1:
            raise ConfigError(f"lattice.{key}", "must be >= 1")
    sd = merged["seeds"]
    seeds = Seeds(_get(sd, "seeds", "base_seed", int), _get(sd, "seeds", "ensemble_size", int))
    if seeds.ensemble_size < 1:
        raise ConfigError("seeds.ensemble_size", "must be >= 1")
    options = _build("options", SimOptions, **merged["options"])
    if not isinstance(merged["run"], dict):
        raise ConfigError("run", "section must be an object")
    return ExperimentConfig(model, spectrum, kernel, grid, lattice, seeds, options, merged["run"], merged)


def read_config(path: str, overrides: dict[str, object] | None = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"{path} line {exc.lineno}: {exc.msg}") from None
    return load_config(apply_overrides(raw, overrides or {}))
