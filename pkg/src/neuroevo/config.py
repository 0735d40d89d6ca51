"""Experiment configuration and its INI representation.

Every field has a default, so a config file only needs the values it changes::

    [experiment]
    algorithm = msm
    runs = 10
    master_seed = 12345

    [ga]
    population_size = 50
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, InputError
from .ga import GAConfig
from .lake import DEFAULT_ROWS, LakeMap
from .msm import MSMConfig
from .network import NetworkShape
from .sparse import DirectedConfig
from .stats import ALGORITHMS


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str = "baseline"
    ga: GAConfig = field(default_factory=GAConfig)
    msm: MSMConfig = field(default_factory=MSMConfig)
    directed: DirectedConfig = field(default_factory=DirectedConfig)
    network: NetworkShape = field(default_factory=NetworkShape)
    lake_rows: tuple[str, ...] = DEFAULT_ROWS
    slippery_start: bool = True
    runs: int = 10
    master_seed: int = 12345

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.runs < 1:
            raise ConfigError("runs must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit non-negative integer")
        try:
            self.lake()
        except InputError as exc:
            raise ConfigError(f"invalid lake map: {exc}") from None

    def lake(self) -> LakeMap:
        return LakeMap(self.lake_rows, slippery_start=self.slippery_start)


_SECTIONS = {"ga": GAConfig, "msm": MSMConfig, "directed": DirectedConfig}


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(str(v) for v in value)
    return str(value)


def _parse(raw: str, like, name: str, optional: bool = False):
    raw = raw.strip()
    if optional and not raw:
        return None
    try:
        if isinstance(like, bool):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if isinstance(like, int):
            return int(raw)
        if isinstance(like, float) or like is None:
            return float(raw)
        if isinstance(like, tuple):
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            return tuple(int(p) for p in parts) if like and isinstance(like[0], int) else tuple(parts)
        return raw
    except ValueError:
        raise ConfigError(f"cannot parse {name} = {raw!r}") from None


def to_ini(config: ExperimentConfig, extra: dict | None = None) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp["experiment"] = {"algorithm": config.algorithm, "runs": str(config.runs),
                        "master_seed": str(config.master_seed)}
    for section in _SECTIONS:
        sub = getattr(config, section)
        cp[section] = {f.name: _format(getattr(sub, f.name)) for f in dataclasses.fields(sub)}
    cp["network"] = {"layer_sizes": _format(config.network.layer_sizes),
                     "activation": config.network.activation}
    cp["lake"] = {"rows": _format(config.lake_rows), "slippery_start": _format(config.slippery_start)}
    for name, values in (extra or {}).items():
        cp[name] = {k: _format(v) for k, v in values.items()}
    lines = []
    for name in cp.sections():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}".rstrip() for k, v in cp[name].items())
        lines.append("")
    return "\n".join(lines)


def from_ini(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    unknown_sections = set(cp.sections()) - {"experiment", "network", "lake", "meta", *_SECTIONS}
    if unknown_sections:
        raise ConfigError(f"unknown config sections {sorted(unknown_sections)}")
    base = base or ExperimentConfig()
    changes: dict = {}
    if cp.has_section("experiment"):
        sec = cp["experiment"]
        for key, like in (("algorithm", ""), ("runs", 0), ("master_seed", 0)):
            if key in sec:
                changes[key] = _parse(sec[key], like, f"experiment.{key}")
        unknown = set(sec) - {"algorithm", "runs", "master_seed"}
        if unknown:
            raise ConfigError(f"unknown keys in [experiment]: {sorted(unknown)}")
    for section, cls in _SECTIONS.items():
        if not cp.has_section(section):
            continue
        current = getattr(base, section)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(cp[section]) - names
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
        optional = {f.name for f in dataclasses.fields(cls) if "None" in str(f.type)}
        values = {k: _parse(v, getattr(current, k), f"{section}.{k}", k in optional)
                  for k, v in cp[section].items()}
        changes[section] = dataclasses.replace(current, **values)
    if cp.has_section("network"):
        sec = cp["network"]
        changes["network"] = NetworkShape(
            _parse(sec.get("layer_sizes", "16,10,10,4"), (0,), "network.layer_sizes"),
            sec.get("activation", base.network.activation).strip())
    if cp.has_section("lake"):
        sec = cp["lake"]
        if "rows" in sec:
            changes["lake_rows"] = _parse(sec["rows"], ("",), "lake.rows")
        if "slippery_start" in sec:
            changes["slippery_start"] = _parse(sec["slippery_start"], True, "lake.slippery_start")
    return dataclasses.replace(base, **changes)


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    return from_ini(Path(path).read_text(), base)
