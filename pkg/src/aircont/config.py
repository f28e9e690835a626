"""YAML configuration for the command-line pipelines.

A config file is a plant description (``name``, ``A``, ``b``, ``labels``)
plus optional sections ``timing``, ``grid``, ``sweep`` and ``sim`` and a
top-level ``seed``. Every omitted value takes its default; unknown keys are
rejected with the line they appear on. A run manifest (which embeds the
resolved config under ``config``) is accepted wherever a config is.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError, ValidationError
from .plant import REFERENCE_GAIN, PlantModel, default_ball_and_beam, plant_from_dict

DEFAULT_SEED = 2021


@dataclass(frozen=True)
class TimingSection:
    T_s: float = 0.01
    N: int | None = None


@dataclass(frozen=True)
class GridSection:
    delta_min: float = 0.005
    delta_max: float = 0.30
    delta_steps: int = 60
    ratio_min: float = 0.0
    ratio_max: float = 1.0
    ratio_steps: int = 50
    gain: tuple[float, ...] = REFERENCE_GAIN
    margin: float = 0.0


@dataclass(frozen=True)
class SweepSection:
    N_list: tuple[int, ...] = (10, 100)
    p_bar_values: tuple[float, ...] = (0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
    sigma2_values: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    p_bar_fixed: float = 2.5
    sigma2_fixed: float = 0.5
    trials: int = 10_000


@dataclass(frozen=True)
class SimSection:
    horizon: float = 10.0
    x0: tuple[float, ...] | None = None
    gain: tuple[float, ...] = REFERENCE_GAIN
    delta_ideal: float = 0.01
    delta_air: float = 0.01
    delta_sota: float = 0.05
    p_bar: float = 2.5
    sigma2: float = 1e-3
    sigma_s2: float = 1e-3
    sigma_a2: float = 1e-3
    h: tuple[float, ...] | None = None
    h_a: float | None = None
    noise_enabled: bool = True


@dataclass(frozen=True)
class AppConfig:
    plant: PlantModel = field(default_factory=default_ball_and_beam)
    seed: int = DEFAULT_SEED
    timing: TimingSection = TimingSection()
    grid: GridSection = GridSection()
    sweep: SweepSection = SweepSection()
    sim: SimSection = SimSection()

    def resolved(self) -> "AppConfig":
        """Copy with plant-dependent defaults filled in."""
        timing = self.timing
        if timing.N is None:
            timing = dataclasses.replace(timing, N=self.plant.N)
        sim = self.sim
        if sim.x0 is None:
            sim = dataclasses.replace(sim, x0=(0.1,) + (0.0,) * (self.plant.N - 1))
        return dataclasses.replace(self, timing=timing, sim=sim)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = self.plant.to_dict()
        d["seed"] = self.seed
        for name in _SECTIONS:
            d[name] = _plain(dataclasses.asdict(getattr(self, name)))
        return d


_SECTIONS: dict[str, type] = {
    "timing": TimingSection,
    "grid": GridSection,
    "sweep": SweepSection,
    "sim": SimSection,
}
_PLANT_KEYS = ("name", "A", "b", "labels")


def _plain(obj):
    if isinstance(obj, Mapping):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _key_lines(node: yaml.Node | None) -> dict[tuple[str, ...], int]:
    """1-based line of every top-level and section-level key."""
    lines: dict[tuple[str, ...], int] = {}
    if not isinstance(node, yaml.MappingNode):
        return lines
    for k, v in node.value:
        lines[(k.value,)] = k.start_mark.line + 1
        if isinstance(v, yaml.MappingNode):
            for k2, _ in v.value:
                lines[(k.value, k2.value)] = k2.start_mark.line + 1
    return lines


def _coerce(cls, name: str, raw: Any, where) -> Any:
    if raw is None:
        return cls()
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{where((name,))}: section '{name}' must be a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in fields:
            raise ConfigError(f"{where((name, key))}: unknown key '{key}' in section '{name}'")
        default = fields[key].default
        if isinstance(value, list):
            value = tuple(value)
        if value is not None and isinstance(default, (int, float)) and not isinstance(default, bool):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{where((name, key))}: '{name}.{key}' must be a number")
            value = type(default)(value) if isinstance(default, float) else value
        kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data: Mapping[str, Any], *, source: str = "<config>",
                     lines: dict[tuple[str, ...], int] | None = None) -> AppConfig:
    lines = lines or {}

    def where(key: tuple[str, ...]) -> str:
        line = lines.get(key)
        return f"{source}:{line}" if line else source

    if "config" in data and "command" in data:
        inner = data["config"]
        if not isinstance(inner, Mapping):
            raise ConfigError(f"{source}: manifest 'config' is not a mapping")
        sub = {k[1:]: v for k, v in lines.items() if k[0] == "config" and len(k) > 1}
        return config_from_dict(inner, source=source, lines=sub)

    allowed = set(_PLANT_KEYS) | set(_SECTIONS) | {"seed"}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{where((key,))}: unknown top-level key '{key}'")
    plant_part = {k: data[k] for k in _PLANT_KEYS if k in data}
    if plant_part:
        plant = plant_from_dict(plant_part, source=source)
    else:
        plant = default_ball_and_beam()
    seed = data.get("seed", DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"{where(('seed',))}: seed must be a nonnegative integer")
    try:
        sections = {name: _coerce(cls, name, data.get(name), where)
                    for name, cls in _SECTIONS.items()}
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    cfg = AppConfig(plant=plant, seed=seed, **sections)
    if cfg.timing.N is not None and (not isinstance(cfg.timing.N, int) or cfg.timing.N < 1):
        raise ConfigError(f"{where(('timing', 'N'))}: timing.N must be a positive integer")
    return cfg.resolved()


def parse_config(text: str, source: str = "<config>") -> AppConfig:
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ConfigError(f"{loc}: {getattr(exc, 'problem', exc)}") from exc
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"{source}: top level must be a mapping")
    try:
        return config_from_dict(data, source=source, lines=_key_lines(node))
    except ValidationError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path: str | Path | None) -> AppConfig:
    if path is None:
        return AppConfig().resolved()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    return parse_config(text, source=str(path))


def dump_yaml(data: Mapping[str, Any]) -> str:
    return yaml.safe_dump(_plain(data), sort_keys=False, default_flow_style=None, width=100)
