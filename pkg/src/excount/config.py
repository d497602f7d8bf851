"""Effective-configuration handling: defaults, config file, environment.

One TOML file configures the whole pipeline; every key can also be set
through the environment with the EXCOUNT_ prefix, double underscores
standing in for section dots (EXCOUNT_FILTER__STRIDE=3 sets filter.stride).
Precedence is environment over file over defaults. Unknown keys are errors:
a typo should fail loudly, not silently run defaults.
"""
from __future__ import annotations

import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .evaluation import MatchConfig
from .events import EventWindowConfig
from .fsm import TransitionTable, default_table, load_transition_table
from .heuristic import PRESETS, HeuristicConfig
from .stream import FilterConfig

ENV_PREFIX = "EXCOUNT_"


class ConfigError(ValueError):
    """Configuration failed to parse or validate."""


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs besides its inputs.

    table_path and out_dir are resolved at startup; artifacts echo the
    semantic configuration (and the loaded table's arcs), never paths.
    """

    filter: FilterConfig = FilterConfig()
    window: EventWindowConfig = EventWindowConfig()
    match: MatchConfig = MatchConfig()
    fps: float = 25.0
    table_path: str | None = None
    out_dir: str = "."
    verbosity: int = 0
    heuristics: Mapping[str, HeuristicConfig] = field(
        default_factory=lambda: dict(PRESETS)
    )

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.verbosity < 0:
            raise ValueError(f"verbosity must be >= 0, got {self.verbosity}")
        if not self.heuristics:
            raise ValueError("at least one heuristic preset is required")


DEFAULT_CONFIG = PipelineConfig()

_SECTION_TYPES = {"filter": FilterConfig, "window": EventWindowConfig, "match": MatchConfig}
_TOP_LEVEL = {"fps", "table", "out_dir", "verbosity", "heuristic", *_SECTION_TYPES}


def _build_section(cls: type, raw: Mapping, where: str):
    names = {f.name for f in fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f"[{where}]: unknown keys {sorted(unknown)}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}]: {exc}") from exc


def _heuristics_from(raw: Mapping) -> dict[str, HeuristicConfig]:
    presets = dict(PRESETS)
    for name, body in raw.items():
        if not isinstance(body, Mapping):
            raise ConfigError(f"[heuristic.{name}] must be a table")
        unknown = set(body) - {"vertical_threshold", "horizontal_threshold"}
        if unknown:
            raise ConfigError(f"[heuristic.{name}]: unknown keys {sorted(unknown)}")
        base = presets.get(name)
        vertical = body.get(
            "vertical_threshold", base.vertical_threshold if base else None
        )
        horizontal = body.get(
            "horizontal_threshold", base.horizontal_threshold if base else 1
        )
        if vertical is None:
            raise ConfigError(f"[heuristic.{name}]: vertical_threshold is required")
        try:
            presets[name] = HeuristicConfig(int(vertical), int(horizontal), preset=name)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[heuristic.{name}]: {exc}") from exc
    return presets


def build_config(raw: Mapping) -> PipelineConfig:
    unknown = set(raw) - _TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    sections = {}
    for name, cls in _SECTION_TYPES.items():
        body = raw.get(name, {})
        if not isinstance(body, Mapping):
            raise ConfigError(f"[{name}] must be a table")
        sections[name] = _build_section(cls, body, name)
    heuristic_raw = raw.get("heuristic", {})
    if not isinstance(heuristic_raw, Mapping):
        raise ConfigError("[heuristic] must be a table of presets")
    table = raw.get("table")
    if table is not None and not isinstance(table, str):
        raise ConfigError("table must be a path string")
    try:
        return PipelineConfig(
            filter=sections["filter"],
            window=sections["window"],
            match=sections["match"],
            fps=float(raw.get("fps", 25.0)),
            table_path=table,
            out_dir=str(raw.get("out_dir", ".")),
            verbosity=int(raw.get("verbosity", 0)),
            heuristics=_heuristics_from(heuristic_raw),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _coerce(text: str):
    value = text.strip()
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    return value


def apply_env_overrides(raw: Mapping, env: Mapping[str, str] | None = None) -> dict:
    """Overlay EXCOUNT_* variables onto the raw config tree."""
    if env is None:
        env = os.environ
    out = {k: dict(v) if isinstance(v, Mapping) else v for k, v in raw.items()}
    for key in sorted(env):
        if not key.startswith(ENV_PREFIX):
            continue
        parts = key[len(ENV_PREFIX):].lower().split("__")
        if not all(parts):
            raise ConfigError(f"malformed override name: {key}")
        node = out
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[parts[-1]] = _coerce(env[key])
    return out


def load_raw_config(path: str | Path | None = None) -> dict:
    """The config file as a raw tree, before overrides and validation."""
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config file {path}: {exc}") from exc


def merge_raw(base: Mapping, override: Mapping) -> dict:
    """Recursive overlay of one raw config tree on another."""
    out = {k: dict(v) if isinstance(v, Mapping) else v for k, v in base.items()}
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = merge_raw(out[key], value)
        else:
            out[key] = dict(value) if isinstance(value, Mapping) else value
    return out


def load_config(
    path: str | Path | None = None, env: Mapping[str, str] | None = None
) -> PipelineConfig:
    """Config file (optional) + environment overrides -> effective config."""
    return build_config(apply_env_overrides(load_raw_config(path), env))


def resolve_table(cfg: PipelineConfig) -> TransitionTable:
    """Load the configured transition table, or the packaged default."""
    if cfg.table_path is None:
        return default_table()
    try:
        return load_transition_table(cfg.table_path)
    except OSError as exc:
        raise ConfigError(f"cannot read transition table {cfg.table_path}: {exc}") from exc


def config_as_dict(cfg: PipelineConfig) -> dict:
    """The semantic configuration for artifact echoes. No filesystem paths:
    artifacts must be comparable across machines and checkouts."""
    return {
        "fps": cfg.fps,
        "verbosity": cfg.verbosity,
        "filter": asdict(cfg.filter),
        "window": asdict(cfg.window),
        "match": asdict(cfg.match),
        "heuristic": {
            name: {
                "vertical_threshold": preset.vertical_threshold,
                "horizontal_threshold": preset.horizontal_threshold,
            }
            for name, preset in sorted(cfg.heuristics.items())
        },
    }
