"""Run configuration: a single JSON document describing a simulation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .geometry import Direction, RangeKind, RANGES
from .observer import PAPER_PSE_MEANS, Population
from .session import BlockConfig
from .staircase import Averaging, StaircaseConfig


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


_STAIRCASE_KEYS = {"start_upper", "start_lower", "base_step", "reversals_to_converge",
                   "reversals_to_average", "quick_start", "stimulus_floor", "averaging"}
_BLOCK_KEYS = {"training_trials", "catch_trials", "catch_pass_fraction", "trial_cap",
               "zone_radius", "max_adjustment", "center_distance"}
_POPULATION_KEYS = {f.name for f in fields(Population)}


@dataclass
class RunConfig:
    seed: int
    n_participants: int
    block_configs: dict[str, BlockConfig]
    population: Population
    output_dir: str | None = None
    raw: dict = field(default_factory=dict, repr=False)


def _parse_condition(name: str, where: str):
    try:
        direction, size = name.split("_")
        cond = (Direction(direction), size)
    except ValueError:
        raise ConfigError(where, f"unknown condition {name!r}") from None
    if size not in RANGES:
        raise ConfigError(where, f"unknown condition {name!r}")
    return cond


def _check_keys(section: dict, allowed: set, where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(where, "must be an object")
    for key in section:
        if key not in allowed:
            raise ConfigError(key if where == "<root>" else f"{where}.{key}", "unknown field")


def _number(section: dict, key: str, where: str, kind=float):
    value = section[key]
    name = f"{where}.{key}" if where else key
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, "must be an integer")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(name, "must be true or false")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, "must be a number")
    return float(value)


def _staircase(doc: dict, rk: RangeKind) -> StaircaseConfig:
    section = doc.get("staircase", {})
    _check_keys(section, _STAIRCASE_KEYS, "staircase")
    kwargs = {}
    for key in ("start_upper", "start_lower", "base_step", "stimulus_floor"):
        if key in section:
            kwargs[key] = _number(section, key, "staircase")
    for key in ("reversals_to_converge", "reversals_to_average"):
        if key in section:
            kwargs[key] = _number(section, key, "staircase", int)
    if "quick_start" in section:
        kwargs["quick_start"] = _number(section, "quick_start", "staircase", bool)
    if "averaging" in section:
        try:
            kwargs["averaging"] = Averaging(section["averaging"])
        except ValueError:
            raise ConfigError("staircase.averaging",
                              "must be 'per_staircase' or 'pooled'") from None
    sc = StaircaseConfig(stimulus_ceiling=rk.max_adjustment, **kwargs)
    try:
        sc.validate()
    except ValueError as exc:
        raise ConfigError("staircase", str(exc)) from None
    return sc


def _block(doc: dict, name: str) -> BlockConfig:
    where = f"blocks.{name}"
    section = doc.get("blocks", {}).get(name, {})
    _check_keys(section, _BLOCK_KEYS, where)
    base = RANGES[name]
    geo = {k: _number(section, k, where) for k in ("zone_radius", "max_adjustment",
                                                   "center_distance") if k in section}
    try:
        rk = RangeKind(name, **{"center_distance": base.center_distance,
                                "max_adjustment": base.max_adjustment,
                                "zone_radius": base.zone_radius, **geo})
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None
    kwargs = {k: _number(section, k, where, int)
              for k in ("training_trials", "catch_trials", "trial_cap") if k in section}
    if "catch_pass_fraction" in section:
        kwargs["catch_pass_fraction"] = _number(section, "catch_pass_fraction", where)
    try:
        return BlockConfig(rk, staircase_config=_staircase(doc, rk), **kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _population(doc: dict) -> Population:
    section = dict(doc.get("population", {}))
    _check_keys(section, _POPULATION_KEYS, "population")
    kwargs = {}
    for key, value in section.items():
        where = f"population.{key}"
        if key == "pse_means":
            if not isinstance(value, dict):
                raise ConfigError(where, "must map condition names to meters")
            means = dict(PAPER_PSE_MEANS)
            for name, v in value.items():
                means[_parse_condition(name, where)] = _number(value, name, where)
            kwargs[key] = means
        elif key == "trait_correlations":
            if not isinstance(value, dict):
                raise ConfigError(where, "must map 'trait:condition' to r")
            cells = {}
            for name, v in value.items():
                trait, _, cond = name.partition(":")
                cells[(trait, _parse_condition(cond, where))] = _number(value, name, where)
            kwargs[key] = cells
        elif key == "vr_experience_probs":
            if not isinstance(value, list):
                raise ConfigError(where, "must be a list of five weights")
            kwargs[key] = tuple(_number(dict(enumerate(value)), i, where)
                                for i in range(len(value)))
        else:
            kwargs[key] = _number(section, key, "population")
    try:
        return Population(**kwargs)
    except ValueError as exc:
        raise ConfigError("population", str(exc)) from None


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "must be a JSON object")
    _check_keys(doc, {"seed", "n_participants", "output_dir", "staircase", "blocks",
                      "population"}, "<root>")
    if "seed" not in doc:
        raise ConfigError("seed", "is required")
    seed = _number(doc, "seed", "", int)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed", "must be a non-negative 64-bit integer")
    if "n_participants" not in doc:
        raise ConfigError("n_participants", "is required")
    n = _number(doc, "n_participants", "", int)
    if n < 1:
        raise ConfigError("n_participants", "must be >= 1")
    blocks = doc.get("blocks", {})
    _check_keys(blocks, set(RANGES), "blocks")
    block_configs = {name: _block(doc, name) for name in RANGES}
    out = doc.get("output_dir")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output_dir", "must be a string path")
    return RunConfig(seed, n, block_configs, _population(doc), out, doc)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_config(doc)
