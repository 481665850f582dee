"""Run configuration: JSON in, validated dataclasses out.

Every section is a dataclass; unknown keys and invalid values are rejected
with the dotted path of the offending field. Problem-specific defaults are
applied before the user's values.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .grid import LAYOUTS, SP_RULES
from .problems import AdvectedBackgroundConfig, OpinionConfig, SwarmingConfig
from .stepping import SCHEMES

PROBLEMS = ("opinion", "advected", "swarming2d")
DT_POLICIES = ("explicit-bound", "semiimplicit-bound", "cn-bound", "cfl", "fixed")
RULES = tuple(SP_RULES) + tuple(SP_RULES.values())


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the field path."""


@dataclass
class GridSection:
    n: int = 41
    layout: str = "cell"


@dataclass
class GPCSection:
    order: int = 5
    n_theta: Optional[int] = None


@dataclass
class QuadratureSection:
    rule: str = "G"
    gauss_nodes: int = 8


@dataclass
class TimeSection:
    scheme: str = "rk4"
    dt_policy: str = "explicit-bound"
    dt: Optional[float] = None
    cfl: float = 0.5
    safety: float = 1.0
    t_end: float = 25.0


@dataclass
class OutputSection:
    directory: str = "output"
    snapshot_times: Optional[list] = None
    series_every: Optional[int] = None


@dataclass
class ConvergeSection:
    grids: list = field(default_factory=lambda: [21, 41, 81])
    times: list = field(default_factory=lambda: [1.0, 5.0, 10.0])
    rules: list = field(default_factory=lambda: ["2", "4", "6", "G"])
    layout: str = "node"


@dataclass
class EntropySection:
    grids: list = field(default_factory=lambda: [11, 21])
    rows: list = field(default_factory=lambda: [0, 1])


@dataclass
class RunConfig:
    problem: str = "opinion"
    grid: GridSection = field(default_factory=GridSection)
    gpc: GPCSection = field(default_factory=GPCSection)
    quadrature: QuadratureSection = field(default_factory=QuadratureSection)
    time: TimeSection = field(default_factory=TimeSection)
    output: OutputSection = field(default_factory=OutputSection)
    converge: ConvergeSection = field(default_factory=ConvergeSection)
    entropy: EntropySection = field(default_factory=EntropySection)
    opinion: OpinionConfig = field(default_factory=OpinionConfig)
    advection: AdvectedBackgroundConfig = field(default_factory=AdvectedBackgroundConfig)
    swarming: SwarmingConfig = field(default_factory=SwarmingConfig)

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    @property
    def snapshot_times(self) -> list[float]:
        st = self.output.snapshot_times
        return sorted({float(t) for t in (st or [])} | {float(self.time.t_end)})


# defaults that differ between problems, applied before the user's file
PROBLEM_DEFAULTS: dict[str, dict] = {
    "opinion": {},
    "advected": {
        "time": {"scheme": "si2", "dt_policy": "cfl", "t_end": 20.0},
        "opinion": {"confidence": 1.0, "u_g": -0.5, "u_bar": 0.5},
        "converge": {"times": [1.0, 5.0, 10.0, 20.0]},
    },
    "swarming2d": {
        "grid": {"n": 51},
        "gpc": {"order": 10},
        "time": {"scheme": "si1", "dt_policy": "cfl", "t_end": 100.0},
    },
}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _coerce(value: Any, current: Any, ftype: str, path: str):
    """Convert a JSON value to the type implied by the field's default/annotation."""
    ann = str(ftype)
    if value is None:
        if "Optional" in ann or current is None:
            return None
        raise ConfigError(f"{path}: null is not allowed")
    if isinstance(current, bool) or ann == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {value!r}")
        return value
    if ann in ("int", "Optional[int]") or (isinstance(current, int) and not isinstance(current, bool)):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if ann in ("float", "Optional[float]") or isinstance(current, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if ann == "str" or isinstance(current, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if "tuple" in ann:
        if not isinstance(value, (list, tuple)) or len(value) != len(current):
            raise ConfigError(f"{path}: expected a list of {len(current)} numbers")
        return tuple(float(v) for v in value)
    if "list" in ann:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected a list, got {value!r}")
        return list(value)
    return value


def _merge(obj, data: dict, path: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{path or '<root>'}: expected an object, got {type(data).__name__}")
    known = {f.name: f for f in fields(obj)}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in known:
            raise ConfigError(f"{where}: unknown key")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            _merge(current, value, where)
        else:
            setattr(obj, key, _coerce(value, current, known[key].type, where))


def _check(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def validate(cfg: RunConfig) -> None:
    _check(cfg.problem in PROBLEMS, "problem", f"must be one of {PROBLEMS}")
    g = cfg.grid
    _check(g.n >= 2, "grid.n", "need at least 2 cells")
    _check(g.layout in LAYOUTS, "grid.layout", f"must be one of {LAYOUTS}")
    _check(cfg.gpc.order >= 0, "gpc.order", "must be nonnegative")
    if cfg.gpc.n_theta is not None:
        _check(cfg.gpc.n_theta >= cfg.gpc.order + 1, "gpc.n_theta", "must be at least order + 1")
    _check(str(cfg.quadrature.rule) in RULES, "quadrature.rule", f"must be one of {RULES}")
    _check(cfg.quadrature.gauss_nodes >= 1, "quadrature.gauss_nodes", "must be positive")
    t = cfg.time
    _check(t.scheme in SCHEMES, "time.scheme", f"must be one of {SCHEMES}")
    _check(t.dt_policy in DT_POLICIES, "time.dt_policy", f"must be one of {DT_POLICIES}")
    if t.dt_policy == "fixed":
        _check(t.dt is not None and t.dt > 0, "time.dt", "a positive dt is required with dt_policy 'fixed'")
    _check(t.cfl > 0, "time.cfl", "must be positive")
    _check(0 < t.safety <= 1, "time.safety", "must lie in (0, 1]")
    _check(t.t_end > 0, "time.t_end", "must be positive")
    for i, s in enumerate(cfg.output.snapshot_times or []):
        _check(isinstance(s, (int, float)) and 0 <= s <= t.t_end, f"output.snapshot_times[{i}]", "must lie in [0, t_end]")
    if cfg.output.series_every is not None:
        _check(cfg.output.series_every >= 1, "output.series_every", "must be a positive step count")
    c = cfg.converge
    _check(c.layout in LAYOUTS, "converge.layout", f"must be one of {LAYOUTS}")
    for i, r in enumerate(c.rules):
        _check(str(r) in RULES, f"converge.rules[{i}]", f"must be one of {RULES}")
    for i, tt in enumerate(c.times):
        _check(isinstance(tt, (int, float)) and tt > 0, f"converge.times[{i}]", "must be positive")
    for i, n in enumerate(cfg.entropy.grids):
        _check(isinstance(n, int) and n >= 2, f"entropy.grids[{i}]", "must be an integer >= 2")
    for i, h in enumerate(cfg.entropy.rows):
        _check(isinstance(h, int) and 0 <= h <= cfg.gpc.order, f"entropy.rows[{i}]", "must lie in 0..gpc.order")
    for name, sec in (("opinion", cfg.opinion), ("swarming", cfg.swarming)):
        _check(sec.v_max > sec.v_min, f"{name}.v_max", "must exceed v_min")
    for section, obj in (("opinion", cfg.opinion), ("advection", cfg.advection), ("swarming", cfg.swarming)):
        try:
            obj.validate()
        except ValueError as exc:
            raise ConfigError(f"{section}.{exc}") from None
    if cfg.problem == "advected" and cfg.time.dt_policy == "cfl":
        _check(cfg.time.cfl * cfg.advection.alpha <= 1.0, "time.cfl", "Lax-Wendroff Courant number alpha*cfl exceeds 1")


def _set_path(data: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted}: cannot override inside a non-object value")
    node[keys[-1]] = value


def parse_override(text: str) -> tuple[str, Any]:
    """``key.path=value``; the value is read as JSON when possible, else as a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like key.path=value")
    key, raw = text.split("=", 1)
    key = key.lstrip("-")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def build_config(data: dict, overrides: Optional[list[tuple[str, Any]]] = None) -> RunConfig:
    data = json.loads(json.dumps(data))  # private copy
    for key, value in overrides or []:
        _set_path(data, key, value)
    problem = data.get("problem", "opinion")
    if problem not in PROBLEMS:
        raise ConfigError(f"problem: must be one of {PROBLEMS}, got {problem!r}")
    cfg = RunConfig(problem=problem)
    _merge(cfg, PROBLEM_DEFAULTS[problem], "")
    _merge(cfg, data, "")
    validate(cfg)
    return cfg


def parse_config(path: str | Path, overrides: Optional[list[tuple[str, Any]]] = None) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"<file>: cannot read {p}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<file>: malformed JSON at line {exc.lineno}: {exc.msg}") from None
    return build_config(data, overrides)
