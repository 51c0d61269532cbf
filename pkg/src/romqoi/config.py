"""Experiment configuration: flat ``section.key = value`` files.

Blank lines and ``#`` comments are ignored. Unknown keys are rejected and
every value is range-checked when parsed. Lists are comma-separated.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .burgers import DEFAULT_IC_ROOTS
from .errors import ConfigError

__all__ = [
    "ExperimentConfig",
    "ModelConfig",
    "TimeConfig",
    "NewtonConfig",
    "RomConfig",
    "QoiConfig",
    "SweepConfig",
    "OutputConfig",
    "parse_config",
    "load_config",
    "config_to_text",
]


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt(conv):
    def parse(s):
        return None if s.strip().lower() in ("", "none", "auto") else conv(s)
    return parse


def _list(conv):
    def parse(s):
        items = [t.strip() for t in s.split(",") if t.strip()]
        return tuple(conv(t) for t in items)
    return parse


def _alpha(s):
    return None if s.strip().lower() in ("none", "standard") else float(s)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def _f(default, parse, check=None, msg=""):
    return field(default=default, metadata={"parse": parse, "check": check, "msg": msg})


def _positive(x):
    return x > 0


@dataclass(frozen=True)
class ModelConfig:
    n_grid: int = _f(201, int, lambda v: v >= 4, ">= 4")
    length: float = _f(1.0, float, _positive, "> 0")
    viscosity: float = _f(0.1, float, _positive, "> 0")
    eval_viscosity: float | None = _f(None, _opt(float), lambda v: v is None or v > 0, "> 0")
    ic_coeff: float | None = _f(None, _opt(float))
    ic_roots: tuple = _f(DEFAULT_IC_ROOTS, _list(float), lambda v: len(v) == 3, "three roots")
    split_linear: bool = _f(True, _bool)


@dataclass(frozen=True)
class TimeConfig:
    t_final: float = _f(1.0, float, _positive, "> 0")
    num_steps: int = _f(201, int, _positive, ">= 1")
    scheme: str = _f("implicit", str, lambda v: v in ("explicit", "implicit"), "explicit|implicit")


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = _f(1e-12, float, _positive, "> 0")
    max_iter: int = _f(50, int, _positive, ">= 1")


@dataclass(frozen=True)
class RomConfig:
    pod_dim: int | None = _f(15, _opt(int), lambda v: v is None or v >= 1, ">= 1")
    energy: float | None = _f(None, _opt(float), lambda v: v is None or 0 <= v <= 1, "in [0, 1]")
    deim_points: int = _f(40, int, _positive, ">= 1")
    adaptive: bool = _f(False, _bool)
    alpha: float = _f(0.5, float, lambda v: 0 <= v <= 1, "in [0, 1]")
    dwr_modes: int = _f(15, int, _positive, ">= 1")
    normalize_residuals: bool = _f(False, _bool)
    snapshot_balance: str = _f("norm", str, lambda v: v in ("norm", "none"), "norm|none")


@dataclass(frozen=True)
class QoiConfig:
    lower: float = _f(0.05, float)
    upper: float = _f(0.1, float)


@dataclass(frozen=True)
class SweepConfig:
    pod_dims: tuple = _f((5, 10, 12, 15, 20, 25, 30), _list(int),
                         lambda v: len(v) > 0 and min(v) >= 1, "non-empty, >= 1")
    deim_points: tuple = _f((40,), _list(int), lambda v: len(v) > 0 and min(v) >= 1, "non-empty, >= 1")
    alphas: tuple = _f((None,), _list(_alpha),
                       lambda v: len(v) > 0 and all(a is None or 0 <= a <= 1 for a in v),
                       "non-empty, 'none' or in [0, 1]")
    viscosities: tuple = _f((0.1,), _list(float), lambda v: len(v) > 0 and min(v) > 0, "non-empty, > 0")


@dataclass(frozen=True)
class OutputConfig:
    dir: str = _f("out", str)
    timing: bool = _f(False, _bool)


@dataclass(frozen=True)
class RunConfig:
    seed: int = _f(0, int, lambda v: v >= 0, ">= 0")


SECTIONS = {
    "model": ModelConfig,
    "time": TimeConfig,
    "newton": NewtonConfig,
    "rom": RomConfig,
    "qoi": QoiConfig,
    "sweep": SweepConfig,
    "output": OutputConfig,
    "run": RunConfig,
}


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    rom: RomConfig = field(default_factory=RomConfig)
    qoi: QoiConfig = field(default_factory=QoiConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def __post_init__(self):
        if not self.qoi.lower < self.qoi.upper:
            raise ConfigError("qoi.lower must be smaller than qoi.upper")
        if self.qoi.upper > self.model.length or self.qoi.lower < 0:
            raise ConfigError("QoI interval must lie inside [0, model.length]")
        if self.rom.pod_dim is None and self.rom.energy is None:
            raise ConfigError("set rom.pod_dim or rom.energy")

    @property
    def eval_viscosity(self) -> float:
        mu = self.model.eval_viscosity
        return self.model.viscosity if mu is None else mu

    def with_updates(self, **updates) -> "ExperimentConfig":
        """Copy with ``"section.key"`` entries replaced, e.g.
        ``cfg.with_updates(**{"rom.pod_dim": 20})``."""
        cfg = self
        for dotted, value in updates.items():
            sec, key = _split_key(dotted)
            section = dataclasses.replace(getattr(cfg, sec), **{key: value})
            _validate_section(sec, section)
            cfg = dataclasses.replace(cfg, **{sec: section})
        return cfg


def _split_key(dotted: str):
    if "." not in dotted:
        raise ConfigError(f"key {dotted!r} must have the form section.key")
    sec, key = dotted.split(".", 1)
    if sec not in SECTIONS:
        raise ConfigError(f"unknown section {sec!r}")
    names = {f.name for f in dataclasses.fields(SECTIONS[sec])}
    if key not in names:
        raise ConfigError(f"unknown key {dotted!r}")
    return sec, key


def _validate_section(sec, obj):
    for f in dataclasses.fields(obj):
        check = f.metadata.get("check")
        value = getattr(obj, f.name)
        if check is not None and not check(value):
            raise ConfigError(f"{sec}.{f.name} = {_fmt(value)}: must be {f.metadata['msg']}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text; raise :class:`ConfigError` on any problem."""
    values: dict[str, dict] = {s: {} for s in SECTIONS}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        sec, name = _split_key(key)
        if name in values[sec]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        f = next(f for f in dataclasses.fields(SECTIONS[sec]) if f.name == name)
        try:
            values[sec][name] = f.metadata["parse"](value)
        except (ValueError, TypeError) as err:
            raise ConfigError(f"line {lineno}: bad value for {key}: {err}") from err
    sections = {}
    for sec, cls in SECTIONS.items():
        obj = cls(**values[sec])
        _validate_section(sec, obj)
        sections[sec] = obj
    return ExperimentConfig(**sections)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text())


def config_to_text(cfg: ExperimentConfig) -> str:
    """Serialize to the same flat format; ``parse_config`` inverts it."""
    lines = []
    for sec in SECTIONS:
        obj = getattr(cfg, sec)
        for f in dataclasses.fields(obj):
            lines.append(f"{sec}.{f.name} = {_fmt(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"
