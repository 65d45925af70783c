"""Scenario configuration: dataclass, presets, and the flat ``key = value`` file format.

Example file::

    # n = 100 particles in the plane
    sampling.n = 100
    sampling.dim = 2
    sampling.position_box = "0.32,0.35;0.2,0.24"
    ...

A file may start from a preset with ``preset = paper-sec6`` and override
individual keys; otherwise every key is required.  Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError
from ..integrator import IntegratorConfig
from ..model import CommunicationKernel, ModelParams

Interval = tuple  # (lo, hi)


@dataclass(frozen=True)
class ScenarioConfig:
    n: int
    dim: int
    position_box: tuple
    velocity_box: tuple
    temperature_interval: Interval
    seed: int
    kappa1: float
    kappa2: float
    phi: tuple  # (amplitude, exponent)
    zeta: tuple
    dt: float
    t_end: float
    record_stride: int
    eps: float
    eps0: float

    def __post_init__(self):
        if self.n < 1 or self.dim < 1:
            raise ConfigError(f"n and dim must be positive, got n={self.n}, dim={self.dim}")
        for name in ("position_box", "velocity_box"):
            box = getattr(self, name)
            if len(box) != self.dim:
                raise ConfigError(f"{name} has {len(box)} intervals, expected dim={self.dim}")
            for lo, hi in box:
                _check_interval(name, lo, hi)
        lo, hi = self.temperature_interval
        _check_interval("temperature_interval", lo, hi)
        if not lo > 0:
            raise ConfigError(f"temperature_interval lower bound must be > 0, got {lo}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not (self.eps > 0 and self.eps0 > 0):
            raise ConfigError("analysis.eps and analysis.eps0 must be positive")
        try:
            self.model_params()
            self.integrator_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def model_params(self) -> ModelParams:
        return ModelParams(self.kappa1, self.kappa2, CommunicationKernel(*self.phi),
                           CommunicationKernel(*self.zeta), self.dim)

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(self.dt, self.t_end, self.record_stride)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _check_interval(name, lo, hi):
    if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
        raise ConfigError(f"{name}: invalid interval ({lo}, {hi})")


PRESETS = {
    "paper-sec6": ScenarioConfig(
        n=100, dim=2,
        position_box=((0.32, 0.35), (0.2, 0.24)),
        velocity_box=((-0.3, -0.29), (0.05, 0.06)),
        temperature_interval=(10.8, 10.9),
        seed=0,
        kappa1=1.0, kappa2=100.0,
        phi=(1.0, 1.0), zeta=(40.0, 1.0),
        dt=0.01, t_end=50.0, record_stride=1,
        eps=0.003, eps0=0.76,
    ),
}


def preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


# ---------------------------------------------------------------------------
# text format

def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_pairs(text: str, count: int | None = None):
    pairs = []
    for chunk in text.split(";"):
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 2:
            raise ValueError(f"expected 'lo,hi', got {chunk!r}")
        pairs.append((float(parts[0]), float(parts[1])))
    if count is not None and len(pairs) != count:
        raise ValueError(f"expected {count} interval(s), got {len(pairs)}")
    return tuple(pairs)


def _parse_uint(text: str) -> int:
    value = int(text, 0)
    if value < 0:
        raise ValueError("must be nonnegative")
    return value


# key -> (field, parser, formatter)
KEYS = {
    "sampling.n": ("n", int, str),
    "sampling.dim": ("dim", int, str),
    "sampling.position_box": ("position_box", _parse_pairs,
                              lambda b: '"' + ";".join(f"{_fmt(a)},{_fmt(c)}" for a, c in b) + '"'),
    "sampling.velocity_box": ("velocity_box", _parse_pairs,
                              lambda b: '"' + ";".join(f"{_fmt(a)},{_fmt(c)}" for a, c in b) + '"'),
    "sampling.temperature_interval": ("temperature_interval", lambda s: _parse_pairs(s, 1)[0],
                                      lambda p: f'"{_fmt(p[0])},{_fmt(p[1])}"'),
    "sampling.seed": ("seed", _parse_uint, str),
    "model.kappa1": ("kappa1", float, _fmt),
    "model.kappa2": ("kappa2", float, _fmt),
    "model.phi": ("phi", lambda s: _parse_pairs(s, 1)[0], lambda p: f'"{_fmt(p[0])},{_fmt(p[1])}"'),
    "model.zeta": ("zeta", lambda s: _parse_pairs(s, 1)[0], lambda p: f'"{_fmt(p[0])},{_fmt(p[1])}"'),
    "integrator.dt": ("dt", float, _fmt),
    "integrator.t_end": ("t_end", float, _fmt),
    "integrator.record_stride": ("record_stride", int, str),
    "analysis.eps": ("eps", float, _fmt),
    "analysis.eps0": ("eps0", float, _fmt),
}


def _unquote(value: str) -> str:
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def parse_value(key: str, raw: str):
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}")
    field_name, parser, _ = KEYS[key]
    try:
        return field_name, parser(_unquote(raw.strip()))
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r}: {exc}") from None


def apply_overrides(cfg: ScenarioConfig, assignments) -> ScenarioConfig:
    """Apply ``key=value`` strings (as given on the command line)."""
    changes = {}
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        name, value = parse_value(key.strip(), raw)
        changes[name] = value
    return cfg.replace(**changes)


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    base = None
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key == "preset":
            if base is not None or values:
                raise ConfigError(f"{source}:{lineno}: 'preset' must come first")
            try:
                base = preset(_unquote(raw))
            except ConfigError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from None
            continue
        try:
            name, value = parse_value(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
        if name in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[name] = value
    if base is None and not values:
        raise ConfigError(f"{source}: empty configuration")
    if base is not None:
        return base.replace(**values)
    missing = [k for k, (f, _, _) in KEYS.items() if f not in values]
    if missing:
        raise ConfigError(f"{source}: missing keys: {', '.join(missing)}")
    return ScenarioConfig(**values)


def format_config(cfg: ScenarioConfig) -> str:
    lines = []
    for key, (name, _, fmt) in KEYS.items():
        lines.append(f"{key} = {fmt(getattr(cfg, name))}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, str(path))


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(format_config(cfg))
