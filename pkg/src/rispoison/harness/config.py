"""Line-oriented `key = value` run configuration with defaults from the
paper's simulation setup."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..attacks import AttackConfig
from ..env import EnvConfig
from ..sac import SacConfig


class ConfigError(ValueError):
    """Unknown key, unparsable value, or violated field invariant."""


@dataclass
class RunConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    sac: SacConfig = field(default_factory=SacConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    total_steps: int = 5000
    seeds: tuple[int, ...] = tuple(range(10))
    ma_window: int = 200
    out_dir: str = "out"
    workers: int = 1

    def validate(self) -> None:
        try:
            self.env.validate()
            self.sac.validate()
            self.attack.validate()
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.total_steps <= self.attack.warm_steps:
            raise ConfigError("run.total_steps must exceed attack.t_warm")
        if not self.seeds:
            raise ConfigError("run.seeds must not be empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("run.seeds must be distinct")
        if self.ma_window < 1:
            raise ConfigError("run.ma_window must be >= 1")
        if self.workers < 1:
            raise ConfigError("run.workers must be >= 1")


def parse_seeds(text: str) -> tuple[int, ...]:
    """Accepts "0..9" ranges (inclusive) or comma lists like "0,3,17"."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(part) for part in text.split(",") if part.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# dotted key -> (section attribute, field name, parser)
_KEYS = {
    "env.R": ("env", "num_elements", int),
    "env.p_max_db": ("env", "max_power_db", float),
    "env.i_db": ("env", "interference_db", float),
    "env.n0": ("env", "noise_var", float),
    "sac.gamma": ("sac", "gamma", float),
    "sac.lr": ("sac", "lr", float),
    "sac.entropy_coef": ("sac", "entropy_coef", float),
    "sac.batch_size": ("sac", "batch_size", int),
    "sac.buffer_capacity": ("sac", "buffer_capacity", lambda v: int(float(v))),
    "sac.polyak": ("sac", "polyak", float),
    "sac.target_clip": ("sac", "target_clip", float),
    "sac.warm_start": ("sac", "warm_start_steps", int),
    "sac.updates_per_step": ("sac", "updates_per_step", int),
    "sac.auto_entropy": ("sac", "auto_entropy", _bool),
    "sac.normalize_rewards": ("sac", "normalize_rewards", _bool),
    "attack.kind": ("attack", "kind", str),
    "attack.delta": ("attack", "delta", float),
    "attack.p": ("attack", "p", float),
    "attack.w": ("attack", "window", int),
    "attack.q": ("attack", "quantile", float),
    "attack.t_warm": ("attack", "warm_steps", int),
    "attack.period": ("attack", "period", int),
    "run.total_steps": ("run", "total_steps", int),
    "run.seeds": ("run", "seeds", parse_seeds),
    "run.ma_window": ("run", "ma_window", int),
    "run.out_dir": ("run", "out_dir", str),
    "run.workers": ("run", "workers", int),
}


def apply_override(cfg: RunConfig, key: str, value: str) -> RunConfig:
    """Set one dotted key on a copy of cfg (sections are copied, not shared)."""
    if key not in _KEYS:
        raise ConfigError(f"unknown config key: {key}")
    section, attr, parser = _KEYS[key]
    try:
        parsed = parser(value.strip())
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad value for {key}: {value!r} ({e})") from e
    if section == "run":
        return replace(cfg, **{attr: parsed})
    sub = replace(getattr(cfg, section), **{attr: parsed})
    return replace(cfg, **{section: sub})


def parse_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Parse config text (UTF-8, `key = value` lines, `#` comments) into a RunConfig.

    Omitted keys keep the simulation-default values; unknown keys are errors.
    """
    cfg = RunConfig()
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {raw_line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        cfg = apply_override(cfg, key, value)
    for key, value in (overrides or {}).items():
        cfg = apply_override(cfg, key, value)
    cfg.validate()
    return cfg
