"""Flat key-value experiment configuration with dotted section names.

Files hold one ``key = value`` pair per line; ``#`` starts a comment.
Unknown keys are hard errors so typos never silently fall back to
defaults.  Values parse as bool, int, float, comma-separated float list,
or string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .lambda_system import LambdaParams
from .pulses import DEFAULT_STEPS, SHAPES

EXPERIMENTS = (
    "trajectory",
    "pl-compare",
    "berry-sweep",
    "stark-sweep",
    "visibility-map",
    "noise-robustness",
    "schedule-dump",
)

MODES = ("ideal", "sampled")


class ConfigError(ValueError):
    """Unknown key, unparsable value, or out-of-range setting."""


@dataclass(frozen=True)
class ScheduleSpec:
    wedge_deg: float = 120.0
    tau_ns: float = 1200.0
    shape: str = "eom-bessel"
    dwell_fraction: float | None = None
    n_steps: int = DEFAULT_STEPS
    loops: int = 1
    sign_pattern: str | None = None  # e.g. "++-" ; defaults to all-positive
    echo: bool = False

    def signs(self) -> list[int]:
        if self.sign_pattern is None:
            if self.echo:
                half = self.loops
                return [+1] * half + [-1] * half
            return [+1] * self.loops
        return [+1 if ch == "+" else -1 for ch in self.sign_pattern]


@dataclass(frozen=True)
class NoiseSpec:
    s_theta_deg: float = 0.0
    s_phi_deg: float = 0.0
    bandwidth_mhz: float = 3.0
    n_runs: int = 250
    photon_budget: int = 500


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "trajectory"
    seed: int = 1
    mode: str = "ideal"
    threads: int = 1
    params: LambdaParams = field(default_factory=LambdaParams)
    dissipation: bool = True
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    sweep: dict = field(default_factory=dict)

    def effective_params(self) -> LambdaParams:
        return self.params if self.dissipation else self.params.without_dissipation()


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from exc


def _parse_scalar(text: str, kind):
    try:
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"expected {kind.__name__}, got {text!r}") from exc


_LAMBDA_KEYS = {
    "lambda.rabi_mhz": ("rabi_mhz", float),
    "lambda.detuning_mhz": ("detuning_mhz", float),
    "lambda.two_photon_mhz": ("two_photon_mhz", float),
    "lambda.t_decay_minus_ns": ("t_decay_minus_ns", float),
    "lambda.t_decay_plus_ns": ("t_decay_plus_ns", float),
    "lambda.t_decay_zero_ns": ("t_decay_zero_ns", float),
    "lambda.t_orbital_ns": ("t_orbital_ns", float),
    "lambda.t_spin_ns": ("t_spin_ns", float),
    "lambda.rabi_ratio": ("rabi_ratio", float),
    "lambda.dephase_zero_coherences": ("dephase_zero_coherences", _parse_bool),
}

_SCHEDULE_KEYS = {
    "schedule.wedge_deg": ("wedge_deg", float),
    "schedule.tau_ns": ("tau_ns", float),
    "schedule.shape": ("shape", str),
    "schedule.dwell_fraction": ("dwell_fraction", float),
    "schedule.n_steps": ("n_steps", int),
    "schedule.loops": ("loops", int),
    "schedule.sign_pattern": ("sign_pattern", str),
    "schedule.echo": ("echo", _parse_bool),
}

_NOISE_KEYS = {
    "noise.s_theta_deg": ("s_theta_deg", float),
    "noise.s_phi_deg": ("s_phi_deg", float),
    "noise.bandwidth_mhz": ("bandwidth_mhz", float),
    "noise.n_runs": ("n_runs", int),
    "noise.photon_budget": ("photon_budget", int),
}

_SWEEP_KEYS = (
    "sweep.wedge_deg",
    "sweep.tau_ns",
    "sweep.rabi_mhz",
    "sweep.two_photon_mhz",
    "sweep.s_theta_deg",
    "sweep.s_phi_deg",
    "sweep.intended_gamma_deg",
)

_TOP_KEYS = {
    "experiment": str,
    "seed": int,
    "mode": str,
    "threads": int,
    "dissipation": _parse_bool,
}


def parse_config_text(text: str) -> dict[str, str]:
    """Raw ``key -> value`` mapping from configuration text."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def config_from_entries(entries: dict[str, str]) -> ExperimentConfig:
    cfg = ExperimentConfig()
    params_kw: dict = {}
    sched_kw: dict = {}
    noise_kw: dict = {}
    sweep: dict = {}
    top_kw: dict = {}
    def convert(value: str, kind):
        if kind is str:
            return value
        if kind is _parse_bool:
            return _parse_bool(value)
        return _parse_scalar(value, kind)

    for key, value in entries.items():
        if key in _TOP_KEYS:
            top_kw[key] = convert(value, _TOP_KEYS[key])
        elif key in _LAMBDA_KEYS:
            name, kind = _LAMBDA_KEYS[key]
            params_kw[name] = convert(value, kind)
        elif key in _SCHEDULE_KEYS:
            name, kind = _SCHEDULE_KEYS[key]
            sched_kw[name] = convert(value, kind)
        elif key in _NOISE_KEYS:
            name, kind = _NOISE_KEYS[key]
            noise_kw[name] = convert(value, kind)
        elif key in _SWEEP_KEYS:
            sweep[key.split(".", 1)[1]] = _parse_float_list(value)
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    if params_kw:
        try:
            cfg = replace(cfg, params=replace(cfg.params, **params_kw))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if sched_kw:
        cfg = replace(cfg, schedule=replace(cfg.schedule, **sched_kw))
    if noise_kw:
        cfg = replace(cfg, noise=replace(cfg.noise, **noise_kw))
    if sweep:
        cfg = replace(cfg, sweep=sweep)
    if top_kw:
        cfg = replace(cfg, **top_kw)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; "
                          f"expected one of {EXPERIMENTS}")
    if cfg.mode not in MODES:
        raise ConfigError(f"unknown mode {cfg.mode!r}; expected one of {MODES}")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if cfg.schedule.shape not in SHAPES:
        raise ConfigError(f"unknown shape {cfg.schedule.shape!r}")
    if cfg.schedule.loops < 1:
        raise ConfigError("schedule.loops must be >= 1")
    pattern = cfg.schedule.sign_pattern
    if pattern is not None and (set(pattern) - {"+", "-"} or not pattern):
        raise ConfigError("schedule.sign_pattern must be a nonempty string of '+'/'-'")
    if cfg.noise.n_runs < 1:
        raise ConfigError("noise.n_runs must be >= 1")
    if cfg.noise.photon_budget < 1:
        raise ConfigError("noise.photon_budget must be >= 1")
    if not math.isfinite(cfg.schedule.tau_ns) or cfg.schedule.tau_ns <= 0:
        raise ConfigError("schedule.tau_ns must be positive")
    for key, values in cfg.sweep.items():
        if not values:
            raise ConfigError(f"sweep.{key} must not be empty")


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return config_from_entries(parse_config_text(handle.read()))


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Config from an in-memory mapping of raw string values (tests, CLI)."""
    return config_from_entries({k: str(v) for k, v in mapping.items()})
