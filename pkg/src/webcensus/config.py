"""Run configuration with per-value origin tracking.

Precedence, highest first: command-line flags, ``WEBCENSUS_*`` environment
variables, the YAML config file, built-in defaults.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ConfigError

ENV_PREFIX = "WEBCENSUS_"


def _csv_set(value):
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    return tuple(sorted({str(v).lower().lstrip(".") for v in value}))


def _bool(value):
    if isinstance(value, str):
        return value.strip().lower() in {"1", "true", "yes", "on"}
    return bool(value)


def _paths(value):
    if isinstance(value, (str, Path)):
        value = [value]
    return tuple(str(v) for v in value)


def _opt_str(value):
    return None if value in (None, "") else str(value)


@dataclass
class RunConfig:
    settle_seconds: int = 30
    hard_timeout_seconds: int = 60
    parallel_captures: int = 4
    top_n: int = 100
    sample_n: int = 500
    seed: int = 0
    browser: str = "127.0.0.1:9222"
    ruleset: str | None = None
    ownership_db: str | None = None
    lexicon: str | None = None
    include_private_suffixes: bool = False
    leakage_include_host: bool = False
    binary_extensions: tuple = ("doc", "docx", "pdf", "ppt", "pptx", "xls", "xlsx")
    dynamic_extensions: tuple = ("asp", "aspx", "cgi", "jsp", "php", "pl")
    results: tuple = ()
    pagelist: str | None = None
    har: tuple = ()
    records: str | None = None
    run_dir: str | None = None
    runs_root: str = "runs"
    tolerant: bool = False
    origins: dict = field(default_factory=dict, repr=False, compare=False)

    def values(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "origins"}

    def digest(self) -> str:
        """Hash of analysis-relevant settings (paths to outputs excluded)."""
        skip = {"run_dir", "runs_root", "records", "pagelist", "tolerant"}
        payload = {k: v for k, v in self.values().items() if k not in skip}
        return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:12]


COERCE = {
    "settle_seconds": int, "hard_timeout_seconds": int, "parallel_captures": int,
    "top_n": int, "sample_n": int, "seed": int, "browser": str,
    "ruleset": _opt_str, "ownership_db": _opt_str, "lexicon": _opt_str, "pagelist": _opt_str,
    "records": _opt_str, "run_dir": _opt_str, "runs_root": str,
    "include_private_suffixes": _bool, "leakage_include_host": _bool, "tolerant": _bool,
    "binary_extensions": _csv_set, "dynamic_extensions": _csv_set,
    "results": _paths, "har": _paths,
}
COUNT_FIELDS = ("settle_seconds", "hard_timeout_seconds", "parallel_captures", "top_n", "sample_n")


def _coerce(name, value, origin):
    try:
        return COERCE[name](value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot use {value!r} from {origin}") from None


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must be a mapping")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def resolve_config(flags: dict | None = None, config_file=None, environ=None) -> RunConfig:
    """Merge the four layers, recording every layer that supplied a value."""
    environ = os.environ if environ is None else environ
    layers = [("file", load_config_file(config_file) if config_file else {})]
    layers.append(("env", {k[len(ENV_PREFIX):].lower(): v for k, v in environ.items()
                           if k.startswith(ENV_PREFIX) and k != ENV_PREFIX + "CONFIG"}))
    layers.append(("flag", {k: v for k, v in (flags or {}).items() if v is not None}))

    cfg = RunConfig()
    origins = {name: [("default", value)] for name, value in cfg.values().items()}
    for origin, values in layers:
        for name, raw in values.items():
            if name not in COERCE:
                if origin == "env":
                    continue
                raise ConfigError(f"unknown setting {name!r} in {origin}")
            value = _coerce(name, raw, origin)
            setattr(cfg, name, value)
            origins[name].append((origin, value))
    cfg.origins = origins
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    for name in COUNT_FIELDS:
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be >= 1 (got {getattr(cfg, name)})")
    if cfg.settle_seconds > cfg.hard_timeout_seconds:
        raise ConfigError("settle_seconds must not exceed hard_timeout_seconds")


def _show(value):
    if isinstance(value, tuple):
        return ",".join(value)
    return "" if value is None else str(value)


def print_effective_config(cfg: RunConfig) -> str:
    """``name=value (origin)`` per setting, sorted; overridden layers listed after the winner."""
    lines = []
    for name, value in sorted(cfg.values().items()):
        chain = cfg.origins.get(name) or [("default", value)]
        winner = chain[-1][0]
        shadowed = [f"{o}={_show(v)}" for o, v in reversed(chain[:-1]) if o != "default"]
        note = f"{winner}; overrides {', '.join(shadowed)}" if shadowed else winner
        lines.append(f"{name}={_show(value)} ({note})")
    return "\n".join(lines) + "\n"
