"""Run configuration: flat ``key = value`` text with dotted section keys.

Example::

    channel.h = 1.0
    channel.nu = 1.0
    model = nse
    forcing.tail = -1.0
    forcing.knots = "0:-1,1:-3"
    eval.samples = 201
    eval.times = "0,0.5,2"
    truncation = 501
    oracle.n = 200
    oracle.dt = 1e-3

Blank lines and ``#`` comments are ignored; values may be quoted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .core import ChanflowError, ChannelConfig, ForcingSignal, validate_config
from .spectral import DEFAULT_TRUNCATION


class ConfigError(ChanflowError, ValueError):
    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key


KNOWN_KEYS = {
    "channel.h", "channel.nu", "channel.alpha", "channel.pi1", "channel.pi2",
    "model",
    "forcing.tail", "forcing.knots", "forcing.p_bar",
    "output.path", "output.format",
    "eval.samples", "eval.times",
    "truncation",
    "oracle.n", "oracle.dt", "oracle.enabled",
}


@dataclass(frozen=True)
class OracleOptions:
    n: int = 200
    dt: float = 1e-3


@dataclass(frozen=True)
class RunConfig:
    channel: ChannelConfig
    model: str
    forcing: ForcingSignal
    output_path: str | None = None
    output_format: str = "csv"
    samples: int = 201
    times: tuple[float, ...] = (0.0,)
    truncation: int = DEFAULT_TRUNCATION
    oracle: OracleOptions | None = None


def parse_text(text: str) -> dict[str, str]:
    items: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown key")
        if key in items:
            raise ConfigError(key, "duplicate key")
        items[key] = value
    return items


def _float(items, key, default=None) -> float:
    if key not in items:
        if default is None:
            raise ConfigError(key, "missing required key")
        return default
    try:
        value = float(items[key])
    except ValueError:
        raise ConfigError(key, f"not a number: {items[key]!r}") from None
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    return value


def _int(items, key, default) -> int:
    if key not in items:
        return default
    try:
        return int(items[key])
    except ValueError:
        raise ConfigError(key, f"not an integer: {items[key]!r}") from None


def _float_list(key: str, text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(key, f"expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise ConfigError(key, "values must be finite")
    return values


def _knots(text: str) -> tuple[tuple[float, float], ...]:
    knots = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            t, v = part.split(":")
            knots.append((float(t), float(v)))
        except ValueError:
            raise ConfigError("forcing.knots", f"expected 'time:value' pairs, got {part!r}") from None
    return tuple(knots)


def build(items: dict[str, str]) -> RunConfig:
    channel = ChannelConfig(
        h=_float(items, "channel.h", 1.0),
        nu=_float(items, "channel.nu", 1.0),
        alpha=_float(items, "channel.alpha", 0.0),
        pi1=_float(items, "channel.pi1", 1.0),
        pi2=_float(items, "channel.pi2", 1.0),
    )
    try:
        validate_config(channel)
    except ChanflowError as exc:
        name = getattr(exc, "field", "alpha")
        raise ConfigError(f"channel.{name}", str(exc)) from None

    model = items.get("model", "nse")
    if model not in ("nse", "alpha"):
        raise ConfigError("model", f"must be 'nse' or 'alpha', got {model!r}")
    if model == "alpha" and not channel.alpha > 0:
        raise ConfigError("channel.alpha", "alpha must be > 0 for model=alpha")

    p_bar = _float(items, "forcing.p_bar", 0.0) if "forcing.p_bar" in items else None
    try:
        forcing = ForcingSignal(
            tail=_float(items, "forcing.tail"),
            knots=_knots(items.get("forcing.knots", "")),
            p_bar=p_bar,
        )
    except ConfigError:
        raise
    except ChanflowError as exc:
        raise ConfigError("forcing", str(exc)) from None

    fmt = items.get("output.format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format", f"must be 'csv' or 'json', got {fmt!r}")

    samples = _int(items, "eval.samples", 201)
    if samples < 2:
        raise ConfigError("eval.samples", "must be >= 2")
    times = _float_list("eval.times", items.get("eval.times", "0"))
    if not times:
        raise ConfigError("eval.times", "must list at least one time")
    truncation = _int(items, "truncation", DEFAULT_TRUNCATION)
    if truncation < 1:
        raise ConfigError("truncation", "must be >= 1")

    oracle = None
    enabled = items.get("oracle.enabled", "").lower()
    if enabled not in ("", "true", "false", "1", "0", "yes", "no"):
        raise ConfigError("oracle.enabled", f"expected a boolean, got {enabled!r}")
    if enabled in ("true", "1", "yes") or (
        enabled == "" and ("oracle.n" in items or "oracle.dt" in items)
    ):
        oracle = OracleOptions(n=_int(items, "oracle.n", 200), dt=_float(items, "oracle.dt", 1e-3))
        if oracle.n < 3:
            raise ConfigError("oracle.n", "must be >= 3")
        if not oracle.dt > 0:
            raise ConfigError("oracle.dt", "must be > 0")

    return RunConfig(
        channel=channel,
        model=model,
        forcing=forcing,
        output_path=items.get("output.path") or None,
        output_format=fmt,
        samples=samples,
        times=times,
        truncation=truncation,
        oracle=oracle,
    )


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    return build(parse_text(text))
