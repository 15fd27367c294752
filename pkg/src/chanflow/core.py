"""Domain types shared by the spectral, oracle and analysis modules.

All quantities are plain floats in whatever coherent unit system the caller
uses. Types are frozen dataclasses; arrays stored on them are made read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np


class ChanflowError(Exception):
    """Base class for every error raised by this package."""


class NonPositiveParameter(ChanflowError, ValueError):
    def __init__(self, name: str, value: float):
        super().__init__(f"{name} must be > 0 (got {value!r})")
        self.field = name
        self.value = value


class NonFinite(ChanflowError, ValueError):
    def __init__(self, name: str, value: Any):
        super().__init__(f"{name} must be finite (got {value!r})")
        self.field = name
        self.value = value


class DomainError(ChanflowError, ValueError):
    pass


class AlphaZero(ChanflowError, ValueError):
    def __init__(self, msg: str = "alpha must be > 0 for this operation"):
        super().__init__(msg)


class ForcingError(ChanflowError, ValueError):
    pass


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise NonFinite(name, value)


@dataclass(frozen=True)
class ChannelConfig:
    """Channel geometry and physics.

    ``alpha = 0`` selects the Navier-Stokes model, ``alpha > 0`` the
    NS-alpha (viscous Camassa-Holm) model.
    """

    h: float = 1.0
    nu: float = 1.0
    alpha: float = 0.0
    pi1: float = 1.0
    pi2: float = 1.0


def validate_config(cfg: ChannelConfig) -> ChannelConfig:
    """Return ``cfg`` unchanged if every invariant holds, raise otherwise."""
    for name in ("h", "nu", "alpha", "pi1", "pi2"):
        _check_finite(name, getattr(cfg, name))
    for name in ("h", "nu", "pi1", "pi2"):
        value = getattr(cfg, name)
        if not value > 0:
            raise NonPositiveParameter(name, value)
    if cfg.alpha < 0:
        raise ChanflowError(f"alpha must be >= 0 (got {cfg.alpha!r})")
    return cfg


@dataclass(frozen=True)
class ForcingSignal:
    """Piecewise-linear forcing program with a constant history tail.

    For ``t <= knots[0].time`` (or for every ``t`` when there are no knots)
    the value is ``tail``. Between knots the signal is linear, after the last
    knot it stays at the last knot value. The first knot must carry the tail
    value, so the program is continuous.

    ``p_bar`` enables the class-P sign check ``0 < -value <= p_bar`` at the
    tail and every knot.
    """

    tail: float
    knots: tuple[tuple[float, float], ...] = ()
    p_bar: float | None = None

    def __post_init__(self):
        knots = tuple((float(t), float(v)) for t, v in self.knots)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "tail", float(self.tail))
        _check_finite("forcing.tail", self.tail)
        for i, (t, v) in enumerate(knots):
            _check_finite(f"forcing.knots[{i}].time", t)
            _check_finite(f"forcing.knots[{i}].value", v)
        for (t0, _), (t1, _) in zip(knots, knots[1:]):
            if not t1 > t0:
                raise ForcingError(f"knot times must be strictly increasing ({t0!r} then {t1!r})")
        if knots and knots[0][1] != self.tail:
            raise ForcingError(
                f"first knot value {knots[0][1]!r} must equal the tail value {self.tail!r}"
            )
        if self.p_bar is not None:
            _check_finite("forcing.p_bar", self.p_bar)
            for v in (self.tail, *(v for _, v in knots)):
                if not (0.0 < -v <= self.p_bar):
                    raise ForcingError(
                        f"class-P bound violated: need 0 < -value <= {self.p_bar!r}, got value {v!r}"
                    )

    @classmethod
    def constant(cls, value: float, p_bar: float | None = None) -> "ForcingSignal":
        return cls(tail=value, p_bar=p_bar)

    @property
    def is_constant(self) -> bool:
        return all(v == self.tail for _, v in self.knots)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.knots], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.knots], dtype=float)

    def scaled(self, factor: float) -> "ForcingSignal":
        """Same program multiplied by ``factor`` (sign check dropped)."""
        return ForcingSignal(
            tail=self.tail * factor,
            knots=tuple((t, v * factor) for t, v in self.knots),
        )

    def sup_abs(self) -> float:
        return max([abs(self.tail)] + [abs(v) for _, v in self.knots])

    def __call__(self, t):
        return forcing_eval(self, t)


def forcing_eval(f: ForcingSignal, t):
    """Evaluate the forcing program at scalar or array ``t``."""
    t_arr = np.asarray(t, dtype=float)
    if not f.knots:
        out = np.full(t_arr.shape, f.tail)
    else:
        out = np.interp(t_arr, f.times, f.values)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SineSpectrum:
    """Truncated sine series ``sum_k coeffs[k-1] * sin(k pi x / h)``."""

    h: float
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size < 1:
            raise ChanflowError("SineSpectrum needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise NonFinite("coeffs", "non-finite entry")
        if not self.h > 0:
            raise NonPositiveParameter("h", self.h)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return self.coeffs.size

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.pi * np.arange(1, self.K + 1) / self.h

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        x_arr = np.asarray(x, dtype=float)
        flat = x_arr.ravel()
        out = _sine_sum(self.coeffs, self.h, flat)
        # exact no-slip, independent of rounding in sin(k pi)
        out[(flat == 0.0) | (flat == self.h)] = 0.0
        out = out.reshape(x_arr.shape)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        x_arr = np.asarray(x, dtype=float)
        flat = x_arr.ravel()
        out = _cosine_sum(self.coeffs * self.wavenumbers, self.h, flat).reshape(x_arr.shape)
        return float(out) if out.ndim == 0 else out

    def l2_norm_sq(self) -> float:
        """``int_0^h U^2`` by Parseval."""
        return 0.5 * self.h * float(np.sum(self.coeffs**2))

    def dirichlet_norm_sq(self) -> float:
        """``int_0^h (U')^2`` by Parseval."""
        return 0.5 * self.h * float(np.sum((self.coeffs * self.wavenumbers) ** 2))

    def to_grid(self, n: int) -> "GridField":
        x = grid_nodes(self.h, n)
        return GridField(self.h, n, self.evaluate(x))


_CHUNK = 1 << 22


def _sine_sum(coeffs: np.ndarray, h: float, x: np.ndarray) -> np.ndarray:
    k = np.arange(1, coeffs.size + 1)
    out = np.empty(x.size)
    step = max(1, _CHUNK // coeffs.size)
    for start in range(0, x.size, step):
        xs = x[start:start + step]
        out[start:start + step] = np.sin(np.outer(xs * (np.pi / h), k)) @ coeffs
    return out


def _cosine_sum(coeffs: np.ndarray, h: float, x: np.ndarray) -> np.ndarray:
    k = np.arange(1, coeffs.size + 1)
    out = np.empty(x.size)
    step = max(1, _CHUNK // coeffs.size)
    for start in range(0, x.size, step):
        xs = x[start:start + step]
        out[start:start + step] = np.cos(np.outer(xs * (np.pi / h), k)) @ coeffs
    return out


def grid_nodes(h: float, n: int) -> np.ndarray:
    """The ``n + 2`` nodes ``j h / (n + 1)``, walls included."""
    return h * np.arange(n + 2) / (n + 1)


@dataclass(frozen=True)
class GridField:
    """Profile sampled at ``x_j = j h / (n + 1)``, ``j = 0..n+1``."""

    h: float
    n: int
    values: np.ndarray
    no_slip: bool = True

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if self.n < 3:
            raise ChanflowError(f"GridField needs n >= 3 interior nodes (got {self.n})")
        if v.size != self.n + 2:
            raise ChanflowError(f"expected {self.n + 2} samples, got {v.size}")
        if not self.h > 0:
            raise NonPositiveParameter("h", self.h)
        if not np.all(np.isfinite(v)):
            raise NonFinite("values", "non-finite entry")
        if self.no_slip and (v[0] != 0.0 or v[-1] != 0.0):
            raise DomainError(f"no-slip violated: boundary values {v[0]!r}, {v[-1]!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, h: float, n: int, fn) -> "GridField":
        x = grid_nodes(h, n)
        v = np.asarray(fn(x), dtype=float).copy()
        v[0] = v[-1] = 0.0
        return cls(h, n, v)

    @classmethod
    def zeros(cls, h: float, n: int) -> "GridField":
        return cls(h, n, np.zeros(n + 2))

    @property
    def x(self) -> np.ndarray:
        return grid_nodes(self.h, self.n)

    @property
    def dx(self) -> float:
        return self.h / (self.n + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]

    def integral_sq(self) -> float:
        return float(np.trapezoid(self.values**2, dx=self.dx))


@dataclass(frozen=True)
class CheckResult:
    """One verification entry. ``passed`` is derived, never supplied."""

    name: str
    measured: float
    bound: float
    relation: str = "<="
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.relation not in ("<=", ">="):
            raise ChanflowError(f"unknown relation {self.relation!r}")

    @property
    def passed(self) -> bool:
        m, b = self.measured, self.bound
        if not (math.isfinite(m) and not math.isnan(b)):
            return False
        return m <= b if self.relation == "<=" else m >= b

    def to_dict(self) -> dict:
        meta = dict(self.metadata)
        meta["relation"] = self.relation
        return {
            "name": self.name,
            "measured": self.measured,
            "bound": self.bound,
            "pass": self.passed,
            "metadata": meta,
        }


@dataclass
class VerificationReport:
    entries: list[CheckResult] = field(default_factory=list)

    def add(self, entry: CheckResult) -> CheckResult:
        self.entries.append(entry)
        return entry

    def extend(self, entries: Iterable[CheckResult]) -> None:
        self.entries.extend(entries)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[CheckResult]:
        return [e for e in self.entries if not e.passed]

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def sorted(self) -> "VerificationReport":
        return VerificationReport(sorted(self.entries, key=lambda e: e.name))

    def to_dict(self) -> dict:
        return {"schema": 1, "checks": [e.to_dict() for e in self.entries]}
