"""Numerical checks of the averages, inequalities and pressure structure.

Fields on the periodic box are arrays of shape ``(3, m1, m2, n3)``: ``m1``
and ``m2`` uniform samples over one period in ``x1`` and ``x2`` (endpoint
excluded) and ``n3`` nodes on ``[0, h]`` walls included. Periodic
derivatives are spectral, wall-normal derivatives second-order central.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    ChanflowError,
    ChannelConfig,
    CheckResult,
    DomainError,
    ForcingSignal,
    GridField,
    SineSpectrum,
    grid_nodes,
)
from . import oracle


class NonUniformGrid(ChanflowError, ValueError):
    pass


class BoundaryViolation(ChanflowError, ValueError):
    pass


class ShapeMismatch(ChanflowError, ValueError):
    pass


class NoSlipViolation(ChanflowError, ValueError):
    pass


class DivergenceViolation(ChanflowError, ValueError):
    pass


class GridTooSmall(ChanflowError, ValueError):
    pass


class PreconditionViolation(ChanflowError, ValueError):
    pass


@dataclass(frozen=True)
class PeriodicSample:
    """Uniform samples ``phi(j period / m)``, ``j = 0..m-1``."""

    period: float
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 8:
            raise ChanflowError(f"need at least 8 samples per period (got {v.size})")
        if not self.period > 0:
            raise ChanflowError("period must be > 0")
        if not np.all(np.isfinite(v)):
            raise ChanflowError("samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, period: float, m: int, fn) -> "PeriodicSample":
        y = period * np.arange(m) / m
        return cls(period, fn(y))


def _const(value: float) -> Callable[[float], float]:
    return lambda t: value


@dataclass(frozen=True)
class PressureField:
    """``P(x1, x2, t) = p0(t) + x1 p1(t) / pi1``.

    ``p1`` is the pressure increment over one streamwise period. The field
    carries no ``x2`` or ``x3`` dependence, so the spanwise increment is zero.
    """

    p0: Callable[[float], float]
    p1: Callable[[float], float]
    pi1: float

    def __post_init__(self):
        if not self.pi1 > 0:
            raise ChanflowError("pi1 must be > 0")

    @classmethod
    def constant(cls, p0: float, p1: float, pi1: float) -> "PressureField":
        return cls(_const(p0), _const(p1), pi1)

    @classmethod
    def from_forcing(cls, gradient: ForcingSignal, pi1: float, p0: float = 0.0) -> "PressureField":
        """Pressure whose streamwise gradient follows ``gradient``."""
        return cls(_const(p0), lambda t: pi1 * gradient(t), pi1)


def pressure_eval(P: PressureField, x1, x2, t: float):
    x1 = np.asarray(x1, dtype=float)
    out = P.p0(t) + x1 * (P.p1(t) / P.pi1) + 0.0 * np.asarray(x2, dtype=float)
    return float(out) if out.ndim == 0 else out


def pressure_differences(P: PressureField, t: float, x1: float = 0.0, x2: float = 0.0,
                         pi2: float = 1.0) -> tuple[float, float]:
    """Increments of ``P`` over one period in ``x1`` and in ``x2``."""
    base = pressure_eval(P, x1, x2, t)
    return (pressure_eval(P, x1 + P.pi1, x2, t) - base,
            pressure_eval(P, x1, x2 + pi2, t) - base)


# -- periodic calculus ----------------------------------------------------

def periodic_derivative(values: np.ndarray, period: float, axis: int = -1) -> np.ndarray:
    """Spectral derivative along a periodic axis (Nyquist mode dropped)."""
    m = values.shape[axis]
    spec = np.fft.rfft(values, axis=axis)
    k = 2.0 * np.pi * np.fft.rfftfreq(m, d=period / m)
    if m % 2 == 0:
        k[-1] = 0.0
    shape = [1] * values.ndim
    shape[axis] = k.size
    return np.fft.irfft(1j * k.reshape(shape) * spec, n=m, axis=axis)


def periodic_mean(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Trapezoid mean over one period, endpoint identified with the start."""
    return np.mean(values, axis=axis)


def average_x2(samples, x2=None, period: float | None = None) -> np.ndarray:
    """Spanwise average of samples with shape ``(m, ...)``.

    If coordinates ``x2`` are given they must be uniform; a trailing sample
    that repeats the first one (``x2[-1] - x2[0] == period``) is dropped.
    """
    arr = np.asarray(samples, dtype=float)
    if x2 is not None:
        x2 = np.asarray(x2, dtype=float)
        if x2.size != arr.shape[0]:
            raise ShapeMismatch("x2 coordinates do not match the sample count")
        steps = np.diff(x2)
        if steps.size == 0 or np.any(steps <= 0) or np.ptp(steps) > 1e-9 * abs(steps[0]):
            raise NonUniformGrid("x2 samples must be uniformly spaced")
        if period is not None:
            span = x2[-1] - x2[0]
            if math.isclose(span, period, rel_tol=1e-9):
                arr = arr[:-1]
            elif not math.isclose(span + steps[0], period, rel_tol=1e-9):
                raise NonUniformGrid("x2 samples do not cover exactly one period")
    return periodic_mean(arr, axis=0)


# -- symmetry and appendix inequalities -------------------------------------

def symmetry_defect(profile, samples: int = 1001) -> float:
    """``max |U(h - x3) - U(x3)|`` over the evaluation grid.

    Accepts a :class:`GridField` (reflection of the node values), a
    :class:`SineSpectrum` (evaluated on ``samples`` uniform points and their
    mirror images) or a plain array of uniformly spaced wall-to-wall values.
    """
    if isinstance(profile, SineSpectrum):
        x = np.linspace(0.0, profile.h, samples)
        return float(np.max(np.abs(profile.evaluate(profile.h - x) - profile.evaluate(x))))
    values = profile.values if isinstance(profile, GridField) else np.asarray(profile, dtype=float)
    return float(np.max(np.abs(values[::-1] - values)))


@dataclass(frozen=True)
class InequalityResult:
    lhs: float
    rhs: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.passed))


def poincare_check(phi) -> InequalityResult:
    """``int (phi')^2 >= h^-2 int phi^2`` for ``phi`` vanishing at both walls.

    Grid input uses central differences (second-order one-sided at the walls)
    and the trapezoid rule; spectra use Parseval.
    """
    if isinstance(phi, SineSpectrum):
        lhs = phi.dirichlet_norm_sq()
        rhs = phi.l2_norm_sq() / phi.h**2
    else:
        if not isinstance(phi, GridField):
            raise ChanflowError("poincare_check takes a GridField or SineSpectrum")
        v = phi.values
        if v[0] != 0.0 or v[-1] != 0.0:
            raise BoundaryViolation("phi must vanish at both walls")
        dv = np.gradient(v, phi.dx, edge_order=2)
        lhs = float(np.trapezoid(dv * dv, dx=phi.dx))
        rhs = float(np.trapezoid(v * v, dx=phi.dx)) / phi.h**2
    return InequalityResult(lhs, rhs, lhs >= rhs * (1.0 - 1e-10))


def linf_check(phi: PeriodicSample, slack: float = 0.0) -> InequalityResult:
    """``max|phi| <= <phi> + period/(2 sqrt 3) <(phi')^2>^(1/2)``.

    The bound is applied to ``phi`` or ``-phi``, whichever attains the sup
    norm as its maximum; the verbatim form with ``<phi>`` is reported in
    ``metadata["raw"]``. Derivatives are spectral, exact for trigonometric
    polynomials resolved by the grid.
    """
    v = phi.values
    d = periodic_derivative(v, phi.period)
    grad = math.sqrt(float(np.mean(d * d)))
    gain = phi.period / (2.0 * math.sqrt(3.0))
    lhs = float(np.max(np.abs(v)))
    mean = float(np.mean(v))
    flipped = -float(np.min(v)) > float(np.max(v))
    rhs = (-mean if flipped else mean) + gain * grad
    raw_rhs = mean + gain * grad
    tol = 1e-10 * max(abs(rhs), lhs) + slack
    return InequalityResult(
        lhs,
        rhs,
        lhs <= rhs + tol,
        {"flipped": flipped, "raw": {"lhs": lhs, "rhs": raw_rhs, "pass": lhs <= raw_rhs + tol}},
    )


# -- energy inequality --------------------------------------------------------

def _box_coords(cfg: ChannelConfig, shape) -> tuple[float, float, float]:
    _, m1, m2, n3 = shape
    return cfg.pi1 / m1, cfg.pi2 / m2, cfg.h / (n3 - 1)


def _integrate_box(values: np.ndarray, cfg: ChannelConfig, dx3: float) -> float:
    """``int_Omega`` of an ``(m1, m2, n3)`` array."""
    plane = np.mean(values, axis=(0, 1)) * cfg.pi1 * cfg.pi2
    return float(np.trapezoid(plane, dx=dx3))


def _gradients(u: np.ndarray, cfg: ChannelConfig, dx3: float) -> np.ndarray:
    """``g[k, l] = d u_k / d x_l`` for a ``(3, m1, m2, n3)`` field."""
    g = np.empty((3, 3) + u.shape[1:])
    for k in range(3):
        g[k, 0] = periodic_derivative(u[k], cfg.pi1, axis=0)
        g[k, 1] = periodic_derivative(u[k], cfg.pi2, axis=1)
        g[k, 2] = np.gradient(u[k], dx3, axis=2, edge_order=2)
    return g


def _energy_lhs(u: np.ndarray, du_dt: np.ndarray, cfg: ChannelConfig) -> float:
    dx3 = cfg.h / (u.shape[-1] - 1)
    g = _gradients(u, cfg, dx3)
    dissipation = np.sum(g * g, axis=(0, 1))
    streamwise = g[0, 0] ** 2 + g[1, 1] ** 2
    return (
        2.0 * _integrate_box(np.sum(u * du_dt, axis=0), cfg, dx3)
        + 2.0 * cfg.nu * _integrate_box(dissipation, cfg, dx3)
        - cfg.nu * _integrate_box(streamwise, cfg, dx3)
    )


def energy_rhs(u: np.ndarray, cfg: ChannelConfig, p_bar: float) -> float:
    dx3 = cfg.h / (u.shape[-1] - 1)
    # <u_j>_j: average of u_j along its own periodic direction
    avg1 = np.mean(u[0], axis=0)  # (m2, n3) over x2 in [0, pi2]
    avg2 = np.mean(u[1], axis=1)  # (m1, n3) over x1 in [0, pi1]
    term1 = float(np.trapezoid(np.mean(avg1**2, axis=0) * cfg.pi2, dx=dx3))
    term2 = float(np.trapezoid(np.mean(avg2**2, axis=0) * cfg.pi1, dx=dx3))
    return (
        p_bar**2 * cfg.pi1 * cfg.pi2 * cfg.h / (6.0 * cfg.nu)
        + p_bar**1.5 * (cfg.pi1 + cfg.pi2) * cfg.h
        + math.sqrt(p_bar) * (term1 + term2)
    )


def energy_balance(
    u: np.ndarray,
    P: PressureField,
    du_dt: np.ndarray,
    cfg: ChannelConfig,
    p_bar: float,
    t: float = 0.0,
) -> CheckResult:
    """Energy inequality for a class-P velocity field at one instant.

    ``du_dt`` is supplied by the caller (analytic or from the oracle). A
    Richardson estimate of the wall-normal discretisation error, from the
    field restricted to every other ``x3`` node, is added to the bound.
    """
    u = np.asarray(u, dtype=float)
    du_dt = np.asarray(du_dt, dtype=float)
    if u.ndim != 4 or u.shape[0] != 3 or u.shape[-1] < 5:
        raise ShapeMismatch(f"expected a (3, m1, m2, n3>=5) field, got {u.shape}")
    if du_dt.shape != u.shape:
        raise ShapeMismatch(f"du_dt shape {du_dt.shape} differs from u shape {u.shape}")
    scale = max(float(np.max(np.abs(u))), 1e-300)
    if np.max(np.abs(u[..., 0])) > 1e-12 * scale or np.max(np.abs(u[..., -1])) > 1e-12 * scale:
        raise NoSlipViolation("velocity must vanish at x3 = 0 and x3 = h")
    if not p_bar > 0:
        raise ChanflowError("p_bar must be > 0")

    lhs = _energy_lhs(u, du_dt, cfg)
    rhs = energy_rhs(u, cfg, p_bar)
    slack = 0.0
    if (u.shape[-1] - 1) % 2 == 0 and u.shape[-1] >= 9:
        coarse = _energy_lhs(u[..., ::2], du_dt[..., ::2], cfg)
        slack = abs(coarse - lhs) / 3.0
    p1 = P.p1(t)
    return CheckResult(
        name="energy_inequality",
        measured=lhs,
        bound=rhs + slack,
        metadata={
            "rhs": rhs,
            "discretisation_slack": slack,
            "p1": p1,
            "pressure_admissible": bool(0.0 < -p1 <= p_bar),
        },
    )


def channel_field(profile_x2_x3: np.ndarray, m1: int) -> np.ndarray:
    """Broadcast a streamwise velocity ``U(x2, x3)`` to a ``(3, m1, m2, n3)`` field."""
    m2, n3 = profile_x2_x3.shape
    u = np.zeros((3, m1, m2, n3))
    u[0] = profile_x2_x3[None, :, :]
    return u


def random_admissible_state(
    seed: int,
    cfg: ChannelConfig,
    p_bar: float,
    n3: int = 65,
    m1: int = 8,
    m2: int = 16,
    modes_x3: int = 6,
    modes_x2: int = 2,
    t_evolve: float = 0.05,
    dt: float = 1e-3,
):
    """Random velocity ``(U(x2, x3, t), 0, 0)`` evolved by the oracle.

    Initial data is a trigonometric polynomial with coefficients decaying
    like ``1/k^2``. Each spanwise Fourier mode is advanced by
    :func:`chanflow.oracle.fd_mode_solve` under a constant pressure gradient
    with ``0 < -p1 <= p_bar``. Returns ``(u, du_dt, pressure)``.
    """
    rng = np.random.default_rng(seed)
    gradient = -rng.uniform(0.05, 1.0) * p_bar / cfg.pi1
    f = ForcingSignal.constant(gradient)
    n = n3 - 2
    x3 = grid_nodes(cfg.h, n)
    x2 = cfg.pi2 * np.arange(m2) / m2
    settings = oracle.SolverSettings(n=n, dt=dt, t0=0.0, t_end=t_evolve)
    amp = p_bar / (cfg.pi1 * cfg.nu) * cfg.h**2
    U = np.zeros((m2, n3))
    rate = np.zeros((m2, n3))
    for mode in range(modes_x2 + 1):
        for basis in ((np.cos,) if mode == 0 else (np.cos, np.sin)):
            k = np.arange(1, modes_x3 + 1)
            c = rng.normal(size=modes_x3) * amp / (8.0 * k**2)
            prof = np.sin(np.outer(x3, k) * np.pi / cfg.h) @ c
            prof[0] = prof[-1] = 0.0
            end = oracle.fd_mode_solve(mode, cfg, settings, GridField(cfg.h, n, prof), f=f)
            r = oracle.mode_rate(end, cfg, t_evolve, mode, f)
            shape = basis(2.0 * np.pi * mode * x2 / cfg.pi2)
            U += np.outer(shape, end.values)
            rate += np.outer(shape, r)
    pressure = PressureField.from_forcing(f, cfg.pi1)
    return channel_field(U, m1), channel_field(rate, m1), pressure


def nonlinear_orthogonality(u, v, cfg: ChannelConfig, div_tol: float = 1e-8) -> float:
    """``|int_Omega (u . grad) v . v|`` for fields of shape ``(3, m1, m2, n3)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 4 or u.shape[0] != 3:
        raise ShapeMismatch("u and v must both have shape (3, m1, m2, n3)")
    dx3 = cfg.h / (u.shape[-1] - 1)
    gu = _gradients(u, cfg, dx3)
    div = gu[0, 0] + gu[1, 1] + gu[2, 2]
    scale = max(float(np.max(np.abs(gu))), 1.0)
    if float(np.max(np.abs(div))) > div_tol * scale:
        raise DivergenceViolation(f"max |div u| = {float(np.max(np.abs(div))):.3e}")
    gv = _gradients(v, cfg, dx3)
    # (u . grad) v_k = sum_l u_l dv_k/dx_l
    adv = np.einsum("l...,kl...->k...", u, gv)
    return abs(_integrate_box(np.sum(adv * v, axis=0), cfg, dx3))


# -- pressure structure --------------------------------------------------------

def harmonicity_residual(P_samples, dx1: float, dx2: float) -> float:
    """Max of the five-point Laplacian over interior nodes."""
    p = np.asarray(P_samples, dtype=float)
    if p.ndim != 2 or p.shape[0] < 5 or p.shape[1] < 5:
        raise GridTooSmall(f"need at least a 5x5 grid, got {p.shape}")
    lap = (
        (p[2:, 1:-1] - 2.0 * p[1:-1, 1:-1] + p[:-2, 1:-1]) / dx1**2
        + (p[1:-1, 2:] - 2.0 * p[1:-1, 1:-1] + p[1:-1, :-2]) / dx2**2
    )
    return float(np.max(np.abs(lap)))


def jacobian_defect(u1, u2, dx1: float, dx2: float) -> float:
    """Max of ``|d(u1, u2)/d(x1, x2)|`` by periodic central differences."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.shape != u2.shape or u1.ndim != 2:
        raise ShapeMismatch("u1 and u2 must be 2-D arrays of equal shape")

    def d(a, axis, step):
        return (np.roll(a, -1, axis) - np.roll(a, 1, axis)) / (2.0 * step)

    det = d(u1, 0, dx1) * d(u2, 1, dx2) - d(u1, 1, dx2) * d(u2, 0, dx1)
    return float(np.max(np.abs(det)))


def poisson_dH_dx1(x1, x2, theta):
    """``dH/dx1`` for the unit-disc Poisson kernel ``H(x, theta)``.

    Recomputed from ``H = (1 - |x|^2)/(1 + |x|^2 - 2(x1 cos + x2 sin))``:
    numerator ``-4 x1 + 2 cos + 2 x1^2 cos - 2 x2^2 cos + 4 x1 x2 sin``.
    """
    c, s = np.cos(theta), np.sin(theta)
    den = 1.0 + x1 * x1 + x2 * x2 - 2.0 * (x1 * c + x2 * s)
    num = -4.0 * x1 + 2.0 * c + 2.0 * x1 * x1 * c - 2.0 * x2 * x2 * c + 4.0 * x1 * x2 * s
    return num / (den * den)


def poisson_kernel_bound_scan(
    a: float,
    box: tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0),
    resolution: tuple[int, int, int] = (101, 101, 360),
    disc_radius: float | None = None,
    bound: float = 32.0,
) -> CheckResult:
    """Grid scan of ``|d/dx1 H(z/a, theta)|`` against ``bound``.

    ``box`` is ``(x1_min, x1_max, x2_min, x2_max)``; with ``disc_radius`` set
    only points with ``|z| <= disc_radius`` are scanned. Every scanned ``z``
    must satisfy ``a > 4|z| + 1``.
    """
    n1, n2, nt = resolution
    x1 = np.linspace(box[0], box[1], n1)
    x2 = np.linspace(box[2], box[3], n2)
    z1, z2 = np.meshgrid(x1, x2, indexing="ij")
    r = np.hypot(z1, z2)
    mask = np.ones_like(r, dtype=bool) if disc_radius is None else r <= disc_radius * (1 + 1e-12)
    z1, z2, r = z1[mask], z2[mask], r[mask]
    if z1.size == 0:
        raise PreconditionViolation("no scan points")
    if not a > 4.0 * float(np.max(r)) + 1.0:
        raise PreconditionViolation(
            f"radius a={a} must exceed 4|z|+1 = {4.0 * float(np.max(r)) + 1.0} for every z"
        )
    theta = 2.0 * np.pi * np.arange(nt) / nt
    worst = 0.0
    for th in theta:
        vals = np.abs(poisson_dH_dx1(z1 / a, z2 / a, th)) / a
        worst = max(worst, float(np.max(vals)))
    # the cruder bound quoted on the way to 32
    rr = r / a
    crude = float(np.max(4.0 * (np.abs(z1) / a + 2.0 * rr**2 + 1.0) / (a * (1.0 + rr**2 - 2.0 * rr) ** 2)))
    return CheckResult(
        name="poisson_kernel_bound",
        measured=worst,
        bound=bound,
        metadata={
            "a": a,
            "points": int(z1.size * nt),
            "intermediate_bound": crude,
            "derivative": "recomputed from H; printed numerator term -2 x2 x2^2 cos read as -2 x2^2 cos",
        },
    )


def pressure_growth_check(
    P: PressureField,
    y_values,
    p_bar: float,
    times=(0.0,),
    x2: float = 0.0,
    period_samples: int = 257,
) -> CheckResult:
    """``P(y, x2, t) <= sup_{0<=x1<pi1} |P(x1, x2, t)| + |y| p_bar / pi1``.

    The measured value is the largest excess ``P - bound`` (scaled by the
    bound magnitude); it must be ``<= 0``.
    """
    y = np.asarray(y_values, dtype=float)
    xs = np.linspace(0.0, P.pi1, period_samples)
    worst = -math.inf
    worst_at = None
    admissible = True
    for t in times:
        admissible &= abs(P.p1(t)) <= p_bar
        sup = float(np.max(np.abs(pressure_eval(P, xs, x2, t))))
        bound = sup + np.abs(y) * p_bar / P.pi1
        vals = np.asarray(pressure_eval(P, y, x2, t))
        excess = (vals - bound) / np.maximum(1.0, np.abs(bound))
        i = int(np.argmax(excess))
        if excess[i] > worst:
            worst = float(excess[i])
            worst_at = (float(y[i]), float(t))
    return CheckResult(
        name="pressure_growth",
        measured=worst,
        bound=1e-12,
        metadata={"worst_at": worst_at, "p1_within_p_bar": bool(admissible)},
    )
