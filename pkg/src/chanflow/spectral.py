"""Sine-series solutions of the channel equations.

The averaged streamwise velocity ``U(x3, t)`` obeys, mode by mode,

    (1 + alpha^2 (pi k/h)^2) (dU_k/dt + nu (pi k/h)^2 U_k) = g_k f(t),
    g_k = 2((-1)^k - 1) / (pi k),

with the forcing history extending to ``t = -inf``. For the piecewise-linear
forcing family of :class:`~chanflow.core.ForcingSignal` every mode is
integrated in closed form: the constant tail contributes its equilibrium
``g_k f_tail / (af_k lambda_k)`` at the first knot and each linear segment is
propagated exactly. No quadrature is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AlphaZero,
    ChannelConfig,
    DomainError,
    ForcingSignal,
    SineSpectrum,
    validate_config,
)

DEFAULT_TRUNCATION = 501


@dataclass(frozen=True)
class ModeRate:
    k: int
    lam: float
    alpha_factor: float
    source_gain: float


def source_gain(k):
    """``2((-1)^k - 1)/(pi k)``; exactly zero for even ``k``."""
    k = np.asarray(k)
    sign = np.where(k % 2 == 0, 0.0, -2.0)
    out = 2.0 * sign / (np.pi * k)
    return float(out) if out.ndim == 0 else out


def mode_rate(k: int, cfg: ChannelConfig) -> ModeRate:
    if k < 1:
        raise DomainError(f"mode index must be >= 1 (got {k})")
    wn = math.pi * k / cfg.h
    return ModeRate(
        k=k,
        lam=cfg.nu * wn * wn,
        alpha_factor=1.0 + cfg.alpha**2 * wn * wn,
        source_gain=source_gain(k),
    )


def _mode_arrays(ks: np.ndarray, cfg: ChannelConfig, alpha: float):
    wn = np.pi * ks / cfg.h
    lam = cfg.nu * wn * wn
    af = 1.0 + alpha * alpha * wn * wn
    return lam, af, source_gain(ks)


def _phi1(lam: np.ndarray, L: float) -> np.ndarray:
    """``int_0^L exp(-lam u) du``."""
    return -np.expm1(-lam * L) / lam


def _phi2(lam: np.ndarray, L: float) -> np.ndarray:
    """``int_0^L u exp(-lam u) du``, stable for small ``lam L``."""
    z = lam * L
    out = np.empty_like(z)
    small = z < 1e-3
    zs = z[small]
    # (1 - e^{-z}(1+z))/z^2 = 1/2 - z/3 + z^2/8 - z^3/30 + ...
    out[small] = L * L * (0.5 - zs / 3.0 + zs * zs / 8.0 - zs**3 / 30.0)
    zb = z[~small]
    lb = lam[~small]
    out[~small] = (-np.expm1(-zb) - zb * np.exp(-zb)) / (lb * lb)
    return out


def _propagate(lam: np.ndarray, f: ForcingSignal, t: float) -> np.ndarray:
    """``y_k(t) = int_{-inf}^t exp(-lam_k (t - s)) f(s) ds`` for every mode."""
    y = f.tail / lam
    knots = f.knots
    if not knots or t <= knots[0][0]:
        return y
    for (ta, fa), (tb, fb) in zip(knots, knots[1:]):
        if t <= ta:
            break
        end = min(t, tb)
        L = end - ta
        slope = (fb - fa) / (tb - ta)
        f_end = fa + slope * L
        # with u = end - s the segment reads f_end - slope u
        y = y * np.exp(-lam * L) + f_end * _phi1(lam, L) - slope * _phi2(lam, L)
        if t <= tb:
            return y
    t_last, f_last = knots[-1]
    if t > t_last:
        L = t - t_last
        y = y * np.exp(-lam * L) + f_last * _phi1(lam, L)
    return y


def _coefficients(f: ForcingSignal, cfg: ChannelConfig, t: float, K: int, alpha: float) -> np.ndarray:
    if K < 1:
        raise DomainError(f"truncation K must be >= 1 (got {K})")
    ks = np.arange(1, K + 1)
    lam, af, gain = _mode_arrays(ks, cfg, alpha)
    return gain * _propagate(lam, f, float(t)) / af


def nse_mode_solution(k: int, f: ForcingSignal, cfg: ChannelConfig, t: float) -> float:
    """Coefficient ``U_k(t)`` of the Navier-Stokes channel solution."""
    validate_config(cfg)
    if k < 1:
        raise DomainError(f"mode index must be >= 1 (got {k})")
    lam, af, gain = _mode_arrays(np.array([k]), cfg, 0.0)
    return float((gain * _propagate(lam, f, float(t)) / af)[0])


def alpha_mode_solution(k: int, f: ForcingSignal, cfg: ChannelConfig, t: float) -> float:
    """Coefficient ``U_k(t)`` of the NS-alpha channel solution (filtered velocity)."""
    validate_config(cfg)
    if k < 1:
        raise DomainError(f"mode index must be >= 1 (got {k})")
    lam, af, gain = _mode_arrays(np.array([k]), cfg, cfg.alpha)
    return float((gain * _propagate(lam, f, float(t)) / af)[0])


def nse_profile(f: ForcingSignal, cfg: ChannelConfig, t: float, K: int = DEFAULT_TRUNCATION) -> SineSpectrum:
    """Sine spectrum of ``U(., t)`` driven by the pressure gradient ``f``."""
    validate_config(cfg)
    return SineSpectrum(cfg.h, _coefficients(f, cfg, t, K, 0.0))


def alpha_profile(f: ForcingSignal, cfg: ChannelConfig, t: float, K: int = DEFAULT_TRUNCATION) -> SineSpectrum:
    """Sine spectrum of the NS-alpha velocity ``U(., t)`` driven by ``f``.

    With ``cfg.alpha == 0`` the coefficients coincide bit for bit with
    :func:`nse_profile`.
    """
    validate_config(cfg)
    return SineSpectrum(cfg.h, _coefficients(f, cfg, t, K, cfg.alpha))


def _check_position(x, h: float) -> np.ndarray:
    x_arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x_arr)) or np.any(x_arr < 0) or np.any(x_arr > h):
        raise DomainError(f"position outside [0, {h}]")
    return x_arr


def kernel_k(x, t: float, cfg: ChannelConfig, K: int = DEFAULT_TRUNCATION):
    """Partial sum of the heat-like kernel linking ``p1`` history to ``<u1>``.

    At ``t = 0`` the series converges only conditionally (it is a scaled
    square wave), so large ``K`` is needed there.
    """
    validate_config(cfg)
    x_arr = _check_position(x, cfg.h)
    if K < 1:
        raise DomainError(f"truncation K must be >= 1 (got {K})")
    ks = np.arange(1, K + 1)
    lam, _, gain = _mode_arrays(ks, cfg, 0.0)
    coeffs = gain / cfg.pi1 * np.exp(-lam * t)
    return SineSpectrum(cfg.h, coeffs).evaluate(x_arr)


def mean_velocity_from_kernel(
    p1: ForcingSignal, cfg: ChannelConfig, t: float, x3, K: int = DEFAULT_TRUNCATION
):
    """``<u1>(x3, t) = int_{-inf}^t K(x3, t - s) p1(s) ds``.

    ``p1`` is the pressure drop over one streamwise period (not the
    gradient). The time integral is taken mode by mode in closed form.
    """
    validate_config(cfg)
    x_arr = _check_position(x3, cfg.h)
    ks = np.arange(1, K + 1)
    lam, _, gain = _mode_arrays(ks, cfg, 0.0)
    kernel_coeffs = gain / cfg.pi1
    return SineSpectrum(cfg.h, kernel_coeffs * _propagate(lam, p1, float(t))).evaluate(x_arr)


def poiseuille_closed(cfg: ChannelConfig, p10: float):
    """Stationary parabola ``-p10/(2 nu) x3 (h - x3)`` as a callable."""
    validate_config(cfg)
    h, nu = cfg.h, cfg.nu

    def profile(x3):
        x = np.asarray(x3, dtype=float)
        out = -p10 / (2.0 * nu) * x * (h - x)
        return float(out) if out.ndim == 0 else out

    return profile


def cosh_ratio(x, h: float, alpha: float):
    """``cosh((x - h/2)/alpha) / cosh(h/(2 alpha))`` without overflow."""
    d = np.abs(np.asarray(x, dtype=float) - 0.5 * h)
    return np.exp((d - 0.5 * h) / alpha) * (1.0 + np.exp(-2.0 * d / alpha)) / (1.0 + np.exp(-h / alpha))


def alpha_closed(cfg: ChannelConfig, q10: float):
    """Stationary NS-alpha profile for constant forcing ``q10``."""
    validate_config(cfg)
    if cfg.alpha <= 0:
        raise AlphaZero("alpha must be > 0 for the NS-alpha closed form; use poiseuille_closed")
    h, nu, a = cfg.h, cfg.nu, cfg.alpha

    def profile(x3):
        x = np.asarray(x3, dtype=float)
        out = a * a * q10 / nu * (1.0 - cosh_ratio(x, h, a)) - q10 / (2.0 * nu) * x * (h - x)
        return float(out) if out.ndim == 0 else out

    return profile


def parabola_coefficients(h: float, K: int) -> np.ndarray:
    k = np.arange(1, K + 1)
    return 4.0 * h * h * (1.0 - (-1.0) ** k) / (np.pi * k) ** 3


def cosh_coefficients(h: float, alpha: float, K: int) -> np.ndarray:
    """Sine coefficients of ``1 - cosh((x - h/2)/alpha)/cosh(h/(2 alpha))``.

    This is the cosh identity divided through by ``cosh(h/(2 alpha))`` so the
    coefficients stay finite for small ``alpha``.
    """
    k = np.arange(1, K + 1)
    wn = np.pi * k / h
    return 2.0 * (1.0 - (-1.0) ** k) / (np.pi * k * (1.0 + alpha * alpha * wn * wn))


def identity_parabola_series(x, h: float, K: int):
    """Compare ``x(h - x)`` with its truncated sine series.

    Returns ``(lhs, rhs, defect)`` with ``defect = |lhs - rhs|``.
    """
    x_arr = _check_position(x, h)
    lhs = x_arr * (h - x_arr)
    rhs = np.asarray(SineSpectrum(h, parabola_coefficients(h, K)).evaluate(x_arr))
    return _triple(lhs, rhs)


def identity_cosh_series(x, h: float, alpha: float, K: int):
    """Compare ``cosh(h/2a) - cosh((x - h/2)/a)`` with its sine series.

    Both sides are scaled by ``1/cosh(h/2a)`` internally; the returned values
    are rescaled when that factor is representable and left normalised
    otherwise (``alpha`` much smaller than ``h``).
    """
    if not alpha > 0:
        raise AlphaZero("alpha must be > 0 for the cosh identity")
    x_arr = _check_position(x, h)
    lhs = 1.0 - cosh_ratio(x_arr, h, alpha)
    rhs = np.asarray(SineSpectrum(h, cosh_coefficients(h, alpha, K)).evaluate(x_arr))
    scale = math.cosh(h / (2.0 * alpha)) if h / (2.0 * alpha) < 700 else 1.0
    return _triple(lhs * scale, rhs * scale)


def _triple(lhs, rhs):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    defect = np.abs(lhs - rhs)
    if lhs.ndim == 0:
        return float(lhs), float(rhs), float(defect)
    return lhs, rhs, defect


def q_field(profile: SineSpectrum, p1_tilde: float, cfg: ChannelConfig, x1, x3):
    """Modified pressure making an NSE channel solution an NS-alpha solution.

    ``Q = p1_tilde x1 - (U^2 - alpha^2 (dU/dx3)^2) / 2``.
    """
    x1 = np.asarray(x1, dtype=float)
    u = np.asarray(profile.evaluate(x3))
    du = np.asarray(profile.derivative(x3))
    out = p1_tilde * x1 - 0.5 * (u * u - cfg.alpha**2 * du * du)
    return float(out) if np.ndim(out) == 0 else out


def tail_bound(cfg: ChannelConfig, sup_forcing: float, K: int, alpha: float | None = None) -> float:
    """Upper bound on ``sup_x |U - U_K|`` for any forcing with ``|f| <= sup_forcing``.

    Every coefficient obeys ``|U_k| <= |g_k| sup|f| / (af_k lambda_k)``; the
    tail of those bounds is summed with an integral comparison.
    """
    a = cfg.alpha if alpha is None else alpha
    c3 = 4.0 * sup_forcing * cfg.h**2 / (cfg.nu * np.pi**3)
    # sum_{k>K} k^-3 <= 1/(2 K^2)
    bound = c3 / (2.0 * K * K)
    if a > 0:
        c5 = c3 * cfg.h**2 / (a * a * np.pi**2)
        # sum_{k>K} k^-5 <= 1/(4 K^4)
        bound = min(bound, c5 / (4.0 * K**4))
    return float(bound)
