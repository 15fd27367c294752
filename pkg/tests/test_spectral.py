"""Spectral solutions against independently computed references.

Frozen reference values come from adaptive quadrature of the Duhamel integral
``g_k/af_k * int e^{-lam (t - s)} f(s) ds`` (scipy.integrate.quad) and from
sine projections of the closed forms, never from the code under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chanflow.core import AlphaZero, ChannelConfig, DomainError, ForcingSignal
from chanflow.spectral import (
    alpha_closed,
    alpha_mode_solution,
    alpha_profile,
    cosh_ratio,
    identity_cosh_series,
    identity_parabola_series,
    kernel_k,
    mean_velocity_from_kernel,
    mode_rate,
    nse_mode_solution,
    nse_profile,
    poiseuille_closed,
    q_field,
    source_gain,
    tail_bound,
)

CONST = ForcingSignal.constant(-1.0)


def test_source_gain_values():
    assert source_gain(1) == pytest.approx(-4.0 / math.pi, rel=1e-15)
    assert source_gain(2) == 0.0
    assert source_gain(3) == pytest.approx(-4.0 / (3 * math.pi), rel=1e-15)


def test_mode_rate_fields():
    r = mode_rate(2, ChannelConfig(h=2.0, nu=0.5, alpha=0.1))
    assert r.lam == pytest.approx(0.5 * math.pi**2)
    assert r.alpha_factor == pytest.approx(1 + 0.01 * math.pi**2)
    with pytest.raises(DomainError):
        mode_rate(0, ChannelConfig())


def test_stationary_nse_mode_matches_projection(unit):
    # sine projection of x(1 - x)/2 onto sin(pi x)
    assert nse_mode_solution(1, CONST, unit, 0.0) == pytest.approx(0.12900613773279795, rel=1e-13)


def test_stationary_alpha_mode_matches_projection(unit_alpha):
    # sine projection of the closed-form NS-alpha profile with alpha = 1
    assert alpha_mode_solution(1, CONST, unit_alpha, 0.0) == pytest.approx(0.011868521886580385, rel=1e-12)


@pytest.mark.parametrize("k,alpha,t,expected", [
    (1, 0.0, 2.0, 0.25773294875563674),
    (3, 0.0, 0.7, 0.0038761944258977337),
    (1, 1.0, 2.0, 0.023711345808482834),
    (5, 0.3, 1.2, 4.837870780689702e-05),
])
def test_ramp_modes_match_quadrature(ramp, k, alpha, t, expected):
    cfg = ChannelConfig(alpha=alpha)
    fn = nse_mode_solution if alpha == 0 else alpha_mode_solution
    assert fn(k, ramp, cfg, t) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("t,expected", [(0.5, 0.23205817732081088), (3.0, 0.38701841312845997)])
def test_tail_then_ramp_matches_quadrature(unit, t, expected):
    f = ForcingSignal(-1.0, ((0.0, -1.0), (1.0, -3.0)))
    assert nse_mode_solution(1, f, unit, t) == pytest.approx(expected, rel=1e-10)


def test_ramp_relaxes_to_new_equilibrium(ramp, unit):
    # after the last knot the forcing is -2: the mode tends to 8/pi^3
    assert nse_mode_solution(1, ramp, unit, 40.0) == pytest.approx(8.0 / math.pi**3, rel=1e-12)


@pytest.mark.parametrize("k", [2, 4, 10, 100])
def test_even_modes_vanish(ramp, unit_alpha, k):
    assert nse_mode_solution(k, ramp, ChannelConfig(), 1.3) == 0.0
    assert alpha_mode_solution(k, ramp, unit_alpha, 1.3) == 0.0


def test_constant_profile_is_poiseuille(unit):
    x = np.linspace(0, 1, 1001)
    u = nse_profile(CONST, unit, 0.0, K=2001)
    assert np.max(np.abs(u(x) - poiseuille_closed(unit, -1.0)(x))) < 1e-6
    assert u(0.5) == pytest.approx(0.125, abs=1e-9)


def test_constant_alpha_profile_is_closed_form(unit_alpha):
    x = np.linspace(0, 1, 1001)
    u = alpha_profile(CONST, unit_alpha, 0.0, K=501)
    closed = alpha_closed(unit_alpha, -1.0)
    assert np.max(np.abs(u(x) - closed(x))) < 1e-10
    assert closed(0.5) == pytest.approx(0.011818883970074023, rel=1e-13)


def test_alpha_zero_reduces_exactly(ramp):
    cfg = ChannelConfig(alpha=0.0)
    a = alpha_profile(ramp, cfg, 1.1, K=64).coeffs
    b = nse_profile(ramp, cfg, 1.1, K=64).coeffs
    np.testing.assert_array_equal(a, b)


def test_alpha_closed_needs_alpha(unit):
    with pytest.raises(AlphaZero):
        alpha_closed(unit, -1.0)


def test_cosh_ratio_no_overflow():
    x = np.array([0.0, 0.5, 1.0])
    r = cosh_ratio(x, 1.0, 1e-4)
    assert np.all(np.isfinite(r))
    assert r[0] == pytest.approx(1.0) and r[2] == pytest.approx(1.0)
    assert r[1] == 0.0


def test_alpha_mode_decay_rate_is_k_minus_five():
    cfg = ChannelConfig(alpha=0.5)
    ks = np.array([101, 201, 401, 801])
    vals = np.array([alpha_mode_solution(int(k), CONST, cfg, 0.0) for k in ks])
    slope = np.polyfit(np.log(ks), np.log(vals), 1)[0]
    assert slope == pytest.approx(-5.0, abs=0.01)


def test_nse_mode_decay_rate_is_k_minus_three(unit):
    ks = np.array([101, 201, 401, 801])
    vals = np.array([nse_mode_solution(int(k), CONST, unit, 0.0) for k in ks])
    slope = np.polyfit(np.log(ks), np.log(vals), 1)[0]
    assert slope == pytest.approx(-3.0, abs=1e-6)


def test_parabola_identity():
    x = np.linspace(0, 1, 2001)
    _, _, d = identity_parabola_series(x, 1.0, 101)
    assert d.max() <= 1.26e-5
    lhs, rhs, d0 = identity_parabola_series(0.5, 1.0, 101)
    assert lhs == 0.25 and d0 < 1e-6


def test_cosh_identity():
    x = np.linspace(0, 1, 2001)
    K, a = 201, 0.5
    _, _, d = identity_cosh_series(x, 1.0, a, K)
    # coefficients are below 4/(pi^3 a^2 k^3), so the tail is below 2/(pi^3 a^2 K^2)
    scale = math.cosh(0.5 / a)
    assert d.max() <= scale * 2.0 / (math.pi**3 * a * a * K * K)
    with pytest.raises(AlphaZero):
        identity_cosh_series(x, 1.0, 0.0, 10)


def test_identity_defect_decays_quadratically():
    x = np.linspace(0, 1, 20001)
    ks = [25, 50, 100, 200]
    errs = [identity_parabola_series(x, 1.0, K)[2].max() for K in ks]
    slope = np.polyfit(np.log(ks), np.log(errs), 1)[0]
    assert -2.1 < slope < -1.8


def test_identity_rejects_out_of_range():
    with pytest.raises(DomainError):
        identity_parabola_series(1.5, 1.0, 10)


def test_kernel_at_t_zero_is_square_wave(unit):
    # sum of -4/(pi k) sin(pi k x) over odd k is -1 inside the channel
    assert kernel_k(0.5, 0.0, unit, K=20001) == pytest.approx(-1.0, abs=1e-4)
    assert kernel_k(0.0, 0.3, unit) == 0.0


def test_kernel_integral_reproduces_profile(ramp):
    cfg = ChannelConfig(pi1=2.0)
    # p1 is the drop over one period, i.e. pi1 times the gradient
    p1 = ramp.scaled(cfg.pi1)
    x = np.linspace(0, 1, 51)
    direct = nse_profile(ramp, cfg, 1.7, K=301)(x)
    via_kernel = mean_velocity_from_kernel(p1, cfg, 1.7, x, K=301)
    np.testing.assert_allclose(via_kernel, direct, rtol=1e-12, atol=1e-15)


def test_q_field_formula(unit_alpha):
    prof = alpha_profile(CONST, unit_alpha, 0.0, K=101)
    x3 = 0.3
    u, du = prof(x3), prof.derivative(x3)
    expected = 2.0 * 0.7 - 0.5 * (u * u - du * du)
    assert q_field(prof, 2.0, unit_alpha, 0.7, x3) == pytest.approx(expected, rel=1e-14)


def test_tail_bound_covers_truncation(unit):
    x = np.linspace(0, 1, 1001)
    full = nse_profile(CONST, unit, 0.0, K=4001)(x)
    for K in (5, 21, 101):
        err = np.max(np.abs(nse_profile(CONST, unit, 0.0, K=K)(x) - full))
        assert err <= tail_bound(unit, 1.0, K)
    assert tail_bound(ChannelConfig(alpha=1.0), 1.0, 50) < tail_bound(unit, 1.0, 50)


forcing_values = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(forcing_values, forcing_values, st.floats(0.0, 3.0), st.floats(0.0, 0.5))
def test_profile_symmetric_about_midplane(a, b, t, alpha):
    f = ForcingSignal(a, ((0.0, a), (1.0, b)))
    prof = alpha_profile(f, ChannelConfig(alpha=alpha), t, K=51)
    x = np.linspace(0, 0.5, 26)
    np.testing.assert_allclose(prof(x), prof(1.0 - x), atol=1e-13 * (1 + abs(a) + abs(b)))


@settings(max_examples=40, deadline=None)
@given(forcing_values, st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_profile_linear_in_forcing(a, c, t):
    f = ForcingSignal(a, ((0.0, a), (1.0, -a)))
    cfg = ChannelConfig()
    lhs = nse_profile(f.scaled(c), cfg, t, K=31).coeffs
    rhs = c * nse_profile(f, cfg, t, K=31).coeffs
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(-3, 3))
def test_stationary_mode_matches_closed_projection(h, nu, p):
    # projection of -p/(2 nu) x (h - x) onto sin(pi x/h): -p/nu * 4 h^2/pi^3
    cfg = ChannelConfig(h=h, nu=nu)
    got = nse_mode_solution(1, ForcingSignal.constant(p), cfg, 0.0)
    assert got == pytest.approx(-p / nu * 4 * h * h / math.pi**3, rel=1e-12, abs=1e-300)
