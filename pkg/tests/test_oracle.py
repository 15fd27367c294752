import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chanflow.core import AlphaZero, ChanflowError, ChannelConfig, ForcingSignal, GridField
from chanflow.oracle import (
    SolverSettings,
    ZeroInitialData,
    fd_alpha_solve,
    fd_mode_solve,
    fd_nse_solve,
    mode_decay_check,
    mode_energy,
    mode_rate,
    second_difference,
)

CONST = ForcingSignal.constant(-1.0)


def test_settings_shrink_dt_to_divide_interval():
    s = SolverSettings(n=10, dt=0.3, t0=0.0, t_end=1.0)
    assert s.steps == 4
    assert s.effective_dt == 0.25
    with pytest.raises(ChanflowError):
        SolverSettings(n=2)
    with pytest.raises(ChanflowError):
        SolverSettings(dt=2.0, t_end=1.0)


def test_second_difference_exact_on_quadratic():
    g = GridField.from_function(1.0, 9, lambda x: x * (1 - x))
    np.testing.assert_allclose(second_difference(g), -2.0, rtol=1e-12)


def test_stationary_parabola_is_fixed_point(unit):
    # central differences are exact on quadratics, so Poiseuille never moves
    n = 49
    init = GridField.from_function(1.0, n, lambda x: 0.5 * x * (1 - x))
    out = fd_nse_solve(CONST, unit, SolverSettings(n=n, dt=0.01, t_end=1.0), init)
    np.testing.assert_allclose(out.values, init.values, atol=1e-14)


def test_nse_from_rest_approaches_poiseuille(unit):
    n = 200
    out = fd_nse_solve(CONST, unit, SolverSettings(n=n, dt=1e-3, t_end=2.0), GridField.zeros(1.0, n))
    exact = 0.5 * out.x * (1 - out.x)
    # transient left at t = 2 is below 4/pi^3 exp(-2 pi^2)
    assert np.max(np.abs(out.values - exact)) < 4 / math.pi**3 * math.exp(-2 * math.pi**2) * 1.01


def test_heat_mode_decay(unit):
    n, t_end = 200, 0.1
    init = GridField.from_function(1.0, n, lambda x: np.sin(math.pi * x))
    zero = ForcingSignal.constant(0.0)
    out = fd_nse_solve(zero, unit, SolverSettings(n=n, dt=1e-4, t_end=t_end), init)
    exact = np.exp(-math.pi**2 * t_end) * np.sin(math.pi * out.x)
    assert np.max(np.abs(out.values - exact)) < 1e-4


def test_alpha_solve_stationary_closed_form(unit_alpha):
    from chanflow.spectral import alpha_closed

    n = 200
    closed = alpha_closed(unit_alpha, -1.0)
    init = GridField.from_function(1.0, n, closed)
    out = fd_alpha_solve(CONST, unit_alpha, SolverSettings(n=n, dt=1e-2, t_end=1.0), init)
    assert np.max(np.abs(out.values - closed(out.x))) < 1e-5


def test_alpha_solve_requires_alpha(unit):
    with pytest.raises(AlphaZero):
        fd_alpha_solve(CONST, unit, SolverSettings(n=10), GridField.zeros(1.0, 10))


def test_alpha_transient_rate_independent_of_alpha():
    # homogeneous NS-alpha decays like exp(-nu pi^2 t) in the first mode for every alpha
    n, zero = 200, ForcingSignal.constant(0.0)
    rates = []
    for alpha in (0.1, 0.5, 2.0):
        cfg = ChannelConfig(alpha=alpha)
        init = GridField.from_function(1.0, n, lambda x: np.sin(math.pi * x))
        _, traj = fd_alpha_solve(zero, cfg, SolverSettings(n=n, dt=1e-3, t_end=0.2), init, record=True)
        t = np.array([p[0] for p in traj])
        amp = np.array([p[1].values[(n + 1) // 2] for p in traj])
        rates.append(-np.polyfit(t, np.log(amp), 1)[0])
    np.testing.assert_allclose(rates, math.pi**2, rtol=1e-3)


def test_maximum_principle(unit, rng):
    n = 100
    vals = np.concatenate(([0.0], rng.uniform(-1, 1, n), [0.0]))
    init = GridField(1.0, n, vals)
    _, traj = fd_nse_solve(ForcingSignal.constant(0.0), unit, SolverSettings(n=n, dt=1e-4, t_end=0.05),
                           init, record=True)
    bound = np.max(np.abs(vals))
    assert max(np.max(np.abs(g.values)) for _, g in traj) <= bound + 1e-12


def test_record_returns_every_step(unit):
    s = SolverSettings(n=10, dt=0.1, t_end=1.0)
    end, traj = fd_nse_solve(CONST, unit, s, GridField.zeros(1.0, 10), record=True)
    assert len(traj) == s.steps + 1
    assert traj[-1][0] == pytest.approx(1.0)
    assert traj[-1][1] is end


def test_initial_field_checks(unit):
    with pytest.raises(ChanflowError):
        fd_nse_solve(CONST, unit, SolverSettings(n=10), GridField.zeros(1.0, 12))
    with pytest.raises(ChanflowError):
        fd_nse_solve(CONST, unit, SolverSettings(n=10), GridField.zeros(2.0, 10))


def test_mode_solve_ignores_forcing_off_zero_mode(unit):
    s = SolverSettings(n=20, dt=0.01, t_end=0.1)
    out = fd_mode_solve(1, unit, s, GridField.zeros(1.0, 20), f=CONST)
    assert np.all(out.values == 0.0)
    out0 = fd_mode_solve(0, unit, s, GridField.zeros(1.0, 20), f=CONST)
    assert np.all(out0.interior > 0)


def test_mode_rate_on_parabola(unit):
    g = GridField.from_function(1.0, 19, lambda x: x * (1 - x))
    np.testing.assert_allclose(mode_rate(g, unit, 0.0)[1:-1], -2.0)
    shift = (2 * math.pi) ** 2
    r = mode_rate(g, unit, 0.0, n_mode=1)
    np.testing.assert_allclose(r[1:-1], -2.0 - shift * g.interior)


def test_zero_initial_data_rejected(unit):
    with pytest.raises(ZeroInitialData):
        mode_decay_check(1, unit, SolverSettings(n=10), GridField.zeros(1.0, 10))
    with pytest.raises(ChanflowError):
        mode_decay_check(0, unit, SolverSettings(n=10), GridField.from_function(1.0, 10, np.sin))


@pytest.mark.parametrize("n_mode", [1, 2, 4])
def test_mode_decay_sine(unit, n_mode):
    n = 100
    init = GridField.from_function(1.0, n, lambda x: np.sin(math.pi * x))
    r = mode_decay_check(n_mode, unit, SolverSettings(n=n, dt=1e-3, t_end=0.2), init)
    assert r.passed
    assert r.metadata["energy_nonincreasing"]
    assert r.metadata["observed_rate"] >= r.metadata["bound_rate"]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_mode_decay_smooth_random(seed, n_mode):
    cfg = ChannelConfig(pi2=2 * math.pi)
    n, k = 100, np.arange(1, 9)
    c = np.random.default_rng(seed).normal(size=k.size) / k**2
    init = GridField.from_function(1.0, n, lambda x: np.sin(math.pi * np.outer(x, k)) @ c)
    r = mode_decay_check(n_mode, cfg, SolverSettings(n=n, dt=1e-3, t_end=0.5), init)
    assert r.passed
    assert r.metadata["energy_nonincreasing"]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_mode_energy_nonincreasing_rough(seed, n_mode):
    # rough data: Crank-Nicolson damps grid-scale modes slowly, but never amplifies
    n = 60
    vals = np.concatenate(([0.0], np.random.default_rng(seed).normal(size=n), [0.0]))
    _, traj = fd_mode_solve(n_mode, ChannelConfig(), SolverSettings(n=n, dt=1e-3, t_end=0.05),
                            GridField(1.0, n, vals), record=True)
    energies = np.array([mode_energy(g) for _, g in traj])
    assert np.all(np.diff(energies) <= 1e-15 * energies[0])


def test_mode_energy_trapezoid():
    g = GridField.from_function(1.0, 999, lambda x: np.sin(math.pi * x))
    assert mode_energy(g) == pytest.approx(0.5, rel=1e-9)
