"""Verification batteries behind ``chanflow verify``.

Each check is a small function returning :class:`CheckResult` entries.
Checks are independent and may run on a thread pool; the report is always
sorted by name so output does not depend on scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import analysis, oracle, spectral
from .core import ChanflowError, ChannelConfig, CheckResult, ForcingSignal, GridField, VerificationReport

SUITES = ("identities", "inequalities", "oracle", "all")

UNIT = ChannelConfig(h=1.0, nu=1.0, alpha=0.0, pi1=1.0, pi2=1.0)
UNIT_ALPHA = ChannelConfig(h=1.0, nu=1.0, alpha=1.0, pi1=1.0, pi2=1.0)
CONST = ForcingSignal.constant(-1.0)
# starts from rest so the oracle can start from zero data at t = 0
RAMP = ForcingSignal(0.0, ((0.0, 0.0), (0.5, -1.0), (1.0, -0.5), (1.5, -2.0)))
ALPHA_MIDPOINT = 0.0118189


def sup_defect(profile, exact, h: float = 1.0, samples: int = 1001) -> float:
    x = np.linspace(0.0, h, samples)
    return float(np.max(np.abs(profile(x) - exact(x))))


def loglog_slope(ks, errors) -> float:
    return float(np.polyfit(np.log(ks), np.log(errors), 1)[0])


def relative_l2(values: np.ndarray, reference: np.ndarray, dx: float) -> float:
    num = np.trapezoid((values - reference) ** 2, dx=dx)
    den = np.trapezoid(reference**2, dx=dx)
    return math.sqrt(num / den)


# -- identities -------------------------------------------------------------

def check_poiseuille_recovery(seed: int) -> list[CheckResult]:
    prof = spectral.nse_profile(CONST, UNIT, 0.0, 2001)
    d = sup_defect(prof, spectral.poiseuille_closed(UNIT, -1.0))
    return [CheckResult("poiseuille_recovery", d, 1e-6,
                        metadata={"K": 2001, "tail_bound": spectral.tail_bound(UNIT, 1.0, 2001)})]


def check_alpha_closed(seed: int) -> list[CheckResult]:
    prof = spectral.alpha_profile(CONST, UNIT_ALPHA, 0.0, 2001)
    d = sup_defect(prof, spectral.alpha_closed(UNIT_ALPHA, -1.0))
    mid = prof(0.5)
    return [
        CheckResult("alpha_closed_form", d, 1e-8, metadata={"K": 2001}),
        CheckResult("alpha_midpoint", abs(mid - ALPHA_MIDPOINT), 1e-6, metadata={"value": mid}),
    ]


def _identity_rate(fn, ks=(25, 50, 100, 200)) -> tuple[float, list[float]]:
    x = np.linspace(0.0, 1.0, 20001)
    errs = [float(np.max(fn(x, k)[2])) for k in ks]
    return loglog_slope(ks, errs), errs


def check_series_identities(seed: int) -> list[CheckResult]:
    s1, e1 = _identity_rate(lambda x, k: spectral.identity_parabola_series(x, 1.0, k))
    s2, e2 = _identity_rate(lambda x, k: spectral.identity_cosh_series(x, 1.0, 1.0, k))
    return [
        CheckResult("parabola_identity_rate", s1, -1.9, metadata={"sup_defects": e1}),
        CheckResult("cosh_identity_rate", s2, -1.9, metadata={"sup_defects": e2}),
    ]


KERNEL_PROGRAMS = (
    ForcingSignal.constant(-2.0),
    ForcingSignal(-1.0, ((0.0, -1.0), (1.0, -3.0))),
    ForcingSignal(-0.5, ((-1.0, -0.5), (0.2, -2.0), (0.7, 1.0), (1.5, -1.0))),
)


def check_kernel_consistency(seed: int) -> list[CheckResult]:
    cfg = ChannelConfig(h=1.3, nu=0.7, pi1=2.5, pi2=1.0)
    x = np.linspace(0.0, cfg.h, 257)
    worst = 0.0
    for p1 in KERNEL_PROGRAMS:
        for t in (0.4, 1.2, 3.0):
            a = spectral.mean_velocity_from_kernel(p1, cfg, t, x, 501)
            b = spectral.nse_profile(p1.scaled(1.0 / cfg.pi1), cfg, t, 501)(x)
            worst = max(worst, float(np.max(np.abs(a - b))))
    return [CheckResult("kernel_consistency", worst, 1e-12, metadata={"programs": len(KERNEL_PROGRAMS)})]


def check_spectral_structure(seed: int) -> list[CheckResult]:
    red = 0.0
    even = 0.0
    sym = 0.0
    stat = 0.0
    for f in (CONST, RAMP, *KERNEL_PROGRAMS):
        for t in (0.3, 1.1, 2.0):
            a = spectral.nse_profile(f, UNIT, t, 501)
            b = spectral.alpha_profile(f, UNIT, t, 501)
            c = spectral.alpha_profile(f, UNIT_ALPHA, t, 501)
            red = max(red, float(np.max(np.abs(a.coeffs - b.coeffs))))
            even = max(even, float(np.max(np.abs(a.coeffs[1::2]))), float(np.max(np.abs(c.coeffs[1::2]))))
            sym = max(sym, analysis.symmetry_defect(a), analysis.symmetry_defect(c))
    for cfg in (UNIT, UNIT_ALPHA):
        p = spectral.alpha_profile(CONST, cfg, 0.0, 501).coeffs
        q = spectral.alpha_profile(CONST, cfg, 7.5, 501).coeffs
        stat = max(stat, float(np.max(np.abs(p - q))))
    return [
        CheckResult("model_reduction", red, 0.0),
        CheckResult("even_mode_annihilation", even, 0.0),
        CheckResult("spectral_symmetry", sym, 1e-12),
        CheckResult("stationary_limit", stat, 1e-12),
    ]


def check_q_field(seed: int) -> list[CheckResult]:
    prof = spectral.nse_profile(CONST, UNIT_ALPHA, 0.0, 2001)
    q0 = spectral.q_field(prof, -1.0, UNIT_ALPHA, 0.0, 0.5)
    q1 = spectral.q_field(prof, -1.0, UNIT_ALPHA, 1.0, 0.5)
    return [
        CheckResult("q_field_midplane", abs(q0 + 0.0078125), 1e-9, metadata={"Q": q0}),
        CheckResult("q_field_gradient", abs((q1 - q0) + 1.0), 1e-12),
    ]


def check_pressure_structure(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_dp = 0.0
    for _ in range(20):
        p0, p1, pi1 = rng.uniform(-5, 5), -rng.uniform(0.1, 3), rng.uniform(0.5, 3)
        P = analysis.PressureField.constant(p0, p1, pi1)
        x1 = np.linspace(-2, 2, 41)
        x2 = np.linspace(-1, 1, 21)
        X1, X2 = np.meshgrid(x1, x2, indexing="ij")
        worst = max(worst, analysis.harmonicity_residual(analysis.pressure_eval(P, X1, X2, 0.0), 0.1, 0.1))
        d1, d2 = analysis.pressure_differences(P, 0.0, x1=1.7)
        worst_dp = max(worst_dp, abs(d1 - p1), abs(d2))
    x = np.linspace(-1, 1, 21)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    neg = analysis.harmonicity_residual(X1**2, 0.1, 0.1)
    return [
        CheckResult("pressure_harmonicity", worst, 1e-11),
        CheckResult("pressure_differences", worst_dp, 1e-12),
        CheckResult("harmonicity_negative_control", neg, 1.0, relation=">="),
    ]


# -- inequalities -----------------------------------------------------------

def random_sine_grid(seed: int, n: int = 512, modes: int = 8) -> GridField:
    rng = np.random.default_rng(seed)
    count = int(rng.integers(1, modes + 1))
    k = np.arange(1, count + 1)
    c = rng.normal(size=count) / k**2
    return GridField.from_function(1.0, n, lambda x: np.sin(np.pi * np.outer(x, k)) @ c)


def random_trig_sample(seed: int, m: int = 128, modes: int = 8) -> analysis.PeriodicSample:
    rng = np.random.default_rng(seed)
    period = float(rng.uniform(0.5, 3.0))
    k = np.arange(1, modes + 1)
    a = rng.normal(size=modes) / k**2
    b = rng.normal(size=modes) / k**2
    c0 = rng.normal()

    def fn(y):
        arg = 2.0 * np.pi * np.outer(y, k) / period
        return c0 + np.cos(arg) @ a + np.sin(arg) @ b

    return analysis.PeriodicSample.from_function(period, m, fn)


def check_poincare(seed: int, samples: int = 200) -> list[CheckResult]:
    g = GridField.from_function(1.0, 10**6, lambda x: np.sin(np.pi * x))
    r = analysis.poincare_check(g)
    err = max(abs(r.lhs - math.pi**2 / 2), abs(r.rhs - 0.5))
    fails = sum(not analysis.poincare_check(random_sine_grid(seed + i)).passed for i in range(samples))
    return [
        CheckResult("poincare_analytic", err, 1e-10, metadata={"lhs": r.lhs, "rhs": r.rhs}),
        CheckResult("poincare_random", float(fails), 0.0, metadata={"samples": samples, "seed": seed}),
    ]


def check_linf(seed: int, samples: int = 200) -> list[CheckResult]:
    s = analysis.PeriodicSample.from_function(1.0, 64, lambda y: np.sin(2 * np.pi * y))
    r = analysis.linf_check(s)
    err = max(abs(r.lhs - 1.0), abs(r.rhs - math.pi / math.sqrt(6.0)))
    fails = sum(not analysis.linf_check(random_trig_sample(seed + i)).passed for i in range(samples))
    return [
        CheckResult("linf_analytic", err, 1e-10, metadata={"lhs": r.lhs, "rhs": r.rhs}),
        CheckResult("linf_random", float(fails), 0.0, metadata={"samples": samples, "seed": seed}),
    ]


def poiseuille_box_field(m1: int = 8, m2: int = 8, n3: int = 201) -> np.ndarray:
    x3 = np.linspace(0.0, 1.0, n3)
    U = spectral.poiseuille_closed(UNIT, -1.0)(x3)
    U[0] = U[-1] = 0.0
    return analysis.channel_field(np.tile(U, (m2, 1)), m1)


def check_energy(seed: int, samples: int = 20) -> list[CheckResult]:
    u = poiseuille_box_field()
    P = analysis.PressureField.constant(0.0, -1.0, 1.0)
    base = analysis.energy_balance(u, P, np.zeros_like(u), UNIT, 1.0)
    worst = -math.inf
    fails = 0
    for i in range(samples):
        uu, dd, PP = analysis.random_admissible_state(seed + i, UNIT, 1.0)
        r = analysis.energy_balance(uu, PP, dd, UNIT, 1.0)
        fails += not r.passed
        worst = max(worst, r.measured - r.bound)
    return [
        CheckResult("energy_poiseuille", base.measured, base.bound, metadata=dict(base.metadata)),
        CheckResult("energy_random", float(fails), 0.0,
                    metadata={"samples": samples, "seed": seed, "worst_margin": worst}),
    ]


def check_poisson(seed: int) -> list[CheckResult]:
    r = analysis.poisson_kernel_bound_scan(6.0, (-1.0, 1.0, -1.0, 1.0), (101, 101, 360), disc_radius=1.0)
    try:
        analysis.poisson_kernel_bound_scan(1.0, (0.5, 0.5, 0.0, 0.0), (1, 1, 8))
        flagged = 0.0
    except analysis.PreconditionViolation:
        flagged = 1.0
    return [
        CheckResult(r.name, r.measured, r.bound, metadata=dict(r.metadata)),
        CheckResult("poisson_precondition_control", flagged, 1.0, relation=">="),
    ]


def check_pressure_growth(seed: int, samples: int = 50) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = -math.inf
    y = np.linspace(-100.0, 100.0, 401)
    for _ in range(samples):
        p_bar = rng.uniform(0.1, 5.0)
        P = analysis.PressureField.constant(rng.uniform(-10, 10), -rng.uniform(0.01, 1.0) * p_bar,
                                            rng.uniform(0.2, 4.0))
        worst = max(worst, analysis.pressure_growth_check(P, y, p_bar).measured)
    bad = analysis.PressureField.constant(0.0, -1.0, 1.0)
    control = analysis.pressure_growth_check(bad, [-10.0], 0.5)
    return [
        CheckResult("pressure_growth", worst, 1e-12, metadata={"samples": samples}),
        CheckResult("pressure_growth_negative_control", control.measured, 1e-12, relation=">="),
    ]


def check_jacobian(seed: int) -> list[CheckResult]:
    m = 64
    x = 2 * np.pi * np.arange(m) / m
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    dx = 2 * np.pi / m
    u1 = np.sin(X1 - 0.3)
    dep = analysis.jacobian_defect(u1, np.tanh(u1) + u1**3, dx, dx)
    ind = analysis.jacobian_defect(np.sin(X1), np.sin(X2), dx, dx)
    return [
        CheckResult("jacobian_functional", dep, 1e-8),
        CheckResult("jacobian_negative_control", ind, 0.5, relation=">="),
    ]


def check_orthogonality(seed: int) -> list[CheckResult]:
    cfg = ChannelConfig(h=1.0, nu=1.0, pi1=1.0, pi2=1.0)
    m, n3 = 32, 65
    x = np.arange(m) / m
    x3 = np.linspace(0.0, 1.0, n3)
    X1, X2, X3 = np.meshgrid(x, x, x3, indexing="ij")
    rng = np.random.default_rng(seed)
    # u = (d psi/dx2, -d psi/dx1, 0) with psi = a0 sin 2pi(x1 + 2 x2) + a1 sin 2pi x2
    a = rng.normal(size=4)
    psi_x2 = 2 * np.pi * (a[0] * np.cos(2 * np.pi * (X1 + 2 * X2)) * 2 + a[1] * np.cos(2 * np.pi * X2))
    psi_x1 = 2 * np.pi * (a[0] * np.cos(2 * np.pi * (X1 + 2 * X2)))
    wall = np.sin(np.pi * X3)
    u = np.stack([psi_x2 * wall, -psi_x1 * wall, np.zeros_like(X1)])
    v = np.stack([
        np.sin(2 * np.pi * X2) * wall,
        (a[2] + np.cos(2 * np.pi * X1)) * np.sin(2 * np.pi * X3),
        a[3] * np.sin(2 * np.pi * (X1 - X2)) * wall**2,
    ])
    val = analysis.nonlinear_orthogonality(u, v, cfg)
    return [CheckResult("nonlinear_orthogonality", val, 1e-10)]


def check_averages(seed: int) -> list[CheckResult]:
    m, n3 = 256, 33
    x2 = np.arange(m) / m
    x3 = np.linspace(0.0, 1.0, n3)
    g = np.sin(np.pi * x3) + x3 * (1 - x3)
    zero = analysis.average_x2(np.outer(np.sin(2 * np.pi * 3 * x2), g))
    one = analysis.average_x2(np.outer(1 + np.sin(2 * np.pi * x2), g))
    return [
        CheckResult("average_x2_mode_annihilation", float(np.max(np.abs(zero))), 1e-12),
        CheckResult("average_x2_mean_recovery", float(np.max(np.abs(one - g))), 1e-10),
    ]


def check_closed_symmetry(seed: int) -> list[CheckResult]:
    x = np.linspace(0.0, 1.0, 1001)
    d1 = analysis.symmetry_defect(spectral.poiseuille_closed(UNIT, -1.0)(x))
    d2 = analysis.symmetry_defect(spectral.alpha_closed(UNIT_ALPHA, -1.0)(x))
    return [CheckResult("symmetry_defect[closed_forms]", max(d1, d2), 1e-12)]


def fixture_symmetry(path: str) -> Callable[[int], list[CheckResult]]:
    """Symmetry check on a user-supplied ``x3,U`` CSV profile."""

    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ChanflowError(f"cannot read fixture {path}: {exc}") from None
    if data.shape[1] < 2 or data.shape[0] < 2:
        raise ChanflowError(f"fixture {path} needs x3,U columns and at least two rows")

    def run(seed: int) -> list[CheckResult]:
        d = analysis.symmetry_defect(data[:, 1])
        return [CheckResult("symmetry_defect[fixture]", d, 1e-6, metadata={"path": str(path)})]

    return run


# -- oracle -------------------------------------------------------------------

def _oracle_error(f, cfg, n, dt, t_end, K=4001) -> tuple[float, GridField]:
    s = oracle.SolverSettings(n=n, dt=dt, t0=0.0, t_end=t_end)
    zero = GridField.zeros(cfg.h, n)
    if cfg.alpha > 0:
        g = oracle.fd_alpha_solve(f, cfg, s, zero)
        ref = spectral.alpha_profile(f, cfg, t_end, K)(g.x)
    else:
        g = oracle.fd_nse_solve(f, cfg, s, zero)
        ref = spectral.nse_profile(f, cfg, t_end, K)(g.x)
    return relative_l2(g.values, ref, g.dx), g


def check_oracle_equivalence(seed: int) -> list[CheckResult]:
    out = []
    for label, cfg in (("nse", UNIT), ("alpha", UNIT_ALPHA)):
        e_const, _ = _oracle_error(CONST, cfg, 200, 1e-3, 2.0)
        out.append(CheckResult(f"oracle_{label}_constant", e_const, 1e-3))
        e1, g = _oracle_error(RAMP, cfg, 200, 1e-3, 2.0)
        e2, _ = _oracle_error(RAMP, cfg, 401, 5e-4, 2.0)
        out.append(CheckResult(f"oracle_{label}_piecewise", e1, 1e-3))
        out.append(CheckResult(f"oracle_{label}_convergence_ratio", e1 / e2, 3.0, relation=">=",
                               metadata={"coarse": e1, "fine": e2}))
    return out


def check_oracle_properties(seed: int) -> list[CheckResult]:
    s = oracle.SolverSettings(n=200, dt=1e-3, t0=0.0, t_end=0.5)
    rng = np.random.default_rng(seed)
    k = np.arange(1, 9, 2)
    c = rng.normal(size=k.size) / k**2
    init = GridField.from_function(1.0, 200, lambda x: np.sin(np.pi * np.outer(x, k)) @ c)
    g = oracle.fd_nse_solve(RAMP, UNIT, s, init)
    ga = oracle.fd_alpha_solve(RAMP, UNIT_ALPHA, s, init)
    sym = max(analysis.symmetry_defect(g), analysis.symmetry_defect(ga))

    g0 = oracle.fd_nse_solve(RAMP, UNIT, oracle.SolverSettings(200, 1e-3, 0.0, 2.0), GridField.zeros(1.0, 200))
    neg = -float(np.min(g0.values)) / float(np.max(np.abs(g0.values)))

    sine = GridField.from_function(1.0, 200, lambda x: np.sin(np.pi * x))
    heat = oracle.fd_nse_solve(ForcingSignal.constant(0.0), UNIT, oracle.SolverSettings(200, 1e-3, 0.0, 0.1), sine)
    heat_err = float(np.max(np.abs(heat.values - np.exp(-np.pi**2 * 0.1) * np.sin(np.pi * heat.x))))
    return [
        CheckResult("oracle_symmetry", sym, 1e-6),
        CheckResult("oracle_maximum_principle", neg, 1e-12),
        CheckResult("oracle_heat_mode", heat_err, 1e-4),
    ]


def check_mode_decay(seed: int) -> list[CheckResult]:
    cfg = ChannelConfig(h=1.0, nu=1.0, pi1=1.0, pi2=2 * np.pi)
    s = oracle.SolverSettings(n=200, dt=1e-3, t0=0.0, t_end=1.0)
    rng = np.random.default_rng(seed)
    k = np.arange(1, 9)
    c = rng.normal(size=k.size) / k**2
    inits = {
        "sine": GridField.from_function(1.0, 200, lambda x: np.sin(np.pi * x)),
        "random": GridField.from_function(1.0, 200, lambda x: np.sin(np.pi * np.outer(x, k)) @ c),
    }
    out = []
    for label, init in inits.items():
        for n in (1, 2, 4):
            r = oracle.mode_decay_check(n, cfg, s, init)
            out.append(CheckResult(f"mode_decay[n={n},{label}]", r.measured, r.bound, metadata=dict(r.metadata)))
    return out


IDENTITIES = (
    check_poiseuille_recovery,
    check_alpha_closed,
    check_series_identities,
    check_kernel_consistency,
    check_spectral_structure,
    check_q_field,
    check_pressure_structure,
)
INEQUALITIES = (
    check_poincare,
    check_linf,
    check_energy,
    check_poisson,
    check_pressure_growth,
    check_jacobian,
    check_orthogonality,
    check_averages,
    check_closed_symmetry,
)
ORACLE = (check_oracle_equivalence, check_oracle_properties, check_mode_decay)


def thread_count() -> int | None:
    raw = os.environ.get("CHANFLOW_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("CHANFLOW_THREADS must be >= 0")
    return None if n == 0 else n


def run_suite(name: str, seed: int = 0, fixture: str | None = None) -> VerificationReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    checks: list[Callable[[int], list[CheckResult]]] = []
    if name in ("identities", "all"):
        checks.extend(IDENTITIES)
    if name in ("inequalities", "all"):
        checks.extend(INEQUALITIES)
        if fixture is not None:
            checks.append(fixture_symmetry(fixture))
    if name in ("oracle", "all"):
        checks.extend(ORACLE)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(lambda fn: fn(seed), checks))
    report = VerificationReport()
    for entries in results:
        report.extend(entries)
    return report.sorted()
