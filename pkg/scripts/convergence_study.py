"""Space-time refinement of the finite-difference solver against the series.

Usage: python3 scripts/convergence_study.py [--alpha A] [--levels L]

Prints one row per level: n, dt, relative L2 error and the ratio to the
previous level (about 4 for a second-order scheme).
"""

import argparse

from chanflow import oracle, spectral
from chanflow.core import ChannelConfig, GridField
from chanflow.suites import RAMP, relative_l2


def run(alpha: float, levels: int) -> None:
    cfg = ChannelConfig(alpha=alpha)
    solve = oracle.fd_alpha_solve if alpha > 0 else oracle.fd_nse_solve
    profile = spectral.alpha_profile if alpha > 0 else spectral.nse_profile
    prev = None
    print("n,dt,rel_l2,ratio")
    for level in range(levels):
        n = 50 * 2**level - 1  # spacing 1/(n + 1) halves exactly
        dt = 4e-3 / 2**level
        s = oracle.SolverSettings(n=n, dt=dt, t_end=2.0)
        g = solve(RAMP, cfg, s, GridField.zeros(1.0, n))
        err = relative_l2(g.values, profile(RAMP, cfg, 2.0, 4001)(g.x), g.dx)
        ratio = "" if prev is None else f"{prev / err:.3f}"
        print(f"{n},{dt:g},{err:.6e},{ratio}")
        prev = err


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()
    run(args.alpha, args.levels)
