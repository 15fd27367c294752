"""``chanflow`` command line: profile, evolve and verify.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import oracle, spectral, suites
from .config import ConfigError, RunConfig, load
from .core import ChanflowError, GridField

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def fmt(x: float) -> str:
    return f"{float(x) + 0.0:.17g}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _profile_fn(rc: RunConfig):
    return spectral.alpha_profile if rc.model == "alpha" else spectral.nse_profile


def _closed_fn(rc: RunConfig):
    if rc.model == "alpha":
        return spectral.alpha_closed(rc.channel, rc.forcing.tail)
    return spectral.poiseuille_closed(rc.channel, rc.forcing.tail)


def _emit(rc: RunConfig, header: list[str], rows: list[list[float]], extra: dict) -> None:
    if rc.output_format == "json":
        doc = {"schema": 1, **extra, "columns": header, "rows": [[float(v) for v in r] for r in rows]}
        text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for r in rows:
            buf.write(",".join(fmt(v) for v in r) + "\n")
        text = buf.getvalue()
    if rc.output_path:
        Path(rc.output_path).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)


def cmd_profile(rc: RunConfig) -> int:
    t = rc.times[0]
    x = np.linspace(0.0, rc.channel.h, rc.samples)
    prof = _profile_fn(rc)(rc.forcing, rc.channel, t, rc.truncation)
    u = prof(x)
    alpha = rc.channel.alpha if rc.model == "alpha" else 0.0
    bound = spectral.tail_bound(rc.channel, rc.forcing.sup_abs(), rc.truncation, alpha)
    extra = {"command": "profile", "model": rc.model, "t": t, "truncation": rc.truncation, "tail_bound": bound}
    if rc.forcing.is_constant:
        closed = _closed_fn(rc)(x)
        defect = np.abs(u - closed)
        rows = [[a, b, c, d] for a, b, c, d in zip(x, u, closed, defect)]
        header = ["x3", "U_series", "U_closed", "defect"]
        extra["max_defect"] = float(np.max(defect))
        print(f"max_defect={fmt(extra['max_defect'])} tail_bound={fmt(bound)}", file=sys.stderr)
    else:
        rows = [[a, b] for a, b in zip(x, u)]
        header = ["x3", "U_series"]
        print(f"tail_bound={fmt(bound)}", file=sys.stderr)
    _emit(rc, header, rows, extra)
    return EXIT_OK


def _oracle_states(rc: RunConfig, times: list[float]) -> dict[float, GridField]:
    """Oracle solution at each requested time, started from the spectral state."""
    opts = rc.oracle
    cfg = rc.channel
    knots = rc.forcing.times
    start = min(times[0], float(knots[0])) if knots.size else times[0]
    spec = _profile_fn(rc)(rc.forcing, cfg, start, rc.truncation)
    state = spec.to_grid(opts.n)
    solve = oracle.fd_alpha_solve if rc.model == "alpha" else oracle.fd_nse_solve
    out = {}
    now = start
    for t in times:
        if t > now:
            span = t - now
            s = oracle.SolverSettings(n=opts.n, dt=min(opts.dt, span), t0=now, t_end=t)
            state = solve(rc.forcing, cfg, s, state)
            now = t
        out[t] = state
    return out


def cmd_evolve(rc: RunConfig) -> int:
    times = sorted(set(rc.times))
    profile = _profile_fn(rc)
    if rc.oracle is not None:
        states = _oracle_states(rc, times)
        x = next(iter(states.values())).x
    else:
        x = np.linspace(0.0, rc.channel.h, rc.samples)
    rows = []
    worst = 0.0
    for t in times:
        u = profile(rc.forcing, rc.channel, t, rc.truncation)(x)
        if rc.oracle is None:
            rows.extend([t, a, b] for a, b in zip(x, u))
        else:
            uo = states[t].values
            d = np.abs(u - uo)
            worst = max(worst, float(np.max(d)))
            rows.extend([t, a, b, c, e] for a, b, c, e in zip(x, u, uo, d))
    header = ["t", "x3", "U_spectral"] + (["U_oracle", "defect"] if rc.oracle else [])
    extra = {"command": "evolve", "model": rc.model, "truncation": rc.truncation}
    if rc.oracle is not None:
        extra["max_defect"] = worst
        print(f"max_defect={fmt(worst)}", file=sys.stderr)
    _emit(rc, header, rows, extra)
    return EXIT_OK


def cmd_verify(suite: str, seed: int, out: str | None, fixture: str | None) -> int:
    report = suites.run_suite(suite, seed=seed, fixture=fixture)
    doc = report.to_dict()
    doc["suite"] = suite
    doc["seed"] = seed
    text = json.dumps(doc, indent=1, sort_keys=True, default=float) + "\n"
    if out:
        Path(out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)
    for e in report.entries:
        print(f"{'PASS' if e.passed else 'FAIL'} {e.name}: {fmt(e.measured)} {e.relation} {fmt(e.bound)}",
              file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chanflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("profile", help="series vs closed-form velocity profile")
    p.add_argument("config")
    e = sub.add_parser("evolve", help="time evaluation, optionally against the oracle")
    e.add_argument("config")
    v = sub.add_parser("verify", help="run a verification battery")
    v.add_argument("--suite", required=True, choices=suites.SUITES)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None, help="report path (stdout if omitted)")
    v.add_argument("--fixture", default=None,
                   help="x3,U CSV profile added as a symmetry check (inequalities/all)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            if args.fixture is not None and not Path(args.fixture).is_file():
                print(f"chanflow: error: fixture not found: {args.fixture}", file=sys.stderr)
                return EXIT_USAGE
            return cmd_verify(args.suite, args.seed, args.out, args.fixture)
        rc = load(args.config)
        if args.command == "profile":
            return cmd_profile(rc)
        return cmd_evolve(rc)
    except ConfigError as exc:
        print(f"chanflow: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ChanflowError as exc:
        print(f"chanflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
