"""Command-line front end: ``hematodyn steady|chart|zk|simulate|sweep``."""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analysis, chareq, config, dde, emit, model
from .errors import ConfigError, IntegrationError

EXIT_OK, EXIT_CONFIG, EXIT_NO_POSITIVE, EXIT_NUMERICAL = 0, 2, 3, 4


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected S,N got {text!r}")
    return a, b


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def cmd_steady(cfg: config.RunConfig, args) -> int:
    p = cfg.params()
    b0 = p.beta.at_zero
    star = model.steady_positive(p)
    tau_bar = model.existence_threshold_tau_bar(p)
    reason = None
    if star is None:
        reason = "delta >= beta(0)" if p.delta >= b0 else "tau >= tau_bar"
    report = {
        "delta": p.delta,
        "tau": p.tau,
        "beta0": b0,
        "tau_bar": tau_bar,
        "existence_margin": p.net_factor * b0 - p.delta,
        "E0": {"S": 0.0, "N": 0.0},
        "E_star": None if star is None else {"S": star.S, "N": star.N},
        "reason": reason,
    }
    _write(emit.dumps(report), cfg.output.path)
    return EXIT_OK


def _zk_csv(p: model.ModelParams, k: int, grid: int, t_star: float) -> str:
    taus = chareq.scan_grid(t_star, grid)
    z = [chareq.z_k(p, k, t) for t in taus]
    return emit.csv_text(["tau", "z"], (taus, z))


def cmd_chart(cfg: config.RunConfig, args) -> int:
    p = cfg.params()
    t_bar = model.existence_threshold_tau_bar(p)
    tau_max = args.tau_max
    if tau_max is None:
        tau_max = math.ceil(1.05 * t_bar) if t_bar is not None else 1.0
    chart = chareq.build_chart(p, tau_max, grid=args.grid, k_max=args.k_max)
    _write(emit.dumps(emit.chart_to_dict(chart)), cfg.output.path)
    if chart.degenerate:
        print("no positive steady state for any delay: delta >= beta(0)", file=sys.stderr)
        return EXIT_NO_POSITIVE
    if args.zk_csv and chart.tau_star is not None:
        out = Path(args.zk_csv)
        out.mkdir(parents=True, exist_ok=True)
        n_branches = max([c.k for c in chart.crossings], default=0) + 2
        for k in range(n_branches):
            (out / f"z_{k}.csv").write_text(_zk_csv(p, k, args.grid, chart.tau_star))
    return EXIT_OK


def cmd_zk(cfg: config.RunConfig, args) -> int:
    p = cfg.params()
    t_star = chareq.tau_star(p)
    if t_star is None:
        print("Z_k undefined: no delay admits imaginary roots", file=sys.stderr)
        return EXIT_NO_POSITIVE
    _write(_zk_csv(p, args.k, args.grid, t_star), cfg.output.path)
    return EXIT_OK


def run_simulation(cfg: config.RunConfig, tau: float, hist: tuple[float, float]):
    p = cfg.params(tau)
    traj = dde.integrate(p, model.ConstantHistory(*hist), cfg.solver)
    summary = analysis.classify(
        traj, model.steady_states(p), window=cfg.analysis.window, tol=cfg.analysis.tol
    )
    return traj, summary


def _summary_dict(tau, summary):
    return {"tau": tau, **summary.to_dict()}


def cmd_simulate(cfg: config.RunConfig, args) -> int:
    tau = cfg.tau if cfg.tau is not None else 0.0
    traj, summary = run_simulation(cfg, tau, args.history)
    text = emit.dumps(_summary_dict(tau, summary))
    if cfg.output.path is not None:
        out = Path(cfg.output.path)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trajectory.csv").write_text(emit.trajectory_csv(traj, cfg.output.stride))
        (out / "summary.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _threads() -> int:
    env = os.environ.get("HEMATODYN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"HEMATODYN_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def sweep(cfg: config.RunConfig, taus: list[float], hist=(1.0, 1.0), workers: int | None = None):
    """Simulate every delay concurrently; results follow the input order."""
    for t in taus:
        cfg.params(t)

    def one(tau):
        return _summary_dict(tau, run_simulation(cfg, tau, hist)[1])

    with ThreadPoolExecutor(max_workers=workers or _threads()) as pool:
        return list(pool.map(one, taus))


def cmd_sweep(cfg: config.RunConfig, args) -> int:
    if not args.tau_list:
        raise ConfigError("--tau-list is empty")
    _write(emit.dumps(sweep(cfg, args.tau_list, args.history)), cfg.output.path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--delta", type=float)
    common.add_argument("--beta0", type=float)
    common.add_argument("--theta", type=float)
    common.add_argument("--n", type=float)
    common.add_argument("--tau", type=float)
    common.add_argument("--t-end", type=float)
    common.add_argument("--steps-per-delay", type=int)
    common.add_argument("--dt", type=float)
    common.add_argument("--window", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--stride", type=int)
    common.add_argument("--out", help="output file (directory for simulate)")

    parser = argparse.ArgumentParser(prog="hematodyn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("steady", parents=[common], help="steady states and existence threshold")

    ch = sub.add_parser("chart", parents=[common], help="stability chart with Hopf points")
    ch.add_argument("--tau-max", type=float)
    ch.add_argument("--grid", type=int, default=chareq.DEFAULT_GRID)
    ch.add_argument("--k-max", type=int, default=50)
    ch.add_argument("--zk-csv", help="directory for per-branch z_<k>.csv profiles")

    zk = sub.add_parser("zk", parents=[common], help="profile of one Z_k branch as CSV")
    zk.add_argument("--k", type=int, default=0)
    zk.add_argument("--grid", type=int, default=chareq.DEFAULT_GRID)

    sim = sub.add_parser("simulate", parents=[common], help="integrate from a constant history")
    sim.add_argument("--history", type=_pair, default=(1.0, 1.0), help="S,N")

    sw = sub.add_parser("sweep", parents=[common], help="simulate a list of delays")
    sw.add_argument("--tau-list", type=_float_list, required=True)
    sw.add_argument("--history", type=_pair, default=(1.0, 1.0), help="S,N")
    return parser


COMMANDS = {
    "steady": cmd_steady,
    "chart": cmd_chart,
    "zk": cmd_zk,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help
        return int(exc.code or 0)
    try:
        cfg = config.with_overrides(
            config.load(args.config),
            delta=args.delta,
            beta0=args.beta0,
            theta=args.theta,
            n=args.n,
            tau=args.tau,
            t_end=args.t_end,
            steps_per_delay=args.steps_per_delay,
            dt=args.dt,
            window=args.window,
            tol=args.tol,
            stride=args.stride,
            path=args.out,
        )
        if getattr(args, "history", None) is not None and min(args.history) < 0:
            raise ConfigError("history must be nonnegative")
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
