#!/usr/bin/env python3
"""
Command-line workflows: solve, timeouts, simulate, sweep and bench.
File: deadline_multipath/cli.py

Examples:
    python -m deadline_multipath solve --config scenarios/experiment1.json
    python -m deadline_multipath solve --config scenarios/experiment1.json --rate-mbps 140
    python -m deadline_multipath timeouts --config scenarios/experiment2.json
    python -m deadline_multipath simulate --config scenarios/experiment2.json --runs 10 --jobs 4
    python -m deadline_multipath sweep --config scenarios/experiment1.json --axis lambda \\
        --values 10,20,40,60,80,100,120,140 --csv sweep.csv
    python -m deadline_multipath bench --n-max 5 --m-max 3 --repeats 100

Exit codes: 0 ok, 1 configuration error, 2 infeasible, 3 solver failure.
CSV files always carry a header row; times are in seconds and rates in bits/s.
"""

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from deadline_multipath.config import MBPS, MS, ScenarioConfig, load_scenario
from deadline_multipath.delay_models import FixedDelay
from deadline_multipath.errors import MultipathError, ScenarioError, SolverError
from deadline_multipath.lp import best_single_path_quality, time_solve
from deadline_multipath.model import (
    Network, PathSpec, SolveStatus, Workload, augment_blackhole, build_quality_lp,
    evaluate_coefficients, format_combination,
)
from deadline_multipath.scheduler import DENOMINATOR_CAP
from deadline_multipath.sim import (
    SimReport, fan_out, plan_sender, report_header, run, sensitivity_points,
)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3

SWEEP_AXES = ("lambda", "delta", "bandwidth_err", "delay_err", "loss_err")


def format_share(value: float, cap: int = DENOMINATOR_CAP) -> str:
    """Exact-looking rational when one with denominator <= cap matches, else decimals."""
    fraction = Fraction(float(value)).limit_denominator(cap)
    if abs(float(fraction) - value) <= 1e-9:
        return str(fraction)
    return f"{value:.6f}"


def setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(message)s", datefmt="[%X]", force=True,
                        handlers=[RichHandler(console=Console(stderr=True), show_path=False)])


def _write_csv(path: Optional[str], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    if not path:
        return
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    logger.info("wrote %s", path)


def _load(args: argparse.Namespace) -> ScenarioConfig:
    config = load_scenario(args.config)
    rate = args.rate_mbps * MBPS if getattr(args, "rate_mbps", None) is not None else None
    lifetime = args.lifetime_ms * MS if getattr(args, "lifetime_ms", None) is not None else None
    return config.with_overrides(seed=args.seed, attempts=args.attempts,
                                 rate_bits_per_s=rate, lifetime_s=lifetime)


def _plan(config: ScenarioConfig, min_quality: Optional[float] = None):
    return plan_sender(config.true_network(), config.workload, config.padding(),
                       config.guard_s, config.timeout_mode, min_quality)


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def cmd_solve(args: argparse.Namespace, console: Console) -> int:
    config = _load(args)
    min_quality = args.min_quality if args.minimize_cost else None
    if args.minimize_cost and min_quality is None:
        raise ScenarioError("--minimize-cost needs --min-quality")
    plan = _plan(config, min_quality)
    solution = plan.solution
    if not solution.is_optimal:
        console.print(f"[bold red]LP {solution.status.value}[/bold red]")
        return EXIT_INFEASIBLE if solution.status == SolveStatus.INFEASIBLE else EXIT_SOLVER

    q, rates, cost = evaluate_coefficients(plan.coefficients, solution.x)
    if min_quality is None and abs(q - solution.objective_value) > 1e-6:
        logger.warning("re-evaluated quality %.9f differs from the LP objective %.9f",
                       q, solution.objective_value)

    table = Table(title="Assignment x (combinations with non-zero share)")
    table.add_column("combination")
    table.add_column("x", justify="right")
    rows = []
    for index, combo in enumerate(plan.model.combinations()):
        share = float(solution.x[index])
        name = format_combination(combo)
        rows.append(("x", name, f"{share:.12g}"))
        if share > 1e-12:
            table.add_row(name, format_share(share))
    console.print(table)

    summary = Table(title="Metrics")
    summary.add_column("metric")
    summary.add_column("value", justify="right")
    summary.add_row("quality Q", f"{q * 100:.4f}%  ({format_share(q)})")
    summary.add_row("cost C", f"{cost:.6g}")
    for path in plan.model.real_path_indices():
        summary.add_row(f"S_{path}", f"{rates[path] / MBPS:.4f} Mbps")
    console.print(summary)

    rows.append(("metric", "quality", f"{q:.12g}"))
    rows.append(("metric", "cost", f"{cost:.12g}"))
    rows.extend(("sent_rate_bps", str(path), f"{rates[path]:.12g}") for path in range(plan.model.n))
    _write_csv(args.csv, ("kind", "name", "value"), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# timeouts
# ---------------------------------------------------------------------------

def cmd_timeouts(args: argparse.Namespace, console: Console) -> int:
    config = _load(args)
    plan = _plan(config)
    table = Table(title=f"Retransmission timeouts ({config.timeout_mode})")
    for name in ("i", "j", "plateau [ms]", "chosen [ms]", "objective"):
        table.add_column(name, justify="right")
    rows = []
    for choice in plan.timeouts.rows():
        if choice.feasible:
            table.add_row(str(choice.i), str(choice.j),
                          f"{choice.t_lo / MS:.1f} .. {choice.t_hi / MS:.1f}",
                          f"{choice.t_chosen / MS:.1f}",
                          "-" if math.isnan(choice.objective) else f"{choice.objective:.6f}")
        else:
            table.add_row(str(choice.i), str(choice.j), "infeasible", "-", f"{choice.objective:.2e}")
        rows.append((choice.i, choice.j, "feasible" if choice.feasible else "infeasible",
                     f"{choice.t_lo:.6f}", f"{choice.t_chosen:.6f}", f"{choice.t_hi:.6f}",
                     f"{choice.objective:.9g}"))
    console.print(table)
    _write_csv(args.csv, ("i", "j", "status", "t_lo_s", "t_chosen_s", "t_hi_s", "objective"), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _simulate_seed(task) -> SimReport:
    config, seed = task
    plan = _plan(config)
    if not plan.solution.is_optimal:
        raise ScenarioError(f"cannot simulate: LP {plan.solution.status.value}")
    return run(config.true_network(), config.workload, plan.solution, plan.timeouts,
               seed=seed, total_packets=config.total_packets,
               channel_options=config.channel_options())


def cmd_simulate(args: argparse.Namespace, console: Console) -> int:
    config = _load(args)
    if args.packets is not None:
        config = replace(config, total_packets=args.packets)
    seeds = [config.seed + k for k in range(args.runs)]
    reports: List[SimReport] = fan_out(_simulate_seed, [(config, seed) for seed in seeds], args.jobs)

    table = Table(title="Simulation")
    for name in ("seed", "generated", "in time", "quality", "mean latency [ms]", "duplicates"):
        table.add_column(name, justify="right")
    for seed, report in zip(seeds, reports):
        latency = report.latency_samples.mean() / MS if report.latency_samples.size else math.nan
        table.add_row(str(seed), str(report.generated), str(report.delivered_in_time),
                      f"{report.realized_quality * 100:.3f}%", f"{latency:.1f}",
                      str(report.duplicates))
    console.print(table)
    if reports:
        mean_delivered = float(np.mean([report.delivered_in_time for report in reports]))
        console.print(f"mean delivered in time: {mean_delivered:.1f}")
    _write_csv(args.csv, report_header(config.true_network()),
               (report.csv_row(seed) for seed, report in zip(seeds, reports)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _scenario_point(task):
    config, value, simulate = task
    plan = _plan(config)
    if not plan.solution.is_optimal:
        return value, 0.0, 0.0 if simulate else math.nan, 0.0
    simulated = math.nan
    if simulate:
        report = run(config.true_network(), config.workload, plan.solution, plan.timeouts,
                     seed=config.seed, total_packets=config.total_packets,
                     channel_options=config.channel_options())
        simulated = report.realized_quality
    single = best_single_path_quality(plan.model, config.workload, plan.problem)
    return value, plan.solution.objective_value, simulated, single


def _parse_values(text: str) -> List[float]:
    if not text.strip():
        return []
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise ScenarioError(f"--values must be comma-separated numbers: {exc}") from exc


def _parse_paths(text: Optional[str]) -> Optional[List[int]]:
    if not text:
        return None
    try:
        paths = [int(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise ScenarioError(f"--paths must be comma-separated path indices: {exc}") from exc
    if any(path < 1 for path in paths):
        raise ScenarioError("--paths uses 1-based path indices")
    return paths


def cmd_sweep(args: argparse.Namespace, console: Console) -> int:
    config = _load(args)
    values = _parse_values(args.values)
    simulate = not args.no_sim
    if args.axis in ("lambda", "delta"):
        tasks = []
        for value in values:
            if args.axis == "lambda":
                point = config.with_overrides(rate_bits_per_s=value * MBPS)
            else:
                point = config.with_overrides(lifetime_s=value * MS)
            tasks.append((point, value, simulate))
        results = fan_out(_scenario_point, tasks, args.jobs)
    else:
        axis = args.axis[:-len("_err")]
        points = sensitivity_points(
            config.true_network(), config.workload, axis, values, seed=config.seed,
            total_packets=config.total_packets if simulate else 0,
            padding_s=config.padding(), guard_s=config.guard_s,
            timeout_mode=config.timeout_mode, paths=_parse_paths(args.paths),
            channel_options=config.channel_options(), jobs=args.jobs)
        results = [(p.value, p.theoretical_q, p.simulated_q if simulate else math.nan,
                    p.single_path_best_q) for p in points]

    table = Table(title=f"Sweep over {args.axis}")
    for name in ("value", "theoretical Q", "simulated Q", "single-path best Q"):
        table.add_column(name, justify="right")
    for value, theoretical, simulated, single in results:
        table.add_row(f"{value:g}", f"{theoretical * 100:.3f}%",
                      "-" if math.isnan(simulated) else f"{simulated * 100:.3f}%",
                      f"{single * 100:.3f}%")
    console.print(table)
    _write_csv(args.csv, ("value", "theoretical_q", "simulated_q", "single_path_best_q"),
               ((f"{v:g}", f"{t:.9f}", "" if math.isnan(s) else f"{s:.9f}", f"{b:.9f}")
                for v, t, s, b in results))
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def bench_network(n: int, attempts: int, workload: Workload, seed: int = 0) -> Network:
    """Blackhole plus n - 1 random fixed-delay paths."""
    rng = np.random.default_rng(seed)
    paths = tuple(
        PathSpec(bandwidth_bits_per_s=float(rng.uniform(0.2, 1.0)) * workload.rate_bits_per_s,
                 delay=FixedDelay(float(rng.uniform(0.05, 0.5))),
                 loss_prob=float(rng.uniform(0.0, 0.3)),
                 cost_per_bit=float(rng.uniform(0.0, 1.0)))
        for _ in range(n - 1)
    )
    return augment_blackhole(Network(paths=paths, attempts=attempts), workload)


def run_bench(n_max: int, m_max: int, repeats: int, seed: int = 0) -> List[tuple]:
    """(n, m, variables, repeats, mean seconds) for n = 2..n_max, m = 1..m_max.

    Times grow with the n ** m variables only roughly: for small programs the
    fixed cost of building the tableau outweighs the pivots.
    """
    if n_max < 2 or m_max < 1 or repeats < 1:
        raise ScenarioError("bench needs n_max >= 2, m_max >= 1 and repeats >= 1")
    workload = Workload(rate_bits_per_s=90 * MBPS, lifetime_s=0.8)
    rows = []
    for n in range(2, n_max + 1):
        for m in range(1, m_max + 1):
            net = bench_network(n, m, workload, seed)
            problem = build_quality_lp(net, workload)
            rows.append((n, m, problem.variable_count, repeats, time_solve(problem, repeats)))
    return rows


def cmd_bench(args: argparse.Namespace, console: Console) -> int:
    rows = run_bench(args.n_max, args.m_max, args.repeats, args.seed or 0)
    table = Table(title="LP solve time")
    for name in ("n", "m", "variables", "mean [us]"):
        table.add_column(name, justify="right")
    for n, m, variables, _, seconds in rows:
        table.add_row(str(n), str(m), str(variables), f"{seconds * 1e6:.1f}")
    console.print(table)
    _write_csv(args.csv, ("n", "m", "variables", "repeats", "mean_solve_s"),
               ((n, m, v, r, f"{s:.9f}") for n, m, v, r, s in rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--csv", default=None, help="write machine-readable results here")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    scenario = argparse.ArgumentParser(add_help=False, parents=[common])
    scenario.add_argument("--config", required=True, help="scenario JSON document")
    scenario.add_argument("--attempts", type=int, default=None, help="transmissions per datum")
    scenario.add_argument("--rate-mbps", type=float, default=None, help="override lambda")
    scenario.add_argument("--lifetime-ms", type=float, default=None, help="override delta")

    parser = argparse.ArgumentParser(prog="deadline_multipath",
                                     description="Deadline-aware multipath planning and simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", parents=[scenario], help="solve the quality (or cost) LP")
    solve.add_argument("--minimize-cost", action="store_true", help="solve the cost LP instead")
    solve.add_argument("--min-quality", type=float, default=None, help="quality floor for --minimize-cost")
    solve.set_defaults(handler=cmd_solve)

    timeouts = sub.add_parser("timeouts", parents=[scenario], help="retransmission timeout table")
    timeouts.set_defaults(handler=cmd_timeouts)

    simulate = sub.add_parser("simulate", parents=[scenario], help="simulate the chosen assignment")
    simulate.add_argument("--runs", type=int, default=1, help="consecutive seeds to simulate")
    simulate.add_argument("--packets", type=int, default=None, help="override total_packets")
    simulate.set_defaults(handler=cmd_simulate)

    sweep = sub.add_parser("sweep", parents=[scenario], help="theory vs simulation over one axis")
    sweep.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sweep.add_argument("--values", required=True, help="comma-separated values or factors")
    sweep.add_argument("--paths", default=None, help="paths the estimation error applies to (1-based)")
    sweep.add_argument("--no-sim", action="store_true", help="theoretical columns only")
    sweep.set_defaults(handler=cmd_sweep)

    bench = sub.add_parser("bench", parents=[common], help="time the LP solver")
    bench.add_argument("--n-max", type=int, default=5, help="largest path count, blackhole included")
    bench.add_argument("--m-max", type=int, default=3, help="largest attempt count")
    bench.add_argument("--repeats", type=int, default=100)
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None, console: Optional[Console] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    console = console or Console()
    try:
        return args.handler(args, console)
    except ScenarioError as exc:
        console.print(f"[bold red]configuration error:[/bold red] {exc}")
        return EXIT_CONFIG
    except SolverError as exc:
        console.print(f"[bold red]solver error:[/bold red] {exc}")
        return EXIT_SOLVER
    except MultipathError as exc:
        console.print(f"[bold red]error:[/bold red] {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

# End of file #
