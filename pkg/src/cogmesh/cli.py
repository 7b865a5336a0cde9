"""Command line front end.

``cogmesh assign`` solves one instance with a chosen algorithm, optionally
sweeping the channel count or the PU idle probability, and emits one CSV
row per (sweep point, SU) with analytic and optional simulated throughput.
``cogmesh compare`` runs every algorithm on one instance and prints a
summary table.  Runs are deterministic: repeating an invocation with the
same flags and seed reproduces the output byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .assignment import (
    DEFAULT_BRUTE_BITS,
    AssignmentOutcome,
    assign_nonoverlapping,
    assign_overlapping,
    brute_force,
)
from .analytics import total_throughput
from .enumeration import DEFAULT_STATE_CAP
from .errors import CogmeshError, SearchSpaceError
from .mac import DEFAULT_TIMING, MacTiming, overhead, select_window
from .model import (
    NetworkInstance,
    load_instance,
    with_homogeneous_idle,
    with_num_channels,
)
from .simulator import SimConfig, run_simulation, trace_lines

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "CompareRow",
    "run_experiment",
    "compare_algorithms",
    "main",
]

ALGORITHMS = ("alg1", "alg2", "brute", "brute-overlap")

CSV_HEADER = (
    "sweep_value",
    "algorithm",
    "su_id",
    "analytic_throughput",
    "sim_throughput",
    "min_throughput",
    "window",
    "delta",
)

SWEEP_VARS = ("num_channels", "pu_idle_prob")


@dataclass(frozen=True)
class ExperimentSpec:
    """One ``assign`` invocation, fully resolved."""

    instance: NetworkInstance
    algorithm: str
    epsilon: float = 0.03
    cycles: int = 0
    seed: int = 0
    sweep_var: Optional[str] = None
    sweep_tokens: tuple[str, ...] = ()
    timing: MacTiming = DEFAULT_TIMING
    record_trace: bool = False
    max_bits: int = DEFAULT_BRUTE_BITS
    max_states: int = DEFAULT_STATE_CAP


@dataclass(frozen=True)
class ResultRow:
    sweep_value: str
    algorithm: str
    su_id: int
    analytic_throughput: float
    sim_throughput: Optional[float]
    min_throughput: float
    window: int
    delta: float


@dataclass(frozen=True)
class CompareRow:
    algorithm: str
    min_analytic: float
    min_sim: Optional[float]
    wall_time: float
    iterations: int
    evaluations: int


def _solve(instance: NetworkInstance, spec: ExperimentSpec) -> AssignmentOutcome:
    if spec.algorithm == "alg1":
        return assign_nonoverlapping(instance)
    if spec.algorithm == "alg2":
        return assign_overlapping(
            instance,
            epsilon=spec.epsilon,
            timing=spec.timing,
            max_states=spec.max_states,
        )
    if spec.algorithm == "brute":
        return brute_force(instance, max_bits=spec.max_bits, max_states=spec.max_states)
    if spec.algorithm == "brute-overlap":
        return brute_force(
            instance,
            overlap_allowed=True,
            max_bits=spec.max_bits,
            max_states=spec.max_states,
        )
    raise ValueError(f"unknown algorithm {spec.algorithm!r}")


def _sweep_points(spec: ExperimentSpec) -> list[tuple[str, NetworkInstance]]:
    if spec.sweep_var is None:
        return [("", spec.instance)]
    points = []
    for token in spec.sweep_tokens:
        if spec.sweep_var == "num_channels":
            points.append((token, with_num_channels(spec.instance, int(token))))
        else:
            points.append((token, with_homogeneous_idle(spec.instance, float(token))))
    return points


def _run_point(
    spec: ExperimentSpec, value: str, instance: NetworkInstance
) -> tuple[list[ResultRow], list[str]]:
    outcome = _solve(instance, spec)
    sized = select_window(
        instance, outcome.assignment, spec.epsilon, max_states=spec.max_states
    )
    window = sized.global_window
    delta = overhead(window, spec.timing)
    analytic = [
        total_throughput(su, outcome.assignment, instance, delta, max_states=spec.max_states)
        for su in range(instance.num_sus)
    ]
    min_t = min(analytic)
    sim = None
    trace_out: list[str] = []
    if spec.cycles > 0:
        report = run_simulation(
            instance,
            outcome.assignment,
            SimConfig(
                cycles=spec.cycles,
                seed=spec.seed,
                window=window,
                timing=spec.timing,
                record_trace=spec.record_trace,
            ),
        )
        sim = report.per_su_throughput
        if spec.record_trace:
            trace_out.extend(trace_lines(report))
    rows = [
        ResultRow(
            sweep_value=value,
            algorithm=spec.algorithm,
            su_id=su,
            analytic_throughput=analytic[su],
            sim_throughput=None if sim is None else sim[su],
            min_throughput=min_t,
            window=window,
            delta=delta,
        )
        for su in range(instance.num_sus)
    ]
    return rows, trace_out


def run_experiment(spec: ExperimentSpec) -> tuple[list[ResultRow], list[str]]:
    """Execute one assign invocation; returns CSV rows and any trace lines.

    Sweep points are independent, so they run on a worker pool; results are
    buffered and emitted in sweep order, keeping the output deterministic.
    """
    points = _sweep_points(spec)
    rows: list[ResultRow] = []
    trace_out: list[str] = []
    if len(points) == 1:
        batches = [_run_point(spec, *points[0])]
    else:
        with ThreadPoolExecutor(max_workers=min(len(points), os.cpu_count() or 1)) as pool:
            futures = [pool.submit(_run_point, spec, value, inst) for value, inst in points]
            batches = [f.result() for f in futures]
    for point_rows, point_trace in batches:
        rows.extend(point_rows)
        trace_out.extend(point_trace)
    return rows, trace_out


def write_rows(rows: list[ResultRow], handle) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            (
                row.sweep_value,
                row.algorithm,
                row.su_id,
                repr(row.analytic_throughput),
                "" if row.sim_throughput is None else repr(row.sim_throughput),
                repr(row.min_throughput),
                row.window,
                repr(row.delta),
            )
        )


def compare_algorithms(
    instance: NetworkInstance,
    epsilon: float,
    cycles: int,
    seed: int,
    *,
    timing: MacTiming = DEFAULT_TIMING,
    max_bits: int = DEFAULT_BRUTE_BITS,
    max_states: int = DEFAULT_STATE_CAP,
) -> list[CompareRow]:
    """Run every algorithm on one instance and summarize the results.

    Brute-force entries are skipped with a warning when the instance
    exceeds the search guard; the heuristics always run.
    """
    out: list[CompareRow] = []
    for algorithm in ALGORITHMS:
        spec = ExperimentSpec(
            instance=instance,
            algorithm=algorithm,
            epsilon=epsilon,
            cycles=cycles,
            seed=seed,
            timing=timing,
            max_bits=max_bits,
            max_states=max_states,
        )
        start = time.perf_counter()
        try:
            outcome = _solve(instance, spec)
        except SearchSpaceError as exc:
            warnings.warn(f"{algorithm} skipped: {exc}")
            continue
        wall = time.perf_counter() - start
        sized = select_window(instance, outcome.assignment, epsilon, max_states=max_states)
        delta = overhead(sized.global_window, timing)
        analytic = [
            total_throughput(su, outcome.assignment, instance, delta, max_states=max_states)
            for su in range(instance.num_sus)
        ]
        min_sim = None
        if cycles > 0:
            report = run_simulation(
                instance,
                outcome.assignment,
                SimConfig(cycles=cycles, seed=seed, window=sized.global_window, timing=timing),
            )
            min_sim = min(report.per_su_throughput)
        out.append(
            CompareRow(
                algorithm=algorithm,
                min_analytic=min(analytic),
                min_sim=min_sim,
                wall_time=wall,
                iterations=outcome.iterations,
                evaluations=outcome.evaluations,
            )
        )
    return out


def _print_compare(rows: list[CompareRow], handle) -> None:
    header = f"{'algorithm':<14} {'min_analytic':>13} {'min_sim':>10} {'wall_s':>8} {'iters':>7} {'evals':>9}"
    print(header, file=handle)
    print("-" * len(header), file=handle)
    for r in rows:
        sim = f"{r.min_sim:.4f}" if r.min_sim is not None else "-"
        print(
            f"{r.algorithm:<14} {r.min_analytic:>13.6f} {sim:>10} {r.wall_time:>8.2f} "
            f"{r.iterations:>7} {r.evaluations:>9}",
            file=handle,
        )


def _parse_sweep(text: str):
    if "=" not in text:
        raise ValueError("expected VAR=v1,v2,...")
    var, _, values = text.partition("=")
    if var not in SWEEP_VARS:
        raise ValueError(f"sweep variable must be one of {SWEEP_VARS}, got {var!r}")
    tokens = tuple(tok.strip() for tok in values.split(",") if tok.strip())
    if not tokens:
        raise ValueError("sweep needs at least one value")
    for tok in tokens:
        if var == "num_channels":
            int(tok)
        else:
            float(tok)
    return var, tokens


def _timing_from_args(args) -> MacTiming:
    return MacTiming(
        slot_time=args.slot_time,
        t_rts=args.t_rts,
        t_cts=args.t_cts,
        t_sifs=args.t_sifs,
        t_sen=args.t_sen,
        t_syn=args.t_syn,
        t_cycle=args.t_cycle,
    )


def _add_timing_flags(parser) -> None:
    group = parser.add_argument_group("MAC timing overrides (seconds)")
    group.add_argument("--slot-time", type=float, default=DEFAULT_TIMING.slot_time)
    group.add_argument("--t-rts", type=float, default=DEFAULT_TIMING.t_rts)
    group.add_argument("--t-cts", type=float, default=DEFAULT_TIMING.t_cts)
    group.add_argument("--t-sifs", type=float, default=DEFAULT_TIMING.t_sifs)
    group.add_argument("--t-sen", type=float, default=DEFAULT_TIMING.t_sen)
    group.add_argument("--t-syn", type=float, default=DEFAULT_TIMING.t_syn)
    group.add_argument("--t-cycle", type=float, default=DEFAULT_TIMING.t_cycle)


def _caps_from_env(parser) -> tuple[int, int]:
    raw = os.environ.get("COGMESH_CAP")
    if raw is None:
        return DEFAULT_BRUTE_BITS, DEFAULT_STATE_CAP
    try:
        exponent = int(raw)
        if exponent < 1:
            raise ValueError
    except ValueError:
        parser.error(f"COGMESH_CAP must be a positive integer exponent, got {raw!r}")
    return exponent, 1 << exponent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogmesh",
        description="Max-min fair channel assignment experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_assign = sub.add_parser("assign", help="solve one instance and emit CSV")
    p_assign.add_argument("--instance", required=True, help="instance JSON file")
    p_assign.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p_assign.add_argument("--epsilon", type=float, default=0.03, help="collision target")
    p_assign.add_argument("--cycles", type=int, default=0, help="simulation cycles (0 = skip)")
    p_assign.add_argument("--seed", type=int, default=0, help="simulation seed")
    p_assign.add_argument("--sweep", default=None, metavar="VAR=v1,v2,...",
                          help=f"sweep one of {SWEEP_VARS}")
    p_assign.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p_assign.add_argument("--trace", default=None, help="per-cycle TSV trace path")
    _add_timing_flags(p_assign)

    p_cmp = sub.add_parser("compare", help="run all algorithms on one instance")
    p_cmp.add_argument("--instance", required=True)
    p_cmp.add_argument("--epsilon", type=float, default=0.03)
    p_cmp.add_argument("--cycles", type=int, default=100000)
    p_cmp.add_argument("--seed", type=int, default=0)
    _add_timing_flags(p_cmp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    max_bits, max_states = _caps_from_env(parser)
    try:
        if args.command == "assign":
            sweep_var, sweep_tokens = None, ()
            if args.sweep is not None:
                try:
                    sweep_var, sweep_tokens = _parse_sweep(args.sweep)
                except ValueError as exc:
                    parser.error(f"bad --sweep: {exc}")
            if args.trace is not None and args.sweep is not None:
                parser.error("--trace cannot be combined with --sweep")
            if args.trace is not None and args.cycles <= 0:
                parser.error("--trace requires --cycles > 0")
            spec = ExperimentSpec(
                instance=load_instance(args.instance),
                algorithm=args.algorithm,
                epsilon=args.epsilon,
                cycles=args.cycles,
                seed=args.seed,
                sweep_var=sweep_var,
                sweep_tokens=sweep_tokens,
                timing=_timing_from_args(args),
                record_trace=args.trace is not None,
                max_bits=max_bits,
                max_states=max_states,
            )
            rows, trace = run_experiment(spec)
            if args.out is None or args.out == "-":
                write_rows(rows, sys.stdout)
            else:
                with open(args.out, "w", encoding="utf-8", newline="") as handle:
                    write_rows(rows, handle)
            if args.trace is not None:
                with open(args.trace, "w", encoding="utf-8") as handle:
                    for line in trace:
                        handle.write(line + "\n")
        else:
            instance = load_instance(args.instance)
            rows = compare_algorithms(
                instance,
                args.epsilon,
                args.cycles,
                args.seed,
                timing=_timing_from_args(args),
                max_bits=max_bits,
                max_states=max_states,
            )
            _print_compare(rows, sys.stdout)
    except (CogmeshError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
