import argparse
import logging
import math
import os
import traceback
from typing import List, Optional, Sequence

import numpy as np

from analytics.reports import (summary_lines, write_frame_csv, write_metrics_csv, write_plot, write_qps_csv,
                               write_utilization_csv)
from cli.experiment import ExperimentConfig, build_inputs, train_for
from config.settings import LoggingConfig, PathConfig, SchedulerConfig, SimulationConfig
from ingestion.fetch_log import read_fetch_log, write_fetch_log
from ingestion.trace_reader import ingest_trace, write_trace
from scheduler.audit import PlanAuditReport, audit_plan
from scheduler.planning import ADMISSION_MODES, build_plan_entries, select_top_requests
from scheduler.schedule import build_schedule, read_plan_csv
from scheduler.value_table import ValueTable
from simulation.ab_test import ArmTask, build_ab_tasks, day_deltas, run_tasks
from simulators.search_generator import generate_searches
from smartttl.ttl_table import TtlTable, build_ttl_table

logger = logging.getLogger(__name__)

DAY = SimulationConfig.SECONDS_PER_DAY


def _origin(exc: BaseException) -> str:
    """Dotted module name of the frame that raised ``exc``."""
    frames = traceback.extract_tb(exc.__traceback__)
    if not frames:
        return 'cli'
    path = os.path.relpath(frames[-1].filename, PathConfig.get_project_root())
    stem = os.path.splitext(path)[0]
    if stem.startswith('..'):
        return os.path.basename(stem)
    return stem.replace(os.sep, '.')


def _start_date(config_path: Optional[str]):
    return ExperimentConfig.from_file(config_path).workload.start_date


def _print_audit(report: PlanAuditReport):
    for line in report.summary_lines():
        print(line)


def cmd_gen_trace(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    seed = args.seed if args.seed is not None else config.workload.seed
    out = args.out or os.path.join(config.output_dir, f"trace_seed{seed}.csv")
    n = write_trace(generate_searches(config.workload.with_seed(seed), stream=args.stream), out, header=args.header)
    print(f"Wrote {n:,} searches to {out}")
    return 0


def cmd_build_ttl(args) -> int:
    start_date = _start_date(args.config)
    fetch_log = read_fetch_log(args.fetch_log)
    searches = list(ingest_trace(args.trace)) if args.trace else None
    table = build_ttl_table(fetch_log, searches, start_date=start_date)
    out = args.out or 'ttl_table.csv'
    table.write_csv(out)

    summary = table.objective_summary()
    assigned = summary.dropna(subset=['objective'])
    print(f"clusters: {len(table)} ({len(assigned)} assigned, {len(table) - len(assigned)} inherited)")
    if len(assigned):
        print(f"mean objective per search: {assigned['objective'].mean():.6f}")
        print(f"mean hit: {assigned['hit'].mean():.4f}, mean accuracy: {assigned['accuracy'].mean():.4f}")
        print(f"ttl range: {int(summary['ttl_seconds'].min())}..{int(summary['ttl_seconds'].max())} s")
    print(f"Wrote {out}")
    return 0


def cmd_build_schedule(args) -> int:
    if args.mu <= 0:
        raise ValueError(f"mu must be > 0, got {args.mu}")
    start_date = _start_date(args.config)
    ttl_table = TtlTable.read_csv(args.ttl_table, start_date=start_date)
    values = ValueTable.read_csv(args.value_table)
    day_start = args.day * DAY

    bookable = [it for it in values.itineraries() if it.lead_days(day_start, start_date) >= 0]
    entries = build_plan_entries(bookable, lambda it: ttl_table.ttl_for(it, day_start), values.values())
    per_second = args.mu - math.ceil(args.reserve * args.mu)
    if per_second <= 0:
        raise ValueError(f"reserve {args.reserve} leaves no planned budget out of mu {args.mu}")
    selected = select_top_requests(entries, per_second * DAY, args.admission)
    plan = build_schedule(selected, args.mu, capacity=np.full(DAY, per_second, dtype=np.int64))
    report = audit_plan(plan)

    out = args.out or 'plan.csv'
    plan.write_csv(out)
    audit_path = os.path.splitext(out)[0] + '_audit.txt'
    with open(audit_path, 'w') as handle:
        handle.write('\n'.join(report.summary_lines()) + '\n')
    _print_audit(report)
    print(f"Wrote {out} and {audit_path}")
    return 0 if report.ok else 1


def cmd_audit_plan(args) -> int:
    if args.mu <= 0:
        raise ValueError(f"mu must be > 0, got {args.mu}")
    ttl_table = TtlTable.read_csv(args.ttl_table, start_date=_start_date(args.config))
    day_start = args.day * DAY
    plan = read_plan_csv(args.plan, args.mu, lambda it: ttl_table.ttl_for(it, day_start))
    report = audit_plan(plan)
    _print_audit(report)
    return 0 if report.ok else 1


def _load_experiment(args) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config).with_overrides(args.seed, args.out, args.workers)
    config.validate()
    return config


def cmd_run(args) -> int:
    config = _load_experiment(args)
    tasks: List[ArmTask] = []
    for seed in config.seeds:
        inputs = build_inputs(config, seed)
        model = train_for(inputs) if any(p.needs_model for p in config.policies) else None
        for policy in config.policies:
            tasks.append(ArmTask(
                name=policy.to_text(), policy=policy, supplier_config=config.supplier, trace=inputs.trace,
                price_process=inputs.prices, seed=seed, booking_model=inputs.booking_model,
                ttl_table=model.ttl_table if model else None, value_table=model.value_table if model else None,
                horizon=inputs.horizon, record_utilization=True,
            ))
    results = run_tasks(tasks, config.workers)

    n = len(config.policies)
    for i, seed in enumerate(config.seeds):
        metrics = results[i * n:(i + 1) * n]
        write_metrics_csv(metrics, os.path.join(config.output_dir, f"metrics_seed{seed}.csv"))
        write_qps_csv(metrics, os.path.join(config.output_dir, f"qps_seed{seed}.csv"))
        write_utilization_csv(metrics, os.path.join(config.output_dir, f"utilization_seed{seed}.csv"))
        write_plot(metrics, config.output_dir, stem=f"run_seed{seed}", title=f"Policies, seed {seed}")
        print(f"seed {seed}")
        for line in summary_lines(metrics):
            print(f"  {line}")
    return 0


def cmd_ab(args) -> int:
    config = _load_experiment(args)
    tasks: List[ArmTask] = []
    for seed in config.seeds:
        inputs = build_inputs(config, seed)
        model = train_for(inputs) if any(p.needs_model for p in config.arms) else None
        tasks.extend(build_ab_tasks(inputs.trace, config.arms, config.supplier, inputs.prices, seed,
                                    inputs.booking_model, model, config.horizon_days, record_utilization=True))
    results = run_tasks(tasks, config.workers)

    for i, seed in enumerate(config.seeds):
        a, b = results[2 * i], results[2 * i + 1]
        write_metrics_csv([a, b], os.path.join(config.output_dir, f"ab_seed{seed}.csv"))
        write_frame_csv(day_deltas(a, b), os.path.join(config.output_dir, f"ab_deltas_seed{seed}.csv"))
        write_qps_csv([a, b], os.path.join(config.output_dir, f"ab_qps_seed{seed}.csv"))
        write_utilization_csv([a, b], os.path.join(config.output_dir, f"ab_utilization_seed{seed}.csv"))
        write_plot([a, b], config.output_dir, stem=f"ab_plot_seed{seed}",
                   title=f"{config.arms[0].to_text()} (A) vs {config.arms[1].to_text()} (B), seed {seed}")
        print(f"seed {seed}: bookings A {a.bookings:,} / B {b.bookings:,}, "
              f"hit A {a.hit_rate:.4f} / B {b.hit_rate:.4f}")
    return 0


def cmd_estimate(args) -> int:
    config = _load_experiment(args)
    for seed in config.seeds:
        model = train_for(build_inputs(config, seed))
        write_fetch_log(model.observations.fetch_log, os.path.join(config.output_dir, f"fetch_log_seed{seed}.csv"))
        model.ttl_table.write_csv(os.path.join(config.output_dir, f"ttl_table_seed{seed}.csv"))
        model.value_table.write_csv(os.path.join(config.output_dir, f"value_table_seed{seed}.csv"))
        print(f"seed {seed}: {len(model.observations.fetch_log):,} fetches, {len(model.ttl_table)} clusters, "
              f"{len(model.value_table):,} itineraries, global p_b {model.probabilities.global_p_b:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='KEY=value config file (defaults apply when omitted)')
    common.add_argument('--seed', type=int, help='run a single seed instead of the configured ones')
    common.add_argument('--out', help='output file or directory')
    common.add_argument('--verbose', action='store_true', help='debug logging')

    parser = argparse.ArgumentParser(prog='pricesim', description='Hotel price cache and fetch policy simulator')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('gen-trace', parents=[common], help='generate a synthetic search trace')
    p.add_argument('--stream', type=int, default=0, help='arrival stream (0 = evaluation, 1 = training)')
    p.add_argument('--header', action='store_true', help='write a header line')
    p.set_defaults(handler=cmd_gen_trace)

    p = sub.add_parser('build-ttl', parents=[common], help='assign per-cluster TTLs from a fetch log')
    p.add_argument('--fetch-log', required=True)
    p.add_argument('--trace', help='search trace for gap times (default: fetch timestamps)')
    p.set_defaults(handler=cmd_build_ttl)

    p = sub.add_parser('build-schedule', parents=[common], help='plan one day of aggressive fetches')
    p.add_argument('--ttl-table', required=True)
    p.add_argument('--value-table', required=True)
    p.add_argument('--mu', type=int, required=True, help='supplier QPS limit')
    p.add_argument('--day', type=int, default=0, help='simulation day the plan is for')
    p.add_argument('--admission', choices=ADMISSION_MODES, default=SchedulerConfig.ADMISSION)
    p.add_argument('--reserve', type=float, default=SchedulerConfig.RESERVE_PASSIVE_FRACTION,
                   help='fraction of each second kept for passive fetches')
    p.set_defaults(handler=cmd_build_schedule)

    p = sub.add_parser('audit-plan', parents=[common], help='audit a plan CSV')
    p.add_argument('--plan', required=True)
    p.add_argument('--ttl-table', required=True)
    p.add_argument('--mu', type=int, required=True)
    p.add_argument('--day', type=int, default=0)
    p.set_defaults(handler=cmd_audit_plan)

    for name, handler, text in (('run', cmd_run, 'simulate every configured policy on the full budget'),
                                ('ab', cmd_ab, 'A/B compare two policies on a 50/50 user split'),
                                ('estimate', cmd_estimate, 'training replay: fetch log, TTL table, value table')):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument('--workers', type=int, help='worker processes for independent runs')
        p.set_defaults(handler=handler)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else LoggingConfig.LEVEL,
                        format=LoggingConfig.FORMAT)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        return args.handler(args)
    except (ValueError, OSError, RuntimeError) as exc:
        logger.error(f"{_origin(exc)}: {exc}")
        return 1
