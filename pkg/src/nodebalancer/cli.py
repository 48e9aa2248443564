"""Command-line front end.

Exit codes: 0 on success, 1 on a scenario error or a failed event-log
verification, 2 on a runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .engine import apply_overrides, compare, load_scenario, run
from .errors import BalancingError, ScenarioInvalid
from .reporting import (
    compose_comparison,
    read_events,
    read_metrics,
    summarize,
    verify_event_log,
    write_events,
    write_metrics,
    write_summary,
)

EXIT_OK = 0
EXIT_SCENARIO = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nodebalancer",
        description="Deterministic simulator for threshold-driven node "
        "rebalancing across container-cluster groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario and write its artifacts")
    run_p.add_argument("--scenario", required=True, type=Path, help="scenario JSON file")
    run_p.add_argument("--out", required=True, type=Path, help="output directory")
    run_p.add_argument("--ticks", type=int, help="override the scenario's tick count")
    run_p.add_argument("--seed", type=int, help="override the scenario's seed")

    validate_p = sub.add_parser("validate", help="check a scenario file and exit")
    validate_p.add_argument("--scenario", required=True, type=Path)

    compare_p = sub.add_parser(
        "compare", help="run balanced and static variants and diff their summaries"
    )
    compare_p.add_argument("--scenario", required=True, type=Path)
    compare_p.add_argument("--out", required=True, type=Path)
    compare_p.add_argument("--ticks", type=int, help="override the scenario's tick count")
    compare_p.add_argument("--seed", type=int, help="override the scenario's seed")

    report_p = sub.add_parser(
        "report", help="recompute summary.json from existing logs and verify them"
    )
    report_p.add_argument("--out", required=True, type=Path, help="directory of a previous run")

    return parser


def _load(args) -> "object":
    scenario = load_scenario(args.scenario)
    return apply_overrides(
        scenario, ticks=getattr(args, "ticks", None), seed=getattr(args, "seed", None)
    )


def _write_run(artifacts, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_events(artifacts.events, out_dir / "events.jsonl")
    write_metrics(artifacts.tick_records, out_dir / "metrics.csv")
    write_summary(artifacts.summary, out_dir / "summary.json")


def _cmd_run(args) -> int:
    try:
        scenario = _load(args)
    except ScenarioInvalid as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    try:
        artifacts = run(scenario)
        _write_run(artifacts, args.out)
    except Exception as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    totals = artifacts.summary["totals"]
    print(
        f"wrote {args.out}: {totals['moves']} moves, {totals['reversals']} reversals, "
        f"{totals['pending_pod_ticks']} pending pod-ticks over "
        f"{artifacts.summary['ticks']} ticks"
    )
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioInvalid as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    print(
        f"{args.scenario}: valid ({len(scenario.clusters)} clusters, "
        f"{len(scenario.groups)} groups, {scenario.ticks} ticks)"
    )
    return EXIT_OK


def _cmd_compare(args) -> int:
    try:
        scenario = _load(args)
    except ScenarioInvalid as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    try:
        report = compare(scenario)
        args.out.mkdir(parents=True, exist_ok=True)
        _write_run(report.balanced, args.out / "balanced")
        _write_run(report.static, args.out / "static")
        write_summary(report.summary, args.out / "summary.json")
    except Exception as exc:
        print(f"compare failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    deltas = report.summary["deltas"]
    print(
        f"wrote {args.out}: pending pod-ticks {deltas['pending_pod_ticks']:+d} "
        f"versus static, {report.summary['balanced']['totals']['moves']} moves"
    )
    return EXIT_OK


def _rebuild_summary(run_dir: Path) -> int:
    events = read_events(run_dir / "events.jsonl")
    violations = verify_event_log(events)
    if violations:
        for violation in violations:
            print(f"{run_dir}: {violation}", file=sys.stderr)
        return EXIT_SCENARIO
    records = read_metrics(run_dir / "metrics.csv")
    write_summary(summarize(events, records), run_dir / "summary.json")
    return EXIT_OK


def _cmd_report(args) -> int:
    out: Path = args.out
    try:
        if (out / "events.jsonl").exists():
            status = _rebuild_summary(out)
            if status == EXIT_OK:
                print(f"verified {out}; summary.json rebuilt")
            return status
        balanced = out / "balanced"
        static = out / "static"
        if (balanced / "events.jsonl").exists() and (static / "events.jsonl").exists():
            for run_dir in (balanced, static):
                status = _rebuild_summary(run_dir)
                if status != EXIT_OK:
                    return status
            write_summary(
                compose_comparison(
                    summarize(
                        read_events(balanced / "events.jsonl"),
                        read_metrics(balanced / "metrics.csv"),
                    ),
                    summarize(
                        read_events(static / "events.jsonl"),
                        read_metrics(static / "metrics.csv"),
                    ),
                ),
                out / "summary.json",
            )
            print(f"verified {out}; summaries rebuilt")
            return EXIT_OK
        print(f"no run artifacts found under {out}", file=sys.stderr)
        return EXIT_RUNTIME
    except BalancingError as exc:
        print(f"report failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "compare": _cmd_compare,
        "report": _cmd_report,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
