"""Command-line entry point: simulate, compare, ct-dump, check-gains."""

from __future__ import annotations

import argparse
import csv
import os
import sys

from .config import ConfigError, load_config
from .engine import (
    build_comparison_scenarios,
    compare,
    run,
    write_comparison_csv,
    write_events_csv,
    write_log_csv,
    write_metrics_json,
)
from .controllers import check_twisting_conditions
from .propeller import ThrustModel, ct_curve

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhauv-sim",
        description="Cross-medium multirotor simulator and controller toolbox",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario")
    p_sim.add_argument("--config", required=True, help="scenario YAML path")
    p_sim.add_argument("--out", required=True, help="output directory")

    p_cmp = sub.add_parser(
        "compare", help="run the 3-shape x 3-mode controller comparison"
    )
    p_cmp.add_argument("--config", required=True, help="base scenario YAML path")
    p_cmp.add_argument("--out", required=True, help="output directory")

    p_ct = sub.add_parser("ct-dump", help="export the thrust-coefficient curve")
    p_ct.add_argument("--min", type=float, required=True, help="first h, mm")
    p_ct.add_argument("--max", type=float, required=True, help="last h, mm")
    p_ct.add_argument("--n", type=int, required=True, help="sample count")
    p_ct.add_argument("--out", required=True, help="CSV output path")

    p_gains = sub.add_parser(
        "check-gains", help="report the twisting convergence-condition margins"
    )
    p_gains.add_argument("--config", required=True, help="scenario YAML path")

    return parser


def cmd_simulate(config_path: str, out_dir: str) -> int:
    scenario = load_config(config_path)
    os.makedirs(out_dir, exist_ok=True)
    result = run(scenario)
    write_log_csv(result.records, os.path.join(out_dir, "log.csv"))
    write_events_csv(result.events, os.path.join(out_dir, "events.csv"))
    write_metrics_json(result, os.path.join(out_dir, "metrics.json"))
    if result.diverged:
        print(
            f"run diverged at t={result.divergence_time:.6g} s; "
            f"partial log written to {out_dir}",
            file=sys.stderr,
        )
        return EXIT_DIVERGED
    print(f"wrote log.csv, events.csv, metrics.json to {out_dir}")
    return EXIT_OK


def cmd_compare(config_path: str, out_dir: str) -> int:
    base = load_config(config_path)
    os.makedirs(out_dir, exist_ok=True)
    scenarios = build_comparison_scenarios(base)
    results = compare(scenarios)
    for (shape, mode), res in sorted(results.items()):
        stem = f"{shape}_{mode}"
        write_log_csv(res.records, os.path.join(out_dir, f"{stem}_log.csv"))
        write_events_csv(res.events, os.path.join(out_dir, f"{stem}_events.csv"))
        write_metrics_json(res, os.path.join(out_dir, f"{stem}_metrics.json"))
        if res.diverged:
            print(f"{stem}: diverged at t={res.divergence_time:.6g} s",
                  file=sys.stderr)
    write_comparison_csv(results, os.path.join(out_dir, "comparison.csv"))
    print(f"wrote 9 run logs and comparison.csv to {out_dir}")
    return EXIT_OK


def cmd_ct_dump(h_min: float, h_max: float, n: int, out_path: str) -> int:
    samples = ct_curve(h_min, h_max, n, ThrustModel())
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["h_mm", "c_t"])
        for h, c_t in samples:
            writer.writerow([f"{h:.9g}", f"{c_t:.9g}"])
    print(f"wrote {n} samples to {out_path}")
    return EXIT_OK


def cmd_check_gains(config_path: str) -> int:
    scenario = load_config(config_path)
    report = check_twisting_conditions(scenario.twsmc_gains)
    status = "satisfied" if report.satisfied else "NOT satisfied"
    print(f"twisting convergence conditions: {status}")
    print(f"  dominant-branch margin: {report.margin_dominant:.9g}")
    print(f"  reaching margin:        {report.margin_reaching:.9g}")
    return EXIT_OK if report.satisfied else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out)
        if args.command == "compare":
            return cmd_compare(args.config, args.out)
        if args.command == "ct-dump":
            return cmd_ct_dump(args.min, args.max, args.n, args.out)
        if args.command == "check-gains":
            return cmd_check_gains(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
