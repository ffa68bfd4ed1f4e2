"""Command-line entry point: run, sweep, analyze and report subcommands."""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, parse_config, parse_value
from .harness import analyze_snapshots, load_summaries, run_experiment
from .variation import STANDARDIZERS

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


def _print_report(report):
    cfg = report.config
    print(f"method={cfg.method} standardizer={cfg.standardizer} "
          f"buffer={cfg.buffer_capacity} seeds={len(cfg.seeds)}")
    print(f"  ACC = {report.acc_mean:.4f} +- {report.acc_half:.4f}")
    print(f"  FR  = {report.fr_mean:.4f} +- {report.fr_half:.4f}")
    print(f"  wall clock: {report.wall_clock_seconds:.2f}s, artifacts in {cfg.outdir}")
    for failure in report.failures:
        print(f"  seed {failure['seed']} FAILED: {failure['error']}")


def cmd_run(args):
    config = parse_config(args.config)
    report = run_experiment(config)
    _print_report(report)
    return EXIT_RUNTIME_ERROR if report.failures else EXIT_OK


def cmd_sweep(args):
    config = parse_config(args.config)
    if "=" not in args.vary:
        raise ConfigError("--vary expects key=value1,value2,...")
    key, raw_values = args.vary.split("=", 1)
    key = key.strip()
    values = [v.strip() for v in raw_values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--vary needs at least one value")
    base_outdir = Path(config.outdir)
    status = EXIT_OK
    for value in values:
        parsed = parse_value(key, value)
        variant = replace(config, **{key: parsed,
                                     "outdir": str(base_outdir / f"{key}_{value}")})
        variant.validate()
        report = run_experiment(variant)
        print(f"[sweep {key}={value}]")
        _print_report(report)
        if report.failures:
            status = EXIT_RUNTIME_ERROR
    return status


def cmd_analyze(args):
    written = analyze_snapshots(args.snapshots, standardizer=args.standardizer)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_report(args):
    summaries = load_summaries(args.dir)
    if not summaries:
        print(f"no summary.json found under {args.dir}")
        return EXIT_RUNTIME_ERROR
    for path, summary in summaries:
        acc_part, fr_part = summary["acc"], summary["fr"]
        print(f"{path.parent}: method={summary['method']} "
              f"ACC={acc_part['mean']:.4f}+-{acc_part['ci95_half']:.4f} "
              f"FR={fr_part['mean']:.4f}+-{fr_part['ci95_half']:.4f}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pvbf",
        description="Online continual-learning experiments on small task streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment config")
    run_p.add_argument("--config", required=True, help="path to a key=value config file")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a config once per value of one key")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--vary", required=True, metavar="KEY=V1,V2,...",
                         help="config key and comma-separated values to sweep")
    sweep_p.set_defaults(func=cmd_sweep)

    analyze_p = sub.add_parser("analyze", help="variation diagnostics from saved snapshots")
    analyze_p.add_argument("--snapshots", required=True,
                           help="directory containing snapshot_task<k>.npz files")
    analyze_p.add_argument("--standardizer", default="RR", choices=STANDARDIZERS)
    analyze_p.set_defaults(func=cmd_analyze)

    report_p = sub.add_parser("report", help="print summaries found in a directory")
    report_p.add_argument("--dir", required=True)
    report_p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
