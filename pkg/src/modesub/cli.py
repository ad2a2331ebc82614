"""Command-line interface.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
failure (every scan point failed), 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, load_config, resolve, schema
from .dispersion import list_presets, preset_by_name
from .scan import (gaussian_table_rows, run_scan, write_condition_summary,
                   write_gaussian_table, write_kernel_csv, write_modes_csv)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _load(args) -> RunConfig:
    if args.config is None:
        return resolve({})
    return load_config(args.config)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON configuration file (defaults apply when omitted)")
    parser.add_argument("--output-dir", type=Path, default=None,
                        help="override the configured output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for scans")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="table output format where supported")


def cmd_preset(args) -> int:
    if args.action == "list":
        for name in list_presets():
            p = preset_by_name(name)
            print(f"{name}: kp_s={p.kp_s:.4f} fs/um, kp_c={p.kp_c:.4f} fs/um, "
                  f"rho={p.rho:.5f} rad, phi={p.phi:+.5f} rad, "
                  f"theta_pm={p.theta_pm:.5f} rad")
    return EXIT_OK


def cmd_config(args) -> int:
    if args.schema:
        print(json.dumps(schema(), indent=2))
        return EXIT_OK
    config = _load(args)
    print(json.dumps(config.resolved, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_kernel(args) -> int:
    config = _load(args)
    path = write_kernel_csv(config, args.output_dir)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_schmidt(args) -> int:
    config = _load(args)
    path = write_modes_csv(config, args.output_dir)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_scan(args) -> int:
    config = _load(args)
    try:
        paths = run_scan(config, args.output_dir, n_threads=args.threads)
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in paths.values():
        print(f"wrote {path}")
    return EXIT_OK


def cmd_gaussian(args) -> int:
    config = _load(args)
    if args.output_dir is not None or config.outputs:
        path = write_gaussian_table(config, args.output_dir, fmt=args.format)
        print(f"wrote {path}")
        return EXIT_OK
    rows = gaussian_table_rows(config)
    if args.format == "json":
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    columns = list(rows[0].keys())
    widths = {c: max(len(c), 12) for c in columns}
    print("  ".join(c.ljust(widths[c]) for c in columns))
    for row in rows:
        print("  ".join(f"{row[c]:<{widths[c]}.6g}" if row[c] is not None else ""
                        for c in columns))
    return EXIT_OK


def cmd_subtract(args) -> int:
    config = _load(args)
    paths = write_condition_summary(config, args.output_dir)
    for path in paths.values():
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modesub",
        description="Mode-selective photon subtraction via non-collinear "
                    "sum-frequency generation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="crystal preset utilities")
    p.add_argument("action", choices=("list",))
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("config", help="validate/print configuration")
    p.add_argument("--schema", action="store_true",
                   help="print the config schema with defaults")
    _common_flags(p)
    p.set_defaults(func=cmd_config)

    for name, func, help_text in (
            ("kernel", cmd_kernel, "build the transfer kernel and dump it as CSV"),
            ("schmidt", cmd_schmidt, "decompose the kernel and dump subtraction modes"),
            ("scan", cmd_scan, "run the configured Schmidt-number sweep"),
            ("gaussian", cmd_gaussian, "analytic-model summary table"),
            ("subtract", cmd_subtract, "conditioned-state summary and overlap matrix")):
        p = sub.add_parser(name, help=help_text)
        _common_flags(p)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
