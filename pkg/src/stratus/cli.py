"""Command line interface: run, sweep and validate subcommands.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .metrics import render_csv, render_sweep_csv, render_table, summary_lines
from .scenario import ScenarioError, parse_scenario, resolve_config_path, run_scenario, sweep

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stratus",
                                     description="Deterministic cloud datacenter simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario and print its report")
    run_p.add_argument("--config", required=True,
                       help="scenario file or bundled name (scenario_a, scenario_b, sweep_base)")
    run_p.add_argument("--format", choices=("table", "csv"), default=None,
                       help="output format (default: scenario setting, then table)")
    run_p.add_argument("--output", default=None, help="write the report here instead of stdout")
    run_p.add_argument("--trace", default=None, help="write a tab-separated event trace here")

    sweep_p = sub.add_parser("sweep", help="run one simulation per VM count")
    sweep_p.add_argument("--config", required=True, help="base scenario file or bundled name")
    sweep_p.add_argument("--vms", required=True, metavar="LO..HI",
                         help="inclusive VM count range, e.g. 1..20")
    sweep_p.add_argument("--output", default=None, help="write the sweep CSV here")

    val_p = sub.add_parser("validate", help="check a scenario file and exit")
    val_p.add_argument("--config", required=True, help="scenario file or bundled name")
    return parser


def _parse_range(text: str) -> range:
    try:
        lo_text, hi_text = text.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
    except ValueError:
        raise ScenarioError(f"vms: expected LO..HI, got {text!r}")
    if lo < 1 or hi < lo:
        raise ScenarioError(f"vms: expected a nonempty positive range, got {text!r}")
    return range(lo, hi + 1)


def _load(config_arg: str):
    return parse_scenario(resolve_config_path(config_arg))


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _cmd_run(args) -> int:
    config = _load(args.config)
    fmt = args.format or config.outputs.format
    if args.output is None:
        args.output = dict(config.outputs.paths).get(fmt)
    trace_file = None
    trace = None
    if args.trace is not None:
        trace_file = open(args.trace, "w", encoding="utf-8")
        trace = lambda line: trace_file.write(line + "\n")
    try:
        report = run_scenario(config, trace=trace)
    finally:
        if trace_file is not None:
            trace_file.close()
    if fmt == "table":
        _emit(render_table(report), args.output)
    else:
        _emit(render_csv(report), args.output)
        # keep the CSV stream clean: summary goes to stderr, or stdout
        # when the records went to a file
        summary = "\n".join(summary_lines(report)) + "\n"
        (sys.stdout if args.output else sys.stderr).write(summary)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _load(args.config)
    counts = _parse_range(args.vms)
    rows = sweep(config, counts)
    _emit(render_sweep_csv(rows), args.output)
    return EXIT_OK


def _cmd_validate(args) -> int:
    _load(args.config)
    print(f"{args.config}: OK")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.exception("run failed")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
