"""Command-line front end.

Exit codes: 0 success, 1 usage/input error, 2 deadlock detected (the
report is still produced so the cycle can be inspected).
"""

from __future__ import annotations

import argparse
import json
import sys

from .design import DesignError, load_design
from .engine import Analysis, AnalysisError, ConfigError, SimConfig, load_config
from .miniir import DEFAULT_STEP_BUDGET, ExecError, load_program
from .pipeline import StageTimings, analyze_trace_text, trace_design
from .report import build_report, render_json, render_text
from .resolve import ResolutionError
from .trace import TraceError, format_flat_trace, parse_flat_trace


def _parse_args_list(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(piece.strip(), 0) for piece in text.split(",") if piece.strip()]
    except ValueError as exc:
        raise SystemExit(f"error: bad --args value: {exc}")


def _add_input_opts(parser: argparse.ArgumentParser, need_trace: bool) -> None:
    parser.add_argument("--design", required=True, help="design schedule JSON")
    if need_trace:
        parser.add_argument("--trace", help="previously recorded trace file")
        parser.add_argument("--program", help="functional model to run if no trace is given")
    else:
        parser.add_argument("--program", required=True, help="functional model JSON")
    parser.add_argument("--args", help="comma-separated integer arguments for the top function")
    parser.add_argument(
        "--step-budget",
        type=int,
        default=DEFAULT_STEP_BUDGET,
        help="abort the functional model after this many steps",
    )


def _load_analysis(args) -> tuple:
    design = load_design(args.design)
    if getattr(args, "trace", None):
        with open(args.trace, "r", encoding="utf-8") as fh:
            text = fh.read()
        analysis = analyze_trace_text(design, text)
    else:
        if not args.program:
            raise SystemExit("error: need --trace or --program")
        program = load_program(args.program)
        entries, _ = trace_design(
            design, program, entry_args=_parse_args_list(args.args), step_budget=args.step_budget
        )
        from .pipeline import analyze_entries

        analysis = analyze_entries(design, entries)
    config = (
        load_config(args.config, design) if getattr(args, "config", None) else SimConfig()
    )
    return design, analysis, config


def cmd_trace(args) -> int:
    design = load_design(args.design)
    program = load_program(args.program)
    entries, stats = trace_design(
        design, program, entry_args=_parse_args_list(args.args), step_budget=args.step_budget
    )
    text = format_flat_trace(entries)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(
        f"{stats.steps} steps, {stats.blocks} blocks, {stats.io_events} io events,"
        f" {stats.calls} calls",
        file=sys.stderr,
    )
    return 0


def cmd_analyze(args) -> int:
    design, analysis, config = _load_analysis(args)
    report = build_report(analysis, config)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(render_json(report))
    if args.json:
        sys.stdout.buffer.write(render_json(report))
    else:
        sys.stdout.write(render_text(report))
    return 2 if report["deadlock"] is not None else 0


def cmd_fifos(args) -> int:
    design, analysis, config = _load_analysis(args)
    report = build_report(analysis, config)
    rows = report["fifos"]
    print(f"{'id':>3} {'name':<20} {'depth':>9} {'observed':>8} {'optimal':>7}")
    for row in rows:
        print(
            f"{row['id']:>3} {row['name']:<20} {str(row['depth']):>9}"
            f" {row['observed']:>8} {row['optimal']:>7}"
        )
    if args.out:
        payload = {"fifos": rows, "format_version": report["format_version"]}
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 2 if report["deadlock"] is not None else 0


def cmd_serve(args) -> int:
    from .server import serve

    return serve(args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracesim",
        description="Trace-based cycle simulation for statically scheduled designs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="run the functional model and record a trace")
    _add_input_opts(p, need_trace=False)
    p.add_argument("--out", help="write the trace here instead of stdout")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("analyze", help="compute cycle counts and FIFO sizing")
    _add_input_opts(p, need_trace=True)
    p.add_argument("--config", help="simulation config JSON")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fifos", help="print FIFO depth usage and optimal depths")
    _add_input_opts(p, need_trace=True)
    p.add_argument("--config", help="simulation config JSON")
    p.add_argument("--out", help="also write the table as JSON")
    p.set_defaults(func=cmd_fifos)

    p = sub.add_parser("serve", help="serve reports over HTTP")
    _add_input_opts(p, need_trace=True)
    p.add_argument("--config", help="simulation config JSON")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DesignError, ConfigError, TraceError, ResolutionError, AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ExecError as exc:
        print(f"execution error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
