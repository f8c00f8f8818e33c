"""Orchestration of the two halves of a simulation with per-stage timing.

Stages, in order: loading (read design/program files), executing (run the
functional model to produce a trace), parsing (trace text to call tree),
resolving (static schedules to dynamic ones, event compilation),
simulating (stall calculation and report assembly).  A depth-only rerun
repeats just the last stage, which is the entire point of keeping the
first four cached.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .design import Design, load_design
from .engine import Analysis, SimConfig
from .miniir import DEFAULT_STEP_BUDGET, execute, load_program
from .report import build_report
from .resolve import resolve_tree
from .trace import build_call_tree, parse_flat_trace

STAGES = ("loading", "executing", "parsing", "resolving", "simulating")


@dataclass
class StageTimings:
    seconds: dict[str, float] = field(default_factory=dict)

    def time(self, stage: str):
        return _StageTimer(self, stage)

    def as_json(self) -> dict:
        return {stage: round(self.seconds[stage], 6) for stage in STAGES if stage in self.seconds}


class _StageTimer:
    def __init__(self, timings: StageTimings, stage: str):
        self.timings = timings
        self.stage = stage

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.timings.seconds[self.stage] = time.perf_counter() - self.t0
        return False


def trace_design(
    design: Design,
    program,
    entry_args=None,
    step_budget: int = DEFAULT_STEP_BUDGET,
    timings: StageTimings | None = None,
):
    timings = timings if timings is not None else StageTimings()
    with timings.time("executing"):
        entries, stats = execute(program, design, entry_args=entry_args, step_budget=step_budget)
    return entries, stats


def analyze_trace_text(
    design: Design, trace_text: str, timings: StageTimings | None = None
) -> Analysis:
    timings = timings if timings is not None else StageTimings()
    with timings.time("parsing"):
        entries = parse_flat_trace(trace_text)
        tree = build_call_tree(entries, design)
    with timings.time("resolving"):
        schedules = resolve_tree(tree, design)
        analysis = Analysis(design, tree=tree, schedules=schedules)
    return analysis


def analyze_entries(design: Design, entries, timings: StageTimings | None = None) -> Analysis:
    timings = timings if timings is not None else StageTimings()
    with timings.time("parsing"):
        tree = build_call_tree(entries, design)
    with timings.time("resolving"):
        schedules = resolve_tree(tree, design)
        analysis = Analysis(design, tree=tree, schedules=schedules)
    return analysis


def simulate_report(
    analysis: Analysis, config: SimConfig, timings: StageTimings | None = None
) -> dict:
    timings = timings if timings is not None else StageTimings()
    with timings.time("simulating"):
        report = build_report(analysis, config)
    return report


def load_inputs(design_path: str, program_path: str | None, timings: StageTimings | None = None):
    timings = timings if timings is not None else StageTimings()
    with timings.time("loading"):
        design = load_design(design_path)
        program = load_program(program_path) if program_path else None
    return design, program
