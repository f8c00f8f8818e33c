"""Trace-based cycle simulation for statically scheduled hardware designs.

The flow has two decoupled halves: `miniir.execute` runs a functional
model once and records what happened (which blocks ran, in what order,
with which FIFO/AXI transfers), and `engine.Analysis` replays that trace
against the design's static schedules to produce cycle counts, stall
attribution, FIFO sizing and deadlock diagnoses — repeatably, under any
FIFO depth configuration, without touching the functional model again.
"""

from .design import Design, DesignError, design_from_json, design_to_json, load_design
from .engine import Analysis, AnalysisError, ConfigError, SimConfig, config_from_json
from .miniir import ExecError, execute, load_program, program_from_json
from .report import build_report, render_json, render_text
from .resolve import ResolutionError, resolve_tree
from .trace import (
    TraceError,
    build_call_tree,
    format_flat_trace,
    parse_flat_trace,
)

__all__ = [
    "Analysis",
    "AnalysisError",
    "ConfigError",
    "Design",
    "DesignError",
    "ExecError",
    "ResolutionError",
    "SimConfig",
    "TraceError",
    "build_call_tree",
    "build_report",
    "config_from_json",
    "design_from_json",
    "design_to_json",
    "execute",
    "format_flat_trace",
    "load_design",
    "load_program",
    "parse_flat_trace",
    "program_from_json",
    "render_json",
    "render_text",
    "resolve_tree",
]

__version__ = "0.1.0"
