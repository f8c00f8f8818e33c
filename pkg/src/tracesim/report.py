"""Simulation reports: nested per-call latencies plus FIFO sizing data.

A report always carries two runs' worth of information: the configured run
(actual latencies, observed FIFO occupancy, any deadlock) and an
all-FIFOs-unbounded run, which gives each call its stall-free latency
floor and each FIFO the smallest depth that removes all backpressure.

`render_json` is the only serializer; the CLI and the HTTP server both
emit its exact bytes so a report can be compared byte-for-byte no matter
where it came from.
"""

from __future__ import annotations

import json

from .engine import Analysis, RunResult, SimConfig

FORMAT_VERSION = 1


def build_report(analysis: Analysis, config: SimConfig) -> dict:
    actual = analysis.simulate(config)
    unbounded = analysis.simulate(config.all_unbounded(analysis.design))
    return assemble_report(analysis, config, actual, unbounded)


def assemble_report(
    analysis: Analysis,
    config: SimConfig,
    actual: RunResult,
    unbounded: RunResult,
) -> dict:
    design = analysis.design

    def node_for(path: str) -> dict:
        compiled = analysis.compiled[path]
        act = actual.nodes[path]
        unb = unbounded.nodes[path]
        latencies = [v for v in (unb.latency, act.latency) if v is not None]
        return {
            "path": path,
            "function": compiled.function,
            "start_cycle": act.start_cycle,
            "end_cycle": act.end_cycle,
            "latency": act.latency,
            "min_latency": min(latencies) if latencies else None,
            "children": [node_for(c) for c in compiled.children],
        }

    root = node_for(analysis.tree.path)

    fifos = []
    for decl in sorted(design.fifos, key=lambda d: d.fifo_id):
        depth = config.depth_of(design, decl.fifo_id)
        act_stats = actual.fifo_stats[decl.fifo_id]
        opt_stats = unbounded.fifo_stats[decl.fifo_id]
        fifos.append(
            {
                "id": decl.fifo_id,
                "name": decl.name,
                "depth": "unbounded" if depth is None else depth,
                "observed": act_stats.observed,
                "optimal": opt_stats.observed,
                "writes": act_stats.writes,
                "reads": act_stats.reads,
            }
        )

    ports = []
    for decl in sorted(design.axi_ports, key=lambda p: p.port_id):
        stats = actual.port_stats[decl.port_id]
        ports.append(
            {
                "id": decl.port_id,
                "name": decl.name,
                "requests": len(analysis.ports[decl.port_id].requests),
                "max_outstanding": stats["max_outstanding"],
            }
        )

    return {
        "format_version": FORMAT_VERSION,
        "top": analysis.tree.function,
        "total_latency": root["latency"],
        "min_total_latency": root["min_latency"],
        "deadlock": actual.deadlock,
        "tree": root,
        "fifos": fifos,
        "axi_ports": ports,
    }


def render_json(report: dict) -> bytes:
    """Canonical byte encoding; all outputs of a report go through here."""
    return (json.dumps(report, sort_keys=True, indent=2) + "\n").encode("utf-8")


def render_text(report: dict) -> str:
    lines: list[str] = []
    total = report["total_latency"]
    if report["deadlock"] is not None:
        lines.append("DEADLOCK detected")
        for entry in report["deadlock"]["blocked"]:
            lines.append(
                f"  {entry['call']} ({entry['function']}) blocked on {entry['kind']}"
                f" of {entry['resource_name']!r} at stage {entry['stage']}"
            )
        cycle = report["deadlock"].get("cycle")
        if cycle:
            ring = " -> ".join(c["call"] for c in cycle)
            lines.append(f"  wait cycle: {ring} -> {cycle[0]['call']}")
    else:
        lines.append(f"total latency: {total} cycles (stall-free minimum {report['min_total_latency']})")

    def walk(node: dict, indent: int) -> None:
        pad = "  " * indent
        if node["latency"] is None:
            lines.append(f"{pad}{node['function']}: did not finish")
        else:
            lines.append(
                f"{pad}{node['function']}: cycles {node['start_cycle']}..{node['end_cycle']}"
                f" latency {node['latency']} (min {node['min_latency']})"
            )
        for child in node["children"]:
            walk(child, indent + 1)

    lines.append("")
    walk(report["tree"], 0)

    if report["fifos"]:
        lines.append("")
        lines.append(f"{'fifo':<20} {'depth':>9} {'observed':>8} {'optimal':>7}")
        for row in report["fifos"]:
            lines.append(
                f"{row['name']:<20} {str(row['depth']):>9} {row['observed']:>8} {row['optimal']:>7}"
            )
    if report["axi_ports"]:
        lines.append("")
        for row in report["axi_ports"]:
            lines.append(
                f"axi {row['name']}: {row['requests']} requests,"
                f" max outstanding {row['max_outstanding']}"
            )
    return "\n".join(lines) + "\n"
