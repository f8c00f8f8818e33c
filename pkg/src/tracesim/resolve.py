"""Dynamic schedule resolution: map static block schedules onto a trace.

Each dynamic call is resolved independently.  Walking the call's blocks in
trace order, every block instance gets a dynamic start/end stage:

* ``delay = static_start(cur) - static_end(prev)``.  Outside pipelined
  regions a delay above 1 is clamped to 1 (the FSM skips empty stages);
  zero or negative delays are kept, meaning the block overlaps its
  predecessor.
* A block that begins a new loop iteration gets delay 1 outside pipelines;
  inside a pipelined region the unclamped delay plus the region's II.
* ``dynamic_end = dynamic_start + span - 1``.
* The first block of a call starts at its own static start stage.

Blocks inside pipelined regions are never clamped (a larger delay stands in
for a conditional block that did not execute).  On leaving a region, the
previous block's static and dynamic stages are replaced by the maxima seen
inside it so that post-loop blocks never overlap the pipeline.

A block whose declared start exceeds its terminator stage ("starts at a
later stage than it ends") is handled specially: its stage order wraps, its
span is the number of distinct stages it occupies, and events map through
that order.

Functions with a dataflow region have their process sub-call stages
recomputed from the process dependency graph before resolution.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import NamedTuple

from .design import BasicBlockSched, DataflowRegion, Design, FunctionSchedule
from .trace import CallTrace, TraceEntry


class ResolutionError(ValueError):
    pass


class ResolvedBlock(NamedTuple):
    bb_id: int
    static_start: int
    static_end: int
    span: int
    dynamic_start: int
    dynamic_end: int
    delay: int
    new_iteration: bool


class StagedEvent(NamedTuple):
    """One simulator-visible event of a call, placed on its dynamic stages.

    A tuple rather than a dataclass: a large trace makes millions of these.
    """

    kind: str  # fifo_read | fifo_write | axi_* | subcall
    stage: int
    resource: int | str
    line: int
    end_stage: int = 0  # sub-calls only: stage holding the caller until done
    child: CallTrace | None = None


@dataclass
class DynamicSchedule:
    path: str
    function: str
    first_stage: int
    last_stage: int
    blocks: list[ResolvedBlock]
    events: list[StagedEvent]

    @property
    def stage_count(self) -> int:
        return self.last_stage - self.first_stage + 1


class _IterationTracker:
    """Trace-order back-edge detection.

    The blocks of the current traversal are kept in first-seen order; seeing
    a block again means control jumped back to it, so it and everything seen
    after it start a fresh traversal.  This survives nested loops, where a
    plain seen-set reset would swallow the outer back edge.
    """

    def __init__(self) -> None:
        self._order: list[int] = []
        self._pos: dict[int, int] = {}

    def visit(self, bb_id: int) -> bool:
        pos = self._pos.get(bb_id)
        if pos is None:
            self._pos[bb_id] = len(self._order)
            self._order.append(bb_id)
            return False
        for dropped in self._order[pos:]:
            del self._pos[dropped]
        del self._order[pos:]
        self._pos[bb_id] = len(self._order)
        self._order.append(bb_id)
        return True


def recompute_dataflow_stages(region: DataflowRegion) -> dict[int, tuple[int, int]]:
    """Assign (start, end) stages to each dataflow process.

    Start stages: 0 for source processes; one past the latest scalar
    producer when any input is scalar; otherwise one past the earliest
    channel producer to start.  End stages: equal to the start for processes
    whose outputs are all scalar; every other process ends at the latest
    start stage among them (the region-wide synchronization point).
    """
    procs = {p.proc_id: p for p in region.processes}
    starts: dict[int, int] = {}
    ready_heap: list[tuple[int, int]] = []

    def push_if_ready(pid: int) -> None:
        proc = procs[pid]
        if pid in starts:
            return
        if proc.scalar_inputs:
            if all(s in starts for s in proc.scalar_inputs):
                heapq.heappush(
                    ready_heap, (1 + max(starts[s] for s in proc.scalar_inputs), pid)
                )
        elif proc.channel_inputs:
            known = [starts[c] for c in proc.channel_inputs if c in starts]
            if known:
                heapq.heappush(ready_heap, (1 + min(known), pid))
        else:
            heapq.heappush(ready_heap, (0, pid))

    for pid in procs:
        push_if_ready(pid)
    while ready_heap:
        stage, pid = heapq.heappop(ready_heap)
        if pid in starts:
            continue  # superseded by an earlier relaxation
        starts[pid] = stage
        for other in procs.values():
            if pid in other.scalar_inputs or pid in other.channel_inputs:
                push_if_ready(other.proc_id)

    unresolved = sorted(set(procs) - set(starts))
    if unresolved:
        raise ResolutionError(
            "dataflow processes "
            + ", ".join(str(p) for p in unresolved)
            + " never start (dead or cyclically dependent inputs)"
        )

    sync_members = [
        p.proc_id for p in region.processes if not (p.has_outputs and p.scalar_outputs)
    ]
    sync_end = max((starts[p] for p in sync_members), default=0)
    stages: dict[int, tuple[int, int]] = {}
    for proc in region.processes:
        if proc.has_outputs and proc.scalar_outputs:
            stages[proc.proc_id] = (starts[proc.proc_id], starts[proc.proc_id])
        else:
            stages[proc.proc_id] = (starts[proc.proc_id], sync_end)
    return stages


def _stage_offset(block: BasicBlockSched, static_stage: int) -> int:
    """Clamped offset of a static stage from the block's dynamic start."""
    if not block.out_of_order:
        off = static_stage - block.static_start
    else:
        order = sorted(s for s in block.stage_set if s >= block.static_start)
        order += sorted(s for s in block.stage_set if s < block.static_start)
        try:
            off = order.index(static_stage)
        except ValueError:
            off = 0
    return max(0, min(off, block.span - 1))


def _op_template(block: BasicBlockSched) -> list[tuple[str, int | str, int, int]]:
    """Per-op (kind, resource, start offset, end offset) for one static block.

    The mapping from an instruction's static stage to its offset within the
    block's dynamic stages does not depend on the trace, so it is computed
    once per block and reused for every visit.
    """
    out = []
    for op in block.io_ops:
        start = _stage_offset(block, block.stage_of(op.instr))
        if op.kind == "subcall" and op.end_stage is not None:
            end = max(start, _stage_offset(block, op.end_stage))
        else:
            end = start
        out.append((op.kind, op.resource, start, end))
    return out


def _block_events(
    fsched: FunctionSchedule,
    block: BasicBlockSched,
    template: list[tuple[str, int | str, int, int]],
    resolved: ResolvedBlock,
    instance,
) -> list[StagedEvent]:
    events = instance.events
    if len(template) != len(events):
        raise ResolutionError(
            f"{fsched.name} bb {block.bb_id}: trace has {len(events)} event(s) "
            f"but the schedule declares {len(template)}"
        )
    base = resolved.dynamic_start
    out: list[StagedEvent] = []
    for (kind, resource, start_off, end_off), ev in zip(template, events):
        if isinstance(ev, CallTrace):
            if kind != "subcall" or ev.function != resource:
                raise ResolutionError(
                    f"{fsched.name} bb {block.bb_id}: sub-call to {ev.function!r} "
                    f"does not match scheduled op {kind} {resource!r}"
                )
            line = ev.enter_entry.line if ev.enter_entry is not None else 0
            out.append(
                StagedEvent(
                    kind="subcall",
                    stage=base + start_off,
                    end_stage=base + end_off,
                    resource=resource,
                    line=line,
                    child=ev,
                )
            )
        else:
            if ev.kind != kind or ev.resource != resource:
                raise ResolutionError(
                    f"{fsched.name} bb {block.bb_id}: trace event {ev.kind} {ev.resource} "
                    f"does not match scheduled op {kind} {resource}"
                )
            out.append(StagedEvent(kind=kind, stage=base + start_off, resource=resource, line=ev.line))
    return out


def resolve_call(call: CallTrace, fsched: FunctionSchedule) -> DynamicSchedule:
    """Resolve the dynamic schedule of one call from its traced blocks."""
    if not call.blocks:
        raise ResolutionError(f"{call.path}: call executed no blocks")

    if fsched.dataflow is not None:
        return _resolve_dataflow_call(call, fsched)

    tracker = _IterationTracker()
    resolved: list[ResolvedBlock] = []
    events: list[StagedEvent] = []
    templates: dict[int, list] = {}

    prev_static_end = 0
    prev_dynamic_end = 0
    prev_region = None
    region_max_static = 0
    region_max_dynamic = 0

    for index, instance in enumerate(call.blocks):
        block = fsched.block(instance.bb_id)
        region = fsched.pipeline_of(instance.bb_id)
        new_iter = tracker.visit(instance.bb_id)

        if prev_region is not None and region is not prev_region:
            # First block after a pipelined region: compare against the
            # maxima seen inside it, and never overlap the pipeline.
            prev_static_end = region_max_static
            prev_dynamic_end = region_max_dynamic
            leaving_region = True
        else:
            leaving_region = False

        if index == 0:
            dynamic_start = block.static_start
            delay = dynamic_start - prev_dynamic_end
        else:
            delay = block.static_start - prev_static_end
            if region is None:
                if delay > 1:
                    delay = 1
                if new_iter:
                    delay = 1
            else:
                if new_iter:
                    delay += region.ii
            if leaving_region and delay < 1:
                delay = 1
            dynamic_start = prev_dynamic_end + delay

        span = block.span
        if span < 1:
            raise ResolutionError(
                f"{fsched.name} bb {block.bb_id}: negative span "
                f"({block.static_start}..{block.static_end})"
            )
        dynamic_end = dynamic_start + span - 1
        rb = ResolvedBlock(
            bb_id=instance.bb_id,
            static_start=block.static_start,
            static_end=block.static_end,
            span=span,
            dynamic_start=dynamic_start,
            dynamic_end=dynamic_end,
            delay=delay,
            new_iteration=new_iter,
        )
        resolved.append(rb)
        template = templates.get(instance.bb_id)
        if template is None:
            template = templates[instance.bb_id] = _op_template(block)
        events.extend(_block_events(fsched, block, template, rb, instance))

        if region is not None:
            if region is not prev_region:
                region_max_static = 0
                region_max_dynamic = 0
            region_max_static = max(region_max_static, block.static_end, block.static_start)
            region_max_dynamic = max(region_max_dynamic, dynamic_end)
        prev_region = region
        prev_static_end = block.static_end
        prev_dynamic_end = dynamic_end

    first_stage = resolved[0].dynamic_start
    last_stage = max(rb.dynamic_end for rb in resolved)
    return DynamicSchedule(
        path=call.path,
        function=call.function,
        first_stage=first_stage,
        last_stage=last_stage,
        blocks=resolved,
        events=events,
    )


def _resolve_dataflow_call(call: CallTrace, fsched: FunctionSchedule) -> DynamicSchedule:
    assert fsched.dataflow is not None
    proc_stages = recompute_dataflow_stages(fsched.dataflow)
    proc_by_instr = {p.instr: p for p in fsched.dataflow.processes}

    first_block = fsched.block(call.blocks[0].bb_id)
    base = first_block.static_start

    resolved: list[ResolvedBlock] = []
    events: list[StagedEvent] = []
    launched: set[int] = set()
    last_stage = base

    for instance in call.blocks:
        block = fsched.block(instance.bb_id)
        ops = block.io_ops
        if len(ops) != len(instance.events):
            raise ResolutionError(
                f"{fsched.name} bb {block.bb_id}: trace has {len(instance.events)} event(s) "
                f"but the schedule declares {len(ops)}"
            )
        for op, ev in zip(ops, instance.events):
            if not isinstance(ev, CallTrace) or op.kind != "subcall":
                raise ResolutionError(
                    f"{fsched.name}: dataflow region may only contain process sub-calls"
                )
            proc = proc_by_instr.get(op.instr)
            if proc is None:
                raise ResolutionError(
                    f"{fsched.name}: sub-call instr {op.instr} is not a dataflow process"
                )
            if proc.proc_id in launched:
                raise ResolutionError(
                    f"{fsched.name}: dataflow process {proc.proc_id} launched twice"
                )
            launched.add(proc.proc_id)
            start_rel, end_rel = proc_stages[proc.proc_id]
            start = base + start_rel
            end = base + end_rel
            last_stage = max(last_stage, end)
            line = ev.enter_entry.line if ev.enter_entry is not None else 0
            events.append(
                StagedEvent(
                    kind="subcall",
                    stage=start,
                    end_stage=end,
                    resource=op.resource,
                    line=line,
                    child=ev,
                )
            )
        resolved.append(
            ResolvedBlock(
                bb_id=instance.bb_id,
                static_start=block.static_start,
                static_end=block.static_end,
                span=block.span,
                dynamic_start=base,
                dynamic_end=last_stage,
                delay=0,
                new_iteration=False,
            )
        )

    missing = set(p.proc_id for p in fsched.dataflow.processes) - launched
    if missing:
        raise ResolutionError(
            f"{fsched.name}: dataflow process(es) {sorted(missing)} never launched in trace"
        )
    return DynamicSchedule(
        path=call.path,
        function=call.function,
        first_stage=base,
        last_stage=last_stage,
        blocks=resolved,
        events=events,
    )


def resolve_tree(root: CallTrace, design: Design) -> dict[str, DynamicSchedule]:
    """Resolve every call in the tree, keyed by call path."""
    schedules: dict[str, DynamicSchedule] = {}
    for node in root.walk():
        fsched = design.functions.get(node.function)
        if fsched is None:
            raise ResolutionError(f"{node.path}: function {node.function!r} not in design")
        schedules[node.path] = resolve_call(node, fsched)
    return schedules
