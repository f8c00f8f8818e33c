"""Design description: static block schedules plus FIFO/AXI declarations.

A design file captures everything the timing analysis needs to know about a
compiled design: per-function basic block schedules (instruction stages and
terminator stage), pipeline regions with their initiation intervals, dataflow
region metadata, and the FIFO / AXI port declarations shared with the
functional model.  The file format is JSON with an explicit ``format_version``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

FORMAT_VERSION = 1

FIFO_IO_KINDS = frozenset({"fifo_read", "fifo_write"})
AXI_IO_KINDS = frozenset(
    {"axi_readreq", "axi_read", "axi_writereq", "axi_write", "axi_writeresp"}
)
IO_KINDS = FIFO_IO_KINDS | AXI_IO_KINDS | {"subcall"}

VALID_BEAT_BYTES = (1, 2, 4, 8, 16, 32, 64, 128)


class DesignError(ValueError):
    """A design file is malformed or fails validation."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class IoOp:
    """One side-effecting instruction of a basic block, in program order.

    ``resource`` is a FIFO id, an AXI port id, or a callee function name
    depending on ``kind``.  ``end_stage`` is only meaningful for sub-calls
    whose call instruction spans more than one stage; it defaults to the
    instruction's own stage.
    """

    instr: int
    kind: str
    resource: int | str
    end_stage: int | None = None


@dataclass(frozen=True)
class BasicBlockSched:
    bb_id: int
    instr_stages: tuple[tuple[int, int], ...]  # (instr_id, static stage)
    terminator_stage: int
    io_ops: tuple[IoOp, ...] = ()
    declared_start: int | None = None

    @property
    def static_end(self) -> int:
        return self.terminator_stage

    # The derived stage facts are pure functions of the frozen fields and
    # get hit once per trace block visit, so they are cached (writing the
    # cache into __dict__ sidesteps the frozen setattr guard).
    @cached_property
    def static_start(self) -> int:
        if self.declared_start is not None:
            return self.declared_start
        stages = [s for _, s in self.instr_stages]
        stages.append(self.terminator_stage)
        return min(stages)

    @cached_property
    def out_of_order(self) -> bool:
        # A block may begin at a stage later than its terminator's; the
        # dynamic schedule then visits the declared start first.
        return self.static_start > self.static_end

    @cached_property
    def stage_set(self) -> frozenset[int]:
        stages = {s for _, s in self.instr_stages}
        stages.add(self.terminator_stage)
        return frozenset(stages)

    @cached_property
    def span(self) -> int:
        if not self.out_of_order:
            return self.static_end - self.static_start + 1
        return len(self.stage_set)

    def stage_of(self, instr: int) -> int:
        for iid, stage in self.instr_stages:
            if iid == instr:
                return stage
        raise KeyError(instr)


@dataclass(frozen=True)
class PipelineRegion:
    bb_ids: frozenset[int]
    ii: int


@dataclass(frozen=True)
class DataflowProcess:
    proc_id: int
    instr: int  # the sub-call instruction implementing this process
    scalar_inputs: tuple[int, ...]
    channel_inputs: tuple[int, ...]
    scalar_outputs: bool
    has_outputs: bool


@dataclass(frozen=True)
class DataflowRegion:
    processes: tuple[DataflowProcess, ...]


@dataclass(frozen=True)
class FunctionSchedule:
    name: str
    blocks: tuple[BasicBlockSched, ...]
    pipelines: tuple[PipelineRegion, ...] = ()
    dataflow: DataflowRegion | None = None

    def block(self, bb_id: int) -> BasicBlockSched:
        return self.blocks[bb_id]

    def pipeline_of(self, bb_id: int) -> PipelineRegion | None:
        for region in self.pipelines:
            if bb_id in region.bb_ids:
                return region
        return None


@dataclass(frozen=True)
class FifoDecl:
    fifo_id: int
    name: str
    depth: int | None  # None means unbounded


@dataclass(frozen=True)
class AxiPortDecl:
    port_id: int
    name: str
    beat_bytes: int
    latency: int


@dataclass(frozen=True)
class Design:
    top: str
    functions: dict[str, FunctionSchedule]
    fifos: tuple[FifoDecl, ...] = ()
    axi_ports: tuple[AxiPortDecl, ...] = ()

    def fifo(self, fifo_id: int) -> FifoDecl:
        for decl in self.fifos:
            if decl.fifo_id == fifo_id:
                return decl
        raise KeyError(fifo_id)

    def port(self, port_id: int) -> AxiPortDecl:
        for decl in self.axi_ports:
            if decl.port_id == port_id:
                return decl
        raise KeyError(port_id)


_IO_RESOURCE_KEY = {"subcall": "callee"}
for _k in FIFO_IO_KINDS:
    _IO_RESOURCE_KEY[_k] = "fifo"
for _k in AXI_IO_KINDS:
    _IO_RESOURCE_KEY[_k] = "port"


def _io_op_from_json(obj: dict) -> IoOp:
    kind = obj.get("kind")
    if kind not in IO_KINDS:
        raise DesignError([f"unknown io op kind {kind!r}"])
    resource = obj.get(_IO_RESOURCE_KEY[kind])
    if resource is None:
        raise DesignError([f"io op {obj!r} missing {_IO_RESOURCE_KEY[kind]!r}"])
    return IoOp(
        instr=int(obj["instr"]),
        kind=kind,
        resource=resource,
        end_stage=obj.get("end_stage"),
    )


def _io_op_to_json(op: IoOp) -> dict:
    out: dict = {"instr": op.instr, "kind": op.kind, _IO_RESOURCE_KEY[op.kind]: op.resource}
    if op.end_stage is not None:
        out["end_stage"] = op.end_stage
    return out


def design_from_json(obj: dict) -> Design:
    if not isinstance(obj, dict):
        raise DesignError(["design file must contain a JSON object"])
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise DesignError([f"unsupported format_version {version!r}"])

    fifos = tuple(
        FifoDecl(
            fifo_id=int(f["id"]),
            name=str(f.get("name", f"fifo{f['id']}")),
            depth=None if f.get("depth") == "unbounded" else int(f.get("depth", 2)),
        )
        for f in obj.get("fifos", ())
    )
    ports = tuple(
        AxiPortDecl(
            port_id=int(p["id"]),
            name=str(p.get("name", f"port{p['id']}")),
            beat_bytes=int(p.get("beat_bytes", 8)),
            latency=int(p.get("latency", 1)),
        )
        for p in obj.get("axi_ports", ())
    )

    functions: dict[str, FunctionSchedule] = {}
    for name, fobj in obj.get("functions", {}).items():
        blocks = []
        for bobj in fobj.get("blocks", ()):
            blocks.append(
                BasicBlockSched(
                    bb_id=int(bobj["id"]),
                    instr_stages=tuple(
                        (int(i), int(s)) for i, s in bobj.get("instr_stages", ())
                    ),
                    terminator_stage=int(bobj["terminator_stage"]),
                    io_ops=tuple(_io_op_from_json(o) for o in bobj.get("io_ops", ())),
                    declared_start=bobj.get("static_start"),
                )
            )
        pipelines = tuple(
            PipelineRegion(bb_ids=frozenset(int(b) for b in p["blocks"]), ii=int(p["ii"]))
            for p in fobj.get("pipelines", ())
        )
        dataflow = None
        if "dataflow" in fobj and fobj["dataflow"] is not None:
            dataflow = DataflowRegion(
                processes=tuple(
                    DataflowProcess(
                        proc_id=int(p["id"]),
                        instr=int(p["instr"]),
                        scalar_inputs=tuple(int(x) for x in p.get("scalar_inputs", ())),
                        channel_inputs=tuple(int(x) for x in p.get("channel_inputs", ())),
                        scalar_outputs=bool(p.get("scalar_outputs", False)),
                        has_outputs=bool(p.get("has_outputs", True)),
                    )
                    for p in fobj["dataflow"].get("processes", ())
                )
            )
        functions[name] = FunctionSchedule(
            name=name, blocks=tuple(blocks), pipelines=pipelines, dataflow=dataflow
        )

    design = Design(
        top=obj.get("top", ""), functions=functions, fifos=fifos, axi_ports=ports
    )
    violations = validate_design(design)
    if violations:
        raise DesignError(violations)
    return design


def design_to_json(design: Design) -> dict:
    functions: dict[str, dict] = {}
    for name, fsched in design.functions.items():
        fobj: dict = {
            "blocks": [
                {
                    "id": b.bb_id,
                    "instr_stages": [list(pair) for pair in b.instr_stages],
                    "terminator_stage": b.terminator_stage,
                    **({"static_start": b.declared_start} if b.declared_start is not None else {}),
                    "io_ops": [_io_op_to_json(o) for o in b.io_ops],
                }
                for b in fsched.blocks
            ]
        }
        if fsched.pipelines:
            fobj["pipelines"] = [
                {"blocks": sorted(p.bb_ids), "ii": p.ii} for p in fsched.pipelines
            ]
        if fsched.dataflow is not None:
            fobj["dataflow"] = {
                "processes": [
                    {
                        "id": p.proc_id,
                        "instr": p.instr,
                        "scalar_inputs": list(p.scalar_inputs),
                        "channel_inputs": list(p.channel_inputs),
                        "scalar_outputs": p.scalar_outputs,
                        "has_outputs": p.has_outputs,
                    }
                    for p in fsched.dataflow.processes
                ]
            }
        functions[name] = fobj
    return {
        "format_version": FORMAT_VERSION,
        "top": design.top,
        "fifos": [
            {
                "id": f.fifo_id,
                "name": f.name,
                "depth": "unbounded" if f.depth is None else f.depth,
            }
            for f in design.fifos
        ],
        "axi_ports": [
            {"id": p.port_id, "name": p.name, "beat_bytes": p.beat_bytes, "latency": p.latency}
            for p in design.axi_ports
        ],
        "functions": functions,
    }


def validate_design(design: Design) -> list[str]:
    """Collect every invariant violation; an empty list means valid."""
    bad: list[str] = []

    fifo_ids = set()
    for decl in design.fifos:
        if decl.fifo_id in fifo_ids:
            bad.append(f"duplicate fifo id {decl.fifo_id}")
        fifo_ids.add(decl.fifo_id)
        if decl.depth is not None and decl.depth < 1:
            bad.append(f"fifo {decl.fifo_id} depth must be >= 1 or unbounded")

    port_ids = set()
    for decl in design.axi_ports:
        if decl.port_id in port_ids:
            bad.append(f"duplicate axi port id {decl.port_id}")
        port_ids.add(decl.port_id)
        if decl.beat_bytes not in VALID_BEAT_BYTES:
            bad.append(f"axi port {decl.port_id} beat_bytes {decl.beat_bytes} invalid")
        if decl.latency < 1:
            bad.append(f"axi port {decl.port_id} declared latency must be >= 1")

    if design.top not in design.functions:
        bad.append(f"top function {design.top!r} is not defined")

    for name, fsched in design.functions.items():
        for idx, block in enumerate(fsched.blocks):
            where = f"{name} bb {block.bb_id}"
            if block.bb_id != idx:
                bad.append(f"{name}: block ids must be dense, found {block.bb_id} at {idx}")
            if block.terminator_stage < 1:
                bad.append(f"{where}: terminator stage must be >= 1")
            instr_map: dict[int, int] = {}
            for iid, stage in block.instr_stages:
                if stage < 1:
                    bad.append(f"{where}: instr {iid} stage must be >= 1")
                if iid in instr_map:
                    bad.append(f"{where}: duplicate instr id {iid}")
                instr_map[iid] = stage
            if block.declared_start is not None and block.declared_start not in block.stage_set:
                bad.append(
                    f"{where}: static_start {block.declared_start} is not one of the block's stages"
                )
            if block.span < 1:
                bad.append(f"{where}: span must be >= 1")
            for op in block.io_ops:
                if op.instr not in instr_map:
                    bad.append(f"{where}: io op instr {op.instr} has no scheduled stage")
                if op.kind in FIFO_IO_KINDS and op.resource not in fifo_ids:
                    bad.append(f"{where}: instr {op.instr} references undeclared fifo {op.resource}")
                elif op.kind in AXI_IO_KINDS and op.resource not in port_ids:
                    bad.append(f"{where}: instr {op.instr} references undeclared axi port {op.resource}")
                elif op.kind == "subcall":
                    if op.resource not in design.functions:
                        bad.append(f"{where}: instr {op.instr} calls undefined function {op.resource!r}")
                if op.end_stage is not None:
                    if op.kind != "subcall":
                        bad.append(f"{where}: end_stage only applies to sub-calls (instr {op.instr})")
                    elif op.end_stage < 1:
                        bad.append(f"{where}: instr {op.instr} end_stage must be >= 1")

        seen_in_pipeline: set[int] = set()
        block_count = len(fsched.blocks)
        for region in fsched.pipelines:
            if region.ii < 1:
                bad.append(f"{name}: pipeline ii must be >= 1")
            for bb in region.bb_ids:
                if bb < 0 or bb >= block_count:
                    bad.append(f"{name}: pipeline references unknown bb {bb}")
                if bb in seen_in_pipeline:
                    # Nested or overlapping pipeline regions are rejected
                    # outright; one block belongs to at most one region.
                    bad.append(f"{name}: bb {bb} appears in more than one pipeline region")
                seen_in_pipeline.add(bb)

        if fsched.dataflow is not None:
            procs = fsched.dataflow.processes
            proc_ids = set()
            call_instrs = {
                op.instr
                for block in fsched.blocks
                for op in block.io_ops
                if op.kind == "subcall"
            }
            for proc in procs:
                if proc.proc_id in proc_ids:
                    bad.append(f"{name}: duplicate dataflow process id {proc.proc_id}")
                proc_ids.add(proc.proc_id)
                if proc.instr not in call_instrs:
                    bad.append(
                        f"{name}: dataflow process {proc.proc_id} has no matching sub-call instr {proc.instr}"
                    )
                if proc.scalar_outputs and not proc.has_outputs:
                    bad.append(f"{name}: dataflow process {proc.proc_id} scalar_outputs without outputs")
            for proc in procs:
                for ref in (*proc.scalar_inputs, *proc.channel_inputs):
                    if ref not in proc_ids:
                        bad.append(
                            f"{name}: dataflow process {proc.proc_id} references unknown process {ref}"
                        )
                    if ref == proc.proc_id:
                        bad.append(f"{name}: dataflow process {proc.proc_id} depends on itself")
            # Every sub-call in a dataflow function must be one of its processes;
            # mixing plain calls into a dataflow region is not supported.
            proc_instrs = {p.instr for p in procs}
            for extra in call_instrs - proc_instrs:
                bad.append(f"{name}: sub-call instr {extra} is not a dataflow process")

    return bad


def load_design(path: str) -> Design:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DesignError([f"invalid JSON: {exc}"]) from exc
    return design_from_json(obj)


def save_design(design: Design, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(design_to_json(design), fh, indent=2, sort_keys=True)
        fh.write("\n")
