"""Mini-IR: a small block-structured program model and its tracing interpreter.

Stage 1 of the simulator runs the design's functional twin — a program whose
functions and basic blocks mirror the design — and records the execution
trace.  FIFOs are unbounded here (purely functional), AXI memory is a flat
byte-addressable space defaulting to zero, and execution is deterministic and
single-threaded.  Timing is entirely stage 2's business.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .design import Design
from .trace import TraceEntry

FORMAT_VERSION = 1
DEFAULT_STEP_BUDGET = 10**8


class ExecError(RuntimeError):
    pass


class FifoUnderflowError(ExecError):
    pass


class StepBudgetExceededError(ExecError):
    pass


@dataclass(frozen=True)
class MiniFunction:
    name: str
    params: tuple[str, ...]
    blocks: tuple[tuple[dict, ...], ...]


@dataclass(frozen=True)
class MiniProgram:
    functions: dict[str, MiniFunction]


@dataclass
class ExecStats:
    steps: int = 0
    blocks: int = 0
    io_events: int = 0
    calls: int = 0


_BINOPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: 0 if b == 0 else a // b,
    "mod": lambda a, b: 0 if b == 0 else a % b,
    "lt": lambda a, b: int(a < b),
    "le": lambda a, b: int(a <= b),
    "eq": lambda a, b: int(a == b),
    "ne": lambda a, b: int(a != b),
    "gt": lambda a, b: int(a > b),
    "ge": lambda a, b: int(a >= b),
    "and": lambda a, b: a & b,
    "or": lambda a, b: a | b,
    "xor": lambda a, b: a ^ b,
    "shl": lambda a, b: a << (b & 63),
    "shr": lambda a, b: a >> (b & 63),
    "min": min,
    "max": max,
}


def program_from_json(obj: dict) -> MiniProgram:
    if not isinstance(obj, dict):
        raise ExecError("program file must contain a JSON object")
    if obj.get("format_version") != FORMAT_VERSION:
        raise ExecError(f"unsupported program format_version {obj.get('format_version')!r}")
    functions = {}
    for name, fobj in obj.get("functions", {}).items():
        blocks = tuple(tuple(ops) for ops in fobj.get("blocks", ()))
        if not blocks:
            raise ExecError(f"function {name!r} has no blocks")
        functions[name] = MiniFunction(
            name=name, params=tuple(fobj.get("params", ())), blocks=blocks
        )
    return MiniProgram(functions=functions)


def load_program(path: str) -> MiniProgram:
    with open(path, "r", encoding="utf-8") as fh:
        return program_from_json(json.load(fh))


class _Machine:
    def __init__(self, program: MiniProgram, design: Design, step_budget: int):
        self.program = program
        self.design = design
        self.step_budget = step_budget
        self.stats = ExecStats()
        self.trace: list[TraceEntry] = []
        self.fifos: dict[int, list[int]] = {d.fifo_id: [] for d in design.fifos}
        self.fifo_heads: dict[int, int] = {d.fifo_id: 0 for d in design.fifos}
        self.memory: dict[int, int] = {}
        # per-port functional transaction state
        self.read_beats: dict[int, list[int]] = {d.port_id: [] for d in design.axi_ports}
        self.write_beats: dict[int, list[int]] = {d.port_id: [] for d in design.axi_ports}
        self.open_writes: dict[int, list[int]] = {d.port_id: [] for d in design.axi_ports}

    def emit(self, kind: str, **kw) -> None:
        self.trace.append(TraceEntry(kind, line=len(self.trace) + 1, **kw))

    def val(self, regs: dict[str, int], ref) -> int:
        if isinstance(ref, int):
            return ref
        try:
            return regs[ref]
        except KeyError:
            raise ExecError(f"read of unset register {ref!r}") from None

    def mem_read(self, addr: int, nbytes: int) -> int:
        mem = self.memory
        return int.from_bytes(
            bytes(mem.get(addr + i, 0) for i in range(nbytes)), "little"
        )

    def mem_write(self, addr: int, nbytes: int, value: int) -> None:
        mem = self.memory
        for i, byte in enumerate((value % (1 << (8 * nbytes))).to_bytes(nbytes, "little")):
            mem[addr + i] = byte

    def run_function(self, name: str, args: list[int]) -> int:
        func = self.program.functions.get(name)
        if func is None:
            raise ExecError(f"call to unknown function {name!r}")
        fsched = self.design.functions.get(name)
        if fsched is None:
            raise ExecError(f"function {name!r} is not in the design")
        if len(args) != len(func.params):
            raise ExecError(
                f"{name} expects {len(func.params)} argument(s), got {len(args)}"
            )
        self.stats.calls += 1
        self.emit("call_enter", fn=name)
        regs: dict[str, int] = dict(zip(func.params, args))
        result = 0
        bb = 0
        while True:
            if bb < 0 or bb >= len(func.blocks):
                raise ExecError(f"{name}: jump to unknown bb {bb}")
            if bb >= len(fsched.blocks):
                raise ExecError(f"{name}: bb {bb} missing from the design schedule")
            self.stats.blocks += 1
            self.emit("trace_bb", fn=name, bb=bb)
            nxt = self.run_block(func, regs, func.blocks[bb])
            if nxt is None:
                result = regs.get("__ret", 0)
                break
            bb = nxt
        self.emit("call_exit", fn=name)
        return result

    def run_block(self, func: MiniFunction, regs: dict[str, int], ops: tuple[dict, ...]):
        """Execute one basic block; return the next bb id, or None on return."""
        for op in ops:
            self.stats.steps += 1
            if self.stats.steps > self.step_budget:
                raise StepBudgetExceededError(
                    f"step budget of {self.step_budget} exceeded in {func.name}"
                )
            kind = op["op"]
            if kind == "const":
                regs[op["dst"]] = int(op["value"])
            elif kind == "bin":
                fn = _BINOPS.get(op["fn"])
                if fn is None:
                    raise ExecError(f"unknown arithmetic op {op['fn']!r}")
                regs[op["dst"]] = fn(self.val(regs, op["a"]), self.val(regs, op["b"]))
            elif kind == "fifo_read":
                fifo = op["fifo"]
                if fifo not in self.fifos:
                    raise ExecError(f"{func.name}: read of undeclared fifo {fifo}")
                head = self.fifo_heads[fifo]
                queue = self.fifos[fifo]
                if head >= len(queue):
                    raise FifoUnderflowError(
                        f"{func.name}: read from empty fifo {fifo}"
                    )
                regs[op["dst"]] = queue[head]
                self.fifo_heads[fifo] = head + 1
                self.stats.io_events += 1
                self.emit("fifo_read", resource=fifo)
            elif kind == "fifo_write":
                fifo = op["fifo"]
                if fifo not in self.fifos:
                    raise ExecError(f"{func.name}: write to undeclared fifo {fifo}")
                self.fifos[fifo].append(self.val(regs, op["src"]))
                self.stats.io_events += 1
                self.emit("fifo_write", resource=fifo)
            elif kind == "axi_readreq":
                port = op["port"]
                decl = self._port(func, port)
                addr = self.val(regs, op["addr"])
                beats = self.val(regs, op["beats"])
                if beats < 1:
                    raise ExecError(f"{func.name}: readreq with {beats} beats")
                self.read_beats[port].extend(
                    addr + i * decl.beat_bytes for i in range(beats)
                )
                self.stats.io_events += 1
                self.emit("axi_readreq", resource=port, addr=addr, length=beats)
            elif kind == "axi_read":
                port = op["port"]
                decl = self._port(func, port)
                pending = self.read_beats[port]
                if not pending:
                    raise ExecError(f"{func.name}: axi_read with no outstanding request")
                addr = pending.pop(0)
                regs[op["dst"]] = self.mem_read(addr, decl.beat_bytes)
                self.stats.io_events += 1
                self.emit("axi_read", resource=port)
            elif kind == "axi_writereq":
                port = op["port"]
                decl = self._port(func, port)
                addr = self.val(regs, op["addr"])
                beats = self.val(regs, op["beats"])
                if beats < 1:
                    raise ExecError(f"{func.name}: writereq with {beats} beats")
                self.write_beats[port].extend(
                    addr + i * decl.beat_bytes for i in range(beats)
                )
                self.open_writes[port].append(beats)
                self.stats.io_events += 1
                self.emit("axi_writereq", resource=port, addr=addr, length=beats)
            elif kind == "axi_write":
                port = op["port"]
                decl = self._port(func, port)
                pending = self.write_beats[port]
                if not pending:
                    raise ExecError(f"{func.name}: axi_write with no outstanding request")
                addr = pending.pop(0)
                self.mem_write(addr, decl.beat_bytes, self.val(regs, op["src"]))
                open_writes = self.open_writes[port]
                if not open_writes:
                    raise ExecError(f"{func.name}: axi_write with no open transaction")
                open_writes[0] -= 1
                self.stats.io_events += 1
                self.emit("axi_write", resource=port)
            elif kind == "axi_writeresp":
                port = op["port"]
                self._port(func, port)
                open_writes = self.open_writes[port]
                if not open_writes:
                    raise ExecError(f"{func.name}: writeresp with no open transaction")
                if open_writes[0] != 0:
                    raise ExecError(
                        f"{func.name}: writeresp before all {open_writes[0]} remaining beat(s) written"
                    )
                open_writes.pop(0)
                self.stats.io_events += 1
                self.emit("axi_writeresp", resource=port)
            elif kind == "call":
                args = [self.val(regs, a) for a in op.get("args", ())]
                ret = self.run_function(op["fn"], args)
                if "dst" in op:
                    regs[op["dst"]] = ret
            elif kind == "jump":
                return op["bb"]
            elif kind == "branch":
                if self.val(regs, op["cond"]):
                    return op["then"]
                return op["else"]
            elif kind == "return":
                if "value" in op:
                    regs["__ret"] = self.val(regs, op["value"])
                return None
            else:
                raise ExecError(f"unknown op kind {kind!r}")
        raise ExecError(f"{func.name}: block fell through without a terminator")

    def _port(self, func: MiniFunction, port: int):
        try:
            return self.design.port(port)
        except KeyError:
            raise ExecError(f"{func.name}: undeclared axi port {port}") from None


def execute(
    program: MiniProgram,
    design: Design,
    entry_args: list[int] | None = None,
    step_budget: int = DEFAULT_STEP_BUDGET,
    memory: dict[int, int] | None = None,
) -> tuple[list[TraceEntry], ExecStats]:
    """Run the program's top function and return (trace entries, stats)."""
    machine = _Machine(program, design, step_budget)
    if memory:
        machine.memory.update(memory)
    machine.run_function(design.top, list(entry_args or []))
    return machine.trace, machine.stats
