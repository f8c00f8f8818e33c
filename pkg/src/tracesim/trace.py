"""Execution trace: line-oriented wire format and the per-call tree built from it.

The trace is a plain text file, one entry per line::

    trace_bb <fn> <bb>
    fifo_read <id>
    fifo_write <id>
    axi_readreq <port> <addr> <len>
    axi_read <port>
    axi_writereq <port> <addr> <len>
    axi_write <port>
    axi_writeresp <port>
    call_enter <fn>
    call_exit <fn>

Addresses and lengths are decimal.  Formatting then parsing a trace is a
bit-exact round trip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Union

from .design import Design


class TraceError(ValueError):
    pass


class TraceSyntaxError(TraceError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class TraceStructureError(TraceError):
    pass


class TraceEntry(NamedTuple):
    kind: str
    fn: str = ""
    bb: int = -1
    resource: int = -1
    addr: int = -1
    length: int = -1
    line: int = -1


# kind -> number of arguments on the line
_ARITY = {
    "trace_bb": 2,
    "fifo_read": 1,
    "fifo_write": 1,
    "axi_readreq": 3,
    "axi_read": 1,
    "axi_writereq": 3,
    "axi_write": 1,
    "axi_writeresp": 1,
    "call_enter": 1,
    "call_exit": 1,
}

FIFO_EVENT_KINDS = frozenset({"fifo_read", "fifo_write"})
AXI_EVENT_KINDS = frozenset(
    {"axi_readreq", "axi_read", "axi_writereq", "axi_write", "axi_writeresp"}
)
EVENT_KINDS = FIFO_EVENT_KINDS | AXI_EVENT_KINDS


def parse_flat_trace(text: str) -> list[TraceEntry]:
    """Parse trace text into entries, checking syntax and call nesting balance.

    The loop is branch-ordered by line frequency and builds entries
    positionally; million-line traces go through here.
    """
    entries: list[TraceEntry] = []
    append = entries.append
    make = TraceEntry
    depth = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts:
            raise TraceSyntaxError(line_no, "blank line")
        kind = parts[0]
        arity = _ARITY.get(kind)
        if arity is None:
            raise TraceSyntaxError(line_no, f"unknown entry kind {kind!r}")
        if len(parts) - 1 != arity:
            raise TraceSyntaxError(
                line_no, f"{kind} takes {arity} argument(s), got {len(parts) - 1}"
            )
        try:
            if kind == "trace_bb":
                append(make(kind, parts[1], int(parts[2]), -1, -1, -1, line_no))
            elif kind == "fifo_read" or kind == "fifo_write":
                append(make(kind, "", -1, int(parts[1]), -1, -1, line_no))
            elif kind == "call_enter":
                append(make(kind, parts[1], -1, -1, -1, -1, line_no))
                depth += 1
            elif kind == "call_exit":
                append(make(kind, parts[1], -1, -1, -1, -1, line_no))
                depth -= 1
                if depth < 0:
                    raise TraceSyntaxError(line_no, "call_exit without matching call_enter")
            elif kind == "axi_readreq" or kind == "axi_writereq":
                append(make(kind, "", -1, int(parts[1]), int(parts[2]), int(parts[3]), line_no))
            else:
                append(make(kind, "", -1, int(parts[1]), -1, -1, line_no))
        except ValueError as exc:
            if isinstance(exc, TraceSyntaxError):
                raise
            raise TraceSyntaxError(line_no, f"bad integer field: {raw!r}") from exc
    if depth != 0:
        raise TraceStructureError(f"unbalanced call nesting: {depth} call(s) never exited")
    return entries


def format_entry(entry: TraceEntry) -> str:
    kind = entry.kind
    if kind == "trace_bb":
        return f"trace_bb {entry.fn} {entry.bb}"
    if kind in ("call_enter", "call_exit"):
        return f"{kind} {entry.fn}"
    if kind in ("axi_readreq", "axi_writereq"):
        return f"{kind} {entry.resource} {entry.addr} {entry.length}"
    return f"{kind} {entry.resource}"


def format_flat_trace(entries: list[TraceEntry]) -> str:
    return "".join(format_entry(e) + "\n" for e in entries)


@dataclass(slots=True)
class BlockInstance:
    """One dynamic execution of a basic block and the events it performed."""

    bb_id: int
    bb_entry: TraceEntry
    events: list[Union[TraceEntry, "CallTrace"]] = field(default_factory=list)


@dataclass
class CallTrace:
    """One dynamic function call: the blocks it executed, in trace order."""

    function: str
    path: str
    blocks: list[BlockInstance] = field(default_factory=list)
    enter_entry: TraceEntry | None = None
    exit_entry: TraceEntry | None = None

    def subcalls(self) -> Iterator["CallTrace"]:
        for block in self.blocks:
            for ev in block.events:
                if isinstance(ev, CallTrace):
                    yield ev

    def walk(self) -> Iterator["CallTrace"]:
        yield self
        for child in self.subcalls():
            yield from child.walk()


def build_call_tree(entries: list[TraceEntry], design: Design) -> CallTrace:
    """Structure a flat trace into the tree of dynamic calls.

    Events must sit inside a block of the enclosing call, function and block
    ids must exist in the design, and the single top-level call must be the
    design's top function.
    """
    root: CallTrace | None = None
    stack: list[CallTrace] = []
    child_counts: list[int] = []

    for entry in entries:
        kind = entry.kind
        if kind == "call_enter":
            if entry.fn not in design.functions:
                raise TraceStructureError(
                    f"line {entry.line}: call into unknown function {entry.fn!r}"
                )
            if not stack:
                if root is not None:
                    raise TraceStructureError(
                        f"line {entry.line}: more than one top-level call"
                    )
                if entry.fn != design.top:
                    raise TraceStructureError(
                        f"line {entry.line}: top-level call {entry.fn!r} is not the top function {design.top!r}"
                    )
                node = CallTrace(function=entry.fn, path=entry.fn, enter_entry=entry)
                root = node
            else:
                parent = stack[-1]
                if not parent.blocks:
                    raise TraceStructureError(
                        f"line {entry.line}: sub-call before any block of {parent.function}"
                    )
                ordinal = child_counts[-1]
                child_counts[-1] = ordinal + 1
                node = CallTrace(
                    function=entry.fn,
                    path=f"{parent.path}/{ordinal}:{entry.fn}",
                    enter_entry=entry,
                )
                parent.blocks[-1].events.append(node)
            stack.append(node)
            child_counts.append(0)
        elif kind == "call_exit":
            if not stack:
                raise TraceStructureError(f"line {entry.line}: call_exit with no open call")
            node = stack.pop()
            child_counts.pop()
            if node.function != entry.fn:
                raise TraceStructureError(
                    f"line {entry.line}: call_exit {entry.fn!r} does not match {node.function!r}"
                )
            node.exit_entry = entry
        elif kind == "trace_bb":
            if not stack:
                raise TraceStructureError(f"line {entry.line}: block outside any call")
            node = stack[-1]
            if entry.fn != node.function:
                raise TraceStructureError(
                    f"line {entry.line}: block of {entry.fn!r} inside call to {node.function!r}"
                )
            fsched = design.functions[node.function]
            if entry.bb < 0 or entry.bb >= len(fsched.blocks):
                raise TraceStructureError(
                    f"line {entry.line}: unknown bb {entry.bb} in {node.function}"
                )
            node.blocks.append(BlockInstance(bb_id=entry.bb, bb_entry=entry))
        else:  # fifo / axi event
            if not stack:
                raise TraceStructureError(f"line {entry.line}: event outside any call")
            node = stack[-1]
            if not node.blocks:
                raise TraceStructureError(
                    f"line {entry.line}: event before any block of {node.function}"
                )
            node.blocks[-1].events.append(entry)

    if root is None:
        raise TraceStructureError("no top-level call in trace")
    return root


def flatten(root: CallTrace) -> list[TraceEntry]:
    """Inverse of :func:`build_call_tree` for the entries it consumed."""
    out: list[TraceEntry] = []

    def emit(node: CallTrace) -> None:
        assert node.enter_entry is not None and node.exit_entry is not None
        out.append(node.enter_entry)
        for block in node.blocks:
            out.append(block.bb_entry)
            for ev in block.events:
                if isinstance(ev, CallTrace):
                    emit(ev)
                else:
                    out.append(ev)
        out.append(node.exit_entry)

    emit(root)
    return out


def load_trace(path: str) -> list[TraceEntry]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_flat_trace(fh.read())


def save_trace(entries: list[TraceEntry], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_flat_trace(entries))
