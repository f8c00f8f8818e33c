"""Event-driven stall calculation over resolved dynamic schedules.

Every dynamic call gets a simulator that walks its stages in order; one
stage is one cycle unless an event at that stage has to wait.  FIFO reads
wait for the matching write to be visible, writes wait for space, sub-call
ends hold the caller until the callee finishes, and AXI data/response
events wait on the port timing model.  Simulators communicate only through
completion cycles, so the fixed point is independent of scheduling order;
blocked simulators park on the exact condition they need and are released
in ascending (cycle, creation index) order.

The per-call event lists are compiled once per trace (`Analysis`) and can
be re-simulated under different FIFO depth configurations without touching
the trace or the resolver again.
"""

from __future__ import annotations

import heapq
from bisect import bisect_right
from dataclasses import dataclass, field

from .axi import DEFAULT_MAX_BURST_LEN, AxiPortParams, AxiPortState, burst_count
from .design import Design
from .resolve import DynamicSchedule, resolve_tree
from .trace import CallTrace, TraceEntry, build_call_tree

FORMAT_VERSION = 1
DEFAULT_VISIBILITY = 1


class ConfigError(ValueError):
    pass


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Stall-calculation parameters: FIFO depths and AXI timing knobs."""

    fifo_depths: dict[int, int | None] = field(default_factory=dict)
    visibility: int = DEFAULT_VISIBILITY
    axi: dict[int, AxiPortParams] = field(default_factory=dict)
    tie_break: str = "creation_order"

    def depth_of(self, design: Design, fifo_id: int) -> int | None:
        if fifo_id in self.fifo_depths:
            return self.fifo_depths[fifo_id]
        return design.fifo(fifo_id).depth

    def port_params(self, design: Design, port_id: int) -> AxiPortParams:
        if port_id in self.axi:
            return self.axi[port_id]
        return AxiPortParams(latency=design.port(port_id).latency)

    def with_depths(self, overrides: dict[int, int | None]) -> "SimConfig":
        merged = dict(self.fifo_depths)
        merged.update(overrides)
        return SimConfig(
            fifo_depths=merged,
            visibility=self.visibility,
            axi=self.axi,
            tie_break=self.tie_break,
        )

    def all_unbounded(self, design: Design) -> "SimConfig":
        return self.with_depths({d.fifo_id: None for d in design.fifos})


def parse_depth(value) -> int | None:
    if value == "unbounded" or value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"fifo depth must be an integer >= 1 or \"unbounded\", got {value!r}")
    if value < 1:
        raise ConfigError(f"fifo depth must be >= 1, got {value}")
    return value


def config_from_json(obj: dict, design: Design) -> SimConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config file must contain a JSON object")
    if obj.get("format_version", FORMAT_VERSION) != FORMAT_VERSION:
        raise ConfigError(f"unsupported config format_version {obj.get('format_version')!r}")
    declared_fifos = {d.fifo_id for d in design.fifos}
    depths: dict[int, int | None] = {}
    for key, value in obj.get("fifo_depths", {}).items():
        fifo_id = int(key)
        if fifo_id not in declared_fifos:
            raise ConfigError(f"config names unknown fifo {fifo_id}")
        depths[fifo_id] = parse_depth(value)
    visibility = obj.get("fifo_visibility_latency", DEFAULT_VISIBILITY)
    if visibility not in (0, 1):
        raise ConfigError(f"fifo_visibility_latency must be 0 or 1, got {visibility!r}")
    declared_ports = {p.port_id for p in design.axi_ports}
    axi: dict[int, AxiPortParams] = {}
    for key, params in obj.get("axi", {}).items():
        port_id = int(key)
        if port_id not in declared_ports:
            raise ConfigError(f"config names unknown axi port {port_id}")
        latency = params.get("latency", design.port(port_id).latency)
        if latency < 0:
            raise ConfigError(f"axi port {port_id} latency must be >= 0")
        axi[port_id] = AxiPortParams(
            latency=latency,
            read_overhead=int(params.get("read_overhead", 0)),
            writeresp_overhead=int(params.get("writeresp_overhead", 0)),
            max_burst_len=int(params.get("max_burst_len", DEFAULT_MAX_BURST_LEN)),
        )
    tie_break = obj.get("tie_break", "creation_order")
    if tie_break != "creation_order":
        raise ConfigError(f"unsupported tie_break policy {tie_break!r}")
    return SimConfig(fifo_depths=depths, visibility=visibility, axi=axi, tie_break=tie_break)


def config_to_json(config: SimConfig) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "fifo_depths": {
            str(k): "unbounded" if v is None else v for k, v in sorted(config.fifo_depths.items())
        },
        "fifo_visibility_latency": config.visibility,
        "axi": {
            str(k): {
                "latency": p.latency,
                "read_overhead": p.read_overhead,
                "writeresp_overhead": p.writeresp_overhead,
                "max_burst_len": p.max_burst_len,
            }
            for k, p in sorted(config.axi.items())
        },
        "tie_break": config.tie_break,
    }


def load_config(path: str, design: Design) -> SimConfig:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        return config_from_json(json.load(fh), design)


# Compiled event tuples:
#   ("fr", fifo, read_index)
#   ("fw", fifo, write_index)
#   ("cs", child_path) / ("ce", child_path)
#   ("rq", port, req_seq)
#   ("rb", port, req_seq, beat_offset, is_last)
#   ("wb", port, req_seq, is_last)
#   ("wr", port, req_seq)


@dataclass
class CompiledCall:
    path: str
    function: str
    first_stage: int
    last_stage: int
    groups: list[tuple[int, tuple[tuple, ...]]]
    children: list[str]


@dataclass
class CompiledPort:
    port_id: int
    beat_bytes: int
    requests: list[tuple[str, int, int]]  # (kind, addr, beats) in trace order


@dataclass
class FifoRunStats:
    fifo_id: int
    writes: int
    reads: int
    observed: int


@dataclass
class SimNode:
    path: str
    function: str
    start_cycle: int | None  # first occupied cycle
    end_cycle: int | None
    latency: int | None


@dataclass
class RunResult:
    ok: bool
    nodes: dict[str, SimNode]
    fifo_stats: dict[int, FifoRunStats]
    deadlock: dict | None
    port_stats: dict[int, dict]


class Analysis:
    """Parsed trace + resolved schedules + compiled per-call event lists.

    Building one is the expensive part; `simulate` can then be called any
    number of times with different configs (only stall calculation reruns).
    """

    def __init__(
        self,
        design: Design,
        entries: list[TraceEntry] | None = None,
        *,
        tree: CallTrace | None = None,
        schedules: dict[str, DynamicSchedule] | None = None,
    ):
        self.design = design
        if tree is None:
            if entries is None:
                raise AnalysisError("Analysis needs trace entries or a prebuilt call tree")
            tree = build_call_tree(entries, design)
        self.tree = tree
        self.schedules = schedules if schedules is not None else resolve_tree(tree, design)
        self.fifo_write_counts: dict[int, int] = {d.fifo_id: 0 for d in design.fifos}
        self.fifo_read_counts: dict[int, int] = {d.fifo_id: 0 for d in design.fifos}
        self.ports: dict[int, CompiledPort] = {
            p.port_id: CompiledPort(p.port_id, p.beat_bytes, []) for p in design.axi_ports
        }
        self.compiled: dict[str, CompiledCall] = {}
        self._compile()

    def _compile(self) -> None:
        # Gather (line, schedule, event) across all calls to assign global
        # per-fifo indices and per-port sequence numbers in trace order.
        # Lines are unique per entry, so the events themselves never compare.
        staged: list[tuple[int, str, int, object]] = []
        for path, sched in self.schedules.items():
            for i, ev in enumerate(sched.events):
                staged.append((ev.line, path, i, ev))
        staged.sort()

        fifo_w = self.fifo_write_counts
        fifo_r = self.fifo_read_counts
        # per-port running state for beat/resp pairing
        port_read_reqs: dict[int, list[tuple[int, int]]] = {p: [] for p in self.ports}  # (seq, beats)
        port_read_consumed: dict[int, int] = {p: 0 for p in self.ports}
        port_write_reqs: dict[int, list[tuple[int, int]]] = {p: [] for p in self.ports}
        port_write_consumed: dict[int, int] = {p: 0 for p in self.ports}
        port_resp_next: dict[int, int] = {p: 0 for p in self.ports}

        compiled_events: dict[tuple[str, int], tuple] = {}
        for line, path, i, ev in staged:
            kind = ev.kind
            if kind == "fifo_write":
                idx = fifo_w[ev.resource]
                fifo_w[ev.resource] = idx + 1
                compiled_events[(path, i)] = ("fw", ev.resource, idx)
            elif kind == "fifo_read":
                idx = fifo_r[ev.resource]
                if idx >= fifo_w.get(ev.resource, 0):
                    # A well-formed trace from the functional model always
                    # writes a token before it is read.
                    raise AnalysisError(
                        f"fifo {ev.resource}: read #{idx + 1} (line {line}) precedes its write"
                    )
                fifo_r[ev.resource] = idx + 1
                compiled_events[(path, i)] = ("fr", ev.resource, idx)
            elif kind == "subcall":
                compiled_events[(path, i)] = ("sc", ev.child.path)
            elif kind in ("axi_readreq", "axi_writereq"):
                port = self.ports.get(ev.resource)
                if port is None:
                    raise AnalysisError(f"line {line}: undeclared axi port {ev.resource}")
                seq = len(port.requests)
                # addr/length travel on the trace entry
                tr = self._trace_entry_for(path, i)
                port.requests.append(("read" if kind == "axi_readreq" else "write", tr.addr, tr.length))
                if kind == "axi_readreq":
                    port_read_reqs[ev.resource].append((seq, tr.length))
                else:
                    port_write_reqs[ev.resource].append((seq, tr.length))
                compiled_events[(path, i)] = ("rq", ev.resource, seq)
            elif kind == "axi_read":
                reqs = port_read_reqs.get(ev.resource)
                if reqs is None:
                    raise AnalysisError(f"line {line}: undeclared axi port {ev.resource}")
                consumed = port_read_consumed[ev.resource]
                total = 0
                target = None
                for seq, beats in reqs:
                    if consumed < total + beats:
                        target = (seq, consumed - total, consumed - total == beats - 1)
                        break
                    total += beats
                if target is None:
                    raise AnalysisError(
                        f"line {line}: axi_read on port {ev.resource} has no matching outstanding request"
                    )
                port_read_consumed[ev.resource] = consumed + 1
                compiled_events[(path, i)] = ("rb", ev.resource, *target)
            elif kind == "axi_write":
                reqs = port_write_reqs.get(ev.resource)
                if reqs is None:
                    raise AnalysisError(f"line {line}: undeclared axi port {ev.resource}")
                consumed = port_write_consumed[ev.resource]
                total = 0
                target = None
                for seq, beats in reqs:
                    if consumed < total + beats:
                        target = (seq, consumed - total == beats - 1)
                        break
                    total += beats
                if target is None:
                    raise AnalysisError(
                        f"line {line}: axi_write on port {ev.resource} has no matching outstanding request"
                    )
                port_write_consumed[ev.resource] = consumed + 1
                compiled_events[(path, i)] = ("wb", ev.resource, *target)
            elif kind == "axi_writeresp":
                reqs = port_write_reqs.get(ev.resource)
                if reqs is None:
                    raise AnalysisError(f"line {line}: undeclared axi port {ev.resource}")
                nxt = port_resp_next[ev.resource]
                if nxt >= len(reqs):
                    raise AnalysisError(
                        f"line {line}: axi_writeresp on port {ev.resource} has no matching outstanding request"
                    )
                port_resp_next[ev.resource] = nxt + 1
                compiled_events[(path, i)] = ("wr", ev.resource, reqs[nxt][0])
            else:
                raise AnalysisError(f"line {line}: unknown event kind {kind!r}")

        # Build per-call stage groups.
        for path, sched in self.schedules.items():
            records: list[tuple[int, int, int, tuple]] = []
            children: list[str] = []
            for i, ev in enumerate(sched.events):
                if ev.kind == "subcall":
                    child_path = ev.child.path
                    children.append(child_path)
                    records.append((ev.stage, ev.line, 0, ("cs", child_path)))
                    records.append((ev.end_stage, ev.line, 1, ("ce", child_path)))
                else:
                    records.append((ev.stage, ev.line, 0, compiled_events[(path, i)]))
            # Starts sort before ends within a stage: the FSM asserts every
            # sub-call start on stage entry, so parallel siblings all launch
            # before the stage waits on any of them finishing.
            records.sort(key=lambda r: (r[0], r[2], r[1]))
            groups: list[tuple[int, tuple[tuple, ...]]] = []
            cur_stage: int | None = None
            cur: list[tuple] = []
            for stage, _, _, ev in records:
                if stage != cur_stage:
                    if cur:
                        groups.append((cur_stage, tuple(cur)))
                    cur_stage = stage
                    cur = []
                cur.append(ev)
            if cur:
                groups.append((cur_stage, tuple(cur)))
            self.compiled[path] = CompiledCall(
                path=path,
                function=sched.function,
                first_stage=sched.first_stage,
                last_stage=sched.last_stage,
                groups=groups,
                children=children,
            )

    def _trace_entry_for(self, path: str, i: int):
        ev = self.schedules[path].events[i]
        lines = self._line_index(path)
        raw = lines.get(ev.line)
        if raw is None:
            raise AnalysisError(f"{path}: no trace entry at line {ev.line}")
        return raw

    def _line_index(self, path: str) -> dict:
        if not hasattr(self, "_line_cache"):
            self._line_cache: dict[str, dict] = {}
        cached = self._line_cache.get(path)
        if cached is None:
            if not hasattr(self, "_path_index"):
                self._path_index = {node.path: node for node in self.tree.walk()}
            node = self._path_index[path]
            cached = {}
            for block in node.blocks:
                for raw in block.events:
                    if not isinstance(raw, CallTrace):
                        cached[raw.line] = raw
            self._line_cache[path] = cached
        return cached

    # ------------------------------------------------------------------ #

    def simulate(self, config: SimConfig) -> RunResult:
        design = self.design
        vis = config.visibility
        depths = {d.fifo_id: config.depth_of(design, d.fifo_id) for d in design.fifos}

        commits: dict[int, list] = {
            f: [None] * n for f, n in self.fifo_write_counts.items()
        }
        consumes: dict[int, list] = {
            f: [None] * n for f, n in self.fifo_read_counts.items()
        }

        ports: dict[int, AxiPortState] = {}
        for pid, cport in self.ports.items():
            params = config.port_params(design, pid)
            reqs = [
                (kind, burst_count(addr, beats, cport.beat_bytes, params.max_burst_len), beats)
                for kind, addr, beats in cport.requests
            ]
            ports[pid] = AxiPortState(params, reqs)
        last_write: dict[int, dict[int, int]] = {pid: {} for pid in ports}

        sims: dict[str, _SimState] = {}
        order: list[_SimState] = []
        heap: list[int] = []
        waiters: dict[tuple, list[int]] = {}

        def spawn(path: str, base: int) -> None:
            state = _SimState(self.compiled[path], len(order), base)
            sims[path] = state
            order.append(state)
            heapq.heappush(heap, state.index)

        def wake(key: tuple) -> None:
            for idx in waiters.pop(key, ()):  # deterministic append order
                heapq.heappush(heap, idx)

        def wake_port(pid: int) -> None:
            state = ports[pid]
            ready = [
                key
                for key in waiters
                if key[0] == "ai" and key[1] == pid and state.issue_cycle(key[2]) is not None
            ]
            for key in sorted(ready):
                wake(key)

        def attempt(s: "_SimState", ev: tuple):
            """Run one event against current facts.

            Returns None once the event completed (s.comp updated), or a
            (waiter_key, kind, resource) triple while it still stalls.  All
            events of a stage issue together, so a stalled one must not stop
            its stage-mates; the caller keeps it pending and retries on wake.
            """
            op = ev[0]
            if op == "fr":
                _, fifo, k = ev
                wcycle = commits[fifo][k]
                if wcycle is None:
                    return (("fd", fifo, k), "fifo_read", fifo)
                c = s.entry if wcycle + vis <= s.entry else wcycle + vis
                consumes[fifo][k] = c
                if c > s.comp:
                    s.comp = c
                wake(("fs", fifo, k))
            elif op == "fw":
                _, fifo, m = ev
                depth = depths[fifo]
                ready = 0
                if depth is not None and m >= depth:
                    freed = consumes[fifo][m - depth]
                    if freed is None:
                        return (("fs", fifo, m - depth), "fifo_write", fifo)
                    ready = freed + vis
                c = s.entry if ready <= s.entry else ready
                commits[fifo][m] = c
                if c > s.comp:
                    s.comp = c
                wake(("fd", fifo, m))
            elif op == "cs":
                spawn(ev[1], s.entry - 1)
            elif op == "ce":
                child = sims[ev[1]]
                if not child.done:
                    return (("cd", ev[1]), "subcall", child.compiled.function)
                if child.end > s.comp:
                    s.comp = child.end
            elif op == "rq":
                _, pid, seq = ev
                ports[pid].post_request(seq, s.entry)
                wake_port(pid)
            elif op == "rb":
                _, pid, seq, offset, is_last = ev
                ready = ports[pid].read_beat_ready(seq, offset)
                if ready is None:
                    return (("ai", pid, seq), "axi_read", pid)
                c = s.entry if ready <= s.entry else ready
                if c > s.comp:
                    s.comp = c
                if is_last:
                    ports[pid].finish(seq, c)
                    wake_port(pid)
            elif op == "wb":
                _, pid, seq, is_last = ev
                if is_last:
                    last_write[pid][seq] = s.entry
                    wake(("awb", pid, seq))
            elif op == "wr":
                _, pid, seq = ev
                lw = last_write[pid].get(seq)
                if lw is None:
                    return (("awb", pid, seq), "axi_writeresp", pid)
                ready = ports[pid].writeresp_ready(seq, lw)
                if ready is None:
                    return (("ai", pid, seq), "axi_writeresp", pid)
                c = s.entry if ready <= s.entry else ready
                if c > s.comp:
                    s.comp = c
                ports[pid].finish(seq, c)
                wake_port(pid)
            else:  # pragma: no cover - compile produces only the above
                raise AnalysisError(f"unknown compiled op {op!r}")
            return None

        spawn(self.tree.path, 0)

        while heap:
            s = order[heapq.heappop(heap)]
            if s.done:
                continue
            groups = s.compiled.groups
            while s.gi < len(groups):
                stage, evs = groups[s.gi]
                if s.gi != s.seen:  # once per group, not again after a resume
                    s.entry = s.cur + (stage - s.pos)
                    s.pos = stage
                    s.comp = s.entry
                    s.seen = s.gi
                    s.pending = []
                if s.pending:
                    still = []
                    for item in s.pending:
                        res = attempt(s, evs[item[0]])
                        if res is None:
                            continue
                        key, kind, resource = res
                        if key != item[1]:
                            # stalled again on a different fact (write
                            # response waits data, then admission)
                            waiters.setdefault(key, []).append(s.index)
                            item = (item[0], key, kind, resource)
                        still.append(item)
                    s.pending = still
                while s.ei < len(evs):
                    res = attempt(s, evs[s.ei])
                    if res is not None:
                        key, kind, resource = res
                        waiters.setdefault(key, []).append(s.index)
                        s.pending.append((s.ei, key, kind, resource))
                    s.ei += 1
                if s.pending:
                    break
                s.cur = s.comp
                s.gi += 1
                s.ei = 0
            if s.pending:
                continue
            s.cur += s.compiled.last_stage - s.pos
            s.pos = s.compiled.last_stage
            s.done = True
            s.end = s.cur
            wake(("cd", s.compiled.path))

        nodes: dict[str, SimNode] = {}
        all_done = True
        for path, compiled in self.compiled.items():
            s = sims.get(path)
            if s is None or not s.done:
                all_done = False
                start = s.base + 1 if s is not None else None
                nodes[path] = SimNode(path, compiled.function, start, None, None)
            else:
                nodes[path] = SimNode(
                    path, compiled.function, s.base + 1, s.end, s.end - s.base
                )

        fifo_stats = {
            f: FifoRunStats(
                fifo_id=f,
                writes=self.fifo_write_counts[f],
                reads=self.fifo_read_counts[f],
                observed=_observed_depth(commits[f], consumes[f], vis),
            )
            for f in commits
        }
        port_stats = {
            pid: {
                "max_outstanding": st.max_outstanding,
                "was_pending": st.was_pending,
                "pending_count": st.pending_count,
            }
            for pid, st in ports.items()
        }

        deadlock = None
        if not all_done:
            deadlock = self._diagnose(sims, order, depths)
        return RunResult(
            ok=all_done,
            nodes=nodes,
            fifo_stats=fifo_stats,
            deadlock=deadlock,
            port_stats=port_stats,
        )

    # ------------------------------------------------------------------ #

    def _remaining_events(self, sims: dict[str, "_SimState"]):
        """Yield (path, event) for every compiled event not yet completed."""
        for path, compiled in self.compiled.items():
            s = sims.get(path)
            if s is not None and s.done:
                continue
            gi = s.gi if s is not None else 0
            if s is not None and gi < len(compiled.groups):
                _, evs = compiled.groups[gi]
                for item in s.pending:
                    yield path, evs[item[0]]
                for ev in evs[s.ei:]:
                    yield path, ev
                gi += 1
            for g in range(gi, len(compiled.groups)):
                _, evs = compiled.groups[g]
                for ev in evs:
                    yield path, ev

    def _nearest_live(self, path: str, sims: dict[str, "_SimState"]) -> str:
        """Map a call to itself or its nearest instantiated ancestor."""
        while path not in sims and "/" in path:
            path = path.rsplit("/", 1)[0]
        return path

    def _diagnose(self, sims, order, depths) -> dict:
        design = self.design
        blocked = [s for s in order if not s.done and s.pending]

        def resource_name(kind: str, resource) -> str:
            if kind.startswith("fifo"):
                try:
                    return design.fifo(resource).name
                except KeyError:
                    return str(resource)
            if kind.startswith("axi"):
                try:
                    return design.port(resource).name
                except KeyError:
                    return str(resource)
            return str(resource)

        entries = []
        edges: dict[str, list[str]] = {}
        # per call: (entry row, holders) for each stalled event, so the
        # cycle narrative can name the event that forms each edge
        rows_of: dict[str, list[tuple[dict, list[str]]]] = {}
        for s in blocked:
            path = s.compiled.path
            union: list[str] = []
            rows_of[path] = []
            for _, key, kind, resource in s.pending:
                row = {
                    "call": path,
                    "function": s.compiled.function,
                    "kind": kind,
                    "resource": resource,
                    "resource_name": resource_name(kind, resource),
                    "stage": s.pos,
                    "cycle": s.entry,
                }
                entries.append(row)
                holders: list[str] = []
                if key[0] == "fd":
                    want = ("fw", key[1], key[2])
                    holders = [
                        self._nearest_live(p, sims)
                        for p, ev in self._remaining_events(sims)
                        if ev == want
                    ]
                elif key[0] == "fs":
                    want = ("fr", key[1], key[2])
                    holders = [
                        self._nearest_live(p, sims)
                        for p, ev in self._remaining_events(sims)
                        if ev == want
                    ]
                elif key[0] == "cd":
                    holders = [self._nearest_live(key[1], sims)]
                elif key[0] in ("ai", "awb"):
                    pid = key[1]
                    holders = [
                        self._nearest_live(p, sims)
                        for p, ev in self._remaining_events(sims)
                        if ev[0] in ("rb", "wb", "wr") and ev[1] == pid and p != path
                    ]
                rows_of[path].append((row, holders))
                union.extend(holders)
            edges[path] = sorted(set(union))

        cycle = _find_cycle(edges)
        diagnosis = {"blocked": entries, "wait_for": edges}
        if cycle:
            cycle_desc = []
            for i, path in enumerate(cycle):
                nxt = cycle[(i + 1) % len(cycle)]
                info = next(
                    (row for row, holders in rows_of.get(path, []) if nxt in holders),
                    {},
                )
                cycle_desc.append(
                    {
                        "call": path,
                        "function": info.get("function", ""),
                        "kind": info.get("kind", ""),
                        "resource": info.get("resource"),
                        "resource_name": info.get("resource_name", ""),
                        "waits_for": nxt,
                    }
                )
            diagnosis["cycle"] = cycle_desc
        return diagnosis

    def optimal_depths(self, config: SimConfig) -> tuple[dict[int, int], RunResult]:
        """Observed depth of every FIFO under unbounded depths, plus that run."""
        result = self.simulate(config.all_unbounded(self.design))
        return {f: st.observed for f, st in result.fifo_stats.items()}, result


class _SimState:
    __slots__ = (
        "compiled",
        "index",
        "base",
        "pos",
        "cur",
        "gi",
        "ei",
        "seen",
        "entry",
        "comp",
        "done",
        "end",
        "pending",
    )

    def __init__(self, compiled: CompiledCall, index: int, base: int):
        self.compiled = compiled
        self.index = index
        self.base = base
        self.pos = compiled.first_stage - 1
        self.cur = base
        self.gi = 0
        self.ei = 0
        self.seen = -1
        self.entry = base
        self.comp = base
        self.done = False
        self.end = 0
        # stalled events of the current stage: (event index, waiter key,
        # kind, resource) — the stage holds until this empties
        self.pending: list[tuple] = []


def _observed_depth(commits: list, consumes: list, vis: int) -> int:
    """Max occupancy at any write commit, counting a freed slot only after
    the visibility latency — i.e. the smallest depth that would not have
    stalled any of these writes."""
    cs = sorted(c for c in consumes if c is not None)
    peak = 0
    for i, c in enumerate(sorted(c for c in commits if c is not None)):
        freed = bisect_right(cs, c - vis)
        occ = i + 1 - freed
        if occ > peak:
            peak = occ
    return peak


def _find_cycle(edges: dict[str, list[str]]) -> list[str] | None:
    done: set[str] = set()
    for start in sorted(edges):
        if start in done:
            continue
        on_path: dict[str, int] = {}
        path: list[str] = []
        # iterative DFS over all out-edges, detecting a back edge
        stack: list[tuple[str, int]] = [(start, 0)]
        while stack:
            node, child_i = stack[-1]
            if child_i == 0:
                on_path[node] = len(path)
                path.append(node)
            succs = edges.get(node, ())
            if child_i < len(succs):
                stack[-1] = (node, child_i + 1)
                nxt = succs[child_i]
                if nxt in on_path:
                    return path[on_path[nxt]:]
                if nxt not in done:
                    stack.append((nxt, 0))
            else:
                stack.pop()
                path.pop()
                del on_path[node]
                done.add(node)
    return None
