"""AXI timing model: burst splitting and per-port outstanding-request control.

A request for N beats starting at a byte address is split into bursts at
4096-byte boundaries and again at the port's maximum burst length within
each 4KB window.  The per-port request controller admits up to 16
outstanding bursts; excess requests wait on a pending queue and are issued,
in order, the cycle enough capacity frees up.

Read data: the first beat of a request becomes available at
``issue + declared_latency + read_overhead`` and subsequent beats stream one
per cycle.  A write response becomes available a declared latency plus the
write-response overhead after the later of the last data beat and the
request's issue.  Both overheads default to zero and are configurable per
port.
"""

from __future__ import annotations

from dataclasses import dataclass

PAGE_BYTES = 4096
DEFAULT_MAX_BURST_LEN = 256
RCTL_LIMIT = 16


@dataclass(frozen=True)
class AxiPortParams:
    latency: int
    read_overhead: int = 0
    writeresp_overhead: int = 0
    max_burst_len: int = DEFAULT_MAX_BURST_LEN


def burst_count(addr: int, beats: int, beat_bytes: int, max_burst_len: int = DEFAULT_MAX_BURST_LEN) -> int:
    """Number of bursts needed for a request of ``beats`` beats at ``addr``."""
    if beats < 1:
        raise ValueError("a request must transfer at least one beat")
    if addr % beat_bytes != 0:
        raise ValueError(f"address {addr} not aligned to {beat_bytes}-byte beats")
    count = 0
    remaining = beats
    a = addr
    while remaining > 0:
        in_page = (PAGE_BYTES - a % PAGE_BYTES) // beat_bytes
        take = min(remaining, in_page, max_burst_len)
        count += 1
        a += take * beat_bytes
        remaining -= take
    return count


@dataclass
class _Request:
    seq: int
    kind: str  # "read" | "write"
    bursts: int
    beats: int
    event_cycle: int | None = None  # cycle the design issued the request
    issue_cycle: int | None = None  # cycle the controller made it outstanding
    finish_cycle: int | None = None


class AxiPortState:
    """Per-run timing state of one AXI port."""

    def __init__(self, params: AxiPortParams, requests: list[tuple[str, int, int]]):
        # requests: (kind, bursts, beats) in per-port trace order
        self.params = params
        self.requests = [
            _Request(seq=i, kind=k, bursts=b, beats=n) for i, (k, b, n) in enumerate(requests)
        ]
        self._admit_next = 0
        self._active: list[_Request] = []
        self.max_outstanding = 0
        self.was_pending = False

    def post_request(self, seq: int, cycle: int) -> None:
        req = self.requests[seq]
        req.event_cycle = cycle
        self._try_admissions()

    def finish(self, seq: int, cycle: int) -> None:
        """The request's data is fully consumed; its bursts leave the controller."""
        self.requests[seq].finish_cycle = cycle
        self._try_admissions()

    def _outstanding_at(self, cycle: int) -> int:
        return sum(
            r.bursts
            for r in self._active
            if r.finish_cycle is None or r.finish_cycle > cycle
        )

    def _try_admissions(self) -> None:
        # Admission must not depend on the order finish() calls arrive, so a
        # cycle is only chosen once it is provably the earliest: capacity
        # fits even counting every not-yet-finished request as occupying
        # (pessimistic), while every earlier candidate cycle is over the
        # limit from known finishes alone (optimistic).  Until both hold the
        # request stays pending and a later finish() retries.
        while self._admit_next < len(self.requests):
            req = self.requests[self._admit_next]
            if req.event_cycle is None:
                return
            points = sorted(
                {req.event_cycle}
                | {
                    r.finish_cycle
                    for r in self._active
                    if r.finish_cycle is not None and r.finish_cycle > req.event_cycle
                }
            )
            chosen = None
            for c in points:
                pess = self._outstanding_at(c)
                if pess + req.bursts <= RCTL_LIMIT or pess == 0:
                    # pess == 0: a request wider than the controller is let
                    # through alone rather than wedging the port
                    chosen = c
                    break
                opt = sum(
                    r.bursts
                    for r in self._active
                    if r.finish_cycle is not None and r.finish_cycle > c
                )
                if opt + req.bursts <= RCTL_LIMIT:
                    # would fit if some unfinished request turns out to free
                    # capacity here; its finish cycle decides, wait for it
                    self.was_pending = True
                    return
            if chosen is None:
                self.was_pending = True
                return
            if chosen > req.event_cycle:
                self.was_pending = True
            req.issue_cycle = chosen
            self._active.append(req)
            self.max_outstanding = max(self.max_outstanding, self._outstanding_at(chosen))
            self._admit_next += 1

    @property
    def pending_count(self) -> int:
        """Requests posted by the design but not yet admitted."""
        return sum(
            1
            for r in self.requests
            if r.event_cycle is not None and r.issue_cycle is None
        )

    def issue_cycle(self, seq: int) -> int | None:
        return self.requests[seq].issue_cycle

    def read_beat_ready(self, seq: int, offset: int) -> int | None:
        """Cycle the given data beat of read request ``seq`` is available."""
        issue = self.requests[seq].issue_cycle
        if issue is None:
            return None
        return issue + self.params.latency + self.params.read_overhead + offset

    def writeresp_ready(self, seq: int, last_beat_cycle: int) -> int | None:
        issue = self.requests[seq].issue_cycle
        if issue is None:
            return None
        return (
            max(issue, last_beat_cycle)
            + self.params.latency
            + self.params.writeresp_overhead
        )
