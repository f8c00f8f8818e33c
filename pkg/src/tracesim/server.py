"""HTTP interface: status, reports, FIFO depth editing with queued reruns.

The server owns one loaded design/trace.  Depth edits are jobs: a POST
creates a pending job and returns its id; further POSTs that arrive while
that job is still pending fold into it (newest value per FIFO wins) and
get the same id back, so a burst of UI edits costs one rerun.  Jobs rerun
only the stall calculation — the trace, call tree and resolved schedules
stay cached — which the per-stage timings make easy to verify.
"""

from __future__ import annotations

import json
import os
import threading
from collections import deque
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .engine import SimConfig, load_config, parse_depth
from .pipeline import StageTimings, analyze_entries, load_inputs, trace_design
from .report import build_report, render_json
from .trace import parse_flat_trace

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


class Job:
    def __init__(self, job_id: int, depths: dict[int, int | None]):
        self.id = job_id
        self.depths = depths
        self.state = "pending"
        self.report: dict | None = None
        self.report_bytes: bytes | None = None
        self.timings = StageTimings()
        self.error: str | None = None

    def as_json(self, include_report: bool = True) -> dict:
        out = {"id": self.id, "state": self.state, "timings": self.timings.as_json()}
        if self.error is not None:
            out["error"] = self.error
        if self.state == "done" and include_report:
            out["report"] = self.report
        return out


class AppState:
    """Everything behind the HTTP handlers, usable without a socket."""

    def __init__(
        self,
        design_path: str,
        program_path: str | None = None,
        trace_path: str | None = None,
        entry_args: list[int] | None = None,
        step_budget: int | None = None,
        config_path: str | None = None,
        frontend_dir: str | None = None,
    ):
        self.design_path = design_path
        self.program_path = program_path
        self.trace_path = trace_path
        self.entry_args = entry_args or []
        self.step_budget = step_budget
        self.config_path = config_path
        self.frontend_dir = frontend_dir

        self.lock = threading.Lock()
        self.stage = "loading"
        self.error: str | None = None
        self.timings = StageTimings()
        self.design = None
        self.analysis = None
        self.config = SimConfig()
        self.report: dict | None = None
        self.report_bytes: bytes | None = None

        self.jobs: dict[int, Job] = {}
        self.pending_job: Job | None = None
        self._next_job_id = 1
        self._queue: deque[Job] = deque()
        self._cond = threading.Condition(self.lock)
        self._closed = False
        self._worker = threading.Thread(target=self._run_jobs, daemon=True)
        self._worker.start()

    # -------------------------------------------------------------- build

    def build(self) -> None:
        try:
            self._set_stage("loading")
            design, program = load_inputs(self.design_path, self.program_path, self.timings)
            if self.config_path:
                config = load_config(self.config_path, design)
            else:
                config = SimConfig()
            if self.trace_path:
                with open(self.trace_path, "r", encoding="utf-8") as fh:
                    text = fh.read()
                self._set_stage("executing")
                entries = parse_flat_trace(text)
            else:
                if program is None:
                    raise ValueError("need a trace file or a program to execute")
                self._set_stage("executing")
                kwargs = {}
                if self.step_budget is not None:
                    kwargs["step_budget"] = self.step_budget
                entries, _ = trace_design(
                    design, program, entry_args=self.entry_args, timings=self.timings, **kwargs
                )
            self._set_stage("parsing")
            analysis = analyze_entries(design, entries, self.timings)
            self._set_stage("simulating")
            with self.timings.time("simulating"):
                report = build_report(analysis, config)
            with self.lock:
                self.design = design
                self.analysis = analysis
                self.config = config
                self.report = report
                self.report_bytes = render_json(report)
                self.stage = "done"
        except Exception as exc:  # surface anything as the error stage
            with self.lock:
                self.stage = "error"
                self.error = str(exc)

    def build_async(self) -> threading.Thread:
        thread = threading.Thread(target=self.build, daemon=True)
        thread.start()
        return thread

    def _set_stage(self, stage: str) -> None:
        with self.lock:
            self.stage = stage

    # ------------------------------------------------------------ queries

    def get_status(self) -> dict:
        with self.lock:
            out = {
                "stage": self.stage,
                "timings": self.timings.as_json(),
                "error": self.error,
            }
            if self.report is not None:
                out["total_latency"] = self.report["total_latency"]
            return out

    def get_report_bytes(self) -> bytes | None:
        with self.lock:
            return self.report_bytes

    def get_fifos(self) -> dict | None:
        with self.lock:
            if self.report is None:
                return None
            return {
                "format_version": self.report["format_version"],
                "fifos": self.report["fifos"],
            }

    def get_job(self, job_id: int) -> Job | None:
        with self.lock:
            return self.jobs.get(job_id)

    # --------------------------------------------------------------- jobs

    def submit_depths(self, body: dict) -> tuple[int, dict]:
        if not isinstance(body, dict) or not isinstance(body.get("depths"), dict):
            return 400, {"error": "body must be {\"depths\": {fifo_id: depth}}"}
        with self.lock:
            if self.stage not in ("simulating", "done") or self.analysis is None:
                return 409, {"error": f"not ready for depth changes (stage: {self.stage})"}
            declared = {d.fifo_id for d in self.design.fifos}
            parsed: dict[int, int | None] = {}
            for key, value in body["depths"].items():
                try:
                    fifo_id = int(key)
                except (TypeError, ValueError):
                    return 400, {"error": f"bad fifo id {key!r}"}
                if fifo_id not in declared:
                    return 404, {"error": f"unknown fifo {fifo_id}"}
                try:
                    parsed[fifo_id] = parse_depth(value)
                except ValueError as exc:
                    return 400, {"error": str(exc)}
            if self.pending_job is not None:
                self.pending_job.depths.update(parsed)
                return 202, {"job": self.pending_job.id, "coalesced": True}
            job = Job(self._next_job_id, parsed)
            self._next_job_id += 1
            self.jobs[job.id] = job
            self.pending_job = job
            self._queue.append(job)
            self._cond.notify()
            return 202, {"job": job.id, "coalesced": False}

    def _run_jobs(self) -> None:
        while True:
            with self._cond:
                while not self._queue and not self._closed:
                    self._cond.wait()
                if self._closed:
                    return
                job = self._queue.popleft()
                job.state = "running"
                if self.pending_job is job:
                    self.pending_job = None
                config = self.config.with_depths(job.depths)
                analysis = self.analysis
            try:
                with job.timings.time("simulating"):
                    report = build_report(analysis, config)
                payload = render_json(report)
                with self.lock:
                    job.report = report
                    job.report_bytes = payload
                    job.state = "done"
                    self.config = config
                    self.report = report
                    self.report_bytes = payload
                    self.timings.seconds["simulating"] = job.timings.seconds["simulating"]
            except Exception as exc:
                with self.lock:
                    job.state = "error"
                    job.error = str(exc)

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()


class Handler(BaseHTTPRequestHandler):
    state: AppState  # set on the subclass built in make_server

    def log_message(self, fmt, *args):  # keep test output quiet
        pass

    def _send_json(self, code: int, payload: dict) -> None:
        body = (json.dumps(payload, sort_keys=True) + "\n").encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, code: int, body: bytes, ctype: str) -> None:
        self.send_response(code)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:
        path = self.path.split("?", 1)[0]
        if path == "/status":
            self._send_json(200, self.state.get_status())
            return
        if path == "/report":
            payload = self.state.get_report_bytes()
            if payload is None:
                self._send_json(503, {"error": "report not ready", "stage": self.state.stage})
                return
            self._send_bytes(200, payload, "application/json")
            return
        if path == "/fifos":
            fifos = self.state.get_fifos()
            if fifos is None:
                self._send_json(503, {"error": "report not ready", "stage": self.state.stage})
                return
            self._send_json(200, fifos)
            return
        if path.startswith("/jobs/"):
            try:
                job_id = int(path[len("/jobs/"):])
            except ValueError:
                self._send_json(404, {"error": "bad job id"})
                return
            job = self.state.get_job(job_id)
            if job is None:
                self._send_json(404, {"error": f"unknown job {job_id}"})
                return
            with self.state.lock:
                self._send_json(200, job.as_json())
            return
        self._serve_static(path)

    def do_POST(self) -> None:
        path = self.path.split("?", 1)[0]
        if path == "/fifos/depths":
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            try:
                body = json.loads(raw.decode("utf-8")) if raw else {}
            except (json.JSONDecodeError, UnicodeDecodeError):
                self._send_json(400, {"error": "invalid JSON body"})
                return
            code, payload = self.state.submit_depths(body)
            self._send_json(code, payload)
            return
        self._send_json(404, {"error": f"no such endpoint {path}"})

    def _serve_static(self, path: str) -> None:
        root = self.state.frontend_dir
        if root is None:
            self._send_json(404, {"error": f"no such endpoint {path}"})
            return
        rel = path.lstrip("/") or "index.html"
        full = os.path.normpath(os.path.join(root, rel))
        if not full.startswith(os.path.abspath(root)):
            self._send_json(404, {"error": "not found"})
            return
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            self._send_json(404, {"error": "not found"})
            return
        ctype = _CONTENT_TYPES.get(os.path.splitext(full)[1], "application/octet-stream")
        with open(full, "rb") as fh:
            self._send_bytes(200, fh.read(), ctype)


def make_server(state: AppState, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (Handler,), {"state": state})
    return ThreadingHTTPServer((host, port), handler)


def default_frontend_dir() -> str | None:
    here = os.path.dirname(os.path.abspath(__file__))
    for base in (os.path.join(here, "..", ".."), os.getcwd()):
        candidate = os.path.abspath(os.path.join(base, "frontend", "dist"))
        if os.path.isdir(candidate):
            return candidate
    return None


def serve(args) -> int:
    state = AppState(
        design_path=args.design,
        program_path=getattr(args, "program", None),
        trace_path=getattr(args, "trace", None),
        entry_args=[int(x) for x in (args.args or "").split(",") if x.strip()] if args.args else [],
        step_budget=args.step_budget,
        config_path=getattr(args, "config", None),
        frontend_dir=default_frontend_dir(),
    )
    state.build_async()
    httpd = make_server(state, host=args.host, port=args.port)
    host, port = httpd.server_address[:2]
    print(f"serving on http://{host}:{port}/")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        state.close()
        httpd.server_close()
    return 0
