"""Random small-design generator for the equivalence and property suites.

Each case is a (design, program) pair built together so the program is
guaranteed to execute: call sites form a tree, loops never contain calls
or cross-function FIFO traffic, and each FIFO's (writer, reader) pair is
chosen so every token is written before it is read in sequential
execution order.  Timing still gets interesting because sibling calls can
share a stage (parallel execution), FIFO depths are small, and the order
of two FIFOs' operations inside a function is random — which is exactly
how timing-only deadlocks arise from a sequentially valid program.
"""

from __future__ import annotations

import random

from tracesim.design import design_from_json
from tracesim.engine import SimConfig
from tracesim.miniir import execute, program_from_json


def gen_case(rng: random.Random):
    """Return (design, program, design_json, program_json)."""
    n_fns = rng.randint(2, 4)
    callers = {i: rng.randrange(0, i) for i in range(1, n_fns)}

    fns = []
    for i in range(n_fns):
        n_blocks = rng.randint(1, 6)
        loop = None
        if n_blocks >= 3 and rng.random() < 0.45:
            lo = rng.randint(1, n_blocks - 2)
            hi = rng.randint(lo, n_blocks - 2)
            loop = (lo, hi, rng.randint(2, 3))
        blocks = []
        start = rng.randint(1, 2)
        for _ in range(n_blocks):
            span = rng.randint(1, 3)
            blocks.append({"start": start, "end": start + span - 1, "io": []})
            # next block: overlap by one stage, adjacent, or one empty stage
            start = start + span - 1 + rng.choice([0, 1, 1, 2])
        fns.append({"blocks": blocks, "loop": loop, "calls": []})

    def non_loop_blocks(fn) -> list[int]:
        loop = fn["loop"]
        ids = range(len(fn["blocks"]))
        if loop is None:
            return list(ids)
        return [b for b in ids if not (loop[0] <= b <= loop[1])]

    # place call sites (outside loops, so every function runs exactly once)
    for callee, caller in callers.items():
        fn = fns[caller]
        b = rng.choice(non_loop_blocks(fn))
        block = fn["blocks"][b]
        stage = rng.randint(block["start"], block["end"])
        block["io"].append({"kind": "subcall", "callee": callee, "stage": stage})
        fn["calls"].append(callee)

    # sequential execution intervals, for write-before-read placement
    intervals: dict[int, tuple[int, int]] = {}
    clock = [0]

    def walk(i: int) -> None:
        enter = clock[0]
        clock[0] += 1
        for block in fns[i]["blocks"]:
            for io in block["io"]:
                if io["kind"] == "subcall":
                    walk(io["callee"])
        clock[0] += 1
        intervals[i] = (enter, clock[0])

    walk(0)

    cross_pairs = [
        (a, b)
        for a in range(n_fns)
        for b in range(n_fns)
        if a != b and intervals[a][1] <= intervals[b][0]
    ]

    n_fifos = rng.randint(0, 3)
    fifo_decls = []
    for fifo_id in range(n_fifos):
        if cross_pairs and rng.random() < 0.65:
            w, r = rng.choice(cross_pairs)
            tokens = rng.randint(1, 4)
            for _ in range(tokens):
                for fn_i, kind in ((w, "fifo_write"), (r, "fifo_read")):
                    fn = fns[fn_i]
                    b = rng.choice(non_loop_blocks(fn))
                    block = fn["blocks"][b]
                    stage = rng.randint(block["start"], block["end"])
                    block["io"].append({"kind": kind, "fifo": fifo_id, "stage": stage})
        else:
            fn = fns[rng.randrange(n_fns)]
            b = rng.randrange(len(fn["blocks"]))
            block = fn["blocks"][b]
            tokens = rng.randint(1, 2)
            for kind in ("fifo_write",) * tokens + ("fifo_read",) * tokens:
                stage = rng.randint(block["start"], block["end"])
                block["io"].append({"kind": kind, "fifo": fifo_id, "stage": stage})
        depth = "unbounded" if rng.random() < 0.25 else rng.randint(1, 3)
        fifo_decls.append({"id": fifo_id, "name": f"ch{fifo_id}", "depth": depth})

    # assemble the design
    functions = {}
    for i, fn in enumerate(fns):
        blocks_json = []
        for bb_id, block in enumerate(fn["blocks"]):
            span = block["end"] - block["start"] + 1
            instr_stages = [[k, block["start"] + k] for k in range(span)]
            io_ops = []
            for k, io in enumerate(block["io"]):
                instr = 100 + k
                instr_stages.append([instr, io["stage"]])
                if io["kind"] == "subcall":
                    io_ops.append({"instr": instr, "kind": "subcall", "callee": f"f{io['callee']}"})
                else:
                    io_ops.append({"instr": instr, "kind": io["kind"], "fifo": io["fifo"]})
            blocks_json.append(
                {
                    "id": bb_id,
                    "instr_stages": instr_stages,
                    "terminator_stage": block["end"],
                    "io_ops": io_ops,
                }
            )
        functions[f"f{i}"] = {"blocks": blocks_json}

    design_json = {
        "format_version": 1,
        "top": "f0",
        "fifos": fifo_decls,
        "axi_ports": [],
        "functions": functions,
    }

    # assemble the program mirroring the io order exactly
    prog_fns = {}
    for i, fn in enumerate(fns):
        loop = fn["loop"]
        n_blocks = len(fn["blocks"])
        blocks_ops = []
        reg = [0]

        def fresh() -> str:
            reg[0] += 1
            return f"r{reg[0]}"

        for b, block in enumerate(fn["blocks"]):
            ops = []
            for io in block["io"]:
                if io["kind"] == "subcall":
                    ops.append({"op": "call", "fn": f"f{io['callee']}"})
                elif io["kind"] == "fifo_write":
                    tmp = fresh()
                    ops.append({"op": "const", "dst": tmp, "value": rng.randrange(100)})
                    ops.append({"op": "fifo_write", "fifo": io["fifo"], "src": tmp})
                else:
                    ops.append({"op": "fifo_read", "fifo": io["fifo"], "dst": fresh()})
            if loop is not None and b == loop[0] - 1:
                ops.append({"op": "const", "dst": "loopc", "value": 0})
            if loop is not None and b == loop[1]:
                ops.append({"op": "bin", "fn": "add", "dst": "loopc", "a": "loopc", "b": 1})
                cond = fresh()
                ops.append({"op": "bin", "fn": "lt", "dst": cond, "a": "loopc", "b": loop[2]})
                ops.append({"op": "branch", "cond": cond, "then": loop[0], "else": b + 1})
            elif b == n_blocks - 1:
                ops.append({"op": "return"})
            else:
                ops.append({"op": "jump", "bb": b + 1})
            blocks_ops.append(ops)
        prog_fns[f"f{i}"] = {"params": [], "blocks": blocks_ops}

    program_json = {"format_version": 1, "functions": prog_fns}
    return (
        design_from_json(design_json),
        program_from_json(program_json),
        design_json,
        program_json,
    )


def gen_config(rng: random.Random, design) -> SimConfig:
    """A random depth/visibility configuration for an existing design."""
    overrides = {}
    for decl in design.fifos:
        if rng.random() < 0.5:
            overrides[decl.fifo_id] = rng.choice([1, 2, 3, 4, None])
    return SimConfig(fifo_depths=overrides, visibility=rng.choice([0, 1, 1]))


def gen_traced_case(rng: random.Random):
    """Generate a case and execute it; returns (design, entries)."""
    design, program, _, _ = gen_case(rng)
    entries, _ = execute(program, design)
    return design, entries
