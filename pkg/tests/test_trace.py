import os

import pytest

from tracesim.design import load_design
from tracesim.trace import (
    TraceStructureError,
    TraceSyntaxError,
    build_call_tree,
    flatten,
    format_flat_trace,
    parse_flat_trace,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="module")
def design():
    return load_design(os.path.join(FIXTURES, "wrapper_design.json"))


@pytest.fixture(scope="module")
def golden_text():
    with open(os.path.join(FIXTURES, "wrapper_trace.txt"), "r", encoding="utf-8") as fh:
        return fh.read()


def test_parse_format_round_trip(golden_text):
    entries = parse_flat_trace(golden_text)
    assert len(entries) == 22
    assert format_flat_trace(entries) == golden_text


def test_entries_carry_line_numbers(golden_text):
    entries = parse_flat_trace(golden_text)
    assert [e.line for e in entries] == list(range(1, len(entries) + 1))


@pytest.mark.parametrize(
    "text,needle",
    [
        ("warp_drive 1\n", "unknown entry kind"),
        ("fifo_read\n", "takes 1 argument"),
        ("fifo_read 1 2\n", "takes 1 argument"),
        ("fifo_read x\n", "bad integer field"),
        ("trace_bb f\n", "takes 2 argument"),
        ("\n", "blank line"),
        ("call_exit f\n", "call_exit without matching call_enter"),
    ],
)
def test_syntax_errors(text, needle):
    with pytest.raises(TraceSyntaxError, match=needle):
        parse_flat_trace(text)


def test_dangling_call_enter():
    with pytest.raises(TraceStructureError, match="never exited"):
        parse_flat_trace("call_enter f\n")


def test_tree_shape(design, golden_text):
    root = build_call_tree(parse_flat_trace(golden_text), design)
    assert root.path == "wrapper"
    paths = [n.path for n in root.walk()]
    assert paths == [
        "wrapper",
        "wrapper/0:producer",
        "wrapper/1:worker",
        "wrapper/1:worker/0:leaf",
    ]
    worker = next(n for n in root.walk() if n.function == "worker")
    assert [b.bb_id for b in worker.blocks] == [0, 1, 3, 0, 2, 3, 4]


def test_events_attach_to_enclosing_block(design, golden_text):
    root = build_call_tree(parse_flat_trace(golden_text), design)
    producer = next(n for n in root.walk() if n.function == "producer")
    kinds = [ev.kind for ev in producer.blocks[0].events]
    assert kinds == ["fifo_write", "fifo_write"]


def test_flatten_is_inverse(design, golden_text):
    entries = parse_flat_trace(golden_text)
    assert flatten(build_call_tree(entries, design)) == entries


@pytest.mark.parametrize(
    "text,needle",
    [
        ("fifo_read 0\n", "event outside any call"),
        ("trace_bb worker 0\n", "block outside any call"),
        ("call_enter worker\ncall_exit worker\n", "is not the top function"),
        ("call_enter wrapper\ntrace_bb worker 0\ncall_exit wrapper\n", "inside call to"),
        ("call_enter wrapper\ntrace_bb wrapper 9\ncall_exit wrapper\n", "unknown bb"),
        ("call_enter wrapper\nfifo_read 0\ncall_exit wrapper\n", "event before any block"),
        (
            "call_enter wrapper\ncall_enter producer\ncall_exit producer\ncall_exit wrapper\n",
            "sub-call before any block",
        ),
        ("call_enter ghost\ncall_exit ghost\n", "unknown function"),
        (
            "call_enter wrapper\ntrace_bb wrapper 0\ncall_exit wrapper\n"
            "call_enter wrapper\ntrace_bb wrapper 0\ncall_exit wrapper\n",
            "more than one top-level call",
        ),
    ],
)
def test_structure_errors(design, text, needle):
    with pytest.raises(TraceStructureError, match=needle):
        build_call_tree(parse_flat_trace(text), design)


def test_call_exit_name_mismatch(design):
    # parse-level nesting is balanced, but names cross
    entries = parse_flat_trace(
        "call_enter wrapper\n"
        "trace_bb wrapper 0\n"
        "call_enter producer\n"
        "call_exit worker\n"
        "call_exit wrapper\n"
    )
    with pytest.raises(TraceStructureError, match="does not match"):
        build_call_tree(entries, design)


def test_empty_trace(design):
    with pytest.raises(TraceStructureError, match="no top-level call"):
        build_call_tree([], design)
