import json
import os

import pytest

from tracesim.cli import main

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fx(name):
    return os.path.join(FIXTURES, name)


def test_trace_writes_golden_file(tmp_path, capsys):
    out = tmp_path / "trace.txt"
    code = main(
        [
            "trace",
            "--design", fx("wrapper_design.json"),
            "--program", fx("wrapper_program.json"),
            "--out", str(out),
        ]
    )
    assert code == 0
    with open(fx("wrapper_trace.txt"), "r", encoding="utf-8") as fh:
        assert out.read_text() == fh.read()
    assert "27 steps, 10 blocks, 4 io events, 4 calls" in capsys.readouterr().err


def test_trace_to_stdout(capsys):
    code = main(
        ["trace", "--design", fx("wrapper_design.json"), "--program", fx("wrapper_program.json")]
    )
    assert code == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("call_enter wrapper")


def test_analyze_text_output(capsys):
    code = main(
        [
            "analyze",
            "--design", fx("wrapper_design.json"),
            "--trace", fx("wrapper_trace.txt"),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "total latency: 10 cycles" in out
    assert "worker" in out


def test_analyze_json_matches_out_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(
        [
            "analyze",
            "--design", fx("wrapper_design.json"),
            "--trace", fx("wrapper_trace.txt"),
            "--json",
            "--out", str(out),
        ]
    )
    assert code == 0
    stdout = capsys.readouterr().out
    assert out.read_bytes() == stdout.encode("utf-8")
    report = json.loads(stdout)
    assert report["total_latency"] == 10
    assert report["top"] == "wrapper"


def test_analyze_from_program_equals_analyze_from_trace(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(
        [
            "analyze",
            "--design", fx("wrapper_design.json"),
            "--trace", fx("wrapper_trace.txt"),
            "--out", str(a),
        ]
    ) == 0
    assert main(
        [
            "analyze",
            "--design", fx("wrapper_design.json"),
            "--program", fx("wrapper_program.json"),
            "--out", str(b),
        ]
    ) == 0
    assert a.read_bytes() == b.read_bytes()


def test_analyze_with_config_override(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"fifo_depths": {"0": 1}, "fifo_visibility_latency": 0}))
    code = main(
        [
            "analyze",
            "--design", fx("wrapper_design.json"),
            "--trace", fx("wrapper_trace.txt"),
            "--config", str(cfg),
            "--json",
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["total_latency"] == 9
    assert report["fifos"][0]["depth"] == 1


def test_fifos_table(capsys):
    code = main(
        [
            "fifos",
            "--design", fx("wrapper_design.json"),
            "--trace", fx("wrapper_trace.txt"),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0].split() == ["id", "name", "depth", "observed", "optimal"]
    assert lines[1].split() == ["0", "feed", "2", "2", "2"]


def test_deadlock_exits_2_but_still_reports(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(
        [
            "analyze",
            "--design", fx("deadlock_design.json"),
            "--program", fx("deadlock_program.json"),
            "--out", str(out),
        ]
    )
    assert code == 2
    assert "DEADLOCK detected" in capsys.readouterr().out
    report = json.loads(out.read_bytes())
    assert report["deadlock"] is not None
    assert report["total_latency"] is None


def test_missing_file_is_a_usage_error(tmp_path, capsys):
    code = main(
        [
            "analyze",
            "--design", str(tmp_path / "nope.json"),
            "--trace", fx("wrapper_trace.txt"),
        ]
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_invalid_design_json_is_a_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["analyze", "--design", str(bad), "--trace", fx("wrapper_trace.txt")])
    assert code == 1
    assert "invalid JSON" in capsys.readouterr().err


def test_bad_args_list_rejected(capsys):
    with pytest.raises(SystemExit):
        main(
            [
                "trace",
                "--design", fx("wrapper_design.json"),
                "--program", fx("wrapper_program.json"),
                "--args", "1,zap",
            ]
        )
