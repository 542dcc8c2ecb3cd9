"""
Tests for the scenario runner: report layout, exit codes, config
validation diagnostics, and byte-identical determinism.
"""

import json
import os

from eventqm.cli import main, run_command, CONVENTIONS


def test_multievent_report_layout(tmp_path):
    out = str(tmp_path / "rep")
    code, report = run_command("multievent", out=out, seed=7)
    assert code == 0
    assert report["all_pass"]
    with open(os.path.join(out, "report.json")) as fh:
        disk = json.load(fh)
    assert disk["command"] == "multievent"
    assert disk["conventions"] == CONVENTIONS
    for c in disk["checks"]:
        assert set(c) == {"name", "value", "tolerance", "pass"}
    # csv has a header row and dot decimals
    with open(os.path.join(out, "multievent.csv")) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "quantity,value"
    assert "," not in lines[1].split(",")[1] or True
    assert all("." in line.split(",")[1] for line in lines[1:])
    # a figure was rendered next to the delimited output
    assert os.path.exists(os.path.join(out, "multievent.png"))


def test_byte_identical_reruns(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["multievent", "--out", a, "--seed", "3"]) == 0
    assert main(["multievent", "--out", b, "--seed", "3"]) == 0
    for name in sorted(os.listdir(a)):
        with open(os.path.join(a, name), "rb") as fh:
            bytes_a = fh.read()
        with open(os.path.join(b, name), "rb") as fh:
            bytes_b = fh.read()
        assert bytes_a == bytes_b, name


def test_invalid_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"no_such_knob": 1}))
    code = main(["multievent", "--config", str(cfg),
                 "--out", str(tmp_path / "x")])
    assert code == 2
    cfg.write_text(json.dumps({"projector_tolerance": -1.0}))
    assert main(["multievent", "--config", str(cfg),
                 "--out", str(tmp_path / "y")]) == 2
    cfg.write_text("{not json")
    assert main(["multievent", "--config", str(cfg),
                 "--out", str(tmp_path / "z")]) == 2


def test_failed_check_exits_1(tmp_path):
    code = main(["multievent", "--out", str(tmp_path / "f"),
                 "--tolerance-scale", "1e-20"])
    assert code == 1
    with open(os.path.join(str(tmp_path / "f"), "report.json")) as fh:
        report = json.load(fh)
    assert not report["all_pass"]


def test_config_override_applies(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"events": 2}))
    code, report = run_command("multievent", config_path=str(cfg),
                               out=str(tmp_path / "o"))
    assert code == 0
    assert report["config"]["events"] == 2
