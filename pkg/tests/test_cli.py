from __future__ import annotations

import json
import subprocess
import sys

import pytest

from cantor_forge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_thickness_command(capsys):
    code, out, _ = run(capsys, "thickness", "middle-1/3")
    assert code == 0 and json.loads(out)["thickness"] == "1"
    code, out, _ = run(capsys, "thickness", "middle-1/6")
    assert json.loads(out)["thickness"] == "5/2"


def test_thickness_of_restriction_file(capsys, tmp_path):
    p = tmp_path / "sub.json"
    p.write_text(json.dumps({"base": {"hull": ["0", "1"], "children": [["0", "1/3"], ["2/3", "1/3"]]},
                             "window": ["2/9", "7/9"]}))
    code, out, _ = run(capsys, "thickness", str(p))
    assert code == 0 and json.loads(out)["thickness"] == "1/3"


def test_parse_errors_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "thickness", str(bad))[0] == 2
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert run(capsys, "replay", str(empty))[0] == 2
    assert run(capsys, "thickness", "middle-1/4", "--epsilon", "2")[0] == 2
    assert run(capsys, "tree", "middle-1/6", "middle-1/6", "--seed", "nonsense")[0] == 2


def test_depth_exhausted_exit_3(capsys):
    assert run(capsys, "intersect", "middle-1/6", "middle-1/6", "--depth", "3", "--tol", "1/1000000000")[0] == 3


def test_condition_violation_exit_4(capsys):
    code, _, err = run(capsys, "tree", "middle-1/4", "middle-1/4", "--chain", "2")
    assert code == 4 and "Hunt-Kan-Yorke" in err


def test_check_command(capsys):
    _, out, _ = run(capsys, "check", "middle-1/4", "middle-1/4")
    data = json.loads(out)
    assert data["newhouse"] is True and data["hky"]["satisfied"] is False
    _, out, _ = run(capsys, "check", "middle-1/6", "middle-1/6")
    assert json.loads(out)["hky"]["satisfied"] is True


def test_intersect_then_replay(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    code, out, _ = run(capsys, "intersect", "middle-1/4", "middle-1/4", "--tol", "1/1000000", "--out", str(cert))
    assert code == 0 and json.loads(out)["width"] <= 1e-6
    code, out, _ = run(capsys, "replay", str(cert))
    assert code == 0 and json.loads(out)["valid"] is True

    data = json.loads(cert.read_text())
    data["levels"][2]["a"]["interval"][1] = "1"
    cert.write_text(json.dumps(data))
    code, out, _ = run(capsys, "replay", str(cert))
    rep = json.loads(out)
    assert code == 5 and rep["valid"] is False and rep["level"] == 2


def test_tree_json_and_svg_are_deterministic(capsys, tmp_path):
    outs = []
    for i in range(2):
        svg = tmp_path / f"t{i}.svg"
        code, out, _ = run(capsys, "tree", "middle-1/6", "middle-1/6", "--chain", "4", "--svg", str(svg))
        assert code == 0
        outs.append((out, svg.read_text()))
    assert outs[0] == outs[1]
    data = json.loads(outs[0][0])
    assert data["verify"]["passed"] and data["verify"]["edges_checked"] == 3
    assert outs[0][1].startswith("<svg") and outs[0][1].count("<circle") == 4

    placement = tmp_path / "placement.json"
    placement.write_text(outs[0][0])
    code, out, _ = run(capsys, "render", str(placement), "--depth", "3")
    assert code == 0 and out.count("<rect") == 1 + 64


def test_stream_checkpoint_resume(capsys, tmp_path):
    ck = tmp_path / "ck.json"
    code, full, _ = run(capsys, "tree", "middle-1/6", "middle-1/6", "--stream", "12")
    assert code == 0
    full = full.splitlines()
    assert [json.loads(l)["id"] for l in full[:2]] == ["", "1"]
    code, head, err = run(capsys, "tree", "middle-1/6", "middle-1/6", "--stream", "7", "--checkpoint", str(ck))
    assert code == 0 and json.loads(err)["verify"]["passed"]
    code, tail, _ = run(capsys, "tree", "middle-1/6", "middle-1/6", "--stream", "5", "--resume", str(ck))
    assert code == 0
    assert head.splitlines() + tail.splitlines() == full


def test_window_and_pinned(capsys, tmp_path):
    w = tmp_path / "w.json"
    code, _, _ = run(capsys, "window", "middle-1/6", "--center", "25/144,25/144", "--t-sq", "3481/10368",
                     "--x1", "7/12", "--c", "1/2", "--out", str(w))
    assert code == 0
    assert run(capsys, "replay", str(w))[0] == 0
    code, out, _ = run(capsys, "pinned", "middle-1/6", "middle-1/6", "--pin", "25/144,25/144",
                       "--t-sq", "3481/10368", "--tol", "1/1000000")
    assert code == 0 and json.loads(out)["status"] == "certified"


def test_diagonal_single_sample(capsys):
    code, out, err = run(capsys, "diagonal", "middle-1/6", "middle-1/6", "--chain", "2", "--samples", "2")
    assert code == 0 and json.loads(err) == {"certified": 2, "samples": 2}
    assert len(out.splitlines()) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cantor_forge", "thickness", "middle-1/10"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["thickness"] == "9/2"
    assert subprocess.run([sys.executable, "-m", "cantor_forge"], capture_output=True).returncode == 2
