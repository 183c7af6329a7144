import json
import subprocess
import sys
from pathlib import Path

import pytest

from respo.cli import main
from respo.tsio import loads_ts

MODELS = Path(__file__).resolve().parent.parent / "models"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def analyze_json(capsys, *argv):
    code, out, err = run(capsys, "analyze", *argv, "--output", "json", "--no-timing")
    assert code == 0, err
    return json.loads(out), out


def test_window_backward(capsys):
    report, _ = analyze_json(capsys, MODELS / "window.rml", "--mode", "backward",
                             "--counterexample", MODELS / "window.cex")
    values = {k: v["value"] for k, v in report["actors"].items()}
    assert values == {"scheduler": "0", "Rebeca": "2/3", "Ada": "1/6", "Julia": "1/6",
                      "install": "0", "a_throws": "0", "j_throws": "0"}
    assert report["counterexample"] == "supplied"
    assert report["wall_ms"] is None
    assert any("Window" in w for w in report["warnings"])
    for key in ("actors", "mode", "gamma_empty", "gamma_full", "coalitions_evaluated", "wall_ms", "warnings"):
        assert key in report


def test_window_auto_counterexample(capsys):
    report, _ = analyze_json(capsys, MODELS / "window.rml", "--mode", "backward")
    assert report["counterexample"] == "derived"


def test_sweden_value_actors(capsys):
    report, _ = analyze_json(capsys, MODELS / "sweden.rml", "--actors", "value:t")
    positive = [k for k, v in report["actors"].items() if v["value_num"] > 0]
    assert positive == ["t=8", "t=9", "t=10", "t=13"]


def test_puzzle_box_action_actors(capsys):
    report, _ = analyze_json(capsys, MODELS / "puzzlebox.rml", "--actors", "action", "--clamp")
    assert {k: v["value"] for k, v in report["actors"].items()} == {"btn1": "1/2", "btn2": "0", "btn3": "1/2"}


def test_exact_output_is_deterministic(capsys):
    args = [MODELS / "window.rml", "--mode", "backward"]
    outs = {analyze_json(capsys, *args, "--threads", t)[1] for t in ("1", "2", "1")}
    assert len(outs) == 1


def test_sampling_output(capsys):
    report, _ = analyze_json(capsys, MODELS / "train_station.ts", "--algorithm", "sample",
                             "--samples", "2000", "--seed", "5")
    assert set(report["actors"]["A"]) == {"mean", "half_width", "samples"}
    assert abs(report["actors"]["A"]["mean"] - 2 / 3) < 0.05
    assert report["seed"] == 5


def test_table_output(capsys):
    code, out, _ = run(capsys, "analyze", MODELS / "train_station.ts")
    assert code == 0
    assert "2/3" in out and "time:" in out


def test_witnesses(capsys):
    report, _ = analyze_json(capsys, MODELS / "train_station.ts", "--witnesses")
    assert report["witnesses"]["A"] == []


def test_property_override_warns(capsys, tmp_path):
    report, _ = analyze_json(capsys, MODELS / "counters.rml", "--property", "x=5 & y=3", "--actors", "value:x")
    assert report["gamma_empty"] == 0
    assert any("overrides" in w for w in report["warnings"])


def test_manual_actors(capsys, tmp_path):
    sig = tmp_path / "sig.txt"
    sig.write_text("low: x<3\nhigh: x>=3\n")
    report, _ = analyze_json(capsys, MODELS / "counters.rml", "--property", "x=4 & y=0",
                             "--actors", f"manual:{sig}")
    assert set(report["actors"]) == {"low", "high"}


@pytest.mark.parametrize(
    "argv, code",
    [
        (["analyze", MODELS / "puzzlebox.rml", "--actors", "action"], 2),
        (["analyze", MODELS / "counters.rml", "--mode", "backward"], 2),
        (["analyze", MODELS / "missing.rml"], 2),
        (["analyze", MODELS / "sweden.rml", "--actors", "value:"], 2),
        (["analyze", MODELS / "sweden.rml", "--actors", "value:speed"], 2),
        (["analyze", MODELS / "sweden.rml", "--actors", "telepathy"], 2),
        (["analyze", MODELS / "train_station.ts", "--actors", "module"], 2),
        (["analyze", MODELS / "train_station.ts", "--actors", "value:x"], 2),
        (["analyze", MODELS / "sweden.rml", "--max-states", "10"], 3),
        (["analyze", MODELS / "sweden.rml", "--actors", "value:t", "--max-actors", "5"], 3),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_parse_error_location(capsys, tmp_path):
    bad = tmp_path / "bad.rml"
    bad.write_text("lightning = false;\nmodule M\n  x: [0..1] init 0;\n  [] y=1 -> x:=1;\nendmodule\n")
    code, _, err = run(capsys, "check", bad)
    assert code == 2
    assert "4:" in err and "bad.rml" in err


def test_env_state_cap(capsys, monkeypatch):
    monkeypatch.setenv("RESPO_MAX_STATES", "10")
    assert run(capsys, "analyze", MODELS / "sweden.rml", "--actors", "value:t")[0] == 3


def test_gen_and_reimport(capsys, tmp_path):
    out = tmp_path / "lin.ts"
    assert run(capsys, "gen", "linear", "--n", "50", "--m", "3", "-o", out)[0] == 0
    ts, sig = loads_ts(out.read_text())
    assert ts.num_states == 51 and sig.names == ("a0", "a1", "a2")
    code, text, _ = run(capsys, "gen", "random", "--n", "40", "--m", "2", "--seed", "9")
    assert code == 0 and text.startswith("ts v1 states=40")
    report, _ = analyze_json(capsys, out)
    assert report["gamma_full"] == 0


def test_transform_sched_round_trips(capsys, tmp_path):
    out = tmp_path / "sched.rml"
    assert run(capsys, "transform", MODELS / "window.rml", "--to", "sched", "-o", out)[0] == 0
    code, text, _ = run(capsys, "check", out, "--build")
    assert code == 0 and "119 states" in text
    report, _ = analyze_json(capsys, out, "--actors", "value:active", "--mode", "backward")
    assert report["actors"]["active=2"]["value"] == "2/3"


def test_transform_action(capsys):
    code, text, _ = run(capsys, "transform", MODELS / "counters.rml", "--to", "action")
    assert code == 0
    ts, sig = loads_ts(text)
    assert sig is not None and "reset" in sig.names


def test_check_summaries(capsys):
    code, text, _ = run(capsys, "check", MODELS / "counters.rml", "--build")
    assert code == 0 and "36 states" in text
    code, text, _ = run(capsys, "check", MODELS / "train_station.ts")
    assert code == 0 and "actors: A, B, C" in text


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "respo", "check", str(MODELS / "counters.rml")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("ok:")
