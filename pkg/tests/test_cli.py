import json
import subprocess
import sys
import xml.etree.ElementTree as ET
from importlib import resources
from pathlib import Path

import pytest

from winkler.cli import main
from winkler.decomposition import REPORT_FIELDS

FIX = Path(__file__).parent / "fixtures"
GOLDEN = FIX / "golden"
GROUPED = resources.files("winkler") / "data" / "grouped_example.csv"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_three_rows_golden(capsys):
    code, out, err = run(["evaluate", FIX / "three_rows.csv"], capsys)
    assert code == 0
    assert out == (GOLDEN / "three_rows_report.json").read_text()
    data = json.loads(out)
    assert data["n"] == 3
    assert abs(data["unc"] - data["dsc"] + data["mcb"] - data["mean_score"]) < 1e-9
    assert "small sample" in err


def test_bad_bound_cites_line(capsys):
    code, _, err = run(["evaluate", FIX / "bad_line5.csv"], capsys)
    assert code == 2
    assert "line 5" in err


def test_short_row_and_bad_number(capsys, tmp_path):
    code, _, err = run(["evaluate", FIX / "short_row.csv"], capsys)
    assert code == 2 and "line 5" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("lower,upper,observed\n0,1,0.5\n0,1,1_0\n")
    code, _, err = run(["score", bad], capsys)
    assert code == 2 and "line 3" in err
    bad.write_text("lower,upper,observed\n0,1,nan\n")
    code, _, err = run(["score", bad], capsys)
    assert code == 2 and "line 2" in err
    bad.write_text("lower,observed\n0,1\n")
    code, _, err = run(["score", bad], capsys)
    assert code == 2 and "upper" in err


def test_midpoint_needs_flag(capsys):
    code, _, err = run(["evaluate", FIX / "three_rows.csv", "--order", "midpoint"], capsys)
    assert code == 2 and "allow_unsafe_order" in err
    code, out, err = run(["evaluate", FIX / "three_rows.csv", "--order", "midpoint",
                          "--allow-unsafe-order"], capsys)
    assert code == 0 and "unsafe order" in err
    assert any("unsafe" in w for w in json.loads(out)["warnings"])


def test_score_examples(capsys, tmp_path):
    code, out, err = run(["score", FIX / "three_rows.csv"], capsys)
    assert code == 0
    assert out == (GOLDEN / "three_rows_scores.csv").read_text()
    assert "n=3 mean_score=8.0" in err
    one = tmp_path / "one.csv"
    one.write_text("lower,upper,observed\n0,1,2\n")
    code, out, _ = run(["score", one], capsys)
    assert out.splitlines()[1].endswith(",21.0")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["score", FIX / "three_rows.csv", "--out", a], capsys)[0] == 0
    assert run(["score", FIX / "three_rows.csv", "--transform", "identity", "--out", b], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_empty_data_section(capsys, tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("lower,upper,observed\n")
    assert run(["score", empty], capsys)[0] == 2
    assert run(["evaluate", empty], capsys)[0] == 2


def test_levels_and_transform_flags(capsys, tmp_path):
    code, out, _ = run(["evaluate", FIX / "three_rows.csv", "--levels", "0.05,0.95"], capsys)
    assert code == 0
    assert json.loads(out) == json.loads((GOLDEN / "three_rows_report.json").read_text())
    code, _, err = run(["evaluate", FIX / "three_rows.csv", "--levels", "0.9"], capsys)
    assert code == 2
    table = tmp_path / "g.csv"
    table.write_text("x,g\n-10,-5\n0,0\n10,20\n")
    code, out, _ = run(["evaluate", FIX / "three_rows.csv", "--transform", f"table:{table}"], capsys)
    assert code == 0 and set(REPORT_FIELDS) <= set(json.loads(out))
    code, out, _ = run(["evaluate", FIX / "three_rows.csv", "--transform", "log-shift:1"], capsys)
    assert code == 0
    code, _, err = run(["evaluate", FIX / "three_rows.csv", "--transform", "log-shift:-0.1"], capsys)
    assert code == 2 and "log-shift" in err
    code, _, _ = run(["evaluate", FIX / "three_rows.csv", "--transform", "cube"], capsys)
    assert code == 2


def test_grouped_end_to_end(capsys, tmp_path):
    recal = tmp_path / "recal.csv"
    svg = tmp_path / "plot.svg"
    code, out, err = run(["evaluate", GROUPED, "--emit-recalibrated", recal, "--plot", svg], capsys)
    assert code == 0
    assert out == (GOLDEN / "grouped_example_report.json").read_text()
    assert svg.read_text() == (GOLDEN / "grouped_example.svg").read_text()
    reports = json.loads(out)
    assert [r["group"] for r in reports] == ["adaptive", "constant", "shifted", "noisy"]
    assert len({r["unc"] for r in reports}) == 1
    for r in reports:
        assert set(REPORT_FIELDS) <= set(r)
        assert abs(r["unc"] - r["dsc"] + r["mcb"] - r["mean_score"]) < 1e-9 * max(1, r["mean_score"])
    root = ET.parse(svg).getroot()
    labels = {c.get("data-label") for c in root.iter("{http://www.w3.org/2000/svg}circle")}
    assert labels == {"adaptive", "constant", "shifted", "noisy"}
    rows = recal.read_text().splitlines()
    assert rows[0] == "group,line,lower,upper,observed,recal_lower,recal_upper"
    assert len(rows) == 1 + 4 * 400
    assert "adaptive: small sample" in err


def test_grouped_mismatched_outcomes_refuse_plot(capsys, tmp_path):
    g = tmp_path / "g.csv"
    g.write_text("lower,upper,observed,group\n0,1,0.5,A\n1,2,3,B\n0.5,2.5,1,A\n1,3,2,B\n")
    out_json = tmp_path / "r.json"
    code, _, err = run(["evaluate", g, "--plot", tmp_path / "p.svg", "--out", out_json], capsys)
    assert code == 2 and "uncertainty" in err
    assert not out_json.exists()
    code, out, _ = run(["evaluate", g], capsys)
    assert code == 0 and len(json.loads(out)) == 2
    code, out, _ = run(["evaluate", g, "--group-col", "none"], capsys)
    assert code == 0 and json.loads(out)["n"] == 4


def test_simulate_outputs_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["simulate", "--n", "1000", "--seed", "1", "--alpha", "0.1", "--out-dir", d], capsys)[0] == 0
    for name in ("study.csv", "reports.json", "mcb_dsc.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rows = (a / "study.csv").read_text().splitlines()
    assert len(rows) == 7
    ideal = rows[1].split(",")
    assert ideal[0] == "ideal" and abs(float(ideal[3]) - 3.2897) < 1e-4
    reports = json.loads((a / "reports.json").read_text())
    assert [r["forecaster"] for r in reports][:2] == ["ideal", "unconditional"]


def test_simulate_refusals(capsys, tmp_path):
    assert run(["simulate", "--n", "1", "--out-dir", tmp_path], capsys)[0] == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(["simulate", "--n", "10", "--out-dir", blocker / "sub"], capsys)
    assert code == 2 and "output directory" in err


def test_internal_error_exit_code(capsys, monkeypatch):
    import winkler.cli as cli
    from winkler.scoring import InvariantError

    def boom(_):
        raise InvariantError("exactness failed")

    monkeypatch.setattr(cli, "decompose_full", boom)
    code, _, err = run(["evaluate", FIX / "three_rows.csv"], capsys)
    assert code == 3 and "exactness failed" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "winkler", "score", str(FIX / "three_rows.csv")],
                          capture_output=True, text=True, env={"WINKLER_LOG": "DEBUG", "PATH": ""})
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "three_rows_scores.csv").read_text()


@pytest.mark.parametrize("argv", [["--help"], ["evaluate", "--help"]])
def test_help(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 0
