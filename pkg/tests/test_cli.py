import json
import subprocess
import sys

import pytest

from scratch_anomaly.cli import render_text, run
from scratch_anomaly.synthetic import make_project, planted_bug_corpus

KEY, MOVE, SAY = "event_whenkeypressed", "motion_movesteps", "looks_say"


@pytest.fixture
def planted(tmp_path):
    planted_bug_corpus(tmp_path / "planted")
    return tmp_path / "planted"


@pytest.fixture
def eighteen_two(write_corpus):
    solutions = [{"Cat": [[KEY, MOVE, SAY]]}] * 18 + [{"Cat": [[KEY, SAY, MOVE]]}] * 2
    return write_corpus({f"sol_{i:02d}": make_project(s) for i, s in enumerate(solutions)})


def test_json_as_mode(planted, capsys):
    assert run(["detect", "--input", str(planted), "--mode", "as", "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["mode"] == "AS"
    assert [g["key"] for g in report["groups"]] == ["sprite1"]


@pytest.mark.parametrize("args", [
    ["--min-confidence", "1.5"],
    ["--min-confidence", "abc"],
    ["--min-support", "0"],
    ["--min-support", "lots"],
    ["--max-missing", "0"],
    ["--top", "-1"],
    ["--mode", "xx"],
    ["--format", "html"],
])
def test_usage_errors(args, tmp_path, capsys):
    # the directory does not exist: bad values must be rejected before any I/O
    assert run(["detect", "--input", str(tmp_path / "absent"), *args]) == 2
    assert capsys.readouterr().err


def test_missing_subcommand_or_input(capsys):
    assert run([]) == 2
    assert run(["detect"]) == 2


def test_help_exits_zero(capsys):
    assert run(["detect", "--help"]) == 0


def test_empty_directory(tmp_path, capsys):
    assert run(["detect", "--input", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert err.count("\n") == 1


def test_no_scripts_directory(write_corpus, capsys):
    root = write_corpus({"a": make_project()})
    assert run(["detect", "--input", str(root)]) == 3


def test_missing_directory_is_io_error(tmp_path, capsys):
    assert run(["detect", "--input", str(tmp_path / "absent")]) == 1


def test_text_report_zero_anomalies(write_corpus, capsys):
    root = write_corpus({f"s{i}": make_project({"Cat": [[KEY, MOVE]]}) for i in range(4)})
    assert run(["detect", "--input", str(root)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("Scratch anomaly report (mode AA)")
    assert out.rstrip().endswith("No anomalies above confidence threshold.")


def test_text_report_eighteen_two(eighteen_two, capsys):
    assert run(["detect", "--input", str(eighteen_two), "--min-confidence", "0.85"]) == 0
    out = capsys.readouterr().out
    first = out.split("\n#1 ", 1)[1].split("\n#2 ", 1)[0]
    assert "confidence 0.90" in first
    assert first.count("MISSING:") == 1


def test_text_report_planted_bug(planted, capsys):
    assert run(["detect", "--input", str(planted)]) == 0
    out = capsys.readouterr().out
    first = out.split("\n#1 ", 1)[1].split("\n#2 ", 1)[0]
    missing = [line for line in first.splitlines() if "MISSING:" in line]
    assert any(line.rstrip().endswith("-> motion_movesteps") for line in missing)


def test_text_and_json_same_order(planted, capsys):
    from scratch_anomaly.anomaly import detect
    from scratch_anomaly.miner import MinerConfig
    report = detect(planted, MinerConfig(min_confidence=0.0))
    text = render_text(report)
    locators = [line.strip() for line in text.splitlines() if line.strip().startswith("project ")]
    expected = [f"project {a['project']} / actor {a['actor']} / script {a['script_index']}"
                for a in report.to_dict()["anomalies"]]
    assert [loc.split(" [")[0] for loc in locators] == expected


def test_output_file_and_emitters(planted, tmp_path, capsys):
    out = tmp_path / "report.json"
    models = tmp_path / "models"
    patterns = tmp_path / "patterns.json"
    code = run(["detect", "--input", str(planted), "--format", "json", "--output", str(out),
                "--emit-models", str(models), "--emit-patterns", str(patterns)])
    assert code == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["violations_found"] == 2
    dots = sorted(models.glob("*.dot"))
    assert len(dots) == 20
    assert "digraph" in dots[0].read_text()
    [pattern] = json.loads(patterns.read_text())
    assert list(pattern) == ["group", "pattern_id", "properties", "support", "supporters"]
    assert pattern["support"] == 18
    assert len(pattern["supporters"]) == 18


def test_compare_modes_json(planted, capsys):
    assert run(["detect", "--input", str(planted), "--compare-modes", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["mode"] == "compare"
    assert data["aa"]["mode"] == "AA" and data["as"]["mode"] == "AS"
    assert len(data["overlap"]) == 2


def test_compare_modes_text(planted, capsys):
    assert run(["detect", "--input", str(planted), "--compare-modes"]) == 0
    out = capsys.readouterr().out
    assert "Mode comparison: AA violations 2, AS violations 2" in out


def test_flags_reach_config(planted, capsys):
    assert run(["detect", "--input", str(planted), "--format", "json", "--adjacent-only", "--no-self-pairs",
                "--min-support", "4", "--top", "1", "--recursive"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["config"]["adjacent_only"] is True
    assert data["config"]["no_self_pairs"] is True
    assert data["config"]["min_support"] == 4
    # with direct-successor pairs the deviants share no property with the pattern
    assert data["violations_found"] == 0


def test_top_truncates(planted, capsys):
    assert run(["detect", "--input", str(planted), "--format", "json", "--top", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["violations_found"] == 2
    assert [a["rank"] for a in data["anomalies"]] == [1]


def test_skipped_files_reported(planted, capsys):
    (planted / "zz_broken.sb3").write_bytes(b"not a zip")
    assert run(["detect", "--input", str(planted), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["corpus"]["projects"] == 20
    assert [s["file"] for s in data["corpus"]["skipped"]] == ["zz_broken.sb3"]


def test_module_entry_point(planted):
    proc = subprocess.run([sys.executable, "-m", "scratch_anomaly", "detect", "--input", str(planted),
                           "--format", "json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["violations_found"] == 2
