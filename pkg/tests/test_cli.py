import json
import shutil
import subprocess
import sys

import pytest

from perfpatch.cli import main
from perfpatch.fixtures.minirepo import create_minirepo


@pytest.fixture(scope="module")
def flow(tmp_path_factory):
    """Run the subcommands in pipeline order once; tests inspect the files."""
    d = tmp_path_factory.mktemp("cli")
    repo = create_minirepo(d / "repo")
    rc = {}
    rc["mine"] = main(["mine", "--repo", str(repo), "--perf-only", "--single-file", "--repo-id", "mini",
                       "--out", str(d / "commits.jsonl")])
    rc["build"] = main(["build-examples", "--commits", str(d / "commits.jsonl"), "--out", str(d / "ex.jsonl")])
    rc["dedup"] = main(["dataset", "dedup", "--examples", str(d / "ex.jsonl"), "--out", str(d / "dd.jsonl")])
    rc["split"] = main(["dataset", "split", "--examples", str(d / "dd.jsonl"), "--seed", "3",
                        "--out-dir", str(d / "split")])
    rc["suggest"] = main(["suggest", "--example", str(d / "dd.jsonl"), "--n", "10", "--top", "5",
                          "--out", str(d / "sugg.jsonl")])
    rc["evaluate"] = main(["evaluate", "--suggestions", str(d / "sugg.jsonl"), "--truth", str(d / "dd.jsonl"),
                           "--report", str(d / "evaluation.json")])
    # validate against the pre-commit tree
    before = d / "before"
    shutil.copytree(repo, before)
    subprocess.run(["git", "checkout", "-q", "HEAD~2"], cwd=before, check=True)
    rc["validate"] = main(["validate", "--suggestions", str(d / "sugg.jsonl"), "--repo", str(before),
                           "--out", str(d / "verdicts.jsonl")])
    return d, rc


def test_all_subcommands_succeed(flow):
    _, rc = flow
    assert rc == dict.fromkeys(rc, 0)


def test_mine_and_build_outputs(flow):
    d, _ = flow
    (commit,) = [json.loads(l) for l in open(d / "commits.jsonl")]
    assert commit["is_perf"] and commit["repo_id"] == "mini"
    (ex,) = [json.loads(l) for l in open(d / "ex.jsonl")]
    assert ex["focal_signature"] == "bool IsEmpty()"


def test_split_files(flow):
    d, _ = flow
    split = json.loads((d / "split" / "split.json").read_text())
    assert split == {"train": ["mini"], "validation": [], "test": []}
    assert (d / "split" / "test.jsonl").read_text() == ""


def test_validate_and_evaluate(flow):
    d, _ = flow
    (v,) = [json.loads(l) for l in open(d / "verdicts.jsonl")]
    assert v["stage_reached"] == "PassedUnitTests"
    assert json.loads((d / "evaluation.json").read_text())["verbatim_pct"] == 100.0


def test_report_command(flow, capsys):
    d, _ = flow
    assert main(["report", "--in", str(d), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["funnel"]["total"] == 1
    assert main(["report", "--in", str(d)]) == 0
    assert "Passed unit tests" in capsys.readouterr().out


SUMMARY = "Method;Mean;StdDev;Iterations;Q1;Q3;Allocated\nA;{m} ns;1.0 ns;20;{q1} ns;{q3} ns;{a} B\n"


def test_bench_compare(tmp_path, capsys):
    base = tmp_path / "b.csv"
    base.write_text(SUMMARY.format(m=100, q1=99, q3=101, a=64), encoding="utf-8")
    fast = tmp_path / "c.csv"
    fast.write_text(SUMMARY.format(m=50, q1=49, q3=51, a=32), encoding="utf-8")
    assert main(["bench-compare", "--baseline", str(base), "--candidate", str(fast), "--out", str(tmp_path / "j.json")]) == 0
    assert capsys.readouterr().out.strip() == "improved: true"
    assert json.loads((tmp_path / "j.json").read_text())["improved"] is True
    assert main(["bench-compare", "--baseline", str(base), "--candidate", str(base)]) == 0
    assert capsys.readouterr().out.strip() == "improved: false"


def test_run_command(tmp_path, capsys):
    repo = create_minirepo(tmp_path / "repo")
    cfg = tmp_path / "cfg.ini"
    cfg.write_text("[pipeline]\nrepos = mini=repo\nsuggest_split = all\nwork_dir = work\n", encoding="utf-8")
    assert main(["run", "--config", str(cfg)]) == 0
    assert (tmp_path / "work" / "report.txt").exists()
    capsys.readouterr()
    assert main(["run", "--config", str(cfg), "--stages", "report"]) == 0
    assert "skipped" in capsys.readouterr().out
    assert main(["run", "--config", str(cfg), "--stages", "mine,report"]) == 2


def test_errors_exit_2(tmp_path, capsys):
    assert main(["report", "--in", str(tmp_path / "missing")]) == 2
    assert main(["mine", "--repo", str(tmp_path), "--out", str(tmp_path / "c.jsonl")]) == 2
    assert "perfpatch: error:" in capsys.readouterr().err


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "perfpatch.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("mine", "build-examples", "dataset", "suggest", "evaluate", "validate", "bench-compare", "report"):
        assert cmd in out.stdout
