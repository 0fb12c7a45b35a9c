import json
from dataclasses import replace

import pytest

from perfpatch.config import PipelineConfig
from perfpatch.errors import ConfigError, StageFailed
from perfpatch.pipeline import STAGES, check_stages, run_pipeline

ARTIFACTS = ("commits.jsonl", "examples.jsonl", "dataset.jsonl", "suggestions.jsonl", "evaluation.json",
             "verdicts.jsonl", "bench.jsonl", "report.txt", "report.json")


def cfg_for(repo, work, **kw):
    return PipelineConfig(repos=(f"mini={repo}",), work_dir=str(work), suggest_split="all", **kw)


@pytest.fixture(scope="module")
def first_run(minirepo, tmp_path_factory):
    work = tmp_path_factory.mktemp("work")
    cfg = cfg_for(minirepo, work)
    return cfg, run_pipeline(cfg)


def test_full_run_artifacts(first_run):
    cfg, res = first_run
    assert res.exit_status == 0 and res.ran == list(STAGES)
    work = res.work_dir
    for name in ARTIFACTS:
        assert (work / name).exists(), name
    verdicts = [json.loads(l) for l in (work / "verdicts.jsonl").read_text().splitlines()]
    assert any(v["stage_reached"] == "PassedUnitTests" for v in verdicts)
    bench = [json.loads(l) for l in (work / "bench.jsonl").read_text().splitlines()]
    assert any(b["improved"] for b in bench)


def test_rerun_skips_everything(first_run):
    cfg, _ = first_run
    again = run_pipeline(cfg)
    assert again.ran == [] and again.skipped == list(STAGES)


def test_config_change_reruns_downstream_only(first_run, tmp_path):
    import shutil

    cfg, res = first_run
    work = tmp_path / "w"
    shutil.copytree(res.work_dir, work)
    out = run_pipeline(replace(cfg, work_dir=str(work), topk_ks=(1, 5)))
    # validate and bench do not read the evaluation, so only evaluate and report rerun
    assert out.ran == ["evaluate", "report"]


def test_deleted_output_is_rebuilt(first_run, tmp_path):
    import shutil

    cfg, res = first_run
    work = tmp_path / "w"
    shutil.copytree(res.work_dir, work)
    (work / "report.txt").unlink()
    out = run_pipeline(replace(cfg, work_dir=str(work)))
    assert out.ran == ["report"]


def test_partial_run_needs_inputs(tmp_path, minirepo):
    with pytest.raises(StageFailed) as e:
        run_pipeline(cfg_for(minirepo, tmp_path), ["dataset"])
    assert e.value.stage == "dataset"


@pytest.mark.parametrize("sel", [["mine", "dataset"], ["build", "mine"], ["bogus"], ["mine", "mine"]])
def test_stage_selection_errors(sel):
    with pytest.raises(ConfigError):
        check_stages(sel)


def test_bad_fractions_rejected_before_running(tmp_path, minirepo):
    with pytest.raises(ConfigError):
        cfg_for(minirepo, tmp_path, split_fractions=(0.9, 0.2, 0.1))


def test_missing_repo_is_stage_failure(tmp_path):
    with pytest.raises(StageFailed) as e:
        run_pipeline(PipelineConfig(repos=(str(tmp_path / "nope"),), work_dir=str(tmp_path / "w")), ["mine"])
    assert e.value.stage == "mine"


def test_default_split_leaves_single_project_in_train(tmp_path, minirepo):
    cfg = PipelineConfig(repos=(f"mini={minirepo}",), work_dir=str(tmp_path))
    run_pipeline(cfg, ["mine", "build", "dataset", "suggest"])
    rows = [json.loads(l) for l in (tmp_path / "dataset.jsonl").read_text().splitlines()]
    assert {r["split"] for r in rows} == {"train"}
    assert (tmp_path / "suggestions.jsonl").read_text() == ""
