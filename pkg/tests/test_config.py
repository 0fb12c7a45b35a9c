import pytest

from perfpatch.config import PipelineConfig, config_from_mapping, env_overrides, load_config, write_config
from perfpatch.errors import ConfigError


def test_defaults_validate():
    cfg = PipelineConfig()
    assert cfg.budget == 1024 and cfg.codebleu_weights == (0.1, 0.1, 0.4, 0.4)
    assert cfg.weights.gamma == 0.4


@pytest.mark.parametrize("kw", [
    {"split_fractions": (0.5, 0.5, 0.5)},
    {"split_fractions": (1.2, -0.1, -0.1)},
    {"keywords": ()},
    {"budget": 0},
    {"begin_marker": "x", "end_marker": "x"},
    {"dedup_threshold": 0.0},
    {"suggest_split": "dev"},
    {"backend": "remote"},
    {"n_samples": 5, "top_k": 10},
    {"alpha": 1.0},
    {"codebleu_weights": (0.25, 0.25, 0.25, 0.3)},
    {"kilo": 1023},
])
def test_invalid_values_raise(kw):
    with pytest.raises(ConfigError):
        PipelineConfig(**kw)


def test_mapping_conversion():
    cfg = config_from_mapping({
        "repos": "a=/x, /y/b", "keywords": "perf|speed, up", "split_fractions": "0.6,0.2,0.2",
        "topk_ks": "1, 5", "budget": "512", "alpha": "0.01",
    })
    assert cfg.repos == ("a=/x", "/y/b")
    assert cfg.keywords == ("perf", "speed, up")
    assert cfg.split_fractions == (0.6, 0.2, 0.2) and cfg.topk_ks == (1, 5)
    assert cfg.budget == 512 and cfg.alpha == 0.01
    assert list(cfg.repo_map()) == ["a", "b"]


def test_unknown_and_bad_keys():
    with pytest.raises(ConfigError):
        config_from_mapping({"nope": "1"})
    with pytest.raises(ConfigError):
        config_from_mapping({"budget": "lots"})
    with pytest.raises(ConfigError):
        PipelineConfig(repos=("a=/x", "a=/y")).repo_map()


def test_file_env_and_anchoring(tmp_path):
    p = tmp_path / "cfg.ini"
    p.write_text("[pipeline]\nrepos = mini=repo\nwork_dir = out\nbudget = 800\n", encoding="utf-8")
    cfg = load_config(p, environ={"PERFPATCH_BUDGET": "900", "PERFPATCH_UNRELATED_THING": "1", "HOME": "/"})
    assert cfg.budget == 900
    assert cfg.repo_map()["mini"] == tmp_path / "repo"
    assert cfg.work_dir == str(tmp_path / "out")


def test_missing_section_and_file(tmp_path):
    p = tmp_path / "cfg.ini"
    p.write_text("[other]\nx = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(p, environ={})
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini", environ={})


def test_write_then_load_roundtrip(tmp_path):
    cfg = PipelineConfig(repos=("/abs/r",), keywords=("a, b", "c"), work_dir=str(tmp_path / "w"),
                         split_fractions=(0.7, 0.2, 0.1), judgments="", toolchain="")
    write_config(cfg, tmp_path / "c.ini")
    assert load_config(tmp_path / "c.ini", environ={}) == cfg


def test_env_overrides_only_known_fields():
    assert env_overrides({"PERFPATCH_TOP_K": "5", "PERFPATCH_FOO": "1"}) == {"top_k": "5"}
