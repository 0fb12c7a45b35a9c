"""Pipeline configuration: one INI section, overridable from the environment.

Every field of :class:`PipelineConfig` can be set under ``[pipeline]`` in the
config file, or through ``PERFPATCH_<FIELD>`` (upper case) in the
environment. Environment values win. Lists are comma separated; the keyword
list is separated by ``|`` because keywords may contain commas.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping

from .bench_stats import DEFAULT_ALPHA
from .errors import ConfigError
from .example_builder import BEGIN_MARKER, DEFAULT_BUDGET, END_MARKER
from .metrics.codebleu import CodeBleuWeights
from .miner import DEFAULT_KEYWORDS

ENV_PREFIX = "PERFPATCH_"
SECTION = "pipeline"
SPLITS = ("train", "validation", "test", "all")
BACKENDS = ("rules", "remote")


@dataclass(frozen=True)
class PipelineConfig:
    # mining
    repos: tuple[str, ...] = ()  # "path" or "name=path"
    branch: str = "main"
    keywords: tuple[str, ...] = tuple(DEFAULT_KEYWORDS)
    extension: str = ".cs"
    # examples and dataset
    budget: int = DEFAULT_BUDGET
    begin_marker: str = BEGIN_MARKER
    end_marker: str = END_MARKER
    dedup_threshold: float = 0.9
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    split_seed: int = 0
    # suggestions
    suggest_split: str = "test"
    backend: str = "rules"
    endpoint: str = ""
    backend_timeout: float = 60.0
    max_in_flight: int = 4
    n_samples: int = 2000
    top_k: int = 100
    sample_seed: int = 0
    # evaluation and validation
    codebleu_weights: tuple[float, float, float, float] = (0.1, 0.1, 0.4, 0.4)
    topk_ks: tuple[int, ...] = (1, 10, 100, 500)
    judgments: str = ""
    toolchain: str = ""  # empty: the bundled fixture toolchain
    validate_workers: int = 1
    alpha: float = DEFAULT_ALPHA
    kilo: int = 1024
    # outputs
    work_dir: str = "perfpatch-work"
    report_text: str = "report.txt"
    report_json: str = "report.json"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        fr = self.split_fractions
        if len(fr) != 3 or any(f < 0 for f in fr) or abs(sum(fr) - 1.0) > 1e-9:
            raise ConfigError(f"split_fractions must be three non-negative numbers summing to 1, got {fr}")
        if not self.keywords or any(not k.strip() for k in self.keywords):
            raise ConfigError("keywords must be a non-empty list of non-empty strings")
        if self.budget <= 0:
            raise ConfigError(f"budget must be positive, got {self.budget}")
        if not self.begin_marker or not self.end_marker or self.begin_marker == self.end_marker:
            raise ConfigError("begin_marker and end_marker must be distinct and non-empty")
        if not 0.0 < self.dedup_threshold <= 1.0:
            raise ConfigError(f"dedup_threshold must be in (0, 1], got {self.dedup_threshold}")
        if self.suggest_split not in SPLITS:
            raise ConfigError(f"suggest_split must be one of {SPLITS}, got {self.suggest_split!r}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.backend == "remote" and not self.endpoint:
            raise ConfigError("the remote backend needs an endpoint")
        if not self.n_samples >= self.top_k >= 1:
            raise ConfigError(f"need n_samples >= top_k >= 1, got {self.n_samples}, {self.top_k}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if len(self.codebleu_weights) != 4:
            raise ConfigError(f"codebleu_weights needs four numbers, got {self.codebleu_weights}")
        try:
            CodeBleuWeights(*self.codebleu_weights)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.kilo not in (1000, 1024):
            raise ConfigError(f"kilo must be 1000 or 1024, got {self.kilo}")
        if self.validate_workers < 1 or self.max_in_flight < 1:
            raise ConfigError("worker counts must be at least 1")

    @property
    def markers(self) -> tuple[str, str]:
        return (self.begin_marker, self.end_marker)

    @property
    def weights(self) -> CodeBleuWeights:
        return CodeBleuWeights(*self.codebleu_weights)

    def repo_map(self) -> dict[str, Path]:
        """Repository id -> path, in config order."""
        out: dict[str, Path] = {}
        for entry in self.repos:
            name, sep, path = entry.partition("=")
            if not sep:
                path, name = entry, Path(entry).resolve().name
            name, path = name.strip(), path.strip()
            if name in out:
                raise ConfigError(f"repository id {name!r} is listed twice")
            out[name] = Path(path)
        return out

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v) for f in fields(self)}


# -- parsing ------------------------------------------------------------------------


def _convert(name: str, raw: str):
    f = _FIELDS[name]
    default = f.default
    raw = raw.strip()
    try:
        if name == "keywords":
            return tuple(k.strip() for k in raw.split("|") if k.strip())
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.replace("\n", ",").split(",") if x.strip()]
            if name in ("split_fractions", "codebleu_weights"):
                return tuple(float(x) for x in items)
            if name == "topk_ks":
                return tuple(int(x) for x in items)
            return tuple(items)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r} ({exc})") from None
    return raw


_FIELDS = {f.name: f for f in fields(PipelineConfig)}


def config_from_mapping(values: Mapping[str, str], base: PipelineConfig | None = None) -> PipelineConfig:
    unknown = sorted(set(values) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    kwargs = {k: _convert(k, v) for k, v in values.items()}
    try:
        return replace(base or PipelineConfig(), **kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def env_overrides(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    out = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name in _FIELDS:
                out[name] = value
    return out


def load_config(path: str | Path | None = None, environ: Mapping[str, str] | None = None) -> PipelineConfig:
    """File values, then environment overrides, on top of the defaults.

    Relative ``repos``, ``toolchain``, ``judgments`` and ``work_dir`` paths in
    a file are taken relative to the file's directory.
    """
    values: dict[str, str] = {}
    if path is not None:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            ok = cp.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not ok:
            raise ConfigError(f"cannot read config file {path}")
        if not cp.has_section(SECTION):
            raise ConfigError(f"{path}: missing [{SECTION}] section")
        values = dict(cp[SECTION])
    cfg = config_from_mapping(values)
    if path is not None:
        cfg = _anchor(cfg, Path(path).resolve().parent)
    env = env_overrides(environ)
    return config_from_mapping(env, cfg) if env else cfg


def _anchor(cfg: PipelineConfig, root: Path) -> PipelineConfig:
    def fix(p: str) -> str:
        return p if not p or Path(p).is_absolute() else str(root / p)

    repos = []
    for entry in cfg.repos:
        name, sep, p = entry.partition("=")
        repos.append(f"{name}={fix(p)}" if sep else fix(entry))
    return replace(cfg, repos=tuple(repos), toolchain=fix(cfg.toolchain), judgments=fix(cfg.judgments),
                   work_dir=fix(cfg.work_dir))


def write_config(cfg: PipelineConfig, path: str | Path) -> None:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    sec = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "keywords":
            sec[f.name] = "|".join(v)
        elif isinstance(v, tuple):
            sec[f.name] = ", ".join(str(x) for x in v)
        else:
            sec[f.name] = str(v)
    cp[SECTION] = sec
    with open(path, "w", encoding="utf-8") as fh:
        cp.write(fh)
