"""Stage orchestration with file hand-off and content-hash resumption.

Each stage reads artifacts from the work directory, writes its own, and
records a fingerprint of everything it read (upstream artifact bytes, the
config fields it uses, external inputs such as repository tips) in
``state.json``. A stage whose fingerprint and outputs are unchanged is
skipped.
"""
from __future__ import annotations

import hashlib
import io
import json
import logging
import subprocess
import tarfile
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import __version__
from .bench_stats import judge, parse_summary_text
from .config import PipelineConfig
from .errors import ConfigError, PerfPatchError, StageFailed
from .example_builder import (
    BuildStats,
    TransformationExample,
    build_examples,
    count_tokens,
    dedup,
    split_by_project,
)
from .metrics.report import evaluate, read_judgments
from .miner import CommitRecord, crawl_history, read_commits, write_jsonl
from .report import BENCH_FILE, EVALUATION_FILE, VERDICTS_FILE, render_report
from .suggest.backends import EndpointConfig, RemoteBackend, RuleBackend
from .suggest.engine import Suggestion, read_suggestions, suggest_for_examples, write_suggestions
from .validator import (
    Stage,
    ToolchainConfig,
    fixture_toolchain,
    patched_tree,
    read_verdicts,
    run_benchmark,
    validate_many,
    write_verdicts,
)

log = logging.getLogger(__name__)

STAGES = ("mine", "build", "dataset", "suggest", "evaluate", "validate", "bench", "report")
STATE_FILE = "state.json"
COMMITS_FILE = "commits.jsonl"
EXAMPLES_FILE = "examples.jsonl"
DATASET_FILE = "dataset.jsonl"
SUGGESTIONS_FILE = "suggestions.jsonl"

# stage -> (artifacts read, artifacts written, config fields used)
_SPEC: dict[str, tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]] = {
    "mine": ((), (COMMITS_FILE,), ("repos", "branch", "keywords", "extension")),
    "build": ((COMMITS_FILE,), (EXAMPLES_FILE,), ("budget", "begin_marker", "end_marker")),
    "dataset": ((EXAMPLES_FILE,), (DATASET_FILE,), ("dedup_threshold", "split_fractions", "split_seed")),
    "suggest": (
        (DATASET_FILE,), (SUGGESTIONS_FILE,),
        ("suggest_split", "backend", "endpoint", "n_samples", "top_k", "sample_seed", "begin_marker", "end_marker"),
    ),
    "evaluate": ((SUGGESTIONS_FILE, DATASET_FILE), (EVALUATION_FILE,), ("codebleu_weights", "topk_ks", "judgments")),
    "validate": ((SUGGESTIONS_FILE, DATASET_FILE, COMMITS_FILE), (VERDICTS_FILE,), ("repos", "toolchain")),
    "bench": (
        (VERDICTS_FILE, SUGGESTIONS_FILE, DATASET_FILE, COMMITS_FILE), (BENCH_FILE,),
        ("repos", "toolchain", "alpha", "kilo"),
    ),
    "report": ((), ("report.txt", "report.json"), ("report_text", "report_json")),
}
# report reads whichever of these exist
_REPORT_INPUTS = (VERDICTS_FILE, EVALUATION_FILE, BENCH_FILE)


@dataclass
class StageOutcome:
    stage: str
    ran: bool
    outputs: dict[str, str] = field(default_factory=dict)  # name -> sha256
    detail: str = ""


@dataclass
class PipelineResult:
    exit_status: int
    work_dir: Path
    outcomes: list[StageOutcome] = field(default_factory=list)

    @property
    def ran(self) -> list[str]:
        return [o.stage for o in self.outcomes if o.ran]

    @property
    def skipped(self) -> list[str]:
        return [o.stage for o in self.outcomes if not o.ran]


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _file_sha(path: Path) -> str:
    return _sha(path.read_bytes())


def _dump_jsonl(rows, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in rows:
            fh.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def check_stages(stages: list[str] | tuple[str, ...] | None) -> list[str]:
    """Validate a stage selection: known names, pipeline order, no gaps."""
    if not stages:
        return list(STAGES)
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        raise ConfigError(f"unknown stages {unknown}; choose from {list(STAGES)}")
    idx = [STAGES.index(s) for s in stages]
    if len(set(idx)) != len(idx) or idx != sorted(idx) or idx[-1] - idx[0] != len(idx) - 1:
        raise ConfigError(f"stages must be a contiguous run in pipeline order {list(STAGES)}, got {list(stages)}")
    return list(stages)


# -- repository trees ---------------------------------------------------------------


def _git(repo: Path, *args: str) -> bytes:
    try:
        return subprocess.run(["git", "-C", str(repo), *args], check=True, capture_output=True).stdout
    except subprocess.CalledProcessError as exc:
        raise PerfPatchError(f"git {' '.join(args)} failed in {repo}: {exc.stderr.decode(errors='replace').strip()}") from None
    except FileNotFoundError:
        raise PerfPatchError("git is not installed") from None


def _repo_tips(cfg: PipelineConfig) -> dict[str, str]:
    out = {}
    for name, path in cfg.repo_map().items():
        try:
            out[name] = _git(path, "rev-parse", "--verify", "--quiet", cfg.branch + "^{commit}").decode().strip()
        except PerfPatchError:
            out[name] = f"unreadable:{path}"
    return out


def export_tree(repo: Path, rev: str, dest: Path) -> Path:
    """Write the files of ``rev`` into ``dest`` (no .git)."""
    data = _git(repo, "archive", "--format=tar", rev)
    dest.mkdir(parents=True, exist_ok=True)
    with tarfile.open(fileobj=io.BytesIO(data)) as tar:
        members = [m for m in tar.getmembers() if not (m.name.startswith("/") or ".." in Path(m.name).parts)]
        tar.extractall(dest, members=members)
    return dest


class _TreeCache:
    """Before-state trees keyed by (repo id, parent commit)."""

    def __init__(self, cfg: PipelineConfig, commits: list[CommitRecord], root: Path):
        self.repos = cfg.repo_map()
        self.parent = {(c.repo_id, c.commit_id): c.parent_id for c in commits}
        self.root = root
        self.trees: dict[tuple[str, str], Path] = {}

    def before_tree(self, repo_id: str, commit_id: str) -> Path:
        parent = self.parent.get((repo_id, commit_id))
        if parent is None:
            raise PerfPatchError(f"commit {commit_id} of {repo_id} is not in the mined commits")
        if not parent:
            raise PerfPatchError(f"commit {commit_id} has no parent to validate against")
        key = (repo_id, parent)
        if key not in self.trees:
            if repo_id not in self.repos:
                raise PerfPatchError(f"repository {repo_id!r} is not configured")
            self.trees[key] = export_tree(self.repos[repo_id], parent, self.root / f"{len(self.trees):04d}")
        return self.trees[key]


def _toolchain(cfg: PipelineConfig) -> ToolchainConfig:
    return ToolchainConfig.from_file(cfg.toolchain) if cfg.toolchain else fixture_toolchain()


def _backend(cfg: PipelineConfig):
    if cfg.backend == "rules":
        return RuleBackend(markers=cfg.markers)
    return RemoteBackend(EndpointConfig(cfg.endpoint, cfg.backend_timeout, cfg.max_in_flight))


def _dataset(work: Path) -> list[tuple[TransformationExample, str]]:
    return [(TransformationExample.from_dict(d), d["split"]) for d in _read_jsonl(work / DATASET_FILE)]


# -- stages -------------------------------------------------------------------------


def _stage_mine(cfg: PipelineConfig, work: Path) -> str:
    repos = cfg.repo_map()
    if not repos:
        raise ConfigError("no repositories configured")
    rows = []
    for name, path in repos.items():
        for rec in crawl_history(path, cfg.branch, keywords=cfg.keywords, extension=cfg.extension, repo_id=name):
            if rec.is_perf and len(rec.file_changes) == 1:
                rows.append(rec)
    write_jsonl(rows, work / COMMITS_FILE)
    return f"{len(rows)} single-file perf commits"


def _stage_build(cfg: PipelineConfig, work: Path) -> str:
    stats = BuildStats()
    rows = []
    for rec in read_commits(work / COMMITS_FILE):
        rows.extend(build_examples(rec, cfg.budget, cfg.markers, stats))
    over = [e.example_id for e in rows if count_tokens(e.input_text) > cfg.budget]
    if over:
        raise PerfPatchError(f"{len(over)} examples exceed the token budget")
    _dump_jsonl((e.to_dict() for e in rows), work / EXAMPLES_FILE)
    return f"{stats.examples} examples, {stats.focal_too_large} over budget, {stats.unparseable} unparseable"


def _stage_dataset(cfg: PipelineConfig, work: Path) -> str:
    examples = [TransformationExample.from_dict(d) for d in _read_jsonl(work / EXAMPLES_FILE)]
    kept = dedup(examples, cfg.dedup_threshold)
    split = split_by_project(kept, cfg.split_fractions, cfg.split_seed) if kept else None
    where = {}
    if split is not None:
        where = {**{r: "train" for r in split.train}, **{r: "validation" for r in split.validation},
                 **{r: "test" for r in split.test}}
    _dump_jsonl((dict(e.to_dict(), split=where[e.repo_id]) for e in kept), work / DATASET_FILE)
    return f"{len(kept)} of {len(examples)} examples kept"


def _stage_suggest(cfg: PipelineConfig, work: Path) -> str:
    chosen = [ex for ex, sp in _dataset(work) if cfg.suggest_split in ("all", sp)]
    sugg = suggest_for_examples(chosen, _backend(cfg), cfg.n_samples, cfg.top_k, cfg.sample_seed,
                                workers=cfg.max_in_flight if cfg.backend == "remote" else 1)
    write_suggestions(sugg, work / SUGGESTIONS_FILE)
    return f"{len(sugg)} suggestions for {len(chosen)} examples"


def _stage_evaluate(cfg: PipelineConfig, work: Path) -> str:
    sugg = read_suggestions(work / SUGGESTIONS_FILE)
    with_sugg = {s.example_id for s in sugg}
    truth = {ex.example_id: ex.output_text for ex, sp in _dataset(work)
             if cfg.suggest_split in ("all", sp) or ex.example_id in with_sugg}
    judgments = read_judgments(cfg.judgments) if cfg.judgments else None
    rep = evaluate(sugg, truth, judgments, cfg.topk_ks, cfg.weights)
    (work / EVALUATION_FILE).write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return f"{len(truth)} examples scored"


def _stage_validate(cfg: PipelineConfig, work: Path) -> str:
    sugg = read_suggestions(work / SUGGESTIONS_FILE)
    examples = {ex.example_id: ex for ex, _ in _dataset(work)}
    tc = _toolchain(cfg)
    with tempfile.TemporaryDirectory(prefix="perfpatch-trees-") as tmp:
        cache = _TreeCache(cfg, read_commits(work / COMMITS_FILE), Path(tmp))
        by_tree: dict[Path, list[Suggestion]] = {}
        for s in sugg:
            ex = examples[s.example_id]
            by_tree.setdefault(cache.before_tree(ex.repo_id, ex.commit_id), []).append(s)
        verdicts = {}
        for tree, group in by_tree.items():
            for s, v in zip(group, validate_many(group, tree, tc, cfg.validate_workers)):
                verdicts[s.suggestion_id] = v
    write_verdicts((verdicts[s.suggestion_id] for s in sugg), work / VERDICTS_FILE)
    passed = sum(v.stage_reached is Stage.PASSED_UNIT_TESTS for v in verdicts.values())
    return f"{len(sugg)} suggestions validated, {passed} passed unit tests"


def _stage_bench(cfg: PipelineConfig, work: Path) -> str:
    tc = _toolchain(cfg)
    verdicts = read_verdicts(work / VERDICTS_FILE)
    if not tc.bench_command:
        _dump_jsonl([], work / BENCH_FILE)
        return "no bench command configured"
    passed = {v.suggestion_id for v in verdicts if v.stage_reached is Stage.PASSED_UNIT_TESTS}
    sugg = [s for s in read_suggestions(work / SUGGESTIONS_FILE) if s.suggestion_id in passed]
    examples = {ex.example_id: ex for ex, _ in _dataset(work)}
    rows = []
    with tempfile.TemporaryDirectory(prefix="perfpatch-bench-") as tmp:
        cache = _TreeCache(cfg, read_commits(work / COMMITS_FILE), Path(tmp) / "base")
        baselines: dict[Path, list] = {}
        for i, s in enumerate(sugg):
            ex = examples[s.example_id]
            base_tree = cache.before_tree(ex.repo_id, ex.commit_id)
            if base_tree not in baselines:
                baselines[base_tree] = parse_summary_text(run_benchmark(base_tree, tc), cfg.kilo)
            cand_tree = patched_tree(s, base_tree, Path(tmp) / f"cand{i:05d}")
            cand = parse_summary_text(run_benchmark(cand_tree, tc), cfg.kilo)
            j = judge(baselines[base_tree], cand, cfg.alpha)
            rows.append(dict(j.to_dict(), suggestion_id=s.suggestion_id, example_id=s.example_id,
                             focal_signature=s.focal_signature))
    _dump_jsonl(rows, work / BENCH_FILE)
    return f"{sum(r['improved'] for r in rows)} of {len(rows)} suggestions improved"


def _stage_report(cfg: PipelineConfig, work: Path) -> str:
    (work / "report.txt").write_text(render_report(work, "text"), encoding="utf-8")
    (work / "report.json").write_text(render_report(work, "json"), encoding="utf-8")
    for target, name in ((cfg.report_text, "report.txt"), (cfg.report_json, "report.json")):
        if target and target != name:
            dest = Path(target) if Path(target).is_absolute() else work / target
            dest.write_bytes((work / name).read_bytes())
    return "report written"


_RUNNERS: dict[str, Callable[[PipelineConfig, Path], str]] = {
    "mine": _stage_mine, "build": _stage_build, "dataset": _stage_dataset, "suggest": _stage_suggest,
    "evaluate": _stage_evaluate, "validate": _stage_validate, "bench": _stage_bench, "report": _stage_report,
}


# -- driver -------------------------------------------------------------------------


def _fingerprint(stage: str, cfg: PipelineConfig, work: Path) -> str:
    reads, _, keys = _SPEC[stage]
    if stage == "report":
        reads = tuple(n for n in _REPORT_INPUTS if (work / n).exists())
    doc: dict = {"stage": stage, "version": __version__, "config": {k: cfg.to_dict()[k] for k in keys}}
    doc["inputs"] = {n: _file_sha(work / n) for n in reads}
    if stage in ("mine", "validate", "bench"):
        doc["repos"] = _repo_tips(cfg)
    if stage in ("validate", "bench") and cfg.toolchain:
        doc["toolchain"] = _file_sha(Path(cfg.toolchain))
    if stage == "evaluate" and cfg.judgments:
        doc["judgments"] = _file_sha(Path(cfg.judgments))
    return _sha(json.dumps(doc, sort_keys=True).encode())


def _load_state(work: Path) -> dict:
    p = work / STATE_FILE
    if not p.exists():
        return {}
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except ValueError:
        log.warning("ignoring corrupt %s", p)
        return {}


def run_pipeline(cfg: PipelineConfig, stages: list[str] | tuple[str, ...] | None = None,
                 force: bool = False) -> PipelineResult:
    """Run ``stages`` (default: all) in order inside ``cfg.work_dir``.

    Raises ConfigError for bad selections and StageFailed (naming the stage)
    when a stage cannot complete.
    """
    cfg.validate()
    chosen = check_stages(stages)
    work = Path(cfg.work_dir)
    work.mkdir(parents=True, exist_ok=True)
    state = _load_state(work)
    result = PipelineResult(0, work)
    for stage in chosen:
        reads, writes, _ = _SPEC[stage]
        missing = [n for n in reads if not (work / n).exists()]
        if missing:
            raise StageFailed(stage, f"missing input artifacts {missing}; run the earlier stages first")
        try:
            fp = _fingerprint(stage, cfg, work)
        except (OSError, PerfPatchError) as exc:
            raise StageFailed(stage, str(exc)) from exc
        prev = state.get(stage, {})
        outputs_ok = all((work / n).exists() and _file_sha(work / n) == prev.get("outputs", {}).get(n) for n in writes)
        if not force and prev.get("fingerprint") == fp and outputs_ok:
            log.info("stage %s: inputs unchanged, skipped", stage)
            result.outcomes.append(StageOutcome(stage, False, prev["outputs"], "unchanged"))
            continue
        log.info("stage %s: running", stage)
        try:
            detail = _RUNNERS[stage](cfg, work)
        except StageFailed:
            raise
        except (PerfPatchError, OSError, ValueError, KeyError) as exc:
            raise StageFailed(stage, f"{type(exc).__name__}: {exc}") from exc
        outputs = {n: _file_sha(work / n) for n in writes}
        state[stage] = {"fingerprint": fp, "outputs": outputs}
        (work / STATE_FILE).write_text(json.dumps(state, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log.info("stage %s: %s", stage, detail)
        result.outcomes.append(StageOutcome(stage, True, outputs, detail))
    return result
