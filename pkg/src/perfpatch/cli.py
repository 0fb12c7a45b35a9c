"""``perfpatch`` command line."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import PerfPatchError

log = logging.getLogger("perfpatch")


def _fractions(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def cmd_mine(a) -> int:
    from .miner import crawl_history, write_jsonl

    kw = {"repo_id": a.repo_id} if a.repo_id else {}
    if a.keywords:
        kw["keywords"] = tuple(k for k in a.keywords.split("|") if k)
    rows = []
    for rec in crawl_history(a.repo, a.branch, max_commits=a.max_commits, **kw):
        if a.perf_only and not rec.is_perf:
            continue
        if a.single_file and len(rec.file_changes) != 1:
            continue
        rows.append(rec)
    n = write_jsonl(rows, a.out)
    print(f"wrote {n} commits to {a.out}")
    return 0


def cmd_build_examples(a) -> int:
    from .example_builder import BuildStats, build_examples, write_examples
    from .miner import read_commits

    stats = BuildStats()
    out = []
    for rec in read_commits(a.commits):
        out.extend(build_examples(rec, a.budget, (a.begin_marker, a.end_marker), stats))
    write_examples(out, a.out)
    print(f"wrote {stats.examples} examples to {a.out} "
          f"(skipped {stats.focal_too_large} over budget, {stats.unparseable} unparseable)")
    return 0


def cmd_dataset_dedup(a) -> int:
    from .example_builder import dedup, read_examples, write_examples

    examples = read_examples(a.examples)
    kept = dedup(examples, a.threshold)
    write_examples(kept, a.out)
    print(f"kept {len(kept)} of {len(examples)} examples")
    return 0


def cmd_dataset_split(a) -> int:
    from .example_builder import read_examples, split_by_project, write_examples

    examples = read_examples(a.examples)
    split = split_by_project(examples, a.fractions, a.seed)
    parts = split.assign(examples)
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, rows in parts.items():
        write_examples(rows, out / f"{name}.jsonl")
    (out / "split.json").write_text(
        json.dumps({"train": split.train, "validation": split.validation, "test": split.test}, indent=2) + "\n",
        encoding="utf-8",
    )
    print(", ".join(f"{k}: {len(v)} examples" for k, v in parts.items()))
    return 0


def cmd_suggest(a) -> int:
    from .example_builder import read_examples
    from .suggest.backends import make_backend
    from .suggest.engine import suggest_for_examples, write_suggestions

    backend = make_backend(a.backend, a.endpoint, a.timeout, a.max_in_flight)
    examples = read_examples(a.example)
    sugg = suggest_for_examples(examples, backend, a.n, a.top, a.seed,
                                workers=a.max_in_flight if a.backend == "remote" else 1)
    write_suggestions(sugg, a.out)
    print(f"wrote {len(sugg)} suggestions for {len(examples)} examples to {a.out}")
    return 0


def cmd_evaluate(a) -> int:
    from .metrics.codebleu import CodeBleuWeights
    from .metrics.report import evaluate, read_judgments, read_truth
    from .suggest.engine import read_suggestions

    weights = CodeBleuWeights(*a.weights)
    rep = evaluate(read_suggestions(a.suggestions), read_truth(a.truth),
                   read_judgments(a.judgments) if a.judgments else None, weights=weights)
    Path(a.report).write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"verbatim {rep.verbatim_pct:.1f}%  abstracted {rep.abstracted_pct:.1f}%  CodeBLEU {rep.codebleu_mean:.4f}")
    return 0


def cmd_validate(a) -> int:
    from .suggest.engine import read_suggestions
    from .validator import ToolchainConfig, fixture_toolchain, summarize, validate_many, write_verdicts

    tc = fixture_toolchain() if a.toolchain == "fixture" else ToolchainConfig.from_file(a.toolchain)
    verdicts = validate_many(read_suggestions(a.suggestions), a.repo, tc, a.workers)
    write_verdicts(verdicts, a.out)
    s = summarize(verdicts)
    print("  ".join(f"{k}: {v}" for k, v in s.stage_counts.items()))
    return 0


def cmd_bench_compare(a) -> int:
    from .bench_stats import judge, parse_summary

    j = judge(parse_summary(a.baseline, a.kilo), parse_summary(a.candidate, a.kilo), a.alpha)
    text = json.dumps(j.to_dict(), indent=2, sort_keys=True) + "\n"
    if a.out:
        Path(a.out).write_text(text, encoding="utf-8")
    print(f"improved: {str(j.improved).lower()}")
    return 0


def cmd_report(a) -> int:
    from .report import render_report

    if not Path(a.in_dir).is_dir():
        raise PerfPatchError(f"{a.in_dir} is not a directory")
    sys.stdout.write(render_report(a.in_dir, a.format))
    return 0


def cmd_run(a) -> int:
    from .config import load_config
    from .pipeline import run_pipeline

    cfg = load_config(a.config)
    if a.work_dir:
        from dataclasses import replace

        cfg = replace(cfg, work_dir=a.work_dir)
    stages = [s for s in a.stages.split(",") if s] if a.stages else None
    res = run_pipeline(cfg, stages, force=a.force)
    for o in res.outcomes:
        print(f"{o.stage:9s} {'ran' if o.ran else 'skipped':8s} {o.detail}")
    return res.exit_status


def cmd_fixture(a) -> int:
    from .fixtures.minirepo import create_minirepo

    print(create_minirepo(a.dest))
    return 0


def build_parser() -> argparse.ArgumentParser:
    from .example_builder import BEGIN_MARKER, DEFAULT_BUDGET, END_MARKER

    p = argparse.ArgumentParser(prog="perfpatch", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mine", help="collect commits from a git history")
    s.add_argument("--repo", required=True)
    s.add_argument("--branch", default="main")
    s.add_argument("--perf-only", action="store_true")
    s.add_argument("--single-file", action="store_true")
    s.add_argument("--max-commits", type=int)
    s.add_argument("--keywords", help="'|' separated keyword list")
    s.add_argument("--repo-id", help="id stored with each commit (default: directory name)")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_mine)

    s = sub.add_parser("build-examples", help="turn commits into model input/output pairs")
    s.add_argument("--commits", required=True)
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--begin-marker", default=BEGIN_MARKER)
    s.add_argument("--end-marker", default=END_MARKER)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_build_examples)

    ds = sub.add_parser("dataset", help="dataset operations").add_subparsers(dest="op", required=True)
    s = ds.add_parser("dedup", help="drop exact and near duplicates")
    s.add_argument("--examples", required=True)
    s.add_argument("--threshold", type=float, default=0.9)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_dataset_dedup)
    s = ds.add_parser("split", help="split by project")
    s.add_argument("--examples", required=True)
    s.add_argument("--fractions", type=_fractions, default=(0.8, 0.1, 0.1))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(fn=cmd_dataset_split)

    s = sub.add_parser("suggest", help="rank candidate patches for examples")
    s.add_argument("--example", required=True, help="examples JSONL")
    s.add_argument("--backend", choices=("rules", "remote"), default="rules")
    s.add_argument("--endpoint")
    s.add_argument("--timeout", type=float, default=60.0)
    s.add_argument("--max-in-flight", type=int, default=4)
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--top", type=int, default=100)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_suggest)

    s = sub.add_parser("evaluate", help="score suggestions against developer patches")
    s.add_argument("--suggestions", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--judgments")
    s.add_argument("--weights", type=_fractions, default=(0.1, 0.1, 0.4, 0.4))
    s.add_argument("--report", required=True)
    s.set_defaults(fn=cmd_evaluate)

    s = sub.add_parser("validate", help="syntax, compile and unit-test funnel")
    s.add_argument("--suggestions", required=True)
    s.add_argument("--repo", required=True, help="working tree the patches apply to")
    s.add_argument("--toolchain", default="fixture", help="toolchain INI file, or 'fixture'")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_validate)

    s = sub.add_parser("bench-compare", help="decide whether a candidate improves on a baseline")
    s.add_argument("--baseline", required=True)
    s.add_argument("--candidate", required=True)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--kilo", type=int, choices=(1000, 1024), default=1024)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_bench_compare)

    s = sub.add_parser("report", help="render the tables for a work directory")
    s.add_argument("--in", dest="in_dir", required=True)
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.set_defaults(fn=cmd_report)

    s = sub.add_parser("run", help="run pipeline stages from a config file")
    s.add_argument("--config")
    s.add_argument("--stages", help="comma separated contiguous stages (default: all)")
    s.add_argument("--work-dir")
    s.add_argument("--force", action="store_true", help="ignore recorded fingerprints")
    s.set_defaults(fn=cmd_run)

    s = sub.add_parser("fixture", help="write the seeded mini repository")
    s.add_argument("dest")
    s.set_defaults(fn=cmd_fixture)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except PerfPatchError as exc:
        print(f"perfpatch: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"perfpatch: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
