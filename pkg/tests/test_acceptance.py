"""Acceptance criteria 1-7. Each test records one PASS/FAIL line.

Run alone with ``python -m pytest tests/test_acceptance.py -v``; the lines
are repeated in the terminal summary.
"""
import json
import math
import random
import shutil
import string
import subprocess
import time
from collections import Counter
from pathlib import Path

from scipy import stats

from perfpatch.bench_stats import parse_summary_text, tukey_separated, welch_one_tailed
from perfpatch.cli import main as cli_main
from perfpatch.config import PipelineConfig
from perfpatch.example_builder import (
    BEGIN_MARKER,
    END_MARKER,
    TransformationExample,
    count_tokens,
    dedup,
    split_by_project,
)
from perfpatch.fixtures.minirepo import PERF_MESSAGE, create_minirepo
from perfpatch.metrics.codebleu import CodeBleuWeights, code_tokens, codebleu
from perfpatch.metrics.matching import is_abstracted, is_verbatim
from perfpatch.metrics.report import evaluate
from perfpatch.pipeline import STAGES, export_tree, run_pipeline
from perfpatch.student_t import t_critical
from perfpatch.suggest.engine import Suggestion
from perfpatch.validator import fixture_toolchain, patched_tree, run_benchmark, summarize, validate_many

from corpus import TEMPLATES, fill, mutate, renaming_pair, snippets
from funnel_cases import CODE_CATEGORY, planted_cases


def _bleu4(cand, ref):
    logs = []
    for n in range(1, 5):
        c = Counter(tuple(cand[i:i + n]) for i in range(len(cand) - n + 1))
        r = Counter(tuple(ref[i:i + n]) for i in range(len(ref) - n + 1))
        hit = sum(min(k, r[g]) for g, k in c.items())
        logs.append(math.log((hit + 1) / (sum(c.values()) + 1)))
    bp = 1.0 if len(cand) > len(ref) else math.exp(1 - len(ref) / len(cand))
    return bp * math.exp(sum(logs) / 4)


def test_criterion_1_codebleu_identities(acceptance):
    t0 = time.perf_counter()
    corpus = snippets(50)
    worst_identity = max(abs(codebleu(s, s) - 1.0) for s in corpus)
    scores = [codebleu(a, b) for a in corpus for b in corpus[::5]]
    in_range = all(0.0 <= x <= 1.0 for x in scores)
    w = CodeBleuWeights(1, 0, 0, 0)
    pairs = list(zip(snippets(10, seed=5), snippets(10, seed=6)))
    worst_bleu = max(abs(codebleu(a, b, w) - _bleu4(code_tokens(a), code_tokens(b))) for a, b in pairs)
    elapsed = time.perf_counter() - t0
    ok = worst_identity <= 1e-9 and in_range and worst_bleu <= 1e-6 and elapsed < 10
    acceptance(1, ok, f"identity err {worst_identity:.1e}, {len(scores)} scores in [0,1]: {in_range}, "
                      f"BLEU oracle err {worst_bleu:.1e}, {elapsed:.1f}s")
    assert ok


def _random_corpus(rng):
    """Examples with exact, renamed, mutated and garbage suggestions."""
    truth, sugg = {}, []
    for i in range(rng.randint(1, 15)):
        tpl = rng.choice(TEMPLATES)
        gt = fill(tpl, rng)[0]
        ex = f"e{i}"
        truth[ex] = gt
        for rank in range(1, rng.randint(0, 4) + 1):
            kind = rng.random()
            if kind < 0.25:
                text = gt
            elif kind < 0.5:
                text = fill(tpl, rng)[0]
            elif kind < 0.8:
                text = mutate(gt, rng)
            else:
                text = "".join(rng.choice(string.ascii_letters + "{}();= ") for _ in range(30))
            sugg.append(Suggestion(text, -rank, "gen", rank, ex))
    return sugg, truth


def test_criterion_2_match_ordering_and_renaming(acceptance):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    order_violations = 0
    for _ in range(60):
        sugg, truth = _random_corpus(rng)
        rep = evaluate(sugg, truth, ks=(1, 10))
        order_violations += rep.verbatim_pct > rep.abstracted_pct
        order_violations += sum(r.verbatim and not r.abstracted for r in rep.per_example)
    rename_violations = 0
    for _ in range(1000):
        a, b = renaming_pair(rng)
        other = mutate(fill(rng.choice(TEMPLATES), rng)[0], rng)
        if not is_abstracted(a, b) or is_abstracted(a, other) != is_abstracted(b, other):
            rename_violations += 1
        if is_verbatim(a, other) and not is_abstracted(a, other):
            order_violations += 1
    elapsed = time.perf_counter() - t0
    ok = order_violations == 0 and rename_violations == 0 and elapsed < 30
    acceptance(2, ok, f"ordering violations {order_violations}, renaming violations {rename_violations}/1000, "
                      f"{elapsed:.1f}s")
    assert ok


def test_criterion_3_statistics_oracle(acceptance):
    t0 = time.perf_counter()
    rng = random.Random(33)
    worst_p = 0.0
    for _ in range(100):
        b = (rng.uniform(0.5, 200), rng.uniform(0.01, 40), rng.randint(2, 100))
        s = (rng.uniform(0.5, 200), rng.uniform(0.01, 40), rng.randint(2, 100))
        ref = stats.ttest_ind_from_stats(*b, *s, equal_var=False, alternative="greater").pvalue
        worst_p = max(worst_p, abs(welch_one_tailed(b, s).p - ref))
    crit = t_critical(0.05, 10)
    disagreements = 0
    for _ in range(1000):
        bq = sorted(rng.uniform(0, 100) for _ in range(2))
        sq = sorted(rng.uniform(0, 100) for _ in range(2))
        brute = sq[1] + 1.5 * (sq[1] - sq[0]) < bq[0] - 1.5 * (bq[1] - bq[0])
        disagreements += tukey_separated(tuple(bq), tuple(sq)) != brute
    elapsed = time.perf_counter() - t0
    ok = worst_p <= 1e-6 and abs(crit - 1.812) <= 1e-3 and disagreements == 0 and elapsed < 10
    acceptance(3, ok, f"max |p - scipy| {worst_p:.1e}, t(0.05, df=10) = {crit:.4f}, "
                      f"Tukey disagreements {disagreements}/1000, {elapsed:.1f}s")
    assert ok


def test_criterion_4_funnel_partition(acceptance, minirepo):
    t0 = time.perf_counter()
    cases = planted_cases()
    verdicts = validate_many([c[0] for c in cases], minirepo, fixture_toolchain(), workers=4)
    wrong = []
    for (sugg, stage, code), v in zip(cases, verdicts):
        want_cat = CODE_CATEGORY[code] if code else None
        got_cat = v.error_category.value if v.error_category else None
        if v.stage_reached.value != stage or v.first_error_code != code or got_cat != want_cat:
            wrong.append(sugg.suggestion_id)
    s = summarize(verdicts)
    partition = s.total == len(cases) == 50 and sum(s.category_counts.values()) == s.stage_counts["CompilationError"]
    elapsed = time.perf_counter() - t0
    ok = not wrong and partition and elapsed < 300
    counts = ", ".join(f"{k} {v}" for k, v in s.stage_counts.items())
    acceptance(4, ok, f"{counts}; {len(wrong)} mislabelled; categories {dict(s.category_counts)}; {elapsed:.1f}s")
    assert ok, wrong


FIXTURE_BASE = """Method;Mean;StdDev;Iterations;Q1;Q3;Allocated
IsEmpty;1.250 us;0.020 us;20;1.238 us;1.262 us;1.5 KB
"""
FIXTURE_CAND = """Method;Mean;StdDev;Iterations;Q1;Q3;Allocated
IsEmpty;845.0 ns;12.0 ns;20;837.0 ns;853.0 ns;512 B
"""


def test_criterion_5_end_to_end(acceptance, tmp_path):
    t0 = time.perf_counter()
    repo = create_minirepo(tmp_path / "repo")
    work = tmp_path / "work"
    cfg = PipelineConfig(repos=(f"mini={repo}",), work_dir=str(work), suggest_split="all", backend="rules")
    run_pipeline(cfg)
    commits = [json.loads(line) for line in (work / "commits.jsonl").read_text().splitlines()]
    mined = any(c["message"] == PERF_MESSAGE for c in commits)
    examples = [json.loads(line) for line in (work / "examples.jsonl").read_text().splitlines()]

    def contract(e):
        t = e["input_text"]
        return (count_tokens(t) <= 1024 and t.count(BEGIN_MARKER) == 1 and t.count(END_MARKER) == 1
                and t.index(BEGIN_MARKER) < t.index(END_MARKER))

    budget_ok = bool(examples) and all(contract(e) for e in examples)
    verdicts = [json.loads(line) for line in (work / "verdicts.jsonl").read_text().splitlines()]
    passed = [v["suggestion_id"] for v in verdicts if v["stage_reached"] == "PassedUnitTests"]

    # fixture summaries: parent revision versus the first passing suggestion
    tc = fixture_toolchain()
    perf = next(c for c in commits if c["message"] == PERF_MESSAGE)
    base_tree = export_tree(repo, perf["parent_id"], tmp_path / "base")
    sugg = next(Suggestion.from_dict(json.loads(line)) for line in (work / "suggestions.jsonl").read_text().splitlines()
                if json.loads(line)["suggestion_id"] in passed)
    cand_tree = patched_tree(sugg, base_tree, tmp_path / "cand")
    (tmp_path / "base.csv").write_text(run_benchmark(base_tree, tc), encoding="utf-8")
    (tmp_path / "cand.csv").write_text(run_benchmark(cand_tree, tc), encoding="utf-8")
    rc1 = cli_main(["bench-compare", "--baseline", str(tmp_path / "base.csv"), "--candidate", str(tmp_path / "cand.csv"),
                    "--out", str(tmp_path / "j1.json")])
    rc2 = cli_main(["bench-compare", "--baseline", str(tmp_path / "base.csv"), "--candidate", str(tmp_path / "base.csv"),
                    "--out", str(tmp_path / "j2.json")])
    improved = json.loads((tmp_path / "j1.json").read_text())["improved"]
    identity = json.loads((tmp_path / "j2.json").read_text())["improved"]
    # hand-built fixture summaries: candidate faster, fences separated, allocations lower
    (tmp_path / "fx_base.csv").write_text(FIXTURE_BASE, encoding="utf-8")
    (tmp_path / "fx_cand.csv").write_text(FIXTURE_CAND, encoding="utf-8")
    fb = parse_summary_text(FIXTURE_BASE)[0]
    fc = parse_summary_text(FIXTURE_CAND)[0]
    shape = (fc.mean < fb.mean and fc.allocated_bytes < fb.allocated_bytes
             and fc.q3 + 1.5 * (fc.q3 - fc.q1) < fb.q1 - 1.5 * (fb.q3 - fb.q1))
    rc3 = cli_main(["bench-compare", "--baseline", str(tmp_path / "fx_base.csv"),
                    "--candidate", str(tmp_path / "fx_cand.csv"), "--out", str(tmp_path / "j3.json")])
    rc4 = cli_main(["bench-compare", "--baseline", str(tmp_path / "fx_cand.csv"),
                    "--candidate", str(tmp_path / "fx_cand.csv"), "--out", str(tmp_path / "j4.json")])
    fixture_improved = json.loads((tmp_path / "j3.json").read_text())["improved"]
    fixture_identity = json.loads((tmp_path / "j4.json").read_text())["improved"]
    elapsed = time.perf_counter() - t0
    ok = (mined and budget_ok and len(passed) >= 1 and rc1 == rc2 == rc3 == rc4 == 0 and improved is True
          and identity is False and shape and fixture_improved is True and fixture_identity is False and elapsed < 120)
    acceptance(5, ok, f"planted commit mined: {mined}, {len(examples)} example(s) within budget and markers: {budget_ok}, "
                      f"{len(passed)} passed unit tests, measured improved {improved} / identity {identity}, "
                      f"fixture improved {fixture_improved} / identity {fixture_identity}, {elapsed:.1f}s")
    assert ok


def _dedup_corpus(rng, n_total=10_000):
    """60% originals, 30% exact copies, 10% near copies (Jaccard in [0.9, 1))."""
    n_exact, n_near = int(0.3 * n_total), int(0.1 * n_total)
    n_orig = n_total - n_exact - n_near
    vocab = [f"w{i}" for i in range(50_000)]
    originals = [rng.sample(vocab, 40) for _ in range(n_orig)]
    groups = [[("orig", toks)] for toks in originals]
    for _ in range(n_exact):
        g = rng.randrange(n_orig)
        groups[g].append(("exact", groups[g][0][1]))
    fresh = iter(f"n{i}" for i in range(10 * n_near))
    for _ in range(n_near):
        g = rng.randrange(n_orig)
        toks = list(groups[g][0][1])
        for pos in rng.sample(range(40), 2):
            toks[pos] = next(fresh)  # 38 shared of 42: Jaccard 0.905
        groups[g].append(("near", toks))
    slots = list(range(n_total))
    rng.shuffle(slots)
    placed = [None] * n_total
    it = iter(slots)
    for gi, group in enumerate(groups):
        positions = sorted(next(it) for _ in group)
        for pos, (role, toks) in zip(positions, group):  # the original takes the earliest slot
            placed[pos] = (gi, role, toks)
    examples, planted = [], set()
    for i, (gi, role, toks) in enumerate(placed):
        ex_id = f"x{i:05d}"
        examples.append(TransformationExample(ex_id, f"repo{gi % 300}", "c", "f.cs", "void F()",
                                              " ".join(toks), f"out{gi}", True))
        if role != "orig":
            planted.add(ex_id)
    return examples, planted


def test_criterion_6_dataset_ops(acceptance):
    t0 = time.perf_counter()
    examples, planted = _dedup_corpus(random.Random(6))
    kept = dedup(examples, 0.9)
    removed = {e.example_id for e in examples} - {e.example_id for e in kept}
    exact = removed == planted
    idempotent = [e.example_id for e in dedup(kept, 0.9)] == [e.example_id for e in kept]
    repos = sorted({e.repo_id for e in examples})
    overlaps = 0
    for seed in range(100):
        s = split_by_project(repos, (0.8, 0.1, 0.1), seed)
        parts = [set(s.train), set(s.validation), set(s.test)]
        overlaps += len(parts[0] & parts[1]) + len(parts[0] & parts[2]) + len(parts[1] & parts[2])
        overlaps += set().union(*parts) != set(repos)
    elapsed = time.perf_counter() - t0
    ok = exact and idempotent and overlaps == 0 and elapsed < 60
    acceptance(6, ok, f"removed {len(removed)} of {len(planted)} planted (exact set: {exact}), idempotent {idempotent}, "
                      f"split overlaps over 100 seeds {overlaps}, {elapsed:.1f}s")
    assert ok


def _snapshot(work: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(work.iterdir()) if p.is_file()}


def test_criterion_7_determinism(acceptance, tmp_path):
    t0 = time.perf_counter()
    repo = create_minirepo(tmp_path / "repo")
    dirs = [tmp_path / "a", tmp_path / "b"]
    cfgs = [PipelineConfig(repos=(f"mini={repo}",), work_dir=str(d), suggest_split="all") for d in dirs]
    differing = []
    for stage in STAGES:
        for cfg in cfgs:
            run_pipeline(cfg, [stage], force=True)
        a, b = (_snapshot(d) for d in dirs)
        differing += [f"{stage}:{n}" for n in sorted(set(a) | set(b)) if a.get(n) != b.get(n)]
    # a forced rerun in place reproduces every byte too
    before = _snapshot(dirs[0])
    run_pipeline(cfgs[0], force=True)
    differing += [f"rerun:{n}" for n, data in _snapshot(dirs[0]).items() if before.get(n) != data]
    # the per-stage subcommands are deterministic as well
    cli_dirs = []
    for d in (tmp_path / "cli1", tmp_path / "cli2"):
        d.mkdir()
        cli_main(["mine", "--repo", str(repo), "--perf-only", "--out", str(d / "commits.jsonl")])
        cli_main(["build-examples", "--commits", str(d / "commits.jsonl"), "--out", str(d / "ex.jsonl")])
        cli_main(["dataset", "split", "--examples", str(d / "ex.jsonl"), "--out-dir", str(d)])
        cli_main(["suggest", "--example", str(d / "ex.jsonl"), "--out", str(d / "sugg.jsonl")])
        cli_dirs.append(_snapshot(d))
    differing += [f"cli:{n}" for n in cli_dirs[0] if cli_dirs[0][n] != cli_dirs[1].get(n)]
    elapsed = time.perf_counter() - t0
    ok = not differing and len(before) >= len(STAGES)
    acceptance(7, ok, f"{len(before)} pipeline artifacts and {len(cli_dirs[0])} CLI artifacts compared, "
                      f"differences: {differing or 'none'}, {elapsed:.1f}s")
    assert ok


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
