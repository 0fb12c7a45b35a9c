import random

import pytest
from scipy import stats

from perfpatch.bench_stats import (
    BenchmarkSummary,
    MemoryChange,
    compare_memory,
    judge,
    parse_size,
    parse_summary_text,
    tukey_fences,
    tukey_separated,
    welch_one_tailed,
)
from perfpatch.errors import PerfPatchError


def test_welch_matches_scipy_on_random_triples():
    rng = random.Random(7)
    for _ in range(100):
        b = (rng.uniform(1, 100), rng.uniform(0.1, 20), rng.randint(2, 60))
        s = (rng.uniform(1, 100), rng.uniform(0.1, 20), rng.randint(2, 60))
        ours = welch_one_tailed(b, s)
        ref = stats.ttest_ind_from_stats(*b, *s, equal_var=False, alternative="greater")
        assert ours.t == pytest.approx(ref.statistic, rel=1e-9)
        assert ours.p == pytest.approx(ref.pvalue, abs=1e-6)


def test_welch_zero_variance():
    assert welch_one_tailed((10, 0, 5), (9, 0, 5)).reject
    assert not welch_one_tailed((10, 0, 5), (10, 0, 5)).reject


def test_welch_needs_two_samples():
    with pytest.raises(PerfPatchError):
        welch_one_tailed((1, 1, 1), (1, 1, 5))


def test_tukey_against_brute_force():
    rng = random.Random(3)
    for _ in range(1000):
        bq1 = rng.uniform(0, 100)
        bq3 = bq1 + rng.uniform(0, 30)
        sq1 = rng.uniform(0, 100)
        sq3 = sq1 + rng.uniform(0, 30)
        base_lower = bq1 - 1.5 * (bq3 - bq1)
        sugg_upper = sq3 + 1.5 * (sq3 - sq1)
        assert tukey_separated((bq1, bq3), (sq1, sq3)) == (sugg_upper < base_lower)


def test_tukey_fences_values():
    assert tukey_fences(10.0, 14.0) == (4.0, 20.0)


def test_memory_comparison():
    assert compare_memory(100, 50) is MemoryChange.IMPROVED
    assert compare_memory(100, 150) is MemoryChange.REGRESSED
    assert compare_memory(100, 100) is MemoryChange.EQUAL
    assert compare_memory(None, 10) is MemoryChange.EQUAL


def test_parse_size_kilo():
    assert parse_size("2 KB") == 2048
    assert parse_size("2 KB", kilo=1000) == 2000
    assert parse_size("-") is None


SUMMARY = """Method;Mean;StdDev;Iterations;Q1;Q3;Allocated
Fast;1.500 us;0.010 us;20;1.49 us;1.51 us;32 B
Slow;2,000.0 ns;20.0 ns;20;1,990.0 ns;2,010.0 ns;1 KB
"""


def test_parse_summary_units():
    rows = parse_summary_text(SUMMARY)
    assert [r.benchmark_name for r in rows] == ["Fast", "Slow"]
    assert rows[0].mean == pytest.approx(1.5e-6)
    assert rows[1].mean == pytest.approx(2e-6)
    assert rows[1].allocated_bytes == 1024
    assert rows[0].n == 20


def _row(name, mean, sd, q1, q3, alloc, n=20):
    return BenchmarkSummary(name, mean, sd, n, q1, q3, alloc)


def test_judge_improvement_and_identity():
    base = [_row("A", 10.0, 0.1, 9.9, 10.1, 400)]
    fast = [_row("A", 5.0, 0.1, 4.9, 5.1, 200)]
    assert judge(base, fast).improved
    assert not judge(base, base).improved


def test_judge_cross_regression_blocks():
    base = [_row("A", 10.0, 0.1, 9.9, 10.1, 400), _row("B", 10.0, 0.1, 9.9, 10.1, 400)]
    cand = [_row("A", 5.0, 0.1, 4.9, 5.1, 400), _row("B", 10.0, 0.1, 9.9, 10.1, 800)]
    j = judge(base, cand)
    assert j.benchmarks[0].duration_improved
    assert j.benchmarks[1].memory_regressed
    assert not j.improved


def test_judge_overlapping_fences_not_faster():
    # significant by Welch, but the distributions overlap
    base = [_row("A", 10.0, 0.1, 8.0, 12.0, 100, n=1000)]
    cand = [_row("A", 9.9, 0.1, 7.9, 11.9, 100, n=1000)]
    v = judge(base, cand).benchmarks[0]
    assert v.p_value < 0.05
    assert not v.duration_improved


def test_judge_name_mismatch():
    with pytest.raises(PerfPatchError):
        judge([_row("A", 1, 1, 1, 1, 1)], [_row("B", 1, 1, 1, 1, 1)])
