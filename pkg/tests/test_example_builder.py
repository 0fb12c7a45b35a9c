import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perfpatch.code_model import parse_source
from perfpatch.example_builder import (
    BEGIN_MARKER,
    CALLER_CALLEE,
    CLASS_ATTRIBUTES,
    END_MARKER,
    OTHER_SIGNATURES,
    USINGS,
    TransformationExample,
    build_examples,
    build_input,
    count_tokens,
    dedup,
    multiset_jaccard,
    read_examples,
    split_by_project,
    write_examples,
)
from perfpatch.errors import FocalTooLarge
from perfpatch.miner import mine_single_file_perf_commits

BEFORE = """using System;
using System.Linq;

public class C
{
    private readonly int[] _data = new int[8];

    public int Total()
    {
        return _data.Sum();
    }

    public bool Any()
    {
        return Total() > 0;
    }

    public void Other(int x) { }
}
"""


def test_minirepo_example(minirepo):
    (rec,) = mine_single_file_perf_commits(minirepo)
    (ex,) = build_examples(rec)
    assert ex.focal_signature == "bool IsEmpty()"
    assert ex.token_count_input <= 1024
    assert ex.input_text.count(BEGIN_MARKER) == 1 and ex.input_text.count(END_MARKER) == 1
    inside = ex.input_text.split(BEGIN_MARKER)[1].split(END_MARKER)[0]
    assert "_words.Count() == 0" in inside
    assert "!_words.Any()" not in ex.input_text
    assert "!_words.Any()" in ex.output_text
    assert ex.included_context == [USINGS, CLASS_ATTRIBUTES, OTHER_SIGNATURES]


def test_context_order_and_callers():
    unit = parse_source(BEFORE)
    text, included = build_input(unit.find_method("int Total()")[1], unit)
    assert included == [USINGS, CLASS_ATTRIBUTES, CALLER_CALLEE, OTHER_SIGNATURES]
    assert text.index("using System;") < text.index("_data = new") < text.index(BEGIN_MARKER)
    assert text.index(END_MARKER) < text.index("return Total() > 0;") < text.index("void Other(int x);")


def test_whole_categories_only_under_tight_budget():
    unit = parse_source(BEFORE)
    focal = unit.find_method("int Total()")[1]
    bare, _ = build_input(focal, unit, budget=10_000, markers=("<s>", "</s>"))
    for budget in range(20, 120):
        try:
            text, included = build_input(focal, unit, budget=budget)
        except FocalTooLarge:
            continue
        assert count_tokens(text) <= budget
        # a category is either fully present or absent
        assert ("void Other(int x);" in text) == (OTHER_SIGNATURES in included)
        assert ("using System.Linq;" in text) == (USINGS in included)


def test_focal_too_large():
    unit = parse_source(BEFORE)
    with pytest.raises(FocalTooLarge):
        build_input(unit.find_method("int Total()")[1], unit, budget=5)


def _ex(i, text, repo="r"):
    return TransformationExample(f"e{i}", repo, "c", "f.cs", "void F()", text, "out", True)


def test_jaccard():
    assert multiset_jaccard("aab", "ab") == pytest.approx(2 / 3)
    assert multiset_jaccard("", "") == 1.0


def test_dedup_exact_and_near():
    base = " ".join(f"t{i}" for i in range(30))
    near = base + " extra"  # 30/31 >= 0.9
    far = " ".join(f"u{i}" for i in range(30))
    kept = dedup([_ex(0, base), _ex(1, base), _ex(2, near), _ex(3, far)])
    assert [e.example_id for e in kept] == ["e0", "e3"]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abcdefgh"), max_size=12), max_size=25), st.floats(0.5, 1.0))
def test_dedup_matches_brute_force(docs, thr):
    exs = [_ex(i, " ".join(d)) for i, d in enumerate(docs)]
    kept_ids = [e.example_id for e in dedup(exs, thr)]
    want = []
    for e, d in zip(exs, docs):
        if any(multiset_jaccard(d, docs[int(k[1:])]) >= thr for k in want):
            continue
        want.append(e.example_id)
    assert kept_ids == want
    assert [e.example_id for e in dedup(dedup(exs, thr), thr)] == kept_ids


def test_split_no_overlap_and_fractions():
    repos = [f"repo{i}" for i in range(50)]
    for seed in range(20):
        s = split_by_project(repos, seed=seed)
        assert len(s.train) == 40 and len(s.validation) == 5 and len(s.test) == 5
        assert set(s.train).isdisjoint(s.validation) and set(s.train).isdisjoint(s.test)
        assert set(s.validation).isdisjoint(s.test)
    assert split_by_project(repos, seed=1) == split_by_project(repos, seed=1)
    with pytest.raises(ValueError):
        split_by_project(repos, (0.5, 0.5, 0.5))


def test_examples_roundtrip(tmp_path):
    exs = [_ex(i, f"text {i}", repo=random.Random(i).choice("xyz")) for i in range(5)]
    write_examples(exs, tmp_path / "e.jsonl")
    assert read_examples(tmp_path / "e.jsonl") == exs
