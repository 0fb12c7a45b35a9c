import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perfpatch.metrics.codebleu import (
    CodeBleuWeights,
    bleu,
    code_tokens,
    codebleu,
    codebleu_components,
    weighted_bleu,
)

from corpus import snippets


def oracle_bleu(cand, ref):
    """Add-one smoothed sentence BLEU-4, written from the textbook definition."""
    if not cand and not ref:
        return 1.0
    logs = []
    for n in (1, 2, 3, 4):
        c = Counter(tuple(cand[i:i + n]) for i in range(len(cand) - n + 1))
        r = Counter(tuple(ref[i:i + n]) for i in range(len(ref) - n + 1))
        clipped = sum(min(k, r[g]) for g, k in c.items())
        logs.append(math.log((clipped + 1) / (sum(c.values()) + 1)))
    bp = 0.0 if not cand else (1.0 if len(cand) > len(ref) else math.exp(1 - len(ref) / len(cand)))
    return bp * math.exp(sum(logs) / 4)


def test_identity_is_one():
    for s in snippets(50):
        assert codebleu(s, s) == pytest.approx(1.0, abs=1e-9)


def test_pure_bleu_weights_match_oracle():
    corpus = snippets(20, seed=1)
    w = CodeBleuWeights(1, 0, 0, 0)
    for cand, ref in zip(corpus[:10], corpus[10:]):
        want = oracle_bleu(list(code_tokens(cand)), list(code_tokens(ref)))
        assert codebleu(cand, ref, w) == pytest.approx(want, abs=1e-6)


def test_bleu_hand_example():
    # 4 of 5 unigrams match, 2/4 bigrams, 1/3 trigrams, 0/2 four-grams
    c = ("a", "b", "c", "x", "e")
    r = ("a", "b", "c", "d", "e")
    want = math.exp((math.log(5 / 6) + math.log(3 / 5) + math.log(2 / 4) + math.log(1 / 3)) / 4)
    assert bleu(c, r) == pytest.approx(want, abs=1e-12)


def test_keyword_weighting_rewards_keywords():
    ref = ("return", "x", ";")
    # same unigram overlap count, but the match is a keyword
    assert weighted_bleu(("return", "y", "z"), ref) > weighted_bleu(("q", "x", "z"), ref)


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        CodeBleuWeights(0.5, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        CodeBleuWeights(-0.1, 0.5, 0.3, 0.3)


def test_components_of_disjoint_code():
    comp = codebleu_components("int a = 1;", "while (true) { Go(); }")
    assert 0.0 <= comp.score < 0.5


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(snippets(30, seed=2)), st.sampled_from(snippets(30, seed=3)))
def test_scores_in_unit_interval(a, b):
    comp = codebleu_components(a, b)
    for v in (comp.score, comp.bleu, comp.weighted_bleu, comp.ast_match, comp.dataflow_match):
        assert 0.0 <= v <= 1.0


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet="ab(){};=+ \n", max_size=40), st.text(alphabet="ab(){};=+ \n", max_size=40))
def test_garbage_input_stays_bounded(a, b):
    assert 0.0 <= codebleu(a, b) <= 1.0
