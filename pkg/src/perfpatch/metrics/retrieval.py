"""Closest-match retrieval over a suggestion corpus and Top-K accuracy."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from ..code_model.syntax import parse_fragment, walk
from .codebleu import code_tokens

DEFAULT_KS = (1, 10, 100, 500)


@lru_cache(maxsize=4096)
def features(text: str) -> Counter:
    """Token bigrams plus (parent type, child type) pairs of the parse tree."""
    feats: Counter = Counter()
    toks = code_tokens(text)
    for a, b in zip(toks, toks[1:]):
        feats[("tok", a, b)] += 1
    frag = parse_fragment(text)
    for n in walk(frag.root):
        if not n.is_named:
            continue
        start = frag.to_original(n.start_byte)
        if frag.wrapped and (start is None or n.id == frag.root.id):
            continue
        for c in n.named_children:
            feats[("ast", n.type, c.type)] += 1
    return feats


def cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 1.0 if not a and not b else 0.0
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    return dot / (na * nb)


def similarity(a: str, b: str) -> float:
    return cosine(features(a), features(b))


@dataclass(frozen=True)
class ClosestMatch:
    suggestion: object
    rank: int
    similarity: float


def closest_match(suggestions: Sequence, ground_truth: str) -> ClosestMatch | None:
    """Most similar suggestion to the developer patch.

    ``rank`` is the suggestion's likelihood rank, not its similarity rank;
    similarity ties go to the lower rank.
    """
    best: ClosestMatch | None = None
    for pos, s in enumerate(suggestions, start=1):
        text = s if isinstance(s, str) else s.patch_text
        rank = pos if isinstance(s, str) else s.rank
        sim = similarity(text, ground_truth)
        if best is None or sim > best.similarity or (sim == best.similarity and rank < best.rank):
            best = ClosestMatch(s, rank, sim)
    return best


def topk_accuracy(judgments: Iterable[tuple[bool, int]], ks: Sequence[int] = DEFAULT_KS) -> dict[int, float]:
    """Percent of judged examples accepted with rank <= K, for each K."""
    items = list(judgments)
    if not items:
        return {k: 0.0 for k in ks}
    return {k: 100.0 * sum(1 for acc, rank in items if acc and rank <= k) / len(items) for k in ks}
