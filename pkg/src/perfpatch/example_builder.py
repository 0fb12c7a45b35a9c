"""Build model input/output pairs and the dataset operations around them."""
from __future__ import annotations

import hashlib
import json
import logging
import math
import random
import re
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .code_model import (
    FocalMethodPair,
    MethodModel,
    SourceUnit,
    call_graph,
    normalize_body,
    pair_methods,
    parse_source,
)
from .errors import FocalTooLarge, UnparseableFile
from .miner import CommitRecord

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 1024
BEGIN_MARKER = "/* edit */"
END_MARKER = "/* end */"

USINGS = "usings"
CLASS_ATTRIBUTES = "class_attributes"
CALLER_CALLEE = "caller_callee"
OTHER_SIGNATURES = "other_signatures"
CONTEXT_ORDER = (USINGS, CLASS_ATTRIBUTES, CALLER_CALLEE, OTHER_SIGNATURES)

_TOKEN = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Default tokenizer: word runs and single punctuation characters."""
    return _TOKEN.findall(text)


def count_tokens(text: str) -> int:
    return len(tokenize(text))


@dataclass
class TransformationExample:
    example_id: str
    repo_id: str
    commit_id: str
    file_path: str
    focal_signature: str
    input_text: str
    output_text: str
    is_perf: bool
    included_context: list[str] = field(default_factory=list)
    token_count_input: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TransformationExample":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


@dataclass
class DatasetSplit:
    train: list[str]
    validation: list[str]
    test: list[str]

    def assign(self, examples: Iterable[TransformationExample]) -> dict[str, list[TransformationExample]]:
        where = {r: "train" for r in self.train}
        where.update({r: "validation" for r in self.validation})
        where.update({r: "test" for r in self.test})
        out: dict[str, list[TransformationExample]] = {"train": [], "validation": [], "test": []}
        for ex in examples:
            out[where[ex.repo_id]].append(ex)
        return out


# ---------------------------------------------------------------------------
# input / output construction


def _focal_block(focal: MethodModel, markers: tuple[str, str]) -> str:
    return f"{markers[0]}\n{focal.text}\n{markers[1]}"


def _render(sections: dict[str, str], focal_block: str) -> str:
    parts = [sections[USINGS], sections[CLASS_ATTRIBUTES], focal_block, sections[CALLER_CALLEE], sections[OTHER_SIGNATURES]]
    return "\n\n".join(p for p in parts if p)


def _related(focal: MethodModel, unit: SourceUnit) -> list[MethodModel]:
    wanted = (focal.callers | focal.callees) - {focal.signature}
    return [m for m in unit.methods() if m.signature in wanted]


def build_input(
    focal: FocalMethodPair | MethodModel,
    unit_before: SourceUnit,
    budget: int = DEFAULT_BUDGET,
    markers: tuple[str, str] = (BEGIN_MARKER, END_MARKER),
    tokenizer: Callable[[str], int] = count_tokens,
) -> tuple[str, list[str]]:
    """Pack the focal method and as much whole-category context as fits.

    Categories are tried in the order usings, class attributes, caller/callee
    bodies, other method signatures. Each goes in whole or not at all, and a
    skipped category does not stop later ones from being tried. Bodies come
    from ``unit_before`` so the input never shows the answer.

    Returns ``(input_text, included_context)``.
    """
    method = focal.before if isinstance(focal, FocalMethodPair) else focal
    call_graph(unit_before)
    located = unit_before.find_method(method.signature)
    if located is None:
        raise ValueError(f"focal method {method.signature} is not in the given unit")
    cls, method = located
    block = _focal_block(method, markers)
    sections = dict.fromkeys(CONTEXT_ORDER, "")
    needed = tokenizer(_render(sections, block))
    if needed > budget:
        raise FocalTooLarge(method.signature, needed, budget)

    related = _related(method, unit_before)
    related_sigs = {m.signature for m in related}
    candidates = {
        USINGS: "\n".join(u.text for u in unit_before.usings),
        CLASS_ATTRIBUTES: "\n".join(a.text for a in cls.attributes),
        CALLER_CALLEE: "\n\n".join(m.text for m in related),
        OTHER_SIGNATURES: "\n".join(
            m.signature_text + ";"
            for m in cls.methods
            if m.signature != method.signature and m.signature not in related_sigs
        ),
    }
    included = []
    for cat in CONTEXT_ORDER:
        if not candidates[cat]:
            continue
        trial = dict(sections, **{cat: candidates[cat]})
        if tokenizer(_render(trial, block)) <= budget:
            sections = trial
            included.append(cat)
    return _render(sections, block), included


def _mentions(name: str, code: str) -> bool:
    return re.search(rf"(?<![\w@]){re.escape(name)}(?!\w)", code) is not None


def build_output(pair: FocalMethodPair, unit_before: SourceUnit, unit_after: SourceUnit) -> str:
    """Developer-side target: new imports, touched attributes, changed methods.

    Emitted in the order imports, attributes, methods with the focal method
    first. Caller/callee methods are included only when the commit changed
    (or added) them; attributes only when added or modified and referenced by
    an emitted method.
    """
    call_graph(unit_before)
    call_graph(unit_after)
    found = unit_after.find_method(pair.signature)
    if found is None:
        raise ValueError(f"{pair.signature} missing from the after version")
    after_cls, focal_after = found
    before_found = unit_before.find_method(pair.signature)
    before_cls = before_found[0] if before_found else None

    related = set(focal_after.callers | focal_after.callees)
    if before_found is not None:
        related |= before_found[1].callers | before_found[1].callees
    related.discard(pair.signature)

    methods = [focal_after]
    for m in unit_after.methods():
        if m.signature not in related:
            continue
        old = unit_before.find_method(m.signature)
        if old is None or old[1].normalized_body != m.normalized_body:
            methods.append(m)

    emitted_code = "\n".join(normalize_body(m.text) for m in methods)
    attributes = []
    for attr in after_cls.attributes:
        old_attr = None
        if before_cls is not None:
            old_attr = next((a for a in before_cls.attributes if a.names == attr.names), None)
        if old_attr is not None and old_attr.normalized == attr.normalized:
            continue
        if any(_mentions(n, emitted_code) for n in attr.names):
            attributes.append(attr.text)

    before_usings = {u.normalized for u in unit_before.usings}
    imports = [u.text for u in unit_after.usings if u.normalized not in before_usings]

    blocks = ["\n".join(imports), "\n".join(attributes), "\n\n".join(m.text for m in methods)]
    return "\n\n".join(b for b in blocks if b)


def example_id(repo_id: str, commit_id: str, path: str, signature: str) -> str:
    digest = hashlib.sha1(f"{repo_id}\0{commit_id}\0{path}\0{signature}".encode()).hexdigest()
    return digest[:16]


@dataclass
class BuildStats:
    examples: int = 0
    focal_too_large: int = 0
    unparseable: int = 0


def build_examples(
    commit: CommitRecord,
    budget: int = DEFAULT_BUDGET,
    markers: tuple[str, str] = (BEGIN_MARKER, END_MARKER),
    stats: BuildStats | None = None,
    tokenizer: Callable[[str], int] = count_tokens,
) -> list[TransformationExample]:
    """One example per focal method of every file changed in ``commit``."""
    stats = stats if stats is not None else BuildStats()
    out = []
    for fc in commit.file_changes:
        if not fc.before_text or not fc.after_text:
            continue
        try:
            before = parse_source(fc.before_text)
            after = parse_source(fc.after_text)
        except UnparseableFile as exc:
            log.info("skipping %s@%s: %s", fc.path, commit.commit_id[:10], exc)
            stats.unparseable += 1
            continue
        for pair in pair_methods(before, after):
            try:
                text, included = build_input(pair, before, budget, markers, tokenizer)
            except FocalTooLarge as exc:
                log.info("skipping %s: %s", fc.path, exc)
                stats.focal_too_large += 1
                continue
            out.append(
                TransformationExample(
                    example_id=example_id(commit.repo_id, commit.commit_id, fc.path, pair.signature),
                    repo_id=commit.repo_id,
                    commit_id=commit.commit_id,
                    file_path=fc.path,
                    focal_signature=pair.signature,
                    input_text=text,
                    output_text=build_output(pair, before, after),
                    is_perf=commit.is_perf,
                    included_context=included,
                    token_count_input=tokenizer(text),
                )
            )
            stats.examples += 1
    return out


def build_wild_input(
    file_text: str,
    signature: str,
    budget: int = DEFAULT_BUDGET,
    markers: tuple[str, str] = (BEGIN_MARKER, END_MARKER),
) -> tuple[str, list[str]]:
    """Model input for a method of a current source file (no commit involved)."""
    unit = parse_source(file_text)
    found = unit.find_method(signature)
    if found is None:
        raise ValueError(f"{signature} not found")
    return build_input(found[1], unit, budget, markers)


# ---------------------------------------------------------------------------
# dedup and split


def _content_hash(ex: TransformationExample) -> str:
    return hashlib.sha256((ex.input_text + "\0" + ex.output_text).encode()).hexdigest()


def _expanded(tokens: list[str]) -> list[tuple[str, int]]:
    """Multiset as a set of (token, occurrence) pairs; set Jaccard on these
    equals multiset Jaccard on the tokens."""
    seen: Counter = Counter()
    out = []
    for t in tokens:
        out.append((t, seen[t]))
        seen[t] += 1
    return out


def multiset_jaccard(a: Sequence[str], b: Sequence[str]) -> float:
    ca, cb = Counter(a), Counter(b)
    inter = sum((ca & cb).values())
    union = sum((ca | cb).values())
    return 1.0 if union == 0 else inter / union


def dedup(examples: Sequence[TransformationExample], threshold: float = 0.9) -> list[TransformationExample]:
    """Drop exact duplicates and near duplicates, keeping first occurrences.

    Exact: equal hash of (input, output). Near: multiset Jaccard of input
    tokens >= ``threshold`` against an already kept example. Candidates come
    from prefix filtering, which finds every pair above the threshold.
    """
    token_sets = [_expanded(tokenize(ex.input_text)) for ex in examples]
    freq: Counter = Counter()
    for ts in token_sets:
        freq.update(ts)

    def order(el):
        return (freq[el], el)

    kept: list[TransformationExample] = []
    kept_sets: list[set] = []
    kept_sizes: list[int] = []
    index: dict[tuple[str, int], list[int]] = defaultdict(list)
    hashes: set[str] = set()
    for ex, toks in zip(examples, token_sets):
        h = _content_hash(ex)
        if h in hashes:
            continue
        size = len(toks)
        ordered = sorted(toks, key=order)
        prefix = ordered[: size - math.ceil(threshold * size) + 1] if size else []
        elems = set(toks)
        near = False
        checked: set[int] = set()
        for el in prefix:
            for j in index.get(el, ()):
                if j in checked:
                    continue
                checked.add(j)
                other = kept_sizes[j]
                if min(size, other) < threshold * max(size, other):
                    continue
                inter = len(elems & kept_sets[j])
                if inter / (size + other - inter) >= threshold:
                    near = True
                    break
            if near:
                break
        if size == 0:
            # empty inputs are near duplicates of each other (Jaccard 1)
            near = any(s == 0 for s in kept_sizes)
        if near:
            continue
        hashes.add(h)
        k = len(kept)
        kept.append(ex)
        kept_sets.append(elems)
        kept_sizes.append(size)
        for el in prefix:
            index[el].append(k)
    return kept


def split_by_project(
    examples: Iterable[TransformationExample] | Iterable[str],
    fractions: Sequence[float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> DatasetSplit:
    """Shuffle repositories with a seeded PRNG and cut them by ``fractions``."""
    if len(fractions) != 3 or abs(sum(fractions) - 1.0) > 1e-9 or any(f < 0 for f in fractions):
        raise ValueError(f"fractions must be three non-negative numbers summing to 1, got {fractions}")
    repos = sorted({e if isinstance(e, str) else e.repo_id for e in examples})
    random.Random(seed).shuffle(repos)
    n = len(repos)
    cut1 = round(fractions[0] * n)
    cut2 = round((fractions[0] + fractions[1]) * n)
    return DatasetSplit(repos[:cut1], repos[cut1:cut2], repos[cut2:])


def write_examples(examples: Iterable[TransformationExample], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_examples(path: str | Path) -> list[TransformationExample]:
    with open(path, encoding="utf-8") as fh:
        return [TransformationExample.from_dict(json.loads(line)) for line in fh if line.strip()]
