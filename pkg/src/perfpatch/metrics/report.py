"""Corpus-level evaluation of suggestions against developer patches."""
from __future__ import annotations

import csv
import json
import logging
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .codebleu import DEFAULT_WEIGHTS, CodeBleuWeights, codebleu
from .matching import abstracted_match, is_abstracted, verbatim_match
from .retrieval import DEFAULT_KS, closest_match, topk_accuracy

log = logging.getLogger(__name__)


@dataclass
class ExampleRow:
    example_id: str
    n_suggestions: int
    verbatim: bool
    abstracted: bool
    codebleu: float
    closest_rank: int | None
    closest_similarity: float | None
    accepted: bool | None = None
    judged_rank: int | None = None


@dataclass
class MetricReport:
    verbatim_pct: float
    abstracted_pct: float
    codebleu_mean: float
    topk_accuracy: dict[int, float]
    per_example: list[ExampleRow] = field(default_factory=list)
    judgments_source: str = "none"

    def to_dict(self) -> dict:
        return {
            "n_examples": len(self.per_example),
            "verbatim_pct": self.verbatim_pct,
            "abstracted_pct": self.abstracted_pct,
            "codebleu_mean": self.codebleu_mean,
            "topk_accuracy": {str(k): v for k, v in sorted(self.topk_accuracy.items())},
            "judgments_source": self.judgments_source,
            "per_example": [asdict(r) for r in self.per_example],
        }


@dataclass(frozen=True)
class Judgment:
    accepted: bool
    rank: int | None


def _truthy(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "y", "t"):
        return True
    if v in ("0", "false", "no", "n", "f", ""):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def read_judgments(path: str | Path) -> dict[str, Judgment]:
    """CSV with header ``example_id,accepted,rank``; rank may be blank."""
    out: dict[str, Judgment] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"example_id", "accepted"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"judgments file lacks columns {sorted(missing)}")
        for row in reader:
            rank = (row.get("rank") or "").strip()
            out[row["example_id"]] = Judgment(_truthy(row["accepted"]), int(rank) if rank else None)
    return out


def evaluate(
    suggestions: Sequence,
    truth: Mapping[str, str],
    judgments: Mapping[str, Judgment] | None = None,
    ks: Sequence[int] = DEFAULT_KS,
    weights: CodeBleuWeights = DEFAULT_WEIGHTS,
) -> MetricReport:
    """Score ranked suggestions against ``truth`` (example id -> patch text).

    CodeBLEU is taken for the rank-1 suggestion; an example without
    suggestions scores 0 on every metric. Top-K uses the given judgments
    when present. Without them an example counts as accepted when its
    closest match is an abstracted match, at that suggestion's rank.
    """
    by_example: dict[str, list] = defaultdict(list)
    for s in suggestions:
        by_example[s.example_id].append(s)
    stray = sorted(set(by_example) - set(truth))
    if stray:
        log.warning("%d suggestion groups have no ground truth (e.g. %s)", len(stray), stray[0])

    rows: list[ExampleRow] = []
    closest: dict[str, object] = {}
    for ex_id in sorted(truth):
        gt = truth[ex_id]
        sugg = sorted(by_example.get(ex_id, []), key=lambda s: s.rank)
        if not sugg:
            rows.append(ExampleRow(ex_id, 0, False, False, 0.0, None, None))
            continue
        cm = closest_match(sugg, gt)
        closest[ex_id] = cm.suggestion
        verb = verbatim_match(sugg, gt)
        rows.append(
            ExampleRow(
                example_id=ex_id,
                n_suggestions=len(sugg),
                verbatim=verb,
                abstracted=verb or abstracted_match(sugg, gt),
                codebleu=codebleu(sugg[0].patch_text, gt, weights),
                closest_rank=cm.rank,
                closest_similarity=cm.similarity,
            )
        )

    if judgments is not None:
        source = "file"
        judged = []
        for r in rows:
            j = judgments.get(r.example_id)
            if j is None:
                continue
            r.accepted = j.accepted
            r.judged_rank = j.rank if j.rank is not None else r.closest_rank
            judged.append((r.accepted, r.judged_rank if r.judged_rank is not None else 10**9))
    else:
        source = "closest-match-abstracted"
        judged = []
        for r in rows:
            if r.closest_rank is None:
                r.accepted, r.judged_rank = False, None
            else:
                best = closest[r.example_id]
                r.accepted = is_abstracted(best.patch_text, truth[r.example_id])
                r.judged_rank = r.closest_rank
            judged.append((r.accepted, r.judged_rank if r.judged_rank is not None else 10**9))

    n = len(rows)
    pct = (lambda c: 100.0 * c / n) if n else (lambda c: 0.0)
    return MetricReport(
        verbatim_pct=pct(sum(r.verbatim for r in rows)),
        abstracted_pct=pct(sum(r.abstracted for r in rows)),
        codebleu_mean=sum(r.codebleu for r in rows) / n if n else 0.0,
        topk_accuracy=topk_accuracy(judged, ks),
        per_example=rows,
        judgments_source=source,
    )


def read_truth(path: str | Path) -> dict[str, str]:
    """Example id -> developer patch, from an examples JSONL file."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            text = d.get("output_text", d.get("ground_truth"))
            if text is None:
                raise ValueError(f"truth row {d.get('example_id')!r} has no output_text")
            out[d["example_id"]] = text
    return out
