"""Sampling, merging and ranking of backend hypotheses."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from ..errors import BackendFailure


class Backend(Protocol):
    backend_id: str

    def sample(self, input_text: str, n: int, seed: int | None = None) -> list[tuple[str, float]]:
        """Up to ``n`` ``(patch_text, avg_token_loglik)`` hypotheses."""
        ...


@dataclass
class Suggestion:
    patch_text: str
    avg_token_loglik: float
    backend_id: str
    rank: int
    example_id: str = ""
    focal_signature: str = ""
    file_path: str = ""

    @property
    def suggestion_id(self) -> str:
        return f"{self.example_id}#{self.rank}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["suggestion_id"] = self.suggestion_id
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Suggestion":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def rank_hypotheses(hypotheses: Iterable[tuple[str, float]], top_k: int, backend_id: str) -> list[Suggestion]:
    """Merge exact duplicates (best likelihood wins), sort, keep ``top_k``.

    Order is by average token log-likelihood, highest first, ties broken by
    patch text.
    """
    best: dict[str, float] = {}
    for text, loglik in hypotheses:
        loglik = float(loglik)
        if text not in best or loglik > best[text]:
            best[text] = loglik
    ordered = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return [Suggestion(text, ll, backend_id, i) for i, (text, ll) in enumerate(ordered, start=1)]


def sample_and_rank(
    input_text: str,
    n_samples: int,
    top_k: int,
    backend: Backend,
    seed: int | None = None,
) -> list[Suggestion]:
    if not n_samples >= top_k >= 1:
        raise ValueError(f"need n_samples >= top_k >= 1, got {n_samples}, {top_k}")
    try:
        hyps = backend.sample(input_text, n_samples, seed=seed)
    except BackendFailure:
        raise
    except Exception as exc:
        raise BackendFailure(backend.backend_id, f"{type(exc).__name__}: {exc}") from exc
    return rank_hypotheses(hyps[:n_samples], top_k, backend.backend_id)


def suggest_for_examples(
    examples: Sequence,
    backend: Backend,
    n_samples: int,
    top_k: int,
    seed: int | None = None,
    workers: int = 1,
) -> list[Suggestion]:
    """Rank suggestions for every example; output order follows ``examples``."""

    def one(ex) -> list[Suggestion]:
        out = sample_and_rank(ex.input_text, n_samples, top_k, backend, seed)
        for s in out:
            s.example_id = ex.example_id
            s.focal_signature = ex.focal_signature
            s.file_path = getattr(ex, "file_path", "")
        return out

    if workers <= 1:
        batches = [one(ex) for ex in examples]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(one, examples))
    return [s for batch in batches for s in batch]


def write_suggestions(suggestions: Iterable[Suggestion], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for s in suggestions:
            fh.write(json.dumps(s.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_suggestions(path: str | Path) -> list[Suggestion]:
    with open(path, encoding="utf-8") as fh:
        return [Suggestion.from_dict(json.loads(line)) for line in fh if line.strip()]
