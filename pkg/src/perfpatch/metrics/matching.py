"""Verbatim and abstracted matching of suggestions against the developer patch."""
from __future__ import annotations

import logging
from typing import Iterable

from ..code_model import abstract_variables, normalize_body
from ..errors import AbstractionParseError

log = logging.getLogger(__name__)


def _text(s) -> str:
    return s if isinstance(s, str) else s.patch_text


def canonical(text: str) -> str:
    """Comment-free, whitespace-collapsed form used for all comparisons."""
    return normalize_body(text)


def abstracted(text: str) -> str:
    return canonical(abstract_variables(canonical(text)))


def is_verbatim(suggestion: str, ground_truth: str) -> bool:
    return canonical(suggestion) == canonical(ground_truth)


def is_abstracted(suggestion: str, ground_truth: str) -> bool:
    """Equality after renaming variables to VAR_i on both sides.

    Texts that already match verbatim match here too, even if they do not
    parse; other parse failures count as a non-match.
    """
    if is_verbatim(suggestion, ground_truth):
        return True
    try:
        return abstracted(suggestion) == abstracted(ground_truth)
    except AbstractionParseError as exc:
        log.info("abstraction failed, counted as non-match: %s", exc)
        return False


def verbatim_match(suggestions: Iterable, ground_truth: str) -> bool:
    return any(is_verbatim(_text(s), ground_truth) for s in suggestions)


def abstracted_match(suggestions: Iterable, ground_truth: str) -> bool:
    try:
        truth = abstracted(ground_truth)
    except AbstractionParseError as exc:
        log.info("ground truth does not abstract: %s", exc)
        truth = None
    truth_canon = canonical(ground_truth)
    for s in suggestions:
        text = _text(s)
        if canonical(text) == truth_canon:
            return True
        if truth is None:
            continue
        try:
            if abstracted(text) == truth:
                return True
        except AbstractionParseError:
            log.info("suggestion does not abstract; counted as non-match")
    return False
