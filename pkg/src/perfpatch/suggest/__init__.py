from .backends import EndpointConfig, RemoteBackend, RuleBackend, make_backend
from .engine import (
    Backend,
    Suggestion,
    rank_hypotheses,
    read_suggestions,
    sample_and_rank,
    suggest_for_examples,
    write_suggestions,
)
from .rules import RULES, focal_region

__all__ = [
    "Backend",
    "EndpointConfig",
    "RULES",
    "RemoteBackend",
    "RuleBackend",
    "Suggestion",
    "focal_region",
    "make_backend",
    "rank_hypotheses",
    "read_suggestions",
    "sample_and_rank",
    "suggest_for_examples",
    "write_suggestions",
]
