"""C# source model: parsing, normalization, pairing, call relations, abstraction."""
from .abstraction import abstract_variables
from .model import (
    AttributeModel,
    ClassModel,
    Invocation,
    MethodModel,
    PatchParts,
    SourceUnit,
    UsingModel,
    parse_parts,
    parse_source,
)
from .normalize import collapse_whitespace, normalize_body, strip_comments
from .relations import FocalMethodPair, call_graph, pair_methods
from .syntax import parse_fragment

__all__ = [
    "AttributeModel",
    "ClassModel",
    "FocalMethodPair",
    "Invocation",
    "MethodModel",
    "PatchParts",
    "SourceUnit",
    "UsingModel",
    "abstract_variables",
    "call_graph",
    "collapse_whitespace",
    "normalize_body",
    "pair_methods",
    "parse_fragment",
    "parse_parts",
    "parse_source",
    "strip_comments",
]
