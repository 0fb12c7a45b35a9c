"""Thin layer over the tree-sitter C# grammar."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import tree_sitter_c_sharp
from tree_sitter import Language, Node, Parser, Tree

CSHARP = Language(tree_sitter_c_sharp.language())

FRAGMENT_CLASS = "__Fragment__"
_FRAGMENT_OPEN = f"class {FRAGMENT_CLASS} {{\n"
_FRAGMENT_CLOSE = "\n}\n"

# leading using directives (with interleaved comments) of a fragment
_USING_PREFIX = re.compile(
    r"(?:\s+|//[^\n]*|/\*.*?\*/|(?:global\s+)?using\s+(?:static\s+)?[\w.:<>,\s=]+;)*",
    re.S,
)

CLASS_LIKE = (
    "class_declaration",
    "struct_declaration",
    "record_declaration",
    "record_struct_declaration",
    "interface_declaration",
)
METHOD_LIKE = ("method_declaration", "constructor_declaration")

# Reserved words can never be identifiers. The grammar's error recovery
# sometimes yields one anyway (`return x;` read as a field of type `return`)
# without an ERROR node, so such identifiers count as syntax errors.
RESERVED_WORDS = frozenset(
    """abstract as base break case catch checked class const continue default delegate do else enum
    event explicit extern finally fixed for foreach goto if implicit in interface internal is lock
    namespace new operator out override params private protected public readonly ref return sealed
    sizeof stackalloc static struct switch this throw try typeof unchecked unsafe using virtual
    volatile while""".split()
)
ATTRIBUTE_LIKE = ("field_declaration", "property_declaration", "event_field_declaration")


@lru_cache(maxsize=None)
def _parser() -> Parser:
    return Parser(CSHARP)


def parse_bytes(src: bytes) -> Tree:
    return _parser().parse(src)


def node_text(node: Node) -> str:
    return node.text.decode("utf-8", errors="replace")


def walk(node: Node) -> Iterator[Node]:
    """Pre-order, left-to-right traversal."""
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(cur.children))


def _keyword_identifier(n: Node) -> bool:
    return n.type == "identifier" and n.text.decode("utf-8", errors="replace") in RESERVED_WORDS


def error_nodes(root: Node) -> list[Node]:
    check_errors = root.has_error
    return [n for n in walk(root) if (check_errors and (n.is_error or n.is_missing)) or _keyword_identifier(n)]


def diagnostics(root: Node) -> list[str]:
    out = []
    for n in error_nodes(root):
        line, col = n.start_point
        if n.is_missing:
            kind = f"missing {n.type!r}"
        elif n.type == "identifier":
            kind = f"unexpected keyword {node_text(n)!r}"
        else:
            kind = "syntax error"
        out.append(f"{line + 1}:{col + 1}: {kind}")
    return out


@dataclass
class Fragment:
    """A parsed piece of code plus the mapping back to the caller's text.

    ``to_original`` converts a byte offset in the parsed buffer to a byte
    offset in ``original``; it returns ``None`` for bytes of the synthetic
    wrapper.
    """

    original: bytes
    src: bytes
    tree: Tree
    wrapped: bool
    to_original: Callable[[int], int | None]

    @property
    def root(self) -> Node:
        return self.tree.root_node

    @property
    def ok(self) -> bool:
        return not self.root.has_error and not any(_keyword_identifier(n) for n in walk(self.root))


def parse_fragment(text: str) -> Fragment:
    """Parse members/usings that are not necessarily inside a class.

    The member part is wrapped in a synthetic class so that methods and fields
    parse as class members. When that fails and the raw text parses cleanly
    (statement fragments, whole files), the raw parse is used instead.
    """
    original = text.encode("utf-8")
    prefix_len = len(_USING_PREFIX.match(text).group(0).encode("utf-8"))
    opener = _FRAGMENT_OPEN.encode()
    src = original[:prefix_len] + opener + original[prefix_len:] + _FRAGMENT_CLOSE.encode()
    tree = parse_bytes(src)
    shift = len(opener)
    body_end = prefix_len + shift + (len(original) - prefix_len)

    def from_wrapped(pos: int) -> int | None:
        if pos <= prefix_len:
            return pos
        if pos < prefix_len + shift:
            return None
        if pos > body_end:
            return None
        return pos - shift

    wrapped = Fragment(original, src, tree, True, from_wrapped)
    if wrapped.ok:
        return wrapped
    raw = Fragment(original, original, parse_bytes(original), False, lambda p: p)
    return raw if raw.ok else wrapped


def fragment_members(frag: Fragment) -> list[Node]:
    """Top-level member nodes of a fragment (inside the synthetic class)."""
    root = frag.root
    if not frag.wrapped:
        return list(root.named_children)
    for child in root.named_children:
        if child.type == "class_declaration":
            name = child.child_by_field_name("name")
            if name is not None and node_text(name) == FRAGMENT_CLASS:
                body = child.child_by_field_name("body")
                return list(body.named_children) if body is not None else []
    return []


def compact_type(text: str) -> str:
    return re.sub(r"\s+", "", text)
