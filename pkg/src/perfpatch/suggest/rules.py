"""Deterministic rewrite rules over the marked focal method.

Each rule takes the focal method and what the input shows of its class and
returns a rewrite, or ``None`` when it does not apply. Rules never look at
anything outside the example input.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from tree_sitter import Node

from ..code_model.normalize import collapse_whitespace
from ..code_model.syntax import METHOD_LIKE, Fragment, fragment_members, node_text, parse_fragment, walk
from ..example_builder import BEGIN_MARKER, END_MARKER

LOOPS = ("for_statement", "foreach_statement", "while_statement", "do_statement")


@dataclass
class FocalContext:
    """The marked method plus the context categories visible in the input."""

    method_text: str
    imports: tuple[str, ...] = ()
    attribute_names: frozenset[str] = frozenset()
    member_names: frozenset[str] = frozenset()


@dataclass
class Rewrite:
    method_text: str
    imports: list[str] = field(default_factory=list)
    attributes: list[str] = field(default_factory=list)

    def render(self) -> str:
        blocks = ["\n".join(self.imports), "\n".join(self.attributes), self.method_text]
        return "\n\n".join(b for b in blocks if b)


class _Method:
    """Parsed focal method with byte-level editing."""

    def __init__(self, text: str):
        self.text = text
        self.frag: Fragment = parse_fragment(text)
        members = [m for m in fragment_members(self.frag) if m.type in METHOD_LIKE]
        self.node: Node | None = members[0] if len(members) == 1 and self.frag.ok else None

    def pos(self, node: Node) -> tuple[int, int]:
        return self.frag.to_original(node.start_byte), self.frag.to_original(node.end_byte)

    def apply(self, edits: list[tuple[int, int, str]]) -> str:
        out = bytearray(self.frag.original)
        last = None
        for start, end, repl in sorted(edits, reverse=True):
            if last is not None and end > last:
                continue  # overlapping edit; the outer match already covers it
            out[start:end] = repl.encode("utf-8")
            last = start
        return out.decode("utf-8")

    @property
    def is_static(self) -> bool:
        return any(c.type == "modifier" and node_text(c) == "static" for c in self.node.children)

    def type_parameters(self) -> set[str]:
        tp = self.node.child_by_field_name("type_parameters")
        if tp is None:
            return set()
        return {node_text(c.child_by_field_name("name") or c) for c in tp.named_children}


def _member_call(node: Node, name: str, nargs: int | None = None) -> Node | None:
    """Receiver of ``recv.name(args)`` when ``node`` is such a call."""
    if node is None or node.type != "invocation_expression":
        return None
    fn = node.child_by_field_name("function")
    args = node.child_by_field_name("arguments")
    if fn is None or fn.type != "member_access_expression":
        return None
    nm = fn.child_by_field_name("name")
    if nm is None or node_text(nm) != name:
        return None
    if nargs is not None:
        count = sum(1 for c in args.named_children if c.type == "argument") if args is not None else 0
        if count != nargs:
            return None
    return fn.child_by_field_name("expression")


def _arguments(call: Node) -> list[Node]:
    args = call.child_by_field_name("arguments")
    return [c for c in args.named_children if c.type == "argument"] if args is not None else []


def _inside_loop_body(node: Node, stop: Node) -> Node | None:
    """Innermost loop whose body contains ``node``."""
    child, cur = node, node.parent
    while cur is not None and cur.id != stop.id:
        if cur.type in LOOPS:
            body = cur.child_by_field_name("body")
            if body is not None and body.id == child.id:
                return cur
        child, cur = cur, cur.parent
    return None


def _fresh(base: str, taken: frozenset[str] | set[str]) -> str:
    name, i = base, 2
    while name in taken:
        name, i = f"{base}{i}", i + 1
    return name


# ---------------------------------------------------------------------------
# R1: Count() == 0 -> !Any()


def rule_count_zero(m: _Method, ctx: FocalContext) -> Rewrite | None:
    edits = []
    for n in walk(m.node):
        if n.type != "binary_expression":
            continue
        op = n.child_by_field_name("operator")
        left, right = n.child_by_field_name("left"), n.child_by_field_name("right")
        if op is None or node_text(op) != "==" or left is None or right is None:
            continue
        for call, zero in ((left, right), (right, left)):
            recv = _member_call(call, "Count", 0)
            if recv is not None and zero.type == "integer_literal" and node_text(zero) == "0":
                start, end = m.pos(n)
                edits.append((start, end, f"!{node_text(recv)}.Any()"))
                break
    return Rewrite(m.apply(edits)) if edits else None


# ---------------------------------------------------------------------------
# R2: .Where(p).First*() -> .First*(p)

_PREDICATE_TAKERS = {"First", "FirstOrDefault", "Last", "LastOrDefault", "Single", "SingleOrDefault", "Any", "Count"}


def rule_where_first(m: _Method, ctx: FocalContext) -> Rewrite | None:
    edits = []
    for n in walk(m.node):
        fn = n.child_by_field_name("function") if n.type == "invocation_expression" else None
        if fn is None or fn.type != "member_access_expression":
            continue
        outer = node_text(fn.child_by_field_name("name"))
        if outer not in _PREDICATE_TAKERS or _arguments(n):
            continue
        where = fn.child_by_field_name("expression")
        recv = _member_call(where, "Where", 1)
        if recv is None:
            continue
        pred = node_text(_arguments(where)[0])
        start, end = m.pos(n)
        edits.append((start, end, f"{node_text(recv)}.{outer}({pred})"))
    return Rewrite(m.apply(edits)) if edits else None


# ---------------------------------------------------------------------------
# R3: foreach over s.ToCharArray() -> foreach over s


def rule_char_array_iteration(m: _Method, ctx: FocalContext) -> Rewrite | None:
    edits = []
    for n in walk(m.node):
        if n.type != "foreach_statement":
            continue
        right = n.child_by_field_name("right")
        recv = _member_call(right, "ToCharArray", 0)
        if recv is None:
            continue
        start, end = m.pos(right)
        edits.append((start, end, node_text(recv)))
    return Rewrite(m.apply(edits)) if edits else None


# ---------------------------------------------------------------------------
# R4: constant array allocated inside a loop -> static readonly field

_LITERAL_TYPES = {
    "character_literal": "char",
    "string_literal": "string",
    "verbatim_string_literal": "string",
    "raw_string_literal": "string",
    "integer_literal": "int",
    "real_literal": "double",
    "boolean_literal": "bool",
}
_READ_ONLY_CALLS = {
    "Split", "IndexOfAny", "LastIndexOfAny", "Trim", "TrimStart", "TrimEnd",
    "Contains", "Join", "Concat", "Format", "Equals", "IndexOf",
}


def _literal_type(node: Node) -> str | None:
    if node.type == "prefix_unary_expression" and node.named_child_count == 1:
        inner = node.named_children[0]
        if inner.type in ("integer_literal", "real_literal") and node_text(node).startswith("-"):
            return _literal_type(inner)
        return None
    t = _LITERAL_TYPES.get(node.type)
    if t == "double":
        suffix = node_text(node)[-1].lower()
        t = {"f": "float", "m": "decimal"}.get(suffix, "double")
    return t


def _constant_array(node: Node) -> tuple[str, str] | None:
    """``(element type, initializer text)`` for a literal-only array creation."""
    if node.type == "array_creation_expression":
        typ = node.child_by_field_name("type")
        init = next((c for c in node.named_children if c.type == "initializer_expression"), None)
        if typ is None or init is None or typ.type != "array_type":
            return None
        rank = typ.child_by_field_name("rank")
        if rank is not None and any(c.is_named for c in rank.children):
            return None  # explicit size
        elem = node_text(typ.child_by_field_name("type"))
    elif node.type == "implicit_array_creation_expression":
        init = next((c for c in node.named_children if c.type == "initializer_expression"), None)
        elem = None
        if init is None:
            return None
    elif node.type == "initializer_expression" and node.parent is not None and node.parent.type == "variable_declarator":
        init, elem = node, None
        decl = node.parent.parent
        typ = decl.child_by_field_name("type") if decl is not None else None
        if typ is None or typ.type != "array_type":
            return None
        elem = node_text(typ.child_by_field_name("type"))
    else:
        return None
    kinds = [_literal_type(c) for c in init.named_children if c.type != "comment"]
    if not kinds or None in kinds:
        return None
    if elem is None:
        if len(set(kinds)) != 1:
            return None
        elem = kinds[0]
    return elem, node_text(init)


def _local_mutated(m: _Method, name: str) -> bool:
    for n in walk(m.node):
        if n.type == "assignment_expression":
            left = n.child_by_field_name("left")
            if left is not None and left.type == "element_access_expression":
                target = left.child_by_field_name("expression")
                if target is not None and node_text(target) == name:
                    return True
        elif n.type == "argument":
            kids = n.children
            if kids and node_text(kids[0]) in ("ref", "out") and node_text(n.named_children[-1]) == name:
                return True
        elif n.type == "identifier" and node_text(n) == name:
            p = n.parent
            if p is not None and p.type == "argument" and _invoked_name(p.parent.parent) not in _READ_ONLY_CALLS:
                return True
    return False


def _invoked_name(call: Node | None) -> str | None:
    if call is None or call.type != "invocation_expression":
        return None
    fn = call.child_by_field_name("function")
    if fn is None:
        return None
    if fn.type == "member_access_expression":
        return node_text(fn.child_by_field_name("name"))
    return node_text(fn)


def rule_hoist_constant_array(m: _Method, ctx: FocalContext) -> Rewrite | None:
    taken = set(ctx.attribute_names | ctx.member_names)
    type_params = m.type_parameters()
    edits, fields = [], []
    for n in walk(m.node):
        found = _constant_array(n)
        if found is None or _inside_loop_body(n, m.node) is None:
            continue
        elem, init = found
        if set(re.findall(r"\w+", elem)) & type_params:
            continue
        p = n.parent
        if p is not None and p.type == "variable_declarator":
            local = node_text(p.child_by_field_name("name"))
            if _local_mutated(m, local):
                continue
            base = "s_" + local
        elif p is not None and p.type == "argument" and _invoked_name(p.parent.parent) in _READ_ONLY_CALLS:
            callee = _invoked_name(p.parent.parent)
            base = "s_" + callee[0].lower() + callee[1:] + "Args"
        else:
            continue
        name = _fresh(base, taken)
        taken.add(name)
        fields.append(f"private static readonly {elem}[] {name} = new {elem}[] {init};")
        start, end = m.pos(n)
        edits.append((start, end, name))
    if not edits:
        return None
    return Rewrite(m.apply(edits), attributes=fields)


# ---------------------------------------------------------------------------
# R5: string += in a loop -> cached StringBuilder field

_EMPTY_STRINGS = {'""', "string.Empty", "String.Empty"}


def _concat_operands(node: Node) -> list[Node]:
    """Flatten a left-associative ``a + b + c`` chain."""
    if node.type == "binary_expression" and node_text(node.child_by_field_name("operator")) == "+":
        return _concat_operands(node.child_by_field_name("left")) + [node.child_by_field_name("right")]
    if node.type == "parenthesized_expression" and node.named_child_count == 1:
        inner = node.named_children[0]
        if inner.type == "binary_expression":
            return [node]
    return [node]


def _is_string_literal(node: Node) -> bool:
    return node.type in ("string_literal", "verbatim_string_literal", "interpolated_string_expression", "raw_string_literal")


def _appends(value: Node) -> str:
    parts = _concat_operands(value)
    # splitting is only safe once the chain is already string-typed
    if len(parts) > 1 and any(_is_string_literal(p) for p in parts[:2]):
        return "".join(f".Append({node_text(p)})" for p in parts)
    return f".Append({node_text(value)})"


def _string_locals(m: _Method):
    for n in walk(m.node):
        if n.type != "local_declaration_statement":
            continue
        decl = next((c for c in n.named_children if c.type == "variable_declaration"), None)
        if decl is None:
            continue
        declarators = [c for c in decl.named_children if c.type == "variable_declarator"]
        typ = node_text(decl.child_by_field_name("type"))
        if len(declarators) != 1 or typ not in ("string", "var", "String"):
            continue
        d = declarators[0]
        value = [c for c in d.named_children if c.id != d.child_by_field_name("name").id]
        if len(value) == 1 and node_text(value[0]) in _EMPTY_STRINGS:
            yield n, node_text(d.child_by_field_name("name")), d.child_by_field_name("name")


def rule_string_builder(m: _Method, ctx: FocalContext) -> Rewrite | None:
    for stmt, local, decl_name in _string_locals(m):
        plan = _plan_builder(m, stmt, local, decl_name)
        if plan is None:
            continue
        static = m.is_static
        taken = set(ctx.attribute_names | ctx.member_names)
        field_name = _fresh("s_builder" if static else "_builder", taken)
        edits = [(*m.pos(stmt), f"{field_name}.Clear();")]
        for kind, node, extra in plan:
            if kind == "append":
                edits.append((*m.pos(node), f"{field_name}{_appends(extra)};"))
            else:
                edits.append((*m.pos(node), f"{field_name}.ToString()"))
        mod = "private static readonly" if static else "private readonly"
        imports = []
        if "using System.Text;" not in {collapse_whitespace(i) for i in ctx.imports}:
            imports.append("using System.Text;")
        attr = f"{mod} StringBuilder {field_name} = new StringBuilder();"
        return Rewrite(m.apply(edits), imports=imports, attributes=[attr])
    return None


def _plan_builder(m: _Method, stmt: Node, local: str, decl_name: Node):
    """Edits turning ``local`` into builder calls, or ``None`` if unsafe."""
    appends, reads, loops = [], [], set()
    for n in walk(m.node):
        if n.type != "identifier" or node_text(n) != local or n.id == decl_name.id:
            continue
        p = n.parent
        if p.type == "member_access_expression" and p.child_by_field_name("name").id == n.id:
            continue
        if p.type == "assignment_expression" and p.child_by_field_name("left").id == n.id:
            op = node_text(p.child_by_field_name("operator"))
            right = p.child_by_field_name("right")
            stmt_node = p.parent
            loop = _inside_loop_body(stmt_node, m.node) if stmt_node.type == "expression_statement" else None
            if stmt_node.type != "expression_statement" or loop is None:
                return None
            if op == "+=":
                appends.append(("append", stmt_node, right))
            elif op == "=":
                ops = _concat_operands(right)
                if len(ops) < 2 or ops[0].type != "identifier" or node_text(ops[0]) != local:
                    return None
                rest = right.child_by_field_name("right") if len(ops) == 2 else None
                if rest is None:
                    return None
                appends.append(("append", stmt_node, rest))
            else:
                return None
            loops.add(loop.id)
            continue
        if any(n.start_byte >= a[1].start_byte and n.end_byte <= a[1].end_byte for a in appends):
            continue  # the `x` in `x = x + ...`
        reads.append(n)
    if not appends:
        return None
    for _, _, value in appends:
        if any(c.type == "identifier" and node_text(c) == local for c in walk(value)):
            return None
    plan = list(appends)
    for r in reads:
        if any(r.start_byte >= a[1].start_byte and r.end_byte <= a[1].end_byte for a in appends):
            continue
        if _inside_loop_body(r, m.node) is not None and _enclosing_loop_ids(r, m.node) & loops:
            return None  # read while building: would need the partial string
        plan.append(("read", r, None))
    return plan


def _enclosing_loop_ids(node: Node, stop: Node) -> set[int]:
    ids, cur = set(), node.parent
    while cur is not None and cur.id != stop.id:
        if cur.type in LOOPS:
            ids.add(cur.id)
        cur = cur.parent
    return ids


# ---------------------------------------------------------------------------

RuleFn = Callable[[_Method, FocalContext], "Rewrite | None"]

RULES: dict[str, RuleFn] = {
    "R1": rule_count_zero,
    "R2": rule_where_first,
    "R3": rule_char_array_iteration,
    "R4": rule_hoist_constant_array,
    "R5": rule_string_builder,
}


def focal_region(input_text: str, markers: tuple[str, str] = (BEGIN_MARKER, END_MARKER)) -> str | None:
    begin = input_text.find(markers[0])
    if begin < 0:
        return None
    end = input_text.find(markers[1], begin + len(markers[0]))
    if end < 0:
        return None
    return input_text[begin + len(markers[0]) : end].strip("\n")


def focal_context(input_text: str, markers: tuple[str, str] = (BEGIN_MARKER, END_MARKER)) -> FocalContext | None:
    from ..code_model.model import parse_parts

    method_text = focal_region(input_text, markers)
    if method_text is None:
        return None
    parts = parse_parts(input_text)
    attr_names = frozenset(n for a in parts.attributes for n in a.names)
    member_names = frozenset(mm.name for mm in parts.methods)
    return FocalContext(method_text, tuple(u.text for u in parts.imports), attr_names, member_names)
