"""Replace local variable and parameter names with ``VAR_i`` placeholders."""
from __future__ import annotations

from tree_sitter import Node

from ..errors import AbstractionParseError
from .syntax import Fragment, fragment_members, node_text, parse_fragment, walk

_TYPE_PARENTS = {
    "generic_name",
    "qualified_name",
    "type_argument_list",
    "array_type",
    "nullable_type",
    "pointer_type",
    "base_list",
    "type_parameter",
    "type_parameter_constraint",
    "type_parameter_constraints_clause",
    "attribute",
    "name_colon",
    "name_equals",
    "alias_qualified_name",
    "ref_type",
    "using_directive",
}
_DECLARED_ELSEWHERE = {
    "method_declaration",
    "local_function_statement",
    "class_declaration",
    "struct_declaration",
    "record_declaration",
    "interface_declaration",
    "enum_declaration",
    "enum_member_declaration",
    "property_declaration",
    "constructor_declaration",
    "delegate_declaration",
    "event_declaration",
    "namespace_declaration",
    "labeled_statement",
    "goto_statement",
}
_LOCAL_DECL_PARENTS = {
    "local_declaration_statement",
    "for_statement",
    "using_statement",
    "fixed_statement",
}


def _declared_names(scope: Node) -> set[str]:
    names: set[str] = set()
    for n in walk(scope):
        t = n.type
        if t == "parameter":
            nm = n.child_by_field_name("name")
            if nm is not None:
                names.add(node_text(nm))
        elif t == "parameter_list":
            for i, c in enumerate(n.children):
                if n.field_name_for_child(i) == "name":
                    names.add(node_text(c))
        elif t == "implicit_parameter":
            names.add(node_text(n))
        elif t == "variable_declarator":
            decl = n.parent
            owner = decl.parent if decl is not None else None
            if owner is not None and owner.type in _LOCAL_DECL_PARENTS:
                nm = n.child_by_field_name("name")
                if nm is not None:
                    names.add(node_text(nm))
        elif t == "foreach_statement":
            left = n.child_by_field_name("left")
            if left is not None:
                for c in walk(left):
                    if c.type == "identifier":
                        names.add(node_text(c))
        elif t in ("catch_declaration", "declaration_expression", "declaration_pattern"):
            nm = n.child_by_field_name("name")
            if nm is not None:
                names.add(node_text(nm))
        elif t in ("parenthesized_variable_designation", "var_pattern"):
            for c in n.named_children:
                if c.type == "identifier":
                    names.add(node_text(c))
        elif t in ("from_clause", "let_clause", "join_clause", "query_continuation", "join_into_clause"):
            for i, c in enumerate(n.children):
                if c.type == "identifier" and n.field_name_for_child(i) in ("name", None):
                    # the range variable is the first bare identifier
                    names.add(node_text(c))
                    break
    return names


def _is_variable_position(node: Node) -> bool:
    parent = node.parent
    if parent is None:
        return True
    idx = None
    for i, c in enumerate(parent.children):
        if c.id == node.id:
            idx = i
            break
    field = parent.field_name_for_child(idx) if idx is not None else None
    pt = parent.type
    if pt == "member_access_expression" and field == "name":
        return False
    if pt == "member_binding_expression":
        return False
    if field in ("type", "returns", "qualifier", "alias"):
        # `foreach (var c in ...)`: left is the variable, type is not
        return False
    if pt in _TYPE_PARENTS:
        return False
    if pt in _DECLARED_ELSEWHERE and field == "name":
        return False
    return True


def _scopes(frag: Fragment) -> list[Node]:
    if frag.wrapped:
        return fragment_members(frag)
    return [frag.root]


def variable_occurrences(frag: Fragment) -> list[tuple[Node, int]]:
    """Every variable occurrence in ``frag`` with its ``VAR_i`` index.

    Indices follow first encounter in a pre-order, left-to-right walk.
    """
    index: dict[tuple[int, str], int] = {}
    found: list[tuple[Node, int]] = []
    for scope_id, scope in enumerate(_scopes(frag)):
        declared = _declared_names(scope)
        if not declared:
            continue
        for n in walk(scope):
            if n.type not in ("identifier", "implicit_parameter"):
                continue
            name = node_text(n)
            if name not in declared:
                continue
            if n.type == "identifier" and not _is_variable_position(n):
                continue
            key = (scope_id, name)
            if key not in index:
                index[key] = len(index)
            found.append((n, index[key]))
    return found


def abstract_variables(code: str) -> str:
    """Rename locals and parameters to ``VAR_0``, ``VAR_1``, ... .

    Indices follow first encounter in a pre-order, left-to-right walk of the
    parse tree, so parameters are numbered before body locals. Numbering runs
    across the whole text. A variable is identified by its name within its
    enclosing member, so equal names in two methods get distinct indices.
    Types, members, methods and fields keep their names.

    >>> abstract_variables("void F(int b) { int a = b + a; }")
    'void F(int VAR_0) { int VAR_1 = VAR_0 + VAR_1; }'
    """
    frag = parse_fragment(code)
    if not frag.ok:
        raise AbstractionParseError("code does not parse")
    edits: list[tuple[int, int, str]] = []
    for n, idx in variable_occurrences(frag):
        start, end = frag.to_original(n.start_byte), frag.to_original(n.end_byte)
        if start is None or end is None:
            continue
        edits.append((start, end, f"VAR_{idx}"))
    out = bytearray(frag.original)
    for start, end, repl in sorted(edits, reverse=True):
        out[start:end] = repl.encode()
    return out.decode("utf-8")
