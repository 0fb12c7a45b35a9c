"""Classes, methods and member attributes extracted from C# source."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from tree_sitter import Node

from ..errors import UnparseableFile
from .normalize import collapse_whitespace, normalize_body
from .syntax import (
    ATTRIBUTE_LIKE,
    CLASS_LIKE,
    FRAGMENT_CLASS,
    METHOD_LIKE,
    Fragment,
    compact_type,
    diagnostics,
    fragment_members,
    node_text,
    parse_bytes,
    parse_fragment,
    walk,
)

log = logging.getLogger(__name__)

_PARAM_MODIFIERS = {"ref", "out", "in", "this", "params", "scoped", "readonly"}


@dataclass(frozen=True)
class Invocation:
    """A call site found in a method body: ``qualifier.name(args)``.

    ``qualifier`` is ``None`` for unqualified calls, ``"this"``/``"base"`` for
    calls through those keywords, otherwise the receiver text.
    """

    name: str
    arity: int
    qualifier: str | None = None


@dataclass
class MethodModel:
    signature: str
    name: str
    text: str
    body_text: str
    normalized_body: str
    signature_text: str
    class_name: str = ""
    span: tuple[int, int] = (0, 0)
    param_names: tuple[str, ...] = ()
    min_arity: int = 0
    max_arity: int | None = 0  # None: params array, unbounded
    invocations: tuple[Invocation, ...] = ()
    callees: set[str] = field(default_factory=set)
    callers: set[str] = field(default_factory=set)

    def accepts(self, arity: int) -> bool:
        if arity < self.min_arity:
            return False
        return self.max_arity is None or arity <= self.max_arity


@dataclass
class AttributeModel:
    """A field, property or event declared directly in a class body."""

    names: tuple[str, ...]
    text: str
    span: tuple[int, int] = (0, 0)

    @property
    def key(self) -> tuple[str, ...]:
        return self.names

    @property
    def normalized(self) -> str:
        return normalize_body(self.text)


@dataclass
class ClassModel:
    name: str
    attributes: list[AttributeModel] = field(default_factory=list)
    methods: list[MethodModel] = field(default_factory=list)
    span: tuple[int, int] = (0, 0)
    body_span: tuple[int, int] = (0, 0)  # between the braces

    def method(self, signature: str) -> MethodModel | None:
        for m in self.methods:
            if m.signature == signature:
                return m
        return None

    def attribute_named(self, name: str) -> AttributeModel | None:
        for a in self.attributes:
            if name in a.names:
                return a
        return None


@dataclass
class UsingModel:
    text: str
    span: tuple[int, int] = (0, 0)

    @property
    def normalized(self) -> str:
        return collapse_whitespace(self.text)


@dataclass
class SourceUnit:
    using_statements: list[str]
    classes: list[ClassModel]
    raw_text: str
    diagnostics: list[str] = field(default_factory=list)
    usings: list[UsingModel] = field(default_factory=list)

    def methods(self) -> list[MethodModel]:
        return [m for c in self.classes for m in c.methods]

    def find_method(self, signature: str) -> tuple[ClassModel, MethodModel] | None:
        for c in self.classes:
            m = c.method(signature)
            if m is not None:
                return c, m
        return None

    def class_of(self, method: MethodModel) -> ClassModel | None:
        for c in self.classes:
            if any(m is method for m in c.methods):
                return c
        return None


# ---------------------------------------------------------------------------
# signatures


def _parameters(plist: Node | None) -> list[tuple[str, str, bool, bool]]:
    """(type, name, optional, is_params) for each parameter."""
    if plist is None:
        return []
    params = []
    pending_mods: list[str] = []
    loose_type: Node | None = None
    for i, child in enumerate(plist.children):
        fname = plist.field_name_for_child(i)
        if child.type == "parameter":
            mods = []
            type_node = child.child_by_field_name("type")
            name_node = child.child_by_field_name("name")
            optional = False
            for c in child.children:
                if c.type == "modifier" or c.type in _PARAM_MODIFIERS:
                    mods.append(node_text(c))
                if c.type == "=":
                    optional = True
            tname = compact_type(node_text(type_node)) if type_node is not None else "?"
            ptype = " ".join(mods + [tname])
            params.append((ptype, node_text(name_node) if name_node else "", optional, "params" in mods))
        elif child.type == "params" or (not child.is_named and node_text(child) == "params"):
            pending_mods = ["params"]
        elif fname == "type":
            loose_type = child
        elif fname == "name" and loose_type is not None:
            # grammar quirk: `params T[] x` is not wrapped in a parameter node
            ptype = " ".join(pending_mods + [compact_type(node_text(loose_type))])
            params.append((ptype, node_text(child), False, True))
            pending_mods, loose_type = [], None
    return params


def _type_param_count(node: Node) -> int:
    tp = node.child_by_field_name("type_parameters")
    if tp is None:
        return 0
    return sum(1 for c in tp.named_children if c.type == "type_parameter")


def method_signature(node: Node, class_name: str = "") -> tuple[str, str, list]:
    """Return ``(signature, name, params)`` for a method/constructor node.

    The signature is ``<return> <name>[`arity](<param types>)`` with all
    whitespace inside types removed; constructors use ``.ctor`` as return.
    """
    name_node = node.child_by_field_name("name")
    name = node_text(name_node) if name_node is not None else "?"
    if node.type == "constructor_declaration":
        ret = ".ctor"
    else:
        rnode = node.child_by_field_name("returns") or node.child_by_field_name("type")
        ret = compact_type(node_text(rnode)) if rnode is not None else "void"
    params = _parameters(node.child_by_field_name("parameters"))
    arity = _type_param_count(node)
    generic = f"`{arity}" if arity else ""
    sig = f"{ret} {name}{generic}({','.join(p[0] for p in params)})"
    return sig, name, params


def _invocations(body: Node | None) -> tuple[Invocation, ...]:
    if body is None:
        return ()
    found = []
    for n in walk(body):
        if n.type != "invocation_expression":
            continue
        fn = n.child_by_field_name("function")
        args = n.child_by_field_name("arguments")
        arity = sum(1 for c in args.named_children if c.type == "argument") if args is not None else 0
        if fn is None:
            continue
        if fn.type == "identifier":
            found.append(Invocation(node_text(fn), arity))
        elif fn.type == "generic_name":
            found.append(Invocation(node_text(fn.named_children[0]), arity))
        elif fn.type == "member_access_expression":
            recv = fn.child_by_field_name("expression")
            mname = fn.child_by_field_name("name")
            if mname is None or recv is None:
                continue
            if mname.type == "generic_name":
                mname = mname.named_children[0]
            found.append(Invocation(node_text(mname), arity, node_text(recv)))
    return tuple(found)


def _body_node(node: Node) -> Node | None:
    body = node.child_by_field_name("body")
    if body is not None:
        return body
    for c in node.named_children:
        if c.type in ("block", "arrow_expression_clause"):
            return c
    return None


def _method_model(node: Node, src: bytes, class_name: str, to_orig=lambda p: p) -> MethodModel:
    sig, name, params = method_signature(node, class_name)
    body = _body_node(node)
    text = node_text(node)
    if body is not None:
        body_text = node_text(body)
        head = src[node.start_byte:body.start_byte].decode("utf-8", errors="replace").rstrip()
    else:
        body_text = ""
        head = text.rstrip().rstrip(";").rstrip()
    required = sum(1 for p in params if not p[2] and not p[3])
    has_params = any(p[3] for p in params)
    start, end = to_orig(node.start_byte), to_orig(node.end_byte)
    return MethodModel(
        signature=sig,
        name=name,
        text=text,
        body_text=body_text,
        normalized_body=normalize_body(body_text),
        signature_text=collapse_whitespace(head),
        class_name=class_name,
        span=(start or 0, end or 0),
        param_names=tuple(p[1] for p in params),
        min_arity=required,
        max_arity=None if has_params else len(params),
        invocations=_invocations(body),
    )


def _attribute_names(node: Node) -> tuple[str, ...]:
    if node.type == "property_declaration":
        n = node.child_by_field_name("name")
        return (node_text(n),) if n is not None else ()
    names = []
    for c in node.named_children:
        if c.type == "variable_declaration":
            for d in c.named_children:
                if d.type == "variable_declarator":
                    nm = d.child_by_field_name("name")
                    if nm is not None:
                        names.append(node_text(nm))
    return tuple(names)


def _class_model(node: Node, src: bytes, name: str, to_orig=lambda p: p) -> ClassModel:
    body = node.child_by_field_name("body")
    cls = ClassModel(name=name, span=(to_orig(node.start_byte) or 0, to_orig(node.end_byte) or 0))
    if body is None:
        return cls
    members = list(body.named_children)
    cls.body_span = (to_orig(body.start_byte + 1) or 0, to_orig(body.end_byte - 1) or 0)
    seen: set[str] = set()
    for m in members:
        if m.type in METHOD_LIKE:
            mm = _method_model(m, src, name, to_orig)
            if mm.signature in seen:
                log.warning("duplicate signature %s in class %s dropped", mm.signature, name)
                continue
            seen.add(mm.signature)
            cls.methods.append(mm)
        elif m.type in ATTRIBUTE_LIKE:
            cls.attributes.append(
                AttributeModel(
                    names=_attribute_names(m),
                    text=node_text(m),
                    span=(to_orig(m.start_byte) or 0, to_orig(m.end_byte) or 0),
                )
            )
    return cls


def _collect(root: Node, src: bytes, to_orig=lambda p: p):
    usings: list[UsingModel] = []
    classes: list[ClassModel] = []

    def visit(node: Node, prefix: str) -> None:
        for child in node.named_children:
            t = child.type
            if t == "using_directive":
                usings.append(
                    UsingModel(node_text(child), (to_orig(child.start_byte) or 0, to_orig(child.end_byte) or 0))
                )
            elif t in CLASS_LIKE:
                nm = child.child_by_field_name("name")
                cname = node_text(nm) if nm is not None else "?"
                qual = f"{prefix}.{cname}" if prefix else cname
                if cname == FRAGMENT_CLASS:
                    qual = ""
                classes.append(_class_model(child, src, qual, to_orig))
                body = child.child_by_field_name("body")
                if body is not None:
                    visit(body, qual)
            elif t in ("namespace_declaration", "file_scoped_namespace_declaration", "declaration_list"):
                visit(child, prefix)
            elif t == "ERROR":
                visit(child, prefix)

    visit(root, "")
    return usings, classes


def parse_source(text: str) -> SourceUnit:
    """Parse a whole C# file.

    Classes that parse are extracted even when other parts of the file are
    broken; syntax problems are listed in ``SourceUnit.diagnostics``.
    Raises :class:`UnparseableFile` when nothing usable is recovered.
    """
    src = text.encode("utf-8")
    tree = parse_bytes(src)
    root = tree.root_node
    usings, classes = _collect(root, src)
    diags = diagnostics(root)
    if root.has_error and not usings and not classes:
        raise UnparseableFile("no using directives or type declarations recovered: " + "; ".join(diags[:3]))
    return SourceUnit(
        using_statements=[u.normalized for u in usings],
        classes=classes,
        raw_text=text,
        diagnostics=diags,
        usings=usings,
    )


@dataclass
class PatchParts:
    """Output-format text split into imports, attributes and methods."""

    imports: list[UsingModel]
    attributes: list[AttributeModel]
    methods: list[MethodModel]
    fragment: Fragment
    other: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.fragment.ok


def parse_parts(text: str) -> PatchParts:
    """Split patch/example text (usings, attributes, methods) into parts.

    Spans are byte offsets into ``text``.
    """
    frag = parse_fragment(text)
    to_orig = frag.to_original
    imports: list[UsingModel] = []
    for child in frag.root.named_children:
        if child.type == "using_directive":
            imports.append(UsingModel(node_text(child), (to_orig(child.start_byte), to_orig(child.end_byte))))
    attributes: list[AttributeModel] = []
    methods: list[MethodModel] = []
    other: list[str] = []
    for m in fragment_members(frag):
        if m.type in METHOD_LIKE:
            methods.append(_method_model(m, frag.src, "", to_orig))
        elif m.type in ATTRIBUTE_LIKE:
            attributes.append(
                AttributeModel(_attribute_names(m), node_text(m), (to_orig(m.start_byte), to_orig(m.end_byte)))
            )
        elif m.type in ("comment", "using_directive"):
            continue
        else:
            other.append(node_text(m))
    return PatchParts(imports, attributes, methods, frag, other)
