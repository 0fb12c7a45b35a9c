"""Loading a directory of C# files into namespaces, classes and members."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from tree_sitter import Node

from ..code_model.syntax import error_nodes, node_text, parse_bytes

SKIP_DIRS = {".git", "bin", "obj", "__pycache__"}


@dataclass
class SourceFile:
    path: str  # relative, forward slashes
    text: bytes
    root: Node
    usings: list[tuple[str, Node]] = field(default_factory=list)

    def position(self, node: Node) -> tuple[int, int]:
        return node.start_point[0] + 1, node.start_point[1] + 1


@dataclass
class FieldDecl:
    name: str
    type_text: str
    is_static: bool
    init: Node | None
    node: Node


@dataclass
class PropertyDecl:
    name: str
    type_text: str
    is_static: bool
    getter: Node | None  # arrow expression or block; None for auto-properties
    init: Node | None
    node: Node

    @property
    def is_auto(self) -> bool:
        return self.getter is None


@dataclass
class MethodDecl:
    name: str
    return_text: str
    params: list[tuple[str, str, bool]]  # (type, name, is_params)
    is_static: bool
    body: Node | None
    node: Node
    attributes: tuple[str, ...] = ()
    optional: int = 0

    @property
    def min_arity(self) -> int:
        return len(self.params) - self.optional - (1 if self.params and self.params[-1][2] else 0)

    def accepts(self, n: int) -> bool:
        if self.params and self.params[-1][2]:
            return n >= self.min_arity
        return self.min_arity <= n <= len(self.params)


@dataclass
class ClassDecl:
    name: str
    namespace: str
    file: SourceFile
    node: Node
    fields: dict[str, FieldDecl] = field(default_factory=dict)
    properties: dict[str, PropertyDecl] = field(default_factory=dict)
    methods: dict[str, list[MethodDecl]] = field(default_factory=dict)
    ctors: list[MethodDecl] = field(default_factory=list)
    attributes: tuple[str, ...] = ()
    is_static: bool = False
    duplicates: list[MethodDecl] = field(default_factory=list)

    @property
    def full_name(self) -> str:
        return f"{self.namespace}.{self.name}" if self.namespace else self.name


@dataclass
class Project:
    root: Path
    files: list[SourceFile]
    classes: dict[str, ClassDecl]
    namespaces: set[str]
    syntax_errors: list[tuple[SourceFile, Node]]


def _modifiers(node: Node) -> set[str]:
    return {node_text(c) for c in node.children if c.type == "modifier"}


def attribute_names(node: Node) -> tuple[str, ...]:
    names = []
    for c in node.children:
        if c.type == "attribute_list":
            for a in c.named_children:
                if a.type == "attribute":
                    nm = a.child_by_field_name("name")
                    if nm is not None:
                        names.append(node_text(nm).split(".")[-1].removesuffix("Attribute"))
    return tuple(names)


def _params(plist: Node | None) -> tuple[list[tuple[str, str, bool]], int]:
    out, optional = [], 0
    if plist is None:
        return out, 0
    loose_type = None
    for i, c in enumerate(plist.children):
        fname = plist.field_name_for_child(i)
        if c.type == "parameter":
            t = c.child_by_field_name("type")
            n = c.child_by_field_name("name")
            is_params = any(node_text(x) == "params" for x in c.children if x.type in ("modifier", "params"))
            if any(x.type == "=" for x in c.children):
                optional += 1
            out.append((node_text(t) if t is not None else "?", node_text(n), is_params))
        elif fname == "type":
            loose_type = c
        elif fname == "name" and loose_type is not None:
            out.append((node_text(loose_type), node_text(c), True))
            loose_type = None
    return out, optional


def _body(node: Node) -> Node | None:
    b = node.child_by_field_name("body")
    if b is not None:
        return b
    for c in node.named_children:
        if c.type in ("block", "arrow_expression_clause"):
            return c
    return None


def _method(node: Node) -> MethodDecl:
    name = node_text(node.child_by_field_name("name"))
    if node.type == "constructor_declaration":
        ret = "void"
    else:
        r = node.child_by_field_name("returns") or node.child_by_field_name("type")
        ret = node_text(r) if r is not None else "void"
    params, optional = _params(node.child_by_field_name("parameters"))
    return MethodDecl(name, ret, params, "static" in _modifiers(node), _body(node), node, attribute_names(node), optional)


def _property(node: Node) -> PropertyDecl:
    name = node_text(node.child_by_field_name("name"))
    t = node_text(node.child_by_field_name("type"))
    getter, init = None, None
    for c in node.named_children:
        if c.type == "arrow_expression_clause":
            getter = c
        elif c.type == "accessor_list":
            for acc in c.named_children:
                if acc.type == "accessor_declaration" and node_text(acc).lstrip().startswith("get"):
                    b = _body(acc)
                    if b is not None:
                        getter = b
    value = node.child_by_field_name("value")
    if value is not None and value.type != "arrow_expression_clause":
        init = value
    return PropertyDecl(name, t, "static" in _modifiers(node), getter, init, node)


def _fields(node: Node) -> list[FieldDecl]:
    out = []
    static = bool(_modifiers(node) & {"static", "const"})
    for c in node.named_children:
        if c.type != "variable_declaration":
            continue
        t = node_text(c.child_by_field_name("type"))
        for d in c.named_children:
            if d.type != "variable_declarator":
                continue
            nm = d.child_by_field_name("name")
            init = next((x for x in d.named_children if x.id != nm.id), None)
            out.append(FieldDecl(node_text(nm), t, static, init, d))
    return out


def _class(node: Node, ns: str, f: SourceFile) -> ClassDecl:
    cls = ClassDecl(node_text(node.child_by_field_name("name")), ns, f, node, attributes=attribute_names(node))
    cls.is_static = "static" in _modifiers(node)
    body = node.child_by_field_name("body")
    seen: set[tuple] = set()
    for m in body.named_children if body is not None else []:
        if m.type == "field_declaration":
            for fd in _fields(m):
                cls.fields[fd.name] = fd
        elif m.type == "property_declaration":
            p = _property(m)
            cls.properties[p.name] = p
        elif m.type in ("method_declaration", "constructor_declaration"):
            md = _method(m)
            key = (md.name, m.type, tuple(p[0].replace(" ", "") for p in md.params))
            if key in seen:
                cls.duplicates.append(md)
                continue
            seen.add(key)
            if m.type == "constructor_declaration":
                cls.ctors.append(md)
            else:
                cls.methods.setdefault(md.name, []).append(md)
    return cls


def load_project(root: str | Path) -> Project:
    root = Path(root)
    files, classes, namespaces, errors = [], {}, set(), []
    paths = sorted(
        p for p in root.rglob("*.cs") if not (set(p.relative_to(root).parts[:-1]) & SKIP_DIRS)
    )
    for p in paths:
        text = p.read_bytes()
        if text.startswith(b"\xef\xbb\xbf"):
            text = text[3:]
        tree = parse_bytes(text)
        sf = SourceFile(p.relative_to(root).as_posix(), text, tree.root_node)
        files.append(sf)
        for e in error_nodes(tree.root_node):
            errors.append((sf, e))

        def visit(node: Node, ns: str) -> None:
            for c in node.named_children:
                if c.type == "using_directive":
                    nm = next((x for x in c.named_children if x.type in ("identifier", "qualified_name")), None)
                    if nm is not None:
                        sf.usings.append((node_text(nm).replace(" ", ""), c))
                elif c.type in ("namespace_declaration", "file_scoped_namespace_declaration"):
                    name = node_text(c.child_by_field_name("name")).replace(" ", "")
                    full = f"{ns}.{name}" if ns else name
                    parts = full.split(".")
                    for i in range(1, len(parts) + 1):
                        namespaces.add(".".join(parts[:i]))
                    body = c.child_by_field_name("body")
                    visit(body if body is not None else c, full)
                elif c.type in ("class_declaration", "struct_declaration", "record_declaration"):
                    cd = _class(c, ns, sf)
                    classes.setdefault(cd.name, cd)
                elif c.type == "declaration_list":
                    visit(c, ns)

        visit(tree.root_node, "")
    return Project(root, files, classes, namespaces, errors)
