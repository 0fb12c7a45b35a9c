"""Static checks producing compiler-style diagnostics for the C# subset.

Only what the checker can prove is reported; anything it cannot type is
treated as unknown and accepted.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from tree_sitter import Node

from ..code_model.syntax import node_text, walk
from . import types as T
from .project import ClassDecl, MethodDecl, Project, SourceFile
from .types import UNKNOWN, Ty


@dataclass(frozen=True)
class Diagnostic:
    path: str
    line: int
    col: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}({self.line},{self.col}): error {self.code}: {self.message}"


@dataclass(frozen=True)
class TypeRef:
    ty: Ty
    cls: ClassDecl | None = None


@dataclass(frozen=True)
class UserGroup:
    cls: ClassDecl
    name: str
    candidates: tuple[MethodDecl, ...]
    via_type: bool  # Type.M(...) as opposed to obj.M(...) / M(...)


@dataclass(frozen=True)
class BclMethod:
    member: T.Member
    receiver: Ty
    name: str


@dataclass
class Ctx:
    file: SourceFile
    cls: ClassDecl
    namespace: str
    imports: frozenset[str]
    static: bool
    returns: Ty | None  # None inside lambdas: anything goes
    method_name: str = ""
    scopes: list[dict[str, Ty]] = field(default_factory=list)
    type_params: frozenset[str] = frozenset()

    def lookup(self, name: str) -> Ty | None:
        for s in reversed(self.scopes):
            if name in s:
                return s[name]
        return None


_SYNTAX_MESSAGES = {"}": ("CS1513", "} expected"), ";": ("CS1002", "; expected"), ")": ("CS1026", ") expected")}


class Checker:
    def __init__(self, project: Project):
        self.project = project
        self.diagnostics: list[Diagnostic] = []

    # -- reporting ----------------------------------------------------------

    def error(self, f: SourceFile, node: Node, code: str, message: str) -> None:
        line, col = f.position(node)
        self.diagnostics.append(Diagnostic(f.path, line, col, code, message))

    # -- entry --------------------------------------------------------------

    def run(self) -> list[Diagnostic]:
        for f, node in self.project.syntax_errors:
            if node.is_missing:
                code, msg = _SYNTAX_MESSAGES.get(node.type, ("CS1525", f"Invalid expression term '{node.type}'"))
            else:
                code, msg = "CS1525", f"Invalid expression term '{node_text(node)[:20]}'"
            self.error(f, node, code, msg)
        if self.diagnostics:
            return self.diagnostics
        for f in self.project.files:
            self._check_usings(f)
        for cls in self.project.classes.values():
            self._check_class(cls)
        return self.diagnostics

    def _imports(self, f: SourceFile) -> frozenset[str]:
        return frozenset(name for name, _ in f.usings)

    def _check_usings(self, f: SourceFile) -> None:
        known = T.BCL_NAMESPACES | self.project.namespaces
        for name, node in f.usings:
            if name in known or name in self.project.classes:
                continue
            if "." in name:
                parent, leaf = name.rsplit(".", 1)
                if parent in known:
                    self.error(
                        f, node, "CS0234",
                        f"The type or namespace name '{leaf}' does not exist in the namespace '{parent}' "
                        "(are you missing an assembly reference?)",
                    )
                    continue
            self.error(
                f, node, "CS0246",
                f"The type or namespace name '{name.split('.')[0]}' could not be found "
                "(are you missing a using directive or an assembly reference?)",
            )

    # -- types ----------------------------------------------------------------

    def _visible_class(self, name: str, ctx: Ctx) -> ClassDecl | None:
        cls = self.project.classes.get(name)
        if cls is None:
            return None
        ns = cls.namespace
        if not ns or ns in ctx.imports or ctx.namespace == ns or ctx.namespace.startswith(ns + "."):
            return cls
        return None

    def _bcl_visible(self, name: str, ctx: Ctx) -> bool:
        need = T.BCL_TYPES.get(name)
        if need is None:
            return False
        return any(ns in ctx.imports for ns in need.split("|"))

    def resolve(self, ty: Ty, ctx: Ctx, node: Node) -> Ty:
        """Check that every name in ``ty`` is visible; unknown parts become '?'."""
        if ty.unknown or ty.name in ("var", "null"):
            return ty
        if ty.name == "[]":
            return T.array_of(self.resolve(ty.args[0], ctx, node))
        args = tuple(self.resolve(a, ctx, node) for a in ty.args)
        if ty.name in T.PRIMITIVES or ty.name in ctx.type_params:
            return Ty(ty.name, args)
        if self._visible_class(ty.name, ctx) is not None or self._bcl_visible(ty.name, ctx):
            return Ty(ty.name, args)
        self.error(
            ctx.file, node, "CS0246",
            f"The type or namespace name '{ty.name}' could not be found "
            "(are you missing a using directive or an assembly reference?)",
        )
        return UNKNOWN

    def convert(self, src: Ty, dst: Ty, ctx: Ctx, node: Node) -> None:
        if T.implicit(src, dst):
            return
        if src == T.VOID:
            self.error(ctx.file, node, "CS0029", f"Cannot implicitly convert type 'void' to '{dst}'")
        elif T.explicit(src, dst):
            self.error(
                ctx.file, node, "CS0266",
                f"Cannot implicitly convert type '{src}' to '{dst}'. An explicit conversion exists (are you missing a cast?)",
            )
        else:
            self.error(ctx.file, node, "CS0029", f"Cannot implicitly convert type '{src}' to '{dst}'")

    # -- declarations -----------------------------------------------------------

    def _ctx(self, cls: ClassDecl, static: bool, returns: Ty | None, name: str = "", tparams=()) -> Ctx:
        return Ctx(
            cls.file, cls, cls.namespace, self._imports(cls.file), static, returns, name,
            [{}], frozenset(tparams),
        )

    def _check_class(self, cls: ClassDecl) -> None:
        for d in cls.duplicates:
            self.error(
                cls.file, d.node, "CS0111",
                f"Type '{cls.name}' already defines a member called '{d.name}' with the same parameter types",
            )
        for fd in cls.fields.values():
            ctx = self._ctx(cls, fd.is_static, None)
            declared = self.resolve(T.type_from_text(fd.type_text), ctx, fd.node)
            if fd.init is not None:
                self.convert(self.expr_or_init(fd.init, ctx, declared), declared, ctx, fd.init)
        for p in cls.properties.values():
            ctx = self._ctx(cls, p.is_static, None)
            declared = self.resolve(T.type_from_text(p.type_text), ctx, p.node)
            ctx.returns = declared
            if p.getter is not None:
                self._body(p.getter, ctx)
            if p.init is not None:
                self.convert(self.expr(p.init, ctx), declared, ctx, p.init)
        for group in list(cls.methods.values()) + [cls.ctors]:
            for m in group:
                self._check_method(cls, m)

    def _type_params(self, node: Node) -> list[str]:
        tp = node.child_by_field_name("type_parameters")
        if tp is None:
            return []
        return [node_text(c.child_by_field_name("name") or c) for c in tp.named_children]

    def _check_method(self, cls: ClassDecl, m: MethodDecl) -> None:
        ctx = self._ctx(cls, m.is_static, None, m.name, self._type_params(m.node))
        ret = self.resolve(T.type_from_text(m.return_text), ctx, m.node)
        ctx.returns = ret
        for ptype, pname, is_params in m.params:
            ctx.scopes[0][pname] = self.resolve(T.type_from_text(ptype), ctx, m.node)
        if m.body is not None:
            self._body(m.body, ctx)

    def _body(self, body: Node, ctx: Ctx) -> None:
        if body.type == "arrow_expression_clause":
            e = body.named_children[0]
            t = self.expr(e, ctx)
            if ctx.returns is not None and ctx.returns != T.VOID:
                self.convert(t, ctx.returns, ctx, e)
        else:
            self.stmt(body, ctx)

    # -- statements ---------------------------------------------------------------

    def _declare(self, name: str, ty: Ty, ctx: Ctx, node: Node) -> None:
        if ctx.lookup(name) is not None:
            self.error(
                ctx.file, node, "CS0136",
                f"A local or parameter named '{name}' cannot be declared in this scope because that name is used in an enclosing local scope",
            )
        ctx.scopes[-1][name] = ty

    def _var_declaration(self, decl: Node, ctx: Ctx) -> None:
        tnode = decl.child_by_field_name("type")
        declared = self.resolve(T.parse_type(tnode), ctx, tnode)
        for d in decl.named_children:
            if d.type != "variable_declarator":
                continue
            nm = d.child_by_field_name("name")
            init = next((x for x in d.named_children if x.id != nm.id), None)
            if init is not None:
                t = self.expr_or_init(init, ctx, declared)
                if declared.name == "var":
                    ty = t if t != T.NULL else UNKNOWN
                else:
                    self.convert(t, declared, ctx, init)
                    ty = declared
            else:
                ty = UNKNOWN if declared.name == "var" else declared
            self._declare(node_text(nm), ty, ctx, nm)

    def stmt(self, n: Node, ctx: Ctx) -> None:
        t = n.type
        if t == "block":
            ctx.scopes.append({})
            for c in n.named_children:
                self.stmt(c, ctx)
            ctx.scopes.pop()
        elif t == "local_declaration_statement":
            for c in n.named_children:
                if c.type == "variable_declaration":
                    self._var_declaration(c, ctx)
        elif t == "expression_statement":
            for c in n.named_children:
                self.expr(c, ctx)
        elif t == "if_statement":
            self._condition(n.child_by_field_name("condition"), ctx)
            for f in ("consequence", "alternative"):
                c = n.child_by_field_name(f)
                if c is not None:
                    self._scoped(c, ctx)
        elif t in ("while_statement", "do_statement"):
            self._condition(n.child_by_field_name("condition"), ctx)
            self._scoped(n.child_by_field_name("body"), ctx)
        elif t == "for_statement":
            ctx.scopes.append({})
            for i, c in enumerate(n.children):
                fname = n.field_name_for_child(i)
                if fname == "initializer" or (c.type == "variable_declaration" and fname is None):
                    if c.type == "variable_declaration":
                        self._var_declaration(c, ctx)
                    else:
                        self.expr(c, ctx)
                elif fname == "condition":
                    self._condition(c, ctx)
                elif fname == "update":
                    self.expr(c, ctx)
            self._scoped(n.child_by_field_name("body"), ctx)
            ctx.scopes.pop()
        elif t == "foreach_statement":
            right = n.child_by_field_name("right")
            rt = self.expr(right, ctx)
            elem = T.element_type(rt) if isinstance(rt, Ty) else UNKNOWN
            if elem is None:
                self.error(
                    ctx.file, right, "CS1579",
                    f"foreach statement cannot operate on variables of type '{rt}' because '{rt}' does not contain a public instance or extension definition for 'GetEnumerator'",
                )
                elem = UNKNOWN
            tnode = n.child_by_field_name("type")
            declared = self.resolve(T.parse_type(tnode), ctx, tnode) if tnode is not None else Ty("var")
            ctx.scopes.append({})
            left = n.child_by_field_name("left")
            if left is not None:
                for c in walk(left):
                    if c.type == "identifier":
                        self._declare(node_text(c), elem if declared.name == "var" else declared, ctx, c)
            self._scoped(n.child_by_field_name("body"), ctx)
            ctx.scopes.pop()
        elif t == "return_statement":
            value = n.named_children[0] if n.named_children else None
            if value is None:
                if ctx.returns is not None and ctx.returns not in (T.VOID, UNKNOWN):
                    self.error(ctx.file, n, "CS0126", f"An object of a type convertible to '{ctx.returns}' is required")
                return
            vt = self.expr(value, ctx)
            if ctx.returns == T.VOID:
                self.error(
                    ctx.file, n, "CS0127",
                    f"Since '{ctx.cls.name}.{ctx.method_name}()' returns void, a return keyword must not be followed by an object expression",
                )
            elif ctx.returns is not None:
                self.convert(vt, ctx.returns, ctx, value)
        elif t == "try_statement":
            for c in n.named_children:
                if c.type == "block":
                    self.stmt(c, ctx)
                elif c.type == "catch_clause":
                    ctx.scopes.append({})
                    for cc in c.named_children:
                        if cc.type == "catch_declaration":
                            nm = cc.child_by_field_name("name")
                            tnode = cc.child_by_field_name("type")
                            if nm is not None:
                                ctx.scopes[-1][node_text(nm)] = self.resolve(T.parse_type(tnode), ctx, tnode) if tnode is not None else Ty("Exception")
                        elif cc.type == "catch_filter_clause":
                            for x in cc.named_children:
                                self._condition(x, ctx)
                        elif cc.type == "block":
                            self.stmt(cc, ctx)
                    ctx.scopes.pop()
                elif c.type == "finally_clause":
                    for cc in c.named_children:
                        self.stmt(cc, ctx)
        elif t in ("break_statement", "continue_statement", "empty_statement", "comment"):
            return
        elif t == "throw_statement":
            for c in n.named_children:
                self.expr(c, ctx)
        elif t == "local_function_statement":
            return
        elif t == "switch_statement":
            self.expr(n.child_by_field_name("value"), ctx)
            ctx.scopes.append({})
            for sec in n.child_by_field_name("body").named_children:
                if sec.type != "switch_section":
                    continue
                for c in sec.named_children:
                    if c.type.endswith("_pattern") or c.type == "case_switch_label":
                        self.bind_pattern(c, ctx)
                    elif c.type == "when_clause":
                        for x in c.named_children:
                            self._condition(x, ctx)
                    elif c.type.endswith("statement") or c.type == "block":
                        self.stmt(c, ctx)
            ctx.scopes.pop()
        else:
            for c in n.named_children:
                if c.type.endswith("_statement") or c.type == "block":
                    self._scoped(c, ctx)
                elif c.type.endswith("expression") or c.type == "identifier":
                    self.expr(c, ctx)

    def _scoped(self, n: Node | None, ctx: Ctx) -> None:
        if n is None:
            return
        ctx.scopes.append({})
        self.stmt(n, ctx)
        ctx.scopes.pop()

    def _condition(self, n: Node | None, ctx: Ctx) -> None:
        if n is None:
            return
        self.convert(self.expr(n, ctx), T.BOOL, ctx, n)

    # -- expressions ----------------------------------------------------------------

    def expr_or_init(self, n: Node, ctx: Ctx, declared: Ty) -> Ty:
        """Expression, or a bare ``{ ... }`` array initializer for ``declared``."""
        if n.type == "initializer_expression":
            elem = declared.args[0] if declared.name == "[]" else UNKNOWN
            for c in n.named_children:
                self.convert(self.expr(c, ctx), elem, ctx, c)
            return declared if declared.name == "[]" else UNKNOWN
        return self.expr(n, ctx)

    def expr(self, n: Node, ctx: Ctx) -> Ty:
        r = self._expr(n, ctx)
        if isinstance(r, TypeRef):
            return UNKNOWN
        if isinstance(r, (UserGroup, BclMethod)):
            return UNKNOWN  # method group used as a value (delegate)
        return r

    def _expr(self, n: Node, ctx: Ctx):
        t = n.type
        handler = getattr(self, "_e_" + t, None)
        if handler is not None:
            return handler(n, ctx)
        if t in ("integer_literal",):
            return T.LONG if node_text(n).lower().endswith("l") else T.INT
        if t == "real_literal":
            s = node_text(n)[-1].lower()
            return {"f": T.FLOAT, "m": T.DECIMAL}.get(s, T.DOUBLE)
        if t in ("string_literal", "verbatim_string_literal", "raw_string_literal"):
            return T.STRING
        if t == "character_literal":
            return T.CHAR
        if t == "boolean_literal":
            return T.BOOL
        if t == "null_literal":
            return T.NULL
        if t == "predefined_type":
            return TypeRef(Ty(node_text(n)))
        for c in n.named_children:
            if c.type not in ("identifier",) or t not in ("declaration_expression",):
                self.expr(c, ctx)
        return UNKNOWN

    def _e_parenthesized_expression(self, n, ctx):
        return self.expr(n.named_children[0], ctx)

    def _e_this_expression(self, n, ctx):
        return Ty(ctx.cls.name)

    def _e_base_expression(self, n, ctx):
        return UNKNOWN

    def _e_interpolated_string_expression(self, n, ctx):
        for c in n.named_children:
            if c.type == "interpolation":
                for cc in c.named_children:
                    if cc.type not in ("interpolation_brace", "interpolation_format_clause", "interpolation_alignment_clause"):
                        self.expr(cc, ctx)
        return T.STRING

    def _e_identifier(self, n, ctx):
        name = node_text(n)
        local = ctx.lookup(name)
        if local is not None:
            return local
        r = self._member_of_class(ctx.cls, name, n, ctx, implicit_this=True)
        if r is not None:
            return r
        cls = self._visible_class(name, ctx)
        if cls is not None:
            return TypeRef(Ty(cls.name), cls)
        if self._bcl_visible(name, ctx) or name in T.ALIASES:
            return TypeRef(Ty(T.ALIASES.get(name, name)))
        self.error(ctx.file, n, "CS0103", f"The name '{name}' does not exist in the current context")
        return UNKNOWN

    def _e_generic_name(self, n, ctx):
        return self._e_identifier(n.named_children[0], ctx)

    def _member_of_class(self, cls: ClassDecl, name: str, n: Node, ctx: Ctx, implicit_this: bool, static_only=False):
        fd = cls.fields.get(name)
        pd = cls.properties.get(name)
        if fd is not None or pd is not None:
            is_static = fd.is_static if fd is not None else pd.is_static
            if implicit_this and ctx.static and not is_static:
                self.error(
                    ctx.file, n, "CS0120",
                    f"An object reference is required for the non-static field, method, or property '{cls.name}.{name}'",
                )
            tt = fd.type_text if fd is not None else pd.type_text
            inner = self._ctx(cls, True, None)
            return self.resolve_quiet(T.type_from_text(tt), inner)
        if name in cls.methods:
            cands = tuple(cls.methods[name])
            if static_only:
                cands = tuple(m for m in cands if m.is_static)
            return UserGroup(cls, name, cands, via_type=static_only)
        return None

    def resolve_quiet(self, ty: Ty, ctx: Ctx) -> Ty:
        keep = len(self.diagnostics)
        r = self.resolve(ty, ctx, ctx.cls.node)
        del self.diagnostics[keep:]
        return r

    def _e_qualified_name(self, n, ctx):
        return self._e_member_access_expression(n, ctx, qualified=True)

    def _e_member_access_expression(self, n, ctx, qualified=False):
        recv_node = n.child_by_field_name("qualifier" if qualified else "expression")
        name_node = n.child_by_field_name("name")
        if name_node.type == "generic_name":
            name_node = name_node.named_children[0]
        name = node_text(name_node)
        recv_text = node_text(recv_node).replace(" ", "")
        known_ns = T.BCL_NAMESPACES | self.project.namespaces
        if recv_text in known_ns:
            cls = self.project.classes.get(name)
            if cls is not None:
                return TypeRef(Ty(name), cls)
            if name in T.BCL_TYPES or name in T.ALIASES:
                return TypeRef(Ty(T.ALIASES.get(name, name)))
            if f"{recv_text}.{name}" in known_ns:
                return TypeRef(UNKNOWN)
            self.error(
                ctx.file, name_node, "CS0234",
                f"The type or namespace name '{name}' does not exist in the namespace '{recv_text}' (are you missing an assembly reference?)",
            )
            return UNKNOWN
        if recv_node.type == "identifier" and ctx.lookup(recv_text) is None and recv_text in {
            ns.split(".")[0] for ns in known_ns
        } and self.project.classes.get(recv_text) is None and not self._member_of_class_quiet(ctx.cls, recv_text):
            return TypeRef(UNKNOWN)
        recv = self._expr(recv_node, ctx)
        if isinstance(recv, TypeRef):
            if recv.ty.unknown:
                return UNKNOWN
            if recv.cls is not None:
                r = self._member_of_class(recv.cls, name, name_node, ctx, implicit_this=False, static_only=True)
                if r is not None:
                    return r
            else:
                member = T.STATIC_MEMBERS.get(recv.ty.name, {}).get(name)
                if member is not None:
                    return member.result(recv.ty, 0) if member.kind == "prop" else BclMethod(member, recv.ty, name)
            self.error(ctx.file, name_node, "CS0117", f"'{recv.ty}' does not contain a definition for '{name}'")
            return UNKNOWN
        if isinstance(recv, (UserGroup, BclMethod)):
            return UNKNOWN
        if recv.unknown:
            return UNKNOWN
        cls = self.project.classes.get(recv.name)
        if cls is not None and not recv.args:
            r = self._member_of_class(cls, name, name_node, ctx, implicit_this=False)
            if r is not None:
                return r
            obj = T.instance_members(T.OBJECT).get(name)
            if obj is not None:
                return obj.result(recv, 0) if obj.kind == "prop" else BclMethod(obj, recv, name)
        else:
            member = T.instance_members(recv).get(name)
            if member is None and "System.Linq" in ctx.imports and T.element_type(recv) is not None:
                member = T.LINQ.get(name)
            if member is not None:
                return member.result(recv, 0) if member.kind == "prop" else BclMethod(member, recv, name)
        self.error(
            ctx.file, name_node, "CS1061",
            f"'{recv}' does not contain a definition for '{name}' and no accessible extension method '{name}' "
            f"accepting a first argument of type '{recv}' could be found (are you missing a using directive or an assembly reference?)",
        )
        return UNKNOWN

    def _member_of_class_quiet(self, cls: ClassDecl, name: str) -> bool:
        return name in cls.fields or name in cls.properties or name in cls.methods

    def _arguments(self, n: Node) -> list[Node]:
        args = n.child_by_field_name("arguments")
        if args is None:
            return []
        out = []
        for a in args.named_children:
            if a.type == "argument":
                vals = [c for c in a.named_children if c.type != "name_colon"]
                out.append(vals[-1] if vals else a)
        return out

    def _arg_type(self, a: Node, ctx: Ctx, lambda_params: list[Ty] | None) -> Ty:
        if a.type == "lambda_expression":
            return self._lambda(a, ctx, lambda_params or [])
        if a.type == "declaration_expression":
            nm = a.child_by_field_name("name")
            tnode = a.child_by_field_name("type")
            ty = T.parse_type(tnode)
            if nm is not None:
                ctx.scopes[-1][node_text(nm)] = UNKNOWN if ty.name == "var" else self.resolve(ty, ctx, tnode)
            return UNKNOWN
        return self.expr(a, ctx)

    def _lambda(self, n: Node, ctx: Ctx, ptypes: list[Ty]) -> Ty:
        params = n.child_by_field_name("parameters")
        names = []
        if params is not None:
            if params.type == "implicit_parameter" or params.type == "identifier":
                names = [node_text(params)]
            else:
                names = [node_text(p.child_by_field_name("name")) for p in params.named_children if p.type == "parameter"]
        else:
            names = [node_text(c) for c in n.named_children if c.type == "implicit_parameter"]
        inner = Ctx(ctx.file, ctx.cls, ctx.namespace, ctx.imports, ctx.static, None, ctx.method_name,
                    ctx.scopes + [{}], ctx.type_params)
        for i, nm in enumerate(names):
            inner.scopes[-1][nm] = ptypes[i] if i < len(ptypes) else UNKNOWN
        body = n.child_by_field_name("body")
        if body is not None:
            if body.type == "block":
                self.stmt(body, inner)
            else:
                self.expr(body, inner)
        return UNKNOWN

    def _e_lambda_expression(self, n, ctx):
        return self._lambda(n, ctx, [])

    def _e_invocation_expression(self, n, ctx):
        fn = n.child_by_field_name("function")
        args = self._arguments(n)
        if fn.type == "identifier" and node_text(fn) == "nameof":
            return T.STRING
        target = self._expr(fn, ctx)
        if isinstance(target, UserGroup):
            return self._call_user(target, args, ctx, n, fn)
        if isinstance(target, BclMethod):
            m = target.member
            lam = [T._elem(target.receiver, 0)] if m.lambda_elem else None
            arg_types = [self._arg_type(a, ctx, lam) for a in args]
            if m.params is not None:
                if len(args) != len(m.params):
                    self.error(ctx.file, fn, "CS1501", f"No overload for method '{target.name}' takes {len(args)} arguments")
                else:
                    for i, (a, at, pt) in enumerate(zip(args, arg_types, m.params), start=1):
                        if not T.implicit(at, pt):
                            self.error(ctx.file, a, "CS1503", f"Argument {i}: cannot convert from '{at}' to '{pt}'")
                            break
            return m.result(target.receiver, len(args))
        for a in args:
            self._arg_type(a, ctx, None)
        return UNKNOWN

    def _call_user(self, g: UserGroup, args: list[Node], ctx: Ctx, n: Node, fn: Node) -> Ty:
        arg_types = [self._arg_type(a, ctx, None) for a in args]
        fits = [m for m in g.candidates if m.accepts(len(args))]
        if not g.candidates:
            self.error(ctx.file, fn, "CS0120", f"An object reference is required for the non-static field, method, or property '{g.cls.name}.{g.name}'")
            return UNKNOWN
        if not fits:
            self.error(ctx.file, fn, "CS1501", f"No overload for method '{g.name}' takes {len(args)} arguments")
            return UNKNOWN
        inner = self._ctx(g.cls, True, None)
        first_bad = None
        for m in fits:
            ptypes = [self.resolve_quiet(T.type_from_text(p[0]), inner) for p in m.params]
            bad = None
            for i, at in enumerate(arg_types):
                pt = ptypes[min(i, len(ptypes) - 1)]
                if m.params[min(i, len(ptypes) - 1)][2] and pt.name == "[]" and not T.implicit(at, pt):
                    pt = pt.args[0]
                if not T.implicit(at, pt):
                    bad = (i, at, pt)
                    break
            if bad is None:
                if ctx.static and not m.is_static and not g.via_type and fn.type == "identifier":
                    self.error(ctx.file, fn, "CS0120", f"An object reference is required for the non-static field, method, or property '{g.cls.name}.{g.name}'")
                return self.resolve_quiet(T.type_from_text(m.return_text), inner)
            first_bad = first_bad or bad
        i, at, pt = first_bad
        self.error(ctx.file, args[i], "CS1503", f"Argument {i + 1}: cannot convert from '{at}' to '{pt}'")
        return UNKNOWN

    def _e_object_creation_expression(self, n, ctx):
        tnode = n.child_by_field_name("type")
        ty = self.resolve(T.parse_type(tnode), ctx, tnode)
        args = self._arguments(n)
        arg_types = [self._arg_type(a, ctx, None) for a in args]
        cls = self._visible_class(ty.name, ctx) if not ty.unknown else None
        if cls is not None:
            ctors = cls.ctors or []
            fits = [c for c in ctors if c.accepts(len(args))] if ctors else ([None] if not args else [])
            if not fits:
                self.error(ctx.file, tnode, "CS1729", f"'{cls.name}' does not contain a constructor that takes {len(args)} arguments")
            elif fits[0] is not None:
                inner = self._ctx(cls, True, None)
                for m in fits:
                    ptypes = [self.resolve_quiet(T.type_from_text(p[0]), inner) for p in m.params]
                    if all(T.implicit(at, pt) for at, pt in zip(arg_types, ptypes)):
                        break
                else:
                    m = fits[0]
                    ptypes = [self.resolve_quiet(T.type_from_text(p[0]), inner) for p in m.params]
                    for i, (at, pt) in enumerate(zip(arg_types, ptypes)):
                        if not T.implicit(at, pt):
                            self.error(ctx.file, args[i], "CS1503", f"Argument {i + 1}: cannot convert from '{at}' to '{pt}'")
                            break
        init = n.child_by_field_name("initializer")
        if init is not None:
            elem = T.element_type(ty) if ty.name != "Dictionary" else None
            for c in init.named_children:
                if c.type == "initializer_expression":
                    for cc in c.named_children:
                        self.expr(cc, ctx)
                elif c.type == "assignment_expression":
                    self.expr(c.child_by_field_name("right"), ctx)
                else:
                    ct = self.expr(c, ctx)
                    if elem is not None:
                        self.convert(ct, elem, ctx, c)
        return ty

    def _e_array_creation_expression(self, n, ctx):
        tnode = n.child_by_field_name("type")
        ty = self.resolve(T.parse_type(tnode), ctx, tnode)
        rank = tnode.child_by_field_name("rank") if tnode is not None else None
        if rank is not None:
            for c in rank.named_children:
                self.convert(self.expr(c, ctx), T.INT, ctx, c)
        init = next((c for c in n.named_children if c.type == "initializer_expression"), None)
        if init is not None:
            return self.expr_or_init(init, ctx, ty)
        return ty

    def _e_implicit_array_creation_expression(self, n, ctx):
        init = next((c for c in n.named_children if c.type == "initializer_expression"), None)
        types = [self.expr(c, ctx) for c in init.named_children] if init is not None else []
        known = [t for t in types if not t.unknown and t != T.NULL]
        return T.array_of(known[0] if known else UNKNOWN)

    def _e_element_access_expression(self, n, ctx):
        recv = self.expr(n.child_by_field_name("expression"), ctx)
        sub = n.child_by_field_name("subscript")
        for a in sub.named_children if sub is not None else []:
            for c in a.named_children:
                self.expr(c, ctx)
        if recv.name == "Dictionary" and len(recv.args) == 2:
            return recv.args[1]
        if recv == T.STRING or recv.name in ("[]", "List", "IList", "IReadOnlyList"):
            return T.element_type(recv) or UNKNOWN
        return UNKNOWN

    def _e_cast_expression(self, n, ctx):
        tnode = n.child_by_field_name("type")
        ty = self.resolve(T.parse_type(tnode), ctx, tnode)
        self.expr(n.child_by_field_name("value"), ctx)
        return ty

    def _e_as_expression(self, n, ctx):
        left = n.named_children[0]
        self.expr(left, ctx)
        return self.resolve(T.parse_type(n.named_children[-1]), ctx, n.named_children[-1])

    def _e_conditional_expression(self, n, ctx):
        self._condition(n.child_by_field_name("condition"), ctx)
        a = self.expr(n.child_by_field_name("consequence"), ctx)
        b = self.expr(n.child_by_field_name("alternative"), ctx)
        if a == T.NULL:
            return b
        if a.name in T.NUMERIC_RANK and b.name in T.NUMERIC_RANK:
            return _promote(a, b)
        return a

    def bind_pattern(self, pat: Node, ctx: Ctx) -> None:
        """Declare the variables a pattern introduces; check constant parts."""
        for c in walk(pat):
            if c.type == "declaration_pattern":
                nm = c.child_by_field_name("name")
                if nm is not None:
                    ctx.scopes[-1][node_text(nm)] = self.resolve(T.parse_type(c.child_by_field_name("type")), ctx, c)
            elif c.type == "var_pattern":
                ctx.scopes[-1][node_text(c.named_children[-1])] = UNKNOWN
            elif c.type == "constant_pattern":
                self.expr(c.named_children[0], ctx)

    def _e_is_pattern_expression(self, n, ctx):
        self.expr(n.child_by_field_name("expression"), ctx)
        pat = n.child_by_field_name("pattern")
        if pat is not None:
            self.bind_pattern(pat, ctx)
        return T.BOOL

    def _e_switch_expression(self, n, ctx):
        self.expr(n.named_children[0], ctx)
        result = None
        for arm in n.named_children[1:]:
            if arm.type != "switch_expression_arm":
                continue
            ctx.scopes.append({})
            kids = arm.named_children
            self.bind_pattern(kids[0], ctx)
            for k in kids[1:-1]:
                if k.type == "when_clause":
                    for x in k.named_children:
                        self._condition(x, ctx)
            rt = self.expr(kids[-1], ctx)
            ctx.scopes.pop()
            if result is None and rt not in (T.NULL, UNKNOWN) and kids[-1].type != "throw_expression":
                result = rt
        return result or UNKNOWN

    def _e_is_expression(self, n, ctx):
        self.expr(n.named_children[0], ctx)
        return T.BOOL

    def _e_typeof_expression(self, n, ctx):
        return UNKNOWN

    def _e_default_expression(self, n, ctx):
        return UNKNOWN

    def _e_throw_expression(self, n, ctx):
        for c in n.named_children:
            self.expr(c, ctx)
        return UNKNOWN

    def _e_checked_expression(self, n, ctx):
        return self.expr(n.named_children[0], ctx)

    def _e_prefix_unary_expression(self, n, ctx):
        op = node_text(n.children[0])
        t = self.expr(n.named_children[0], ctx)
        if op == "!":
            self.convert(t, T.BOOL, ctx, n.named_children[0])
            return T.BOOL
        if op in ("-", "+", "~") and t.name in T.NUMERIC_RANK:
            return _promote(t, T.INT)
        return t

    def _e_postfix_unary_expression(self, n, ctx):
        return self.expr(n.named_children[0], ctx)

    def _e_assignment_expression(self, n, ctx):
        left_node = n.child_by_field_name("left")
        right_node = n.child_by_field_name("right")
        op = node_text(n.child_by_field_name("operator"))
        lt = self.expr(left_node, ctx)
        if right_node.type == "lambda_expression":
            self._lambda(right_node, ctx, [])
            return lt
        rt = self.expr(right_node, ctx)
        if op == "=":
            self.convert(rt, lt, ctx, right_node)
        elif op == "+=" and lt == T.STRING:
            pass
        elif op == "??=":
            self.convert(rt, lt, ctx, right_node)
        elif lt.name in T.NUMERIC_RANK and rt.name in T.NUMERIC_RANK:
            if not T.implicit(rt, lt) and lt.name != "char":
                self.convert(rt, lt, ctx, right_node)
        elif not lt.unknown and not rt.unknown and lt != T.STRING:
            self.error(ctx.file, n, "CS0019", f"Operator '{op}' cannot be applied to operands of type '{lt}' and '{rt}'")
        return lt

    def _e_binary_expression(self, n, ctx):
        op = node_text(n.child_by_field_name("operator"))
        a = self.expr(n.child_by_field_name("left"), ctx)
        b = self.expr(n.child_by_field_name("right"), ctx)
        if op in ("==", "!="):
            return T.BOOL
        if op in ("&&", "||"):
            for side, node in ((a, n.child_by_field_name("left")), (b, n.child_by_field_name("right"))):
                if not side.unknown and side != T.BOOL:
                    self._bad_op(op, a, b, ctx, n)
                    break
            return T.BOOL
        if op == "??":
            return a if a != T.NULL else b
        if a.unknown or b.unknown:
            if op == "+" and (a == T.STRING or b == T.STRING):
                return T.STRING
            return T.BOOL if op in ("<", ">", "<=", ">=") else UNKNOWN
        if op == "+" and (a == T.STRING or b == T.STRING):
            return T.STRING
        if op in ("&", "|", "^") and a == T.BOOL and b == T.BOOL:
            return T.BOOL
        if a.name in T.NUMERIC_RANK and b.name in T.NUMERIC_RANK:
            if op in ("<", ">", "<=", ">="):
                return T.BOOL
            if op in ("<<", ">>"):
                return _promote(a, T.INT)
            return _promote(a, b)
        self._bad_op(op, a, b, ctx, n)
        return UNKNOWN

    def _bad_op(self, op, a, b, ctx, n):
        self.error(ctx.file, n, "CS0019", f"Operator '{op}' cannot be applied to operands of type '{a}' and '{b}'")


def _promote(a: Ty, b: Ty) -> Ty:
    names = {a.name, b.name}
    for t in ("decimal", "double", "float", "long"):
        if t in names:
            return Ty(t)
    return T.INT


def check_project(project: Project) -> list[Diagnostic]:
    return Checker(project).run()
