"""Closure-compiling interpreter for the C# subset.

Each syntax node is compiled once into a Python closure taking the current
frame (a dict of locals plus ``"this"``). Statements return ``None`` to fall
through, or one of the control signals below.
"""
from __future__ import annotations

import re
from functools import lru_cache
from typing import Callable

from tree_sitter import Node

from ..code_model.syntax import node_text
from . import runtime as R
from . import types as T
from .project import ClassDecl, MethodDecl, Project, attribute_names
from .runtime import METER as M
from .runtime import Char, CsArray, CsException, CsObject, CsThrow

Closure = Callable[[dict], object]


class _Signal:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name


BREAK = _Signal("break")
CONTINUE = _Signal("continue")


class Ret:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v


class InterpError(Exception):
    """The program uses something the interpreter does not support."""


_CATCHABLE = (CsThrow, ZeroDivisionError, IndexError, KeyError, TypeError, AttributeError, RecursionError)


@lru_cache(maxsize=None)
def type_name(text: str) -> str:
    t = T.type_from_text(text)
    return t.name if not t.args or t.name == "[]" else t.name


def _elem_name(text: str) -> str:
    t = T.type_from_text(text)
    return t.args[0].name if t.name == "[]" and t.args else "object"


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", '"': '"', "'": "'", "a": "\a", "b": "\b", "f": "\f", "v": "\v"}
_ESC = re.compile(r"\\(u[0-9a-fA-F]{4}|U[0-9a-fA-F]{8}|x[0-9a-fA-F]{1,4}|.)", re.S)


def unescape(s: str) -> str:
    def sub(m: re.Match) -> str:
        e = m.group(1)
        if e[0] in "uUx" and len(e) > 1:
            return chr(int(e[1:], 16))
        return _ESCAPES.get(e, e)

    return _ESC.sub(sub, s)


def _int_literal(text: str) -> int:
    t = text.replace("_", "").rstrip("uUlL")
    return int(t, 0) if t[:2].lower() in ("0x", "0b") else int(t)


# -- classes and methods ---------------------------------------------------------


class RtMethod:
    def __init__(self, interp: "Interp", cls: "RtClass", decl: MethodDecl):
        self.interp, self.cls, self.decl = interp, cls, decl
        self.name = decl.name
        self.params = [p[1] for p in decl.params]
        self.ptypes = [type_name(p[0]) for p in decl.params]
        self.pelems = [_elem_name(p[0]) for p in decl.params]
        self.is_params = bool(decl.params) and decl.params[-1][2]
        self.ret = type_name(decl.return_text)
        self.is_static = decl.is_static
        self.refs = self._ref_params()
        self.defaults: list[Closure | None] = []
        self._body: Closure | None = None
        self._arrow = False

    def _ref_params(self) -> list[int]:
        out = []
        plist = self.decl.node.child_by_field_name("parameters")
        if plist is None:
            return out
        i = 0
        for c in plist.named_children:
            if c.type == "parameter":
                if any(node_text(x) in ("ref", "out") for x in c.children if x.type in ("modifier", "parameter_modifier", "ref", "out")):
                    out.append(i)
                i += 1
        return out

    def _compile(self) -> None:
        sc = Scope(self.cls, self.is_static, self.ret)
        for p, t in zip(self.params, self.ptypes):
            sc.declare(p, t)
        self.defaults = []
        plist = self.decl.node.child_by_field_name("parameters")
        for c in plist.named_children if plist is not None else []:
            if c.type == "parameter":
                dv = next((x for i, x in enumerate(c.children) if i > 0 and c.children[i - 1].type == "="), None)
                self.defaults.append(self.interp.expr(dv, sc) if dv is not None else None)
        body = self.decl.body
        if body is None:
            self._body = lambda f: None
        elif body.type == "arrow_expression_clause":
            self._arrow = True
            self._body = self.interp.expr(body.named_children[0], sc)
        else:
            self._body = self.interp.stmt(body, sc)

    def invoke(self, this, args: tuple):
        if self._body is None:
            self._compile()
        M.ticks += 2
        frame = {"this": this}
        n = len(self.params)
        if self.is_params:
            last = n - 1
            if len(args) == n and (args[last] is None or isinstance(args[last], list)):
                rest = args[last]
            else:
                rest = CsArray([R.coerce(a, self.pelems[last]) for a in args[last:]], self.pelems[last])
            args = tuple(args[:last]) + (rest,)
        for i, p in enumerate(self.params):
            if i < len(args):
                v = args[i]
                if type(v) is R.Ref:
                    v = v.get() if v.key in v.container else None
                frame[p] = R.coerce(v, self.ptypes[i])
            else:
                d = self.defaults[i]
                frame[p] = d(frame) if d is not None else None
        r = self._body(frame)
        for i in self.refs:
            if i < len(args) and type(args[i]) is R.Ref:
                args[i].set(frame[self.params[i]])
        if self._arrow:
            return R.coerce(r, self.ret) if self.ret != "void" else None
        if type(r) is Ret:
            return R.coerce(r.v, self.ret)
        return None

    def delegate(self, this):
        M.alloc(64)

        def fn(*args):
            return self.invoke(this, args)

        fn.nparams = len(self.params)
        return fn


def _match_arity(methods: list[RtMethod], args: tuple) -> RtMethod:
    n = len(args)
    fits = [m for m in methods if m.decl.accepts(n)]
    if len(fits) == 1:
        return fits[0]
    if not fits:
        raise InterpError(f"no overload of {methods[0].name} takes {n} arguments")
    for m in fits:
        if all(_runtime_fits(a, t) for a, t in zip(args, m.ptypes)):
            return m
    return fits[0]


_PY_TYPES = {"int": (int,), "long": (int,), "double": (float, int), "float": (float, int), "bool": (bool,), "char": (Char,)}


def _runtime_fits(v, ty: str) -> bool:
    if ty == "string":
        return v is None or type(v) is str
    want = _PY_TYPES.get(ty)
    if want is None:
        return True
    if type(v) is bool and ty != "bool":
        return False
    return type(v) in want


class RtClass:
    def __init__(self, interp: "Interp", decl: ClassDecl):
        self.interp, self.decl, self.name = interp, decl, decl.name
        self.methods = {n: [RtMethod(interp, self, m) for m in ms] for n, ms in decl.methods.items()}
        self.ctors = [RtMethod(interp, self, m) for m in decl.ctors]
        self.field_types: dict[str, str] = {}
        self.field_elem: dict[str, str] = {}
        self.static_names: set[str] = set()
        self.instance_slots: list[tuple[str, str, Node | None]] = []
        self.static_slots: list[tuple[str, str, Node | None]] = []
        self.props: dict[str, tuple[Node | None, Node | None, bool]] = {}  # name -> (getter, setter body, static)
        for fd in decl.fields.values():
            ty = type_name(fd.type_text)
            self.field_types[fd.name] = ty
            self.field_elem[fd.name] = _elem_name(fd.type_text)
            (self.static_slots if fd.is_static else self.instance_slots).append((fd.name, ty, fd.init))
            if fd.is_static:
                self.static_names.add(fd.name)
        for p in decl.properties.values():
            ty = type_name(p.type_text)
            self.field_types[p.name] = ty
            self.field_elem[p.name] = _elem_name(p.type_text)
            if p.is_auto:
                (self.static_slots if p.is_static else self.instance_slots).append((p.name, ty, p.init))
                if p.is_static:
                    self.static_names.add(p.name)
            else:
                self.props[p.name] = (p.getter, _setter(p.node), p.is_static)
        self._statics: dict | None = None
        self._compiled_slots: dict[bool, list] = {}
        self._getters: dict[str, Closure] = {}
        self._setters: dict[str, Closure] = {}

    @property
    def full_name(self) -> str:
        return self.decl.full_name

    def _slot_inits(self, static: bool) -> list:
        got = self._compiled_slots.get(static)
        if got is None:
            sc = Scope(self, static, None)
            slots = self.static_slots if static else self.instance_slots
            got = []
            for name, ty, init in slots:
                if init is None:
                    got.append((name, ty, None))
                elif init.type == "initializer_expression":
                    got.append((name, ty, self.interp.array_init(init, sc, self.field_elem[name])))
                else:
                    got.append((name, ty, self.interp.expr(init, sc)))
            self._compiled_slots[static] = got
        return got

    def statics(self) -> dict:
        s = self._statics
        if s is None:
            s = self._statics = {}
            for name, ty, init in self._slot_inits(True):
                s[name] = R.coerce(init({"this": None}), ty) if init is not None else R.default_of(ty)
        return s

    def instantiate(self, args: tuple):
        self.statics()
        fields: dict = {}
        obj = CsObject(self, fields)
        M.alloc(24 + 8 * max(1, len(self.instance_slots)))
        frame = {"this": obj}
        for name, ty, init in self._slot_inits(False):
            fields[name] = R.coerce(init(frame), ty) if init is not None else R.default_of(ty)
        if self.ctors:
            _match_arity(self.ctors, args).invoke(obj, args)
        elif args:
            raise InterpError(f"{self.name} has no constructor taking {len(args)} arguments")
        return obj

    # -- members --------------------------------------------------------------

    def _getter(self, name: str) -> Closure:
        g = self._getters.get(name)
        if g is None:
            getter, _, static = self.props[name]
            sc = Scope(self, static, self.field_types[name])
            if getter is None:
                raise InterpError(f"property {name} has no getter")
            if getter.type == "arrow_expression_clause":
                g = self.interp.expr(getter.named_children[0], sc)
            else:
                body = self.interp.stmt(getter, sc)

                def g(f, body=body):
                    r = body(f)
                    return r.v if type(r) is Ret else None

            self._getters[name] = g
        return g

    def get_prop(self, obj, name: str):
        return self._getter(name)({"this": obj})

    def set_prop(self, obj, name: str, value) -> None:
        s = self._setters.get(name)
        if s is None:
            _, setter, static = self.props[name]
            if setter is None:
                raise InterpError(f"property {name} is read-only")
            sc = Scope(self, static, "void")
            sc.declare("value", self.field_types[name])
            s = self._setters[name] = (
                self.interp.expr(setter.named_children[0], sc)
                if setter.type == "arrow_expression_clause" else self.interp.stmt(setter, sc)
            )
        s({"this": obj, "value": R.coerce(value, self.field_types[name])})

    def get_member(self, obj: CsObject, name: str):
        fields = obj.fields
        if name in fields:
            return fields[name]
        if name in self.props:
            return self.get_prop(obj, name)
        if name in self.static_names:
            return self.statics()[name]
        if name in self.methods:
            return _match_arity(self.methods[name], ()).delegate(obj)
        raise InterpError(f"{self.name} has no member {name}")

    def call(self, obj, name: str, args: tuple):
        ms = self.methods.get(name)
        if ms is None:
            if name == "ToString" and not args:
                return R.new_string(self.to_string(obj))
            if name == "Equals" and len(args) == 1:
                return obj is args[0]
            if name == "GetHashCode":
                return id(obj) & 0x7FFFFFFF
            v = self.get_member(obj, name) if obj is not None else None
            if callable(v):
                return v(*args)
            raise InterpError(f"{self.name} has no method {name}")
        return _match_arity(ms, args).invoke(obj, args)

    def to_string(self, obj) -> str:
        ms = self.methods.get("ToString")
        if ms:
            return R.cs_str(ms[0].invoke(obj, ()))
        return self.full_name

    def equals(self, a, b) -> bool:
        ms = self.methods.get("Equals")
        if ms:
            return ms[0].invoke(a, (b,)) is True
        return a is b


def _setter(prop: Node) -> Node | None:
    for c in prop.named_children:
        if c.type == "accessor_list":
            for acc in c.named_children:
                if acc.type == "accessor_declaration" and node_text(acc).lstrip().startswith("set"):
                    b = acc.child_by_field_name("body")
                    if b is None:
                        b = next((x for x in acc.named_children if x.type in ("block", "arrow_expression_clause")), None)
                    return b
    return None


# -- compile-time scope --------------------------------------------------------------


class Scope:
    def __init__(self, cls: RtClass, static: bool, ret: str | None):
        self.cls, self.static, self.ret = cls, static, ret
        self.vars: list[dict[str, str | None]] = [{}]

    def push(self) -> None:
        self.vars.append({})

    def pop(self) -> None:
        self.vars.pop()

    def declare(self, name: str, ty: str | None) -> None:
        self.vars[-1][name] = ty

    def local(self, name: str) -> tuple[bool, str | None]:
        for d in reversed(self.vars):
            if name in d:
                return True, d[name]
        return False, None

    def child(self) -> "Scope":
        s = Scope(self.cls, self.static, None)
        s.vars = [dict(d) for d in self.vars] + [{}]
        return s


# lvalue kinds
_DICT, _LIST, _CSDICT, _PROP, _BUILDER, _STR = range(6)


def _slot_get(obj, key, kind):
    if kind == _DICT:
        return obj[key]
    if kind == _LIST:
        if type(key) is not int or not 0 <= key < len(obj):
            R.throw("IndexOutOfRangeException", "Index was outside the bounds of the array.")
        return obj[key]
    if kind == _CSDICT:
        return obj.get(key)
    if kind == _PROP:
        return obj.cls.get_member(obj, key) if type(obj) is CsObject else R.get_builtin_prop(obj, key)
    raise InterpError("unsupported assignment target")


def _slot_set(obj, key, kind, v) -> None:
    if kind == _DICT:
        obj[key] = v
    elif kind == _LIST:
        if type(key) is not int or not 0 <= key < len(obj):
            R.throw("IndexOutOfRangeException", "Index was outside the bounds of the array.")
        obj[key] = v
    elif kind == _CSDICT:
        obj.set(key, v)
    elif kind == _PROP:
        if type(obj) is not CsObject:
            raise InterpError(f"cannot assign member {key}")
        if key in obj.fields:
            obj.fields[key] = R.coerce(v, obj.cls.field_types.get(key))
        elif key in obj.cls.static_names:
            obj.cls.statics()[key] = R.coerce(v, obj.cls.field_types.get(key))
        else:
            obj.cls.set_prop(obj, key, v)
    elif kind == _BUILDER:
        sb, i = obj
        t = sb.text()
        sb.set_text(t[:i] + str(v) + t[i + 1:])
    else:
        raise InterpError("unsupported assignment target")


_BINARY: dict[str, Callable] = {
    "+": R.op_add, "-": R.op_sub, "*": R.op_mul, "/": R.op_div, "%": R.op_mod,
    "&": lambda a, b: a & b, "|": lambda a, b: a | b, "^": lambda a, b: a ^ b,
    "<<": lambda a, b: R.to_num(a) << (b & 63), ">>": lambda a, b: R.to_num(a) >> (b & 63),
}
_COMPARE = {
    "<": lambda c: c < 0, ">": lambda c: c > 0, "<=": lambda c: c <= 0, ">=": lambda c: c >= 0,
}
_FAST_CMP = {
    "<": lambda a, b: a < b, ">": lambda a, b: a > b, "<=": lambda a, b: a <= b, ">=": lambda a, b: a >= b,
}

_TYPE_TESTS = {
    "string": lambda v: type(v) is str, "int": lambda v: type(v) is int, "long": lambda v: type(v) is int,
    "double": lambda v: type(v) is float, "float": lambda v: type(v) is float, "bool": lambda v: type(v) is bool,
    "char": lambda v: type(v) is Char, "object": lambda v: v is not None,
    "List": lambda v: type(v) is R.CsList, "StringBuilder": lambda v: type(v) is R.StringBuilder,
}


def _is_type(v, ty: str) -> bool:
    test = _TYPE_TESTS.get(ty)
    if test is not None:
        return test(v)
    if type(v) is CsObject:
        return v.cls is not None and v.cls.name == ty
    if type(v) is CsException:
        return R.exception_is(v.type, ty)
    return False


class AssertFailure(Exception):
    pass


def _show(v) -> str:
    if v is None:
        return "null"
    if type(v) is str:
        return f'"{v}"'
    if type(v) is Char:
        return f"'{v}'"
    return R.cs_str(v)


def _seq_equal(a, b) -> bool:
    if isinstance(a, (list, R.CsEnumerable)) and isinstance(b, (list, R.CsEnumerable)):
        xs, ys = list(a), list(b)
        return len(xs) == len(ys) and all(_seq_equal(x, y) for x, y in zip(xs, ys))
    if isinstance(a, (int, float)) and isinstance(b, (int, float)) and type(a) is not bool and type(b) is not bool:
        return a == b
    return R.cs_equals(a, b)


def _are_equal(expected, actual, *rest):
    if rest and isinstance(rest[0], (int, float)) and type(rest[0]) is not bool:
        if abs(R.to_num(expected) - R.to_num(actual)) <= rest[0]:
            return
    elif _seq_equal(expected, actual):
        return
    raise AssertFailure(f"Expected: {_show(expected)} But was: {_show(actual)}")


def _check(cond: bool, what: str):
    def f(v, *msg):
        if (v is True) != cond:
            raise AssertFailure(f"Expected: {what} But was: {_show(v)}" + (f" ({msg[0]})" if msg else ""))

    return f


def _not_equal(expected, actual, *rest):
    if _seq_equal(expected, actual):
        raise AssertFailure(f"Expected: not equal to {_show(expected)} But was: {_show(actual)}")


def _null(want: bool):
    def f(v, *msg):
        if (v is None) != want:
            raise AssertFailure(f"Expected: {'null' if want else 'not null'} But was: {_show(v)}")

    return f


def _contains(expected, coll, *rest):
    if isinstance(coll, str):
        ok = str(expected) in coll
    else:
        ok = any(R.cs_equals(x, expected) for x in coll)
    if not ok:
        raise AssertFailure(f"Expected: collection containing {_show(expected)}")


def _empty(want: bool):
    def f(coll, *rest):
        if (len(list(R.iterate(coll))) == 0) != want:
            raise AssertFailure("Expected: " + ("<empty>" if want else "<not empty>"))

    return f


def _fail(msg=""):
    raise AssertFailure(R.cs_str(msg))


ASSERTS: dict[str, Callable] = {
    "AreEqual": _are_equal, "Equal": _are_equal, "AreNotEqual": _not_equal, "NotEqual": _not_equal,
    "IsTrue": _check(True, "True"), "True": _check(True, "True"), "That": _check(True, "True"),
    "IsFalse": _check(False, "False"), "False": _check(False, "False"),
    "IsNull": _null(True), "Null": _null(True), "IsNotNull": _null(False), "NotNull": _null(False),
    "Contains": _contains, "Empty": _empty(True), "IsEmpty": _empty(True), "NotEmpty": _empty(False),
    "IsNotEmpty": _empty(False), "Fail": _fail,
}


def _assert_throws(type_name: str | None, action):
    try:
        action()
    except AssertFailure:
        raise
    except _CATCHABLE as e:
        ct = R.from_python(e)
        if type_name is None or ct.exc.type == type_name:
            return ct.exc
        raise AssertFailure(f"Expected: <{type_name}> But was: <{ct.exc.type}>")
    raise AssertFailure(f"Expected: <{type_name or 'exception'}> But was: no exception thrown")


# -- the compiler ------------------------------------------------------------------------


class Interp:
    def __init__(self, project: Project):
        self.project = project
        self.classes: dict[str, RtClass] = {name: RtClass(self, c) for name, c in project.classes.items()}

    # -- static names --------------------------------------------------------------

    def static_type(self, node: Node, sc: Scope) -> str | None:
        """Name of the type ``node`` denotes when used as a receiver, else None."""
        t = node.type
        if t == "predefined_type":
            return node_text(node)
        if t in ("qualified_name", "member_access_expression"):
            left = node.child_by_field_name("qualifier") or node.child_by_field_name("expression")
            if node_text(left).replace(" ", "") in (T.BCL_NAMESPACES | self.project.namespaces):
                name = node_text(node.child_by_field_name("name"))
                return T.ALIASES.get(name, name)
            return None
        if t == "generic_name":
            node = node.named_children[0]
            t = "identifier"
        if t != "identifier":
            return None
        name = node_text(node)
        if sc.local(name)[0]:
            return None
        cls = sc.cls
        if name in cls.field_types or name in cls.methods:
            return None
        if name in self.classes:
            return name
        name = T.ALIASES.get(name, name)
        if name in R.STATIC_METHODS or name in R.STATIC_PROPS or name in ("Assert", "string", "char", "int"):
            return name
        return None

    # -- statements -------------------------------------------------------------

    def stmt(self, n: Node, sc: Scope) -> Closure:
        h = getattr(self, "_s_" + n.type, None)
        if h is None:
            raise InterpError(f"unsupported statement {n.type}")
        return h(n, sc)

    def _s_block(self, n, sc):
        sc.push()
        parts = [self.stmt(c, sc) for c in n.named_children if c.type != "comment"]
        sc.pop()
        if len(parts) == 1:
            return parts[0]
        parts_t = tuple(parts)

        def run(f):
            for p in parts_t:
                r = p(f)
                if r is not None:
                    return r
            return None

        return run

    def _s_empty_statement(self, n, sc):
        return lambda f: None

    def _s_comment(self, n, sc):
        return lambda f: None

    def _s_expression_statement(self, n, sc):
        e = self.expr(n.named_children[0], sc)

        def run(f):
            e(f)

        return run

    def _declarators(self, decl: Node, sc: Scope) -> list[Closure]:
        tnode = decl.child_by_field_name("type")
        ttext = node_text(tnode)
        ty = None if tnode.type == "implicit_type" else type_name(ttext)
        elem = _elem_name(ttext)
        out = []
        for d in decl.named_children:
            if d.type != "variable_declarator":
                continue
            nm = d.child_by_field_name("name")
            name = node_text(nm)
            init = next((x for x in d.named_children if x.id != nm.id), None)
            if init is None:
                ev = None
            elif init.type == "initializer_expression":
                ev = self.array_init(init, sc, elem)
            else:
                ev = self.expr(init, sc)
            sc.declare(name, ty)

            def run(f, name=name, ev=ev, ty=ty):
                M.ticks += 1
                f[name] = R.coerce(ev(f), ty) if ev is not None else R.default_of(ty)

            out.append(run)
        return out

    def _s_local_declaration_statement(self, n, sc):
        decl = next(c for c in n.named_children if c.type == "variable_declaration")
        parts = self._declarators(decl, sc)
        if len(parts) == 1:
            only = parts[0]

            def run1(f):
                only(f)

            return run1

        def run(f):
            for p in parts:
                p(f)

        return run

    def _s_if_statement(self, n, sc):
        cond = self.expr(n.child_by_field_name("condition"), sc)
        cons = self._scoped(n.child_by_field_name("consequence"), sc)
        alt_node = n.child_by_field_name("alternative")
        alt = self._scoped(alt_node, sc) if alt_node is not None else None

        def run(f):
            if cond(f) is True:
                return cons(f)
            if alt is not None:
                return alt(f)
            return None

        return run

    def _scoped(self, n: Node, sc: Scope) -> Closure:
        sc.push()
        s = self.stmt(n, sc)
        sc.pop()
        return s

    def _s_while_statement(self, n, sc):
        cond = self.expr(n.child_by_field_name("condition"), sc)
        body = self._scoped(n.child_by_field_name("body"), sc)

        def run(f):
            while cond(f) is True:
                if M.ticks > M.limit:
                    M.check()
                r = body(f)
                if r is not None:
                    if r is BREAK:
                        break
                    if r is not CONTINUE:
                        return r
            return None

        return run

    def _s_do_statement(self, n, sc):
        cond = self.expr(n.child_by_field_name("condition"), sc)
        body = self._scoped(n.child_by_field_name("body"), sc)

        def run(f):
            while True:
                if M.ticks > M.limit:
                    M.check()
                r = body(f)
                if r is not None:
                    if r is BREAK:
                        break
                    if r is not CONTINUE:
                        return r
                if cond(f) is not True:
                    break
            return None

        return run

    def _s_for_statement(self, n, sc):
        sc.push()
        init: list[Closure] = []
        cond = None
        updates: list[Closure] = []
        for i, c in enumerate(n.children):
            fname = n.field_name_for_child(i)
            if fname == "initializer" or (fname is None and c.type == "variable_declaration"):
                if c.type == "variable_declaration":
                    init.extend(self._declarators(c, sc))
                else:
                    init.append(self.expr(c, sc))
            elif fname == "condition":
                cond = self.expr(c, sc)
            elif fname == "update":
                updates.append(self.expr(c, sc))
        body = self._scoped(n.child_by_field_name("body"), sc)
        sc.pop()

        def run(f):
            for s in init:
                s(f)
            while cond is None or cond(f) is True:
                if M.ticks > M.limit:
                    M.check()
                r = body(f)
                if r is not None:
                    if r is BREAK:
                        break
                    if r is not CONTINUE:
                        return r
                for u in updates:
                    u(f)
            return None

        return run

    def _s_foreach_statement(self, n, sc):
        coll = self.expr(n.child_by_field_name("right"), sc)
        tnode = n.child_by_field_name("type")
        ty = None if tnode is None or tnode.type == "implicit_type" else type_name(node_text(tnode))
        left = n.child_by_field_name("left")
        sc.push()
        if left.type == "identifier":
            names = [node_text(left)]
        else:
            names = [node_text(c) for c in left.named_children if c.type == "identifier"]
        for nm in names:
            sc.declare(nm, ty if len(names) == 1 else None)
        body = self._scoped(n.child_by_field_name("body"), sc)
        sc.pop()
        single = names[0] if len(names) == 1 else None

        def run(f):
            for x in R.iterate(coll(f)):
                M.ticks += 1
                if M.ticks > M.limit:
                    M.check()
                if single is not None:
                    f[single] = R.coerce(x, ty) if ty else x
                else:
                    f[names[0]], f[names[1]] = x.Key, x.Value
                r = body(f)
                if r is not None:
                    if r is BREAK:
                        break
                    if r is not CONTINUE:
                        return r
            return None

        return run

    def _s_return_statement(self, n, sc):
        if not n.named_children:
            return lambda f: Ret(None)
        e = self.expr(n.named_children[0], sc)

        def run(f):
            M.ticks += 1
            return Ret(e(f))

        return run

    def _s_break_statement(self, n, sc):
        return lambda f: BREAK

    def _s_continue_statement(self, n, sc):
        return lambda f: CONTINUE

    def _s_throw_statement(self, n, sc):
        if not n.named_children:
            def rethrow(f):
                raise CsThrow(f["__exc__"])

            return rethrow
        e = self.expr(n.named_children[0], sc)

        def run(f):
            v = e(f)
            if v is None:
                R.null_ref()
            raise CsThrow(v)

        return run

    def _s_try_statement(self, n, sc):
        body = None
        catches: list[tuple[str, str | None, Closure | None, Closure]] = []
        fin = None
        for c in n.named_children:
            if c.type == "block" and body is None:
                body = self._scoped(c, sc)
            elif c.type == "catch_clause":
                sc.push()
                ty, var, filt, handler = "Exception", None, None, None
                for cc in c.named_children:
                    if cc.type == "catch_declaration":
                        ty = type_name(node_text(cc.child_by_field_name("type")))
                        nm = cc.child_by_field_name("name")
                        if nm is not None:
                            var = node_text(nm)
                            sc.declare(var, None)
                    elif cc.type == "catch_filter_clause":
                        filt = self.expr(cc.named_children[0], sc)
                    elif cc.type == "block":
                        handler = self.stmt(cc, sc)
                sc.pop()
                catches.append((ty, var, filt, handler))
            elif c.type == "finally_clause":
                fin = self._scoped(next(x for x in c.named_children if x.type == "block"), sc)

        def run(f):
            try:
                return body(f)
            except _CATCHABLE as e:
                ct = R.from_python(e)
                for ty, var, filt, handler in catches:
                    if R.exception_is(ct.exc.type, ty):
                        if var is not None:
                            f[var] = ct.exc
                        if filt is not None and filt(f) is not True:
                            continue
                        saved = f.get("__exc__")
                        f["__exc__"] = ct.exc
                        try:
                            return handler(f)
                        finally:
                            f["__exc__"] = saved
                if ct is e:
                    raise
                raise ct from None
            finally:
                if fin is not None:
                    fin(f)

        return run

    def _s_switch_statement(self, n, sc):
        value = self.expr(n.child_by_field_name("value"), sc)
        sections: list[tuple[list[Callable], bool, Closure]] = []
        sc.push()
        for sec in n.child_by_field_name("body").named_children:
            if sec.type != "switch_section":
                continue
            labels, is_default, stmts = [], False, []
            for c in sec.named_children:
                if c.type == "default_switch_label" or (c.type == "default" or node_text(c) == "default"):
                    is_default = True
                elif c.type.endswith("_pattern") or c.type == "case_switch_label":
                    pat = c.named_children[0] if c.type == "case_switch_label" else c
                    labels.append(self.pattern(pat, sc))
                elif c.type.endswith("statement") or c.type == "block":
                    stmts.append(self.stmt(c, sc))
                elif c.type == "when_clause":
                    guard = self.expr(c.named_children[0], sc)
                    prev = labels.pop()
                    labels.append(lambda f, v, prev=prev, guard=guard: prev(f, v) and guard(f) is True)
            if any(node_text(x) == "default" for x in sec.children):
                is_default = True

            def block(f, stmts=tuple(stmts)):
                for s in stmts:
                    r = s(f)
                    if r is not None:
                        return r
                return None

            sections.append((labels, is_default, block))
        sc.pop()

        def run(f):
            v = value(f)
            chosen = None
            for labels, _, block in sections:
                if any(lab(f, v) for lab in labels):
                    chosen = block
                    break
            if chosen is None:
                chosen = next((b for _, d, b in sections if d), None)
            if chosen is None:
                return None
            r = chosen(f)
            return None if r is BREAK else r

        return run

    def _s_using_statement(self, n, sc):
        body = n.child_by_field_name("body")
        parts = []
        sc.push()
        for c in n.named_children:
            if c.type == "variable_declaration":
                parts.extend(self._declarators(c, sc))
        b = self.stmt(body, sc)
        sc.pop()

        def run(f):
            for p in parts:
                p(f)
            return b(f)

        return run

    def _s_lock_statement(self, n, sc):
        return self.stmt(n.named_children[-1], sc)

    def _s_checked_statement(self, n, sc):
        return self.stmt(n.named_children[-1], sc)

    # -- patterns ---------------------------------------------------------------------

    def pattern(self, p: Node, sc: Scope) -> Callable[[dict, object], bool]:
        t = p.type
        if t == "constant_pattern":
            inner = p.named_children[0]
            if inner.type == "null_literal":
                return lambda f, v: v is None
            c = self.expr(inner, sc)
            return lambda f, v: R.cs_equals(v, c(f))
        if t == "discard":
            return lambda f, v: True
        if t == "negated_pattern":
            inner = self.pattern(p.named_children[0], sc)
            return lambda f, v: not inner(f, v)
        if t in ("and_pattern", "or_pattern"):
            a = self.pattern(p.child_by_field_name("left") or p.named_children[0], sc)
            b = self.pattern(p.child_by_field_name("right") or p.named_children[-1], sc)
            if t == "and_pattern":
                return lambda f, v: a(f, v) and b(f, v)
            return lambda f, v: a(f, v) or b(f, v)
        if t == "relational_pattern":
            op = node_text(p.children[0])
            c = self.expr(p.named_children[-1], sc)
            test = _COMPARE[op]
            return lambda f, v: v is not None and test(R.compare(v, c(f)))
        if t == "declaration_pattern":
            ty = type_name(node_text(p.child_by_field_name("type")))
            nm = node_text(p.child_by_field_name("name"))
            sc.declare(nm, ty)

            def bind(f, v):
                if _is_type(v, ty):
                    f[nm] = v
                    return True
                return False

            return bind
        if t == "var_pattern":
            nm = node_text(p.named_children[-1])
            sc.declare(nm, None)

            def bind_var(f, v):
                f[nm] = v
                return True

            return bind_var
        if t == "parenthesized_pattern":
            return self.pattern(p.named_children[0], sc)
        if t in ("type_pattern", "predefined_type", "identifier", "qualified_name", "generic_name"):
            node = p.named_children[0] if t == "type_pattern" else p
            ty = type_name(node_text(node))
            if t == "identifier" and ty not in self.classes and ty not in _TYPE_TESTS:
                c = self.expr(p, sc)
                return lambda f, v: R.cs_equals(v, c(f))
            return lambda f, v: _is_type(v, ty)
        raise InterpError(f"unsupported pattern {t}")

    # -- expressions ---------------------------------------------------------------------

    def expr(self, n: Node, sc: Scope) -> Closure:
        h = getattr(self, "_e_" + n.type, None)
        if h is None:
            raise InterpError(f"unsupported expression {n.type}")
        return h(n, sc)

    def _const(self, v) -> Closure:
        def ev(f):
            M.ticks += 1
            return v

        return ev

    def _e_integer_literal(self, n, sc):
        return self._const(_int_literal(node_text(n)))

    def _e_real_literal(self, n, sc):
        return self._const(float(node_text(n).replace("_", "").rstrip("fFdDmM")))

    def _e_boolean_literal(self, n, sc):
        return self._const(node_text(n) == "true")

    def _e_null_literal(self, n, sc):
        return self._const(None)

    def _e_character_literal(self, n, sc):
        return self._const(Char(unescape(node_text(n)[1:-1])))

    def _e_string_literal(self, n, sc):
        return self._const(unescape(node_text(n)[1:-1]))

    def _e_verbatim_string_literal(self, n, sc):
        return self._const(node_text(n)[2:-1].replace('""', '"'))

    def _e_raw_string_literal(self, n, sc):
        return self._const(node_text(n).strip('"'))

    def _e_interpolated_string_expression(self, n, sc):
        verbatim = "@" in node_text(n).split('"', 1)[0]
        parts: list = []
        for c in n.named_children:
            if c.type in ("string_content", "interpolated_string_text", "interpolated_verbatim_string_text"):
                s = node_text(c)
                parts.append(s.replace('""', '"').replace("{{", "{").replace("}}", "}") if verbatim
                             else s.replace("{{", "{").replace("}}", "}"))
            elif c.type == "escape_sequence":
                parts.append(unescape(node_text(c)) if not verbatim else node_text(c))
            elif c.type == "interpolation":
                e, fmt, align = None, None, None
                for cc in c.named_children:
                    if cc.type == "interpolation_brace":
                        continue
                    if cc.type == "interpolation_format_clause":
                        fmt = node_text(cc)[1:]
                    elif cc.type == "interpolation_alignment_clause":
                        align = self.expr(cc.named_children[0], sc)
                    elif e is None:
                        e = self.expr(cc, sc)
                parts.append((e, fmt, align))
        parts_t = tuple(parts)

        def ev(f):
            M.ticks += 1
            out = []
            for p in parts_t:
                if type(p) is str:
                    out.append(p)
                else:
                    e, fmt, align = p
                    out.append(R.format_value(e(f), fmt, align(f) if align else None))
            return R.new_string("".join(out))

        return ev

    def _e_parenthesized_expression(self, n, sc):
        return self.expr(n.named_children[0], sc)

    def _e_checked_expression(self, n, sc):
        return self.expr(n.named_children[-1], sc)

    def _e_this_expression(self, n, sc):
        def ev(f):
            M.ticks += 1
            return f["this"]

        return ev

    def _e_identifier(self, n, sc):
        name = node_text(n)
        found, _ = sc.local(name)
        if found:
            def ev(f):
                M.ticks += 1
                return f[name]

            return ev
        cls = sc.cls
        if name in cls.static_names:
            def ev_static(f):
                M.ticks += 1
                return cls.statics()[name]

            return ev_static
        if name in cls.field_types and name not in cls.props:
            def ev_field(f):
                M.ticks += 1
                return f["this"].fields[name]

            return ev_field
        if name in cls.props:
            getter_owner = cls

            def ev_prop(f):
                M.ticks += 1
                return getter_owner.get_prop(f["this"], name)

            return ev_prop
        if name in cls.methods:
            ms = cls.methods[name]

            def ev_group(f):
                return _match_arity(ms, ()).delegate(f.get("this")) if len(ms) == 1 else ms[0].delegate(f.get("this"))

            return ev_group
        raise InterpError(f"unknown name {name}")

    def _e_generic_name(self, n, sc):
        return self._e_identifier(n.named_children[0], sc)

    def _e_member_access_expression(self, n, sc):
        recv_node = n.child_by_field_name("expression")
        name_node = n.child_by_field_name("name")
        name = node_text(name_node.named_children[0] if name_node.type == "generic_name" else name_node)
        tname = self.static_type(recv_node, sc)
        if tname is not None:
            cls = self.classes.get(tname)
            if cls is not None:
                if name in cls.static_names:
                    def ev_static(f):
                        M.ticks += 1
                        return cls.statics()[name]

                    return ev_static
                if name in cls.props:
                    return lambda f: cls.get_prop(None, name)
                if name in cls.methods:
                    ms = cls.methods[name]
                    return lambda f: ms[0].delegate(None)
                raise InterpError(f"{tname} has no static member {name}")
            props = R.STATIC_PROPS.get(tname, {})
            if name in props:
                return self._const(props[name])
            fn = R.STATIC_METHODS.get(tname, {}).get(name)
            if fn is not None:
                def ev_fn(f):
                    M.alloc(64)
                    return fn

                return ev_fn
            raise InterpError(f"{tname}.{name} is not supported")
        recv = self.expr(recv_node, sc)
        get_prop = R.get_builtin_prop

        def ev(f):
            o = recv(f)
            M.ticks += 1
            if type(o) is CsObject:
                return o.cls.get_member(o, name)
            return get_prop(o, name)

        return ev

    def _e_element_access_expression(self, n, sc):
        recv = self.expr(n.child_by_field_name("expression"), sc)
        sub = n.child_by_field_name("subscript")
        idx = [self.expr(a.named_children[-1], sc) for a in sub.named_children if a.type == "argument"]
        if len(idx) != 1:
            raise InterpError("multi-dimensional indexing is not supported")
        ix = idx[0]

        def ev(f):
            o = recv(f)
            i = ix(f)
            M.ticks += 1
            t = type(o)
            if t is str:
                if type(i) is not int or not 0 <= i < len(o):
                    R.throw("IndexOutOfRangeException", "Index was outside the bounds of the array.")
                return Char(o[i])
            if t is R.CsDict:
                return o.get(i)
            if t is R.StringBuilder:
                return Char(o.text()[i])
            if o is None:
                R.null_ref()
            if type(i) is not int or not 0 <= i < len(o):
                if t is R.CsList:
                    R.throw("ArgumentOutOfRangeException", "Index was out of range. Must be non-negative and less than the size of the collection. (Parameter 'index')")
                R.throw("IndexOutOfRangeException", "Index was outside the bounds of the array.")
            return o[i]

        return ev

    # -- lvalues --------------------------------------------------------------------

    def lvalue(self, n: Node, sc: Scope) -> tuple[Callable[[dict], tuple], str | None]:
        """Compile an assignment target to ``locate(frame) -> (obj, key, kind)``."""
        t = n.type
        if t == "parenthesized_expression":
            return self.lvalue(n.named_children[0], sc)
        if t == "identifier":
            name = node_text(n)
            found, ty = sc.local(name)
            if found:
                return (lambda f: (f, name, _DICT)), ty
            cls = sc.cls
            if name in cls.static_names:
                return (lambda f: (cls.statics(), name, _DICT)), cls.field_types.get(name)
            if name in cls.field_types and name not in cls.props:
                return (lambda f: (f["this"].fields, name, _DICT)), cls.field_types[name]
            if name in cls.props:
                return (lambda f: (f["this"], name, _PROP)), cls.field_types[name]
            raise InterpError(f"cannot assign to {name}")
        if t == "member_access_expression":
            recv_node = n.child_by_field_name("expression")
            name = node_text(n.child_by_field_name("name"))
            tname = self.static_type(recv_node, sc)
            if tname is not None and tname in self.classes:
                cls = self.classes[tname]
                if name in cls.static_names:
                    return (lambda f: (cls.statics(), name, _DICT)), cls.field_types.get(name)
                return (lambda f: (CsObject(cls, {}), name, _PROP)), cls.field_types.get(name)
            recv = self.expr(recv_node, sc)

            def loc(f):
                o = recv(f)
                if o is None:
                    R.null_ref()
                if type(o) is CsObject and name in o.fields:
                    return o.fields, name, _DICT
                return o, name, _PROP

            return loc, None
        if t == "element_access_expression":
            recv = self.expr(n.child_by_field_name("expression"), sc)
            sub = n.child_by_field_name("subscript")
            ix = self.expr(next(a for a in sub.named_children if a.type == "argument").named_children[-1], sc)

            def loc_el(f):
                o = recv(f)
                i = ix(f)
                if o is None:
                    R.null_ref()
                if type(o) is R.CsDict:
                    return o, i, _CSDICT
                if type(o) is R.StringBuilder:
                    return (o, i), None, _BUILDER
                return o, i, _LIST

            elem = None
            rn = n.child_by_field_name("expression")
            if rn.type == "identifier":
                found, _ = sc.local(node_text(rn))
                if not found and node_text(rn) in sc.cls.field_elem:
                    elem = sc.cls.field_elem[node_text(rn)]
            return loc_el, elem
        raise InterpError(f"unsupported assignment target {t}")

    def _e_assignment_expression(self, n, sc):
        op = node_text(n.child_by_field_name("operator"))
        loc, ty = self.lvalue(n.child_by_field_name("left"), sc)
        right_node = n.child_by_field_name("right")
        rhs = self.expr(right_node, sc)
        if op == "=":
            def ev(f):
                obj, key, kind = loc(f)
                v = R.coerce(rhs(f), ty)
                M.ticks += 1
                if kind == _DICT:
                    obj[key] = v
                else:
                    _slot_set(obj, key, kind, v)
                return v

            return ev
        if op == "??=":
            def ev_coalesce(f):
                obj, key, kind = loc(f)
                cur = _slot_get(obj, key, kind) if kind != _BUILDER else None
                if cur is None:
                    cur = rhs(f)
                    _slot_set(obj, key, kind, cur)
                return cur

            return ev_coalesce
        binop = _BINARY[op[:-1]]

        def ev_op(f):
            obj, key, kind = loc(f)
            cur = obj[key] if kind == _DICT else _slot_get(obj, key, kind)
            v = binop(cur, rhs(f))
            M.ticks += 1
            if type(cur) is Char and type(v) is int:
                v = Char(chr(v & 0xFFFF))
            elif type(cur) is int and type(v) is float and ty in ("int", "long"):
                v = int(v)
            v = R.coerce(v, ty)
            if kind == _DICT:
                obj[key] = v
            else:
                _slot_set(obj, key, kind, v)
            return v

        return ev_op

    def _incdec(self, n: Node, sc: Scope, delta: int, prefix: bool) -> Closure:
        loc, _ = self.lvalue(n, sc)

        def ev(f):
            obj, key, kind = loc(f)
            cur = obj[key] if kind == _DICT else _slot_get(obj, key, kind)
            M.ticks += 1
            if type(cur) is Char:
                new = Char(chr((ord(cur) + delta) & 0xFFFF))
            else:
                new = cur + delta
            if kind == _DICT:
                obj[key] = new
            else:
                _slot_set(obj, key, kind, new)
            return new if prefix else cur

        return ev

    def _e_postfix_unary_expression(self, n, sc):
        op = node_text(n.children[-1])
        if op in ("++", "--"):
            return self._incdec(n.named_children[0], sc, 1 if op == "++" else -1, False)
        if op == "!":  # null-forgiving
            return self.expr(n.named_children[0], sc)
        raise InterpError(f"unsupported postfix {op}")

    def _e_prefix_unary_expression(self, n, sc):
        op = node_text(n.children[0])
        operand = n.named_children[0]
        if op in ("++", "--"):
            return self._incdec(operand, sc, 1 if op == "++" else -1, True)
        e = self.expr(operand, sc)
        if op == "!":
            def ev_not(f):
                M.ticks += 1
                return e(f) is not True

            return ev_not
        if op == "-":
            def ev_neg(f):
                M.ticks += 1
                return -R.to_num(e(f))

            return ev_neg
        if op == "+":
            return lambda f: R.to_num(e(f))
        if op == "~":
            return lambda f: ~R.to_num(e(f))
        raise InterpError(f"unsupported prefix {op}")

    def _e_binary_expression(self, n, sc):
        op = node_text(n.child_by_field_name("operator"))
        a = self.expr(n.child_by_field_name("left"), sc)
        b = self.expr(n.child_by_field_name("right"), sc)
        if op == "&&":
            def ev_and(f):
                M.ticks += 1
                return a(f) is True and b(f) is True

            return ev_and
        if op == "||":
            def ev_or(f):
                M.ticks += 1
                return a(f) is True or b(f) is True

            return ev_or
        if op == "??":
            def ev_co(f):
                M.ticks += 1
                v = a(f)
                return v if v is not None else b(f)

            return ev_co
        if op in ("==", "!="):
            eq = R.cs_equals
            neg = op == "!="

            def ev_eq(f):
                x, y = a(f), b(f)
                M.ticks += 1
                if type(x) is int and type(y) is int:
                    return (x == y) != neg
                return eq(x, y) != neg

            return ev_eq
        if op in _COMPARE:
            test, fast, cmp = _COMPARE[op], _FAST_CMP[op], R.compare

            def ev_cmp(f):
                x, y = a(f), b(f)
                M.ticks += 1
                if type(x) is int and type(y) is int:
                    return fast(x, y)
                return test(cmp(x, y))

            return ev_cmp
        fn = _BINARY[op]
        if op == "+":
            add = R.op_add

            def ev_add(f):
                x, y = a(f), b(f)
                M.ticks += 1
                if type(x) is int and type(y) is int:
                    return x + y
                return add(x, y)

            return ev_add

        def ev(f):
            x, y = a(f), b(f)
            M.ticks += 1
            return fn(x, y)

        return ev

    def _e_conditional_expression(self, n, sc):
        c = self.expr(n.child_by_field_name("condition"), sc)
        x = self.expr(n.child_by_field_name("consequence"), sc)
        y = self.expr(n.child_by_field_name("alternative"), sc)

        def ev(f):
            M.ticks += 1
            return x(f) if c(f) is True else y(f)

        return ev

    def _e_cast_expression(self, n, sc):
        ty = type_name(node_text(n.child_by_field_name("type")))
        e = self.expr(n.child_by_field_name("value"), sc)
        cast = R.cast

        def ev(f):
            M.ticks += 1
            return cast(e(f), ty)

        return ev

    def _e_as_expression(self, n, sc):
        e = self.expr(n.named_children[0], sc)
        ty = type_name(node_text(n.named_children[-1]))
        return lambda f: (lambda v: v if _is_type(v, ty) else None)(e(f))

    def _e_is_pattern_expression(self, n, sc):
        e = self.expr(n.child_by_field_name("expression"), sc)
        pat = self.pattern(n.child_by_field_name("pattern"), sc)

        def ev(f):
            M.ticks += 1
            return pat(f, e(f))

        return ev

    def _e_is_expression(self, n, sc):
        e = self.expr(n.named_children[0], sc)
        ty = type_name(node_text(n.named_children[-1]))
        return lambda f: _is_type(e(f), ty)

    def _e_typeof_expression(self, n, sc):
        return self._const(node_text(n.named_children[0]))

    def _e_default_expression(self, n, sc):
        ty = type_name(node_text(n.named_children[0])) if n.named_children else None
        return self._const(R.default_of(ty))

    def _e_throw_expression(self, n, sc):
        e = self.expr(n.named_children[0], sc)

        def ev(f):
            raise CsThrow(e(f))

        return ev

    def _e_switch_expression(self, n, sc):
        value = self.expr(n.named_children[0], sc)
        arms = []
        for arm in n.named_children[1:]:
            if arm.type != "switch_expression_arm":
                continue
            sc.push()
            kids = arm.named_children
            pat = self.pattern(kids[0], sc)
            guard = None
            if len(kids) == 3 and kids[1].type == "when_clause":
                guard = self.expr(kids[1].named_children[0], sc)
            res = self.expr(kids[-1], sc)
            sc.pop()
            arms.append((pat, guard, res))

        def ev(f):
            v = value(f)
            M.ticks += 1
            for pat, guard, res in arms:
                if pat(f, v) and (guard is None or guard(f) is True):
                    return res(f)
            R.throw("InvalidOperationException", "The switch expression does not handle all possible values.")

        return ev

    # -- creation -----------------------------------------------------------------------

    def array_init(self, init: Node, sc: Scope, elem: str) -> Closure:
        items = [self.expr(c, sc) for c in init.named_children]
        coerce = R.coerce

        def ev(f):
            M.ticks += 1
            return CsArray([coerce(x(f), elem) for x in items], elem)

        return ev

    def _e_initializer_expression(self, n, sc):
        return self.array_init(n, sc, "object")

    def _e_array_creation_expression(self, n, sc):
        tnode = n.child_by_field_name("type")
        elem = type_name(node_text(tnode.child_by_field_name("type")))
        init = next((c for c in n.named_children if c.type == "initializer_expression"), None)
        if init is not None:
            return self.array_init(init, sc, elem)
        rank = tnode.child_by_field_name("rank")
        sizes = [self.expr(c, sc) for c in rank.named_children] if rank is not None else []
        if len(sizes) != 1:
            raise InterpError("only one-dimensional arrays are supported")
        size = sizes[0]
        dv = R.default_of(elem)

        def ev(f):
            k = size(f)
            if k < 0:
                R.throw("OverflowException", "Arithmetic operation resulted in an overflow.")
            M.ticks += 1
            return CsArray([dv] * k, elem)

        return ev

    def _e_implicit_array_creation_expression(self, n, sc):
        init = next(c for c in n.named_children if c.type == "initializer_expression")
        items = [self.expr(c, sc) for c in init.named_children]

        def ev(f):
            vals = [x(f) for x in items]
            M.ticks += 1
            return CsArray(vals, R._elem_name(vals) if vals else "object")

        return ev

    def _e_object_creation_expression(self, n, sc):
        tnode = n.child_by_field_name("type")
        if tnode.type == "generic_name":
            tname = node_text(tnode.named_children[0])
        elif tnode.type == "qualified_name":
            tname = node_text(tnode.child_by_field_name("name"))
        else:
            tname = node_text(tnode)
        tname = T.ALIASES.get(tname, tname)
        args = self.arguments(n, sc)
        init = n.child_by_field_name("initializer")
        cls = self.classes.get(tname)
        if cls is not None:
            def make(f):
                return cls.instantiate(tuple(a(f) for a in args))
        else:
            ctor = R.CONSTRUCTORS.get(tname)
            if ctor is None:
                raise InterpError(f"cannot construct {tname}")

            def make(f):
                return ctor(*(a(f) for a in args))

        if init is None:
            def ev(f):
                M.ticks += 1
                return make(f)

            return ev
        steps = self._object_initializer(init, sc)

        def ev_init(f):
            M.ticks += 1
            o = make(f)
            for s in steps:
                s(f, o)
            return o

        return ev_init

    def _object_initializer(self, init: Node, sc: Scope) -> list[Callable]:
        steps = []
        for c in init.named_children:
            if c.type == "assignment_expression":
                left = c.child_by_field_name("left")
                val = self.expr(c.child_by_field_name("right"), sc)
                if left.type == "identifier":
                    name = node_text(left)
                    steps.append(lambda f, o, name=name, val=val: _slot_set(o, name, _PROP, val(f)))
                else:  # [key] = value
                    key = self.expr(left.named_children[0].named_children[-1] if left.named_children[0].type == "argument" else left.named_children[0], sc)
                    steps.append(lambda f, o, key=key, val=val: o.set(key(f), val(f)))
            elif c.type == "initializer_expression":
                k, v = (self.expr(x, sc) for x in c.named_children[:2])
                steps.append(lambda f, o, k=k, v=v: R.dict_add(o, k(f), v(f)))
            else:
                e = self.expr(c, sc)
                steps.append(lambda f, o, e=e: R.invoke_builtin(o, "Add", (e(f),)))
        return steps

    # -- lambdas and calls --------------------------------------------------------------

    def _e_lambda_expression(self, n, sc):
        params = n.child_by_field_name("parameters")
        if params is None:
            names = [node_text(c) for c in n.named_children if c.type in ("implicit_parameter", "identifier")][:1]
        elif params.type in ("implicit_parameter", "identifier"):
            names = [node_text(params)]
        else:
            names = [node_text(p.child_by_field_name("name")) for p in params.named_children if p.type == "parameter"]
        inner = sc.child()
        for nm in names:
            inner.declare(nm, None)
        body_node = n.child_by_field_name("body")
        captures = self._captures(body_node, sc, set(names))
        if body_node.type == "block":
            block = self.stmt(body_node, inner)

            def body(f):
                r = block(f)
                return r.v if type(r) is Ret else None
        else:
            body = self.expr(body_node, inner)
        k = len(names)
        names_t = tuple(names)

        def ev(f):
            M.ticks += 1
            if captures:
                M.alloc(64)
            if k == 1:
                p0 = names_t[0]

                def fn(a):
                    f[p0] = a
                    return body(f)
            else:
                def fn(*a):
                    for nm, v in zip(names_t, a):
                        f[nm] = v
                    return body(f)

            fn.nparams = k
            return fn

        return ev

    def _captures(self, body: Node, sc: Scope, own: set[str]) -> bool:
        from ..code_model.syntax import walk

        cls = sc.cls
        for x in walk(body):
            if x.type == "this_expression":
                return True
            if x.type != "identifier":
                continue
            parent = x.parent
            if parent is not None and parent.type == "member_access_expression" and parent.child_by_field_name("name") == x:
                continue
            name = node_text(x)
            if name in own:
                continue
            if sc.local(name)[0]:
                return True
            if not sc.static and (name in cls.field_types or name in cls.methods) and name not in cls.static_names:
                return True
        return False

    def arguments(self, call: Node, sc: Scope) -> list[Closure]:
        args = call.child_by_field_name("arguments")
        out = []
        if args is None:
            return out
        for a in args.named_children:
            if a.type != "argument":
                continue
            mods = [node_text(c) for c in a.children if node_text(c) in ("out", "ref", "in") and not c.is_named]
            value = [c for c in a.named_children if c.type != "name_colon"][-1]
            if mods and mods[0] in ("out", "ref"):
                if value.type == "declaration_expression":
                    name = node_text(value.child_by_field_name("name"))
                    tnode = value.child_by_field_name("type")
                    sc.declare(name, None if tnode.type == "implicit_type" else type_name(node_text(tnode)))
                    out.append(lambda f, name=name: R.Ref(f, name))
                else:
                    loc, _ = self.lvalue(value, sc)

                    def mk(f, loc=loc):
                        obj, key, kind = loc(f)
                        if kind not in (_DICT, _LIST):
                            raise InterpError("ref to a property is not supported")
                        return R.Ref(obj, key)

                    out.append(mk)
            else:
                out.append(self.expr(value, sc))
        return out

    def _e_invocation_expression(self, n, sc):
        fn = n.child_by_field_name("function")
        if fn.type == "identifier" and node_text(fn) == "nameof":
            arg = n.child_by_field_name("arguments").named_children[0]
            return self._const(node_text(arg).split(".")[-1])
        args = self.arguments(n, sc)
        if fn.type in ("identifier", "generic_name"):
            name = node_text(fn.named_children[0] if fn.type == "generic_name" else fn)
            found, _ = sc.local(name)
            if found:
                def ev_delegate(f):
                    M.ticks += 1
                    return R.call(f[name], *(a(f) for a in args))

                return ev_delegate
            cls = sc.cls
            ms = cls.methods.get(name)
            if ms is None:
                if name in cls.field_types:
                    getter = self._e_identifier(fn, sc)
                    return lambda f: R.call(getter(f), *(a(f) for a in args))
                raise InterpError(f"unknown method {name}")
            if len(ms) == 1 and not ms[0].is_params and len(ms[0].params) == len(args):
                m = ms[0]
                static = m.is_static

                def ev_direct(f):
                    M.ticks += 1
                    return m.invoke(None if static else f["this"], tuple(a(f) for a in args))

                return ev_direct

            def ev_call(f):
                M.ticks += 1
                vals = tuple(a(f) for a in args)
                m = _match_arity(ms, vals)
                return m.invoke(None if m.is_static else f["this"], vals)

            return ev_call
        if fn.type == "member_access_expression":
            recv_node = fn.child_by_field_name("expression")
            name_node = fn.child_by_field_name("name")
            targs = []
            if name_node.type == "generic_name":
                ta = next((c for c in name_node.named_children if c.type == "type_argument_list"), None)
                targs = [type_name(node_text(c)) for c in ta.named_children] if ta is not None else []
                name_node = name_node.named_children[0]
            name = node_text(name_node)
            tname = self.static_type(recv_node, sc)
            if tname is not None:
                return self._static_call(tname, name, targs, args)
            recv = self.expr(recv_node, sc)
            invoke_builtin = R.invoke_builtin

            def ev_inst(f):
                o = recv(f)
                vals = tuple(a(f) for a in args)
                M.ticks += 1
                if type(o) is CsObject:
                    return o.cls.call(o, name, vals)
                return invoke_builtin(o, name, vals)

            return ev_inst
        target = self.expr(fn, sc)
        return lambda f: R.call(target(f), *(a(f) for a in args))

    def _static_call(self, tname: str, name: str, targs: list[str], args: list[Closure]) -> Closure:
        cls = self.classes.get(tname)
        if cls is not None:
            ms = cls.methods.get(name)
            if ms is None:
                raise InterpError(f"{tname} has no method {name}")

            def ev_user(f):
                M.ticks += 1
                vals = tuple(a(f) for a in args)
                return _match_arity(ms, vals).invoke(None, vals)

            return ev_user
        if tname == "Assert":
            if name in ("Throws", "ThrowsException"):
                want = targs[0] if targs else None
                return lambda f: _assert_throws(want, args[0](f))
            if name in ("DoesNotThrow",):
                return lambda f: args[0](f)()
            check = ASSERTS.get(name)
            if check is None:
                raise InterpError(f"Assert.{name} is not supported")
            return lambda f: check(*(a(f) for a in args))
        fn = R.STATIC_METHODS.get(tname, {}).get(name)
        if fn is None:
            raise InterpError(f"{tname}.{name} is not supported")

        def ev(f):
            M.ticks += 1
            return fn(*(a(f) for a in args))

        return ev

    def _e_declaration_expression(self, n, sc):
        raise InterpError("declaration expressions are only supported as out arguments")


# -- entry points ----------------------------------------------------------------------


TEST_ATTRS = {"Test", "Fact", "TestMethod", "TestCase", "Theory", "InlineData"}


def _attr_args(method_node: Node, interp: Interp, cls: RtClass, wanted: set[str]) -> list[tuple]:
    """Argument tuples of ``[TestCase(...)]``/``[InlineData(...)]`` attributes."""
    out = []
    sc = Scope(cls, True, None)
    for c in method_node.children:
        if c.type != "attribute_list":
            continue
        for a in c.named_children:
            if a.type != "attribute":
                continue
            nm = node_text(a.child_by_field_name("name")).split(".")[-1].removesuffix("Attribute")
            if nm not in wanted:
                continue
            alist = next((x for x in a.named_children if x.type == "attribute_argument_list"), None)
            vals = []
            for arg in alist.named_children if alist is not None else []:
                if arg.type == "attribute_argument":
                    vals.append(interp.expr(arg.named_children[-1], sc)({"this": None}))
            out.append(tuple(vals))
    return out


def discover_tests(interp: Interp) -> list[tuple[str, RtClass, RtMethod, tuple]]:
    tests = []
    for cls in sorted(interp.classes.values(), key=lambda c: c.full_name):
        for group in cls.methods.values():
            for m in group:
                attrs = set(m.decl.attributes)
                if not attrs & TEST_ATTRS:
                    continue
                cases = _attr_args(m.decl.node, interp, cls, {"TestCase", "InlineData"})
                if not cases:
                    tests.append((f"{cls.full_name}.{m.name}", cls, m, ()))
                for args in cases:
                    shown = ", ".join(_show(v) for v in args)
                    tests.append((f"{cls.full_name}.{m.name}({shown})", cls, m, args))
    tests.sort(key=lambda t: (t[1].full_name, t[2].decl.node.start_byte, t[0]))
    return tests


def _with_attr(cls: RtClass, name: str) -> list[RtMethod]:
    return [m for g in cls.methods.values() for m in g if name in m.decl.attributes]


def run_tests(project: Project, out, step_limit: int = 5_000_000) -> tuple[int, int]:
    """Run every test method; returns (passed, failed)."""
    interp = Interp(project)
    passed = failed = 0
    for label, cls, m, args in discover_tests(interp):
        M.ticks, M.bytes = 0, 0
        M.limit = step_limit
        try:
            obj = None if m.is_static else cls.instantiate(())
            for setup in _with_attr(cls, "SetUp"):
                setup.invoke(obj, ())
            m.invoke(obj, args)
            for td in _with_attr(cls, "TearDown"):
                td.invoke(obj, ())
        except AssertFailure as e:
            failed += 1
            out.write(f"FAIL {label}: {e}\n")
            continue
        except R.BudgetExceeded as e:
            failed += 1
            out.write(f"FAIL {label}: {e}\n")
            continue
        except InterpError as e:
            failed += 1
            out.write(f"FAIL {label}: unsupported construct: {e}\n")
            continue
        except _CATCHABLE as e:
            ct = R.from_python(e)
            failed += 1
            out.write(f"FAIL {label}: System.{ct.exc.type}: {ct.exc.Message}\n")
            continue
        finally:
            M.limit = 1 << 62
        passed += 1
        out.write(f"PASS {label}\n")
    return passed, failed
