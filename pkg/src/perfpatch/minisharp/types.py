"""Static types and the slice of the base class library the checker knows."""
from __future__ import annotations

from dataclasses import dataclass

from tree_sitter import Node

from ..code_model.syntax import node_text, parse_fragment, walk


@dataclass(frozen=True)
class Ty:
    name: str
    args: tuple["Ty", ...] = ()

    def __str__(self) -> str:
        if self.name == "[]":
            return f"{self.args[0]}[]"
        if self.args:
            return f"{self.name}<{', '.join(map(str, self.args))}>"
        return self.name

    @property
    def unknown(self) -> bool:
        return self.name == "?"


UNKNOWN = Ty("?")
NULL = Ty("null")
VOID = Ty("void")
INT, LONG, DOUBLE, FLOAT, DECIMAL = Ty("int"), Ty("long"), Ty("double"), Ty("float"), Ty("decimal")
BOOL, CHAR, STRING, OBJECT = Ty("bool"), Ty("char"), Ty("string"), Ty("object")
SHORT, BYTE = Ty("short"), Ty("byte")


def array_of(t: Ty) -> Ty:
    return Ty("[]", (t,))


def generic(name: str, *args: Ty) -> Ty:
    return Ty(name, tuple(args))


ALIASES = {
    "String": "string", "Char": "char", "Int32": "int", "Int64": "long", "Boolean": "bool",
    "Double": "double", "Single": "float", "Object": "object", "Decimal": "decimal", "Byte": "byte",
    "Int16": "short",
}
PRIMITIVES = {"int", "long", "double", "float", "decimal", "bool", "char", "string", "object", "void", "short", "byte", "uint", "ulong"}
NUMERIC_RANK = {"byte": 0, "short": 1, "char": 1, "int": 2, "long": 3, "float": 4, "double": 5, "decimal": 5}
ENUMERABLES = {"List", "IEnumerable", "IList", "ICollection", "IReadOnlyList", "IReadOnlyCollection", "HashSet", "Queue", "Stack", "ISet", "LinkedList"}

# type name -> namespace that must be imported
BCL_TYPES = {
    "Math": "System", "Console": "System", "Array": "System", "Exception": "System",
    "ArgumentException": "System", "ArgumentNullException": "System", "InvalidOperationException": "System",
    "ArgumentOutOfRangeException": "System", "NotSupportedException": "System", "Func": "System",
    "Action": "System", "StringComparison": "System", "Environment": "System",
    "List": "System.Collections.Generic", "Dictionary": "System.Collections.Generic",
    "HashSet": "System.Collections.Generic", "Queue": "System.Collections.Generic",
    "Stack": "System.Collections.Generic", "IEnumerable": "System.Collections.Generic",
    "IList": "System.Collections.Generic", "ICollection": "System.Collections.Generic",
    "IReadOnlyList": "System.Collections.Generic", "IReadOnlyCollection": "System.Collections.Generic",
    "KeyValuePair": "System.Collections.Generic", "ISet": "System.Collections.Generic",
    "LinkedList": "System.Collections.Generic",
    "StringBuilder": "System.Text",
    "Enumerable": "System.Linq",
    "Assert": "NUnit.Framework|Xunit",
    "StringSplitOptions": "System", "MidpointRounding": "System",
    "KeyNotFoundException": "System.Collections.Generic",
    **{name: "System" for name in (
        "NullReferenceException", "IndexOutOfRangeException", "DivideByZeroException", "OverflowException",
        "ArithmeticException", "FormatException", "NotImplementedException", "InvalidCastException",
        "ObjectDisposedException", "SystemException")},
}
EXCEPTION_TYPES = {name for name in BCL_TYPES if name.endswith("Exception")}
BCL_NAMESPACES = {
    "System", "System.Linq", "System.Text", "System.Collections", "System.Collections.Generic", "System.IO",
    "System.Threading", "System.Threading.Tasks", "System.Diagnostics", "System.Globalization",
    "System.Runtime.CompilerServices", "NUnit", "NUnit.Framework", "Xunit", "BenchmarkDotNet",
    "BenchmarkDotNet.Attributes", "BenchmarkDotNet.Running", "BenchmarkDotNet.Configs",
}


def parse_type(node: Node | None) -> Ty:
    """Type node -> Ty; unresolved names are kept as plain names."""
    if node is None:
        return UNKNOWN
    t = node.type
    if t == "predefined_type":
        return Ty(node_text(node))
    if t == "implicit_type":
        return Ty("var")
    if t == "identifier":
        name = node_text(node)
        return Ty(ALIASES.get(name, name))
    if t == "qualified_name":
        return parse_type(node.child_by_field_name("name"))
    if t == "generic_name":
        name = node_text(node.named_children[0])
        targs = next((c for c in node.named_children if c.type == "type_argument_list"), None)
        args = tuple(parse_type(c) for c in targs.named_children) if targs is not None else ()
        return Ty(name, args)
    if t == "array_type":
        return array_of(parse_type(node.child_by_field_name("type")))
    if t == "nullable_type":
        return parse_type(node.named_children[0])
    return UNKNOWN


def type_from_text(text: str) -> Ty:
    frag = parse_fragment(f"{text} __t;")
    for n in walk(frag.root):
        if n.type == "variable_declaration":
            return parse_type(n.child_by_field_name("type"))
    return UNKNOWN


def element_type(t: Ty) -> Ty | None:
    """Element type when ``t`` is enumerable, else None."""
    if t.unknown:
        return UNKNOWN
    if t == STRING:
        return CHAR
    if t.name == "[]":
        return t.args[0]
    if t.name in ENUMERABLES:
        return t.args[0] if t.args else UNKNOWN
    if t.name == "Dictionary" and len(t.args) == 2:
        return generic("KeyValuePair", *t.args)
    return None


def is_reference(t: Ty) -> bool:
    return t.name not in NUMERIC_RANK and t.name not in ("bool", "void")


def implicit(src: Ty, dst: Ty) -> bool:
    if src.unknown or dst.unknown or src == dst or dst.name == "var":
        return True
    if dst == OBJECT:
        return src != VOID
    if src == NULL:
        return is_reference(dst)
    if src.name in NUMERIC_RANK and dst.name in NUMERIC_RANK:
        if src.name == "char":
            return dst.name in ("int", "long", "float", "double", "decimal")
        if dst.name == "char":
            return False
        if dst.name == "decimal":
            return src.name not in ("float", "double")
        return NUMERIC_RANK[src.name] <= NUMERIC_RANK[dst.name]
    if dst.name in ENUMERABLES and dst.name not in ("List", "HashSet", "Queue", "Stack", "LinkedList"):
        elem = element_type(src)
        return elem is not None and (not dst.args or implicit_ref(elem, dst.args[0]))
    if src.name == dst.name and len(src.args) == len(dst.args):
        return all(a.unknown or b.unknown or a == b for a, b in zip(src.args, dst.args))
    return False


def implicit_ref(src: Ty, dst: Ty) -> bool:
    return src.unknown or dst.unknown or src == dst or dst == OBJECT


def explicit(src: Ty, dst: Ty) -> bool:
    """An explicit (cast) conversion exists."""
    if src.name in NUMERIC_RANK and dst.name in NUMERIC_RANK:
        return True
    if src == OBJECT:
        return True
    return False


# ---------------------------------------------------------------------------
# members
# A member spec is (kind, result) where kind is "prop" or "method"; result is
# a function (receiver, n_args) -> Ty. Method specs may carry parameter types.


@dataclass(frozen=True)
class Member:
    kind: str  # "prop" | "method"
    result: object  # callable(receiver Ty, nargs) -> Ty
    params: tuple[Ty, ...] | None = None  # checked parameter types, None = anything
    lambda_elem: bool = False  # lambda arguments take the receiver's element type


def _c(t: Ty):
    return lambda recv, n: t


def _elem(recv: Ty, n: int) -> Ty:
    e = element_type(recv)
    return e if e is not None else UNKNOWN


def _same(recv: Ty, n: int) -> Ty:
    return recv


def P(t: Ty) -> Member:
    return Member("prop", _c(t))


def M(t, params=None, lam=False) -> Member:
    return Member("method", t if callable(t) else _c(t), params, lam)


_OBJECT_MEMBERS = {"ToString": M(STRING), "Equals": M(BOOL), "GetHashCode": M(INT), "GetType": M(UNKNOWN)}

_STRING_MEMBERS = {
    "Length": P(INT),
    "ToCharArray": M(array_of(CHAR)), "Split": M(array_of(STRING)), "Substring": M(STRING),
    "ToUpper": M(STRING), "ToLower": M(STRING), "ToUpperInvariant": M(STRING), "ToLowerInvariant": M(STRING),
    "Trim": M(STRING), "TrimStart": M(STRING), "TrimEnd": M(STRING), "Replace": M(STRING),
    "Insert": M(STRING), "Remove": M(STRING), "PadLeft": M(STRING), "PadRight": M(STRING),
    "Contains": M(BOOL), "StartsWith": M(BOOL), "EndsWith": M(BOOL),
    "IndexOf": M(INT), "IndexOfAny": M(INT), "LastIndexOf": M(INT), "LastIndexOfAny": M(INT),
    "CompareTo": M(INT),
}
_ARRAY_MEMBERS = {"Length": P(INT), "Clone": M(OBJECT)}
_LIST_MEMBERS = {
    "Count": P(INT), "Capacity": P(INT), "Add": M(VOID), "AddRange": M(VOID), "Clear": M(VOID),
    "Contains": M(BOOL), "IndexOf": M(INT), "Insert": M(VOID), "Remove": M(BOOL), "RemoveAt": M(VOID),
    "Sort": M(VOID), "Reverse": M(VOID), "ToArray": M(lambda r, n: array_of(_elem(r, n))),
    "Find": M(_elem, lam=True), "Exists": M(BOOL, lam=True), "ForEach": M(VOID, lam=True),
}
_SET_MEMBERS = {"Count": P(INT), "Add": M(BOOL), "Contains": M(BOOL), "Remove": M(BOOL), "Clear": M(VOID)}
_DICT_MEMBERS = {
    "Count": P(INT), "ContainsKey": M(BOOL), "TryGetValue": M(BOOL), "Add": M(VOID), "Remove": M(BOOL),
    "Clear": M(VOID),
    "Keys": Member("prop", lambda r, n: generic("IEnumerable", r.args[0] if r.args else UNKNOWN)),
    "Values": Member("prop", lambda r, n: generic("IEnumerable", r.args[1] if len(r.args) > 1 else UNKNOWN)),
}
_KVP_MEMBERS = {
    "Key": Member("prop", lambda r, n: r.args[0] if r.args else UNKNOWN),
    "Value": Member("prop", lambda r, n: r.args[1] if len(r.args) > 1 else UNKNOWN),
}
_BUILDER = Ty("StringBuilder")
_BUILDER_MEMBERS = {
    "Length": P(INT), "Capacity": P(INT), "Append": M(_BUILDER), "AppendLine": M(_BUILDER),
    "Insert": M(_BUILDER), "Clear": M(_BUILDER), "Remove": M(_BUILDER), "Replace": M(_BUILDER),
}
_EXCEPTION_MEMBERS = {
    "Message": P(STRING), "ParamName": P(STRING), "StackTrace": P(STRING), "InnerException": P(Ty("Exception")),
}
_QUEUE_MEMBERS = {"Count": P(INT), "Enqueue": M(VOID), "Dequeue": M(_elem), "Peek": M(_elem), "Push": M(VOID), "Pop": M(_elem)}


def _seq(r: Ty, n: int) -> Ty:
    return generic("IEnumerable", _elem(r, n))


def _agg(r: Ty, n: int) -> Ty:
    return _elem(r, n) if n == 0 else UNKNOWN


LINQ = {
    "Any": M(BOOL, lam=True), "All": M(BOOL, lam=True), "Count": M(INT, lam=True), "LongCount": M(LONG, lam=True),
    "Where": M(_seq, lam=True), "Skip": M(_seq), "Take": M(_seq), "SkipWhile": M(_seq, lam=True),
    "TakeWhile": M(_seq, lam=True), "OrderBy": M(_seq, lam=True), "OrderByDescending": M(_seq, lam=True),
    "ThenBy": M(_seq, lam=True), "Distinct": M(_seq), "Reverse": M(_seq), "Concat": M(_seq),
    "Union": M(_seq), "Intersect": M(_seq), "Except": M(_seq),
    "Select": M(generic("IEnumerable", UNKNOWN), lam=True), "SelectMany": M(generic("IEnumerable", UNKNOWN), lam=True),
    "First": M(_elem, lam=True), "FirstOrDefault": M(_elem, lam=True), "Last": M(_elem, lam=True),
    "LastOrDefault": M(_elem, lam=True), "Single": M(_elem, lam=True), "SingleOrDefault": M(_elem, lam=True),
    "ElementAt": M(_elem), "Max": M(_agg, lam=True), "Min": M(_agg, lam=True), "Sum": M(_agg, lam=True),
    "Average": M(DOUBLE, lam=True), "ToList": M(lambda r, n: generic("List", _elem(r, n))),
    "ToArray": M(lambda r, n: array_of(_elem(r, n))), "ToHashSet": M(lambda r, n: generic("HashSet", _elem(r, n))),
    "ToDictionary": M(UNKNOWN, lam=True), "Contains": M(BOOL), "SequenceEqual": M(BOOL),
    "Aggregate": M(UNKNOWN, lam=True), "GroupBy": M(UNKNOWN, lam=True),
}


def instance_members(t: Ty) -> dict[str, Member]:
    if t == STRING:
        return {**_OBJECT_MEMBERS, **_STRING_MEMBERS}
    if t.name == "[]":
        return {**_OBJECT_MEMBERS, **_ARRAY_MEMBERS}
    if t.name in ("List", "IList"):
        return {**_OBJECT_MEMBERS, **_LIST_MEMBERS}
    if t.name in ("HashSet", "ISet"):
        return {**_OBJECT_MEMBERS, **_SET_MEMBERS}
    if t.name in ("Queue", "Stack"):
        return {**_OBJECT_MEMBERS, **_QUEUE_MEMBERS}
    if t.name in ("ICollection", "IReadOnlyCollection", "IReadOnlyList"):
        return {**_OBJECT_MEMBERS, "Count": P(INT)}
    if t.name == "Dictionary":
        return {**_OBJECT_MEMBERS, **_DICT_MEMBERS}
    if t.name == "KeyValuePair":
        return {**_OBJECT_MEMBERS, **_KVP_MEMBERS}
    if t == _BUILDER:
        return {**_OBJECT_MEMBERS, **_BUILDER_MEMBERS}
    if t.name in NUMERIC_RANK or t == BOOL:
        return {**_OBJECT_MEMBERS, "CompareTo": M(INT)}
    if t.name in EXCEPTION_TYPES:
        return {**_OBJECT_MEMBERS, **_EXCEPTION_MEMBERS}
    return dict(_OBJECT_MEMBERS)


STATIC_MEMBERS: dict[str, dict[str, Member]] = {
    "string": {
        "Empty": P(STRING), "Join": M(STRING), "Concat": M(STRING), "Format": M(STRING),
        "IsNullOrEmpty": M(BOOL, (STRING,)), "IsNullOrWhiteSpace": M(BOOL, (STRING,)),
        "Equals": M(BOOL), "Compare": M(INT),
    },
    "char": {
        **{k: M(BOOL, (CHAR,)) for k in (
            "IsUpper", "IsLower", "IsDigit", "IsLetter", "IsLetterOrDigit", "IsWhiteSpace",
            "IsPunctuation", "IsSeparator", "IsControl", "IsNumber", "IsSymbol")},
        "ToUpper": M(CHAR, (CHAR,)), "ToLower": M(CHAR, (CHAR,)),
        "ToUpperInvariant": M(CHAR, (CHAR,)), "ToLowerInvariant": M(CHAR, (CHAR,)),
        "MaxValue": P(CHAR), "MinValue": P(CHAR),
    },
    "int": {"MaxValue": P(INT), "MinValue": P(INT), "Parse": M(INT, (STRING,)), "TryParse": M(BOOL)},
    "long": {"MaxValue": P(LONG), "MinValue": P(LONG), "Parse": M(LONG, (STRING,))},
    "double": {"MaxValue": P(DOUBLE), "MinValue": P(DOUBLE), "Parse": M(DOUBLE, (STRING,)), "Epsilon": P(DOUBLE)},
    "Math": {
        "Max": M(UNKNOWN), "Min": M(UNKNOWN), "Abs": M(UNKNOWN), "Sqrt": M(DOUBLE), "Pow": M(DOUBLE),
        "Floor": M(DOUBLE), "Ceiling": M(DOUBLE), "Round": M(DOUBLE), "Log": M(DOUBLE), "PI": P(DOUBLE),
    },
    "Console": {"WriteLine": M(VOID), "Write": M(VOID)},
    "Array": {"IndexOf": M(INT), "Sort": M(VOID), "Reverse": M(VOID), "Copy": M(VOID), "Empty": M(UNKNOWN)},
    "Enumerable": {"Range": M(generic("IEnumerable", INT), (INT, INT)), "Repeat": M(UNKNOWN), "Empty": M(UNKNOWN)},
    "Assert": {
        k: M(VOID)
        for k in (
            "AreEqual", "AreNotEqual", "IsTrue", "IsFalse", "IsNull", "IsNotNull", "That", "Fail", "Throws",
            "Equal", "NotEqual", "True", "False", "Null", "NotNull", "Empty", "NotEmpty", "Contains",
        )
    },
    "Environment": {"NewLine": P(STRING)},
    "StringSplitOptions": {k: P(Ty("StringSplitOptions")) for k in ("None", "RemoveEmptyEntries", "TrimEntries")},
    "StringComparison": {k: P(Ty("StringComparison")) for k in (
        "Ordinal", "OrdinalIgnoreCase", "CurrentCulture", "CurrentCultureIgnoreCase",
        "InvariantCulture", "InvariantCultureIgnoreCase")},
    "MidpointRounding": {k: P(Ty("MidpointRounding")) for k in ("AwayFromZero", "ToEven")},
}

CONSTRUCTIBLE = {"List", "Dictionary", "HashSet", "Queue", "Stack", "StringBuilder", "Exception",
                 "ArgumentException", "ArgumentNullException", "InvalidOperationException",
                 "ArgumentOutOfRangeException", "NotSupportedException", "KeyValuePair", "LinkedList",
                 "string", "object"} | EXCEPTION_TYPES
