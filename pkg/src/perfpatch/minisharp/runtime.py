"""Runtime values, the cost meter and the library surface the interpreter offers.

Costs are abstract: one tick per evaluated node plus one tick per eight
allocated bytes. Allocation sizes follow the 64-bit CLR layout closely
enough that the usual rewrites (hoisting, builders, fewer iterators)
show up as fewer ticks and bytes.
"""
from __future__ import annotations

import math
import sys
import unicodedata
from typing import Callable, Iterable, Iterator

# -- meter --------------------------------------------------------------------


class BudgetExceeded(Exception):
    pass


class Meter:
    __slots__ = ("ticks", "bytes", "limit")

    def __init__(self) -> None:
        self.ticks = 0
        self.bytes = 0
        self.limit = 1 << 62

    def alloc(self, n: int) -> None:
        self.bytes += n
        self.ticks += n >> 3

    def check(self) -> None:
        if self.ticks > self.limit:
            raise BudgetExceeded(f"step budget of {self.limit} exceeded")


METER = Meter()

ELEM_SIZE = {"char": 2, "int": 4, "bool": 1, "byte": 1, "short": 2, "long": 8, "double": 8, "float": 4, "decimal": 16, "uint": 4}


def string_bytes(n: int) -> int:
    return 20 + 2 * n


def new_string(s: str) -> str:
    METER.alloc(string_bytes(len(s)))
    return s


# -- values -------------------------------------------------------------------


class Char(str):
    """A UTF-16 code unit. Arithmetic goes through the operator helpers."""

    __slots__ = ()


class CsArray(list):
    __slots__ = ("elem",)
    __eq__ = object.__eq__
    __ne__ = object.__ne__
    __hash__ = object.__hash__

    def __init__(self, items: Iterable = (), elem: str = "object"):
        super().__init__(items)
        self.elem = elem
        METER.alloc(24 + ELEM_SIZE.get(elem, 8) * len(self))


class CsList(list):
    __slots__ = ("cap",)
    __eq__ = object.__eq__
    __ne__ = object.__ne__
    __hash__ = object.__hash__

    def __init__(self, items: Iterable = (), cap: int = 0):
        super().__init__(items)
        METER.alloc(32)
        self.cap = 0
        self.grow(max(cap, len(self)))

    def grow(self, need: int) -> None:
        if need <= self.cap:
            return
        cap = self.cap or 4
        while cap < need:
            cap *= 2
        METER.alloc(24 + 8 * cap)
        self.cap = cap

    def add(self, v) -> None:
        if len(self) == self.cap:
            self.grow(len(self) + 1)
        self.append(v)


class _Hashed:
    """Shared growth accounting for hash-based collections."""

    __slots__ = ("cap",)

    def _grow(self, n: int) -> None:
        if n > self.cap:
            cap = max(3, self.cap * 2 + 1)
            while cap < n:
                cap = cap * 2 + 1
            METER.alloc(48 + 24 * cap)
            self.cap = cap


class CsSet(_Hashed):
    __slots__ = ("d",)

    def __init__(self, items: Iterable = ()):
        METER.alloc(80)
        self.d: dict = {}
        self.cap = 0
        for x in items:
            self.add(x)

    def add(self, v) -> bool:
        k = key_of(v)
        if k in self.d:
            return False
        self._grow(len(self.d) + 1)
        self.d[k] = v
        return True

    def __iter__(self):
        return iter(list(self.d.values()))

    def __len__(self):
        return len(self.d)

    def __contains__(self, v):
        return key_of(v) in self.d


class CsDict(_Hashed):
    __slots__ = ("d",)

    def __init__(self):
        METER.alloc(80)
        self.d: dict = {}
        self.cap = 0

    def set(self, k, v) -> None:
        if k is None:
            throw("ArgumentNullException", "Value cannot be null. (Parameter 'key')")
        kk = key_of(k)
        if kk not in self.d:
            self._grow(len(self.d) + 1)
        self.d[kk] = (k, v)

    def get(self, k):
        try:
            return self.d[key_of(k)][1]
        except KeyError:
            throw("KeyNotFoundException", f"The given key '{cs_str(k)}' was not present in the dictionary.")

    def __iter__(self):
        return iter([KeyValuePair(k, v) for k, v in self.d.values()])

    def __len__(self):
        return len(self.d)


class KeyValuePair:
    __slots__ = ("Key", "Value")

    def __init__(self, k, v):
        self.Key, self.Value = k, v

    def __eq__(self, o):
        return isinstance(o, KeyValuePair) and cs_equals(self.Key, o.Key) and cs_equals(self.Value, o.Value)

    __hash__ = None  # type: ignore[assignment]


class CsQueue(list):
    __slots__ = ()
    __eq__ = object.__eq__
    __ne__ = object.__ne__
    __hash__ = object.__hash__

    def __init__(self, items: Iterable = ()):
        super().__init__(items)
        METER.alloc(32 + 24 + 8 * max(4, len(self)))


class CsStack(CsQueue):
    __slots__ = ()


class StringBuilder:
    __slots__ = ("parts", "length", "cap")

    def __init__(self, init: str = "", cap: int = 16):
        self.parts: list[str] = []
        self.length = 0
        self.cap = max(cap, 16)
        METER.alloc(48 + 24 + 2 * self.cap)
        if init:
            self.append(init)

    def append(self, s: str) -> "StringBuilder":
        n = len(s)
        METER.ticks += 1 + (n >> 3)
        need = self.length + n
        if need > self.cap:
            chunk = max(need - self.cap, min(self.length, 8000))
            METER.alloc(48 + 24 + 2 * chunk)
            self.cap += chunk
        self.parts.append(s)
        self.length = need
        return self

    def text(self) -> str:
        if len(self.parts) > 1:
            self.parts = ["".join(self.parts)]
        return self.parts[0] if self.parts else ""

    def set_text(self, s: str) -> None:
        self.parts = [s] if s else []
        self.length = len(s)
        if self.length > self.cap:
            METER.alloc(48 + 24 + 2 * (self.length - self.cap))
            self.cap = self.length


class CsEnumerable:
    """Lazy, re-iterable sequence; ``factory`` returns a fresh iterator."""

    __slots__ = ("factory", "lazy")

    def __init__(self, factory: Callable[[], Iterator], alloc: int = 48):
        self.factory = factory
        self.lazy = True
        METER.alloc(alloc)

    def __iter__(self):
        return self.factory()


class Grouping(CsList):
    __slots__ = ("Key",)

    def __init__(self, key, items=()):
        super().__init__(items)
        self.Key = key


class CsObject:
    __slots__ = ("cls", "fields")

    def __init__(self, cls, fields: dict):
        self.cls = cls
        self.fields = fields


class CsException:
    __slots__ = ("type", "Message", "ParamName")

    def __init__(self, type_name: str, message: str | None = None, param: str | None = None):
        self.type = type_name
        self.Message = message if message is not None else f"Exception of type 'System.{type_name}' was thrown."
        self.ParamName = param
        METER.alloc(128)


class CsThrow(Exception):
    def __init__(self, exc: CsException):
        super().__init__(f"{exc.type}: {exc.Message}")
        self.exc = exc


class Ref:
    """An ``out``/``ref`` argument: a slot in some container."""

    __slots__ = ("container", "key")

    def __init__(self, container, key):
        self.container, self.key = container, key

    def get(self):
        return self.container[self.key]

    def set(self, v) -> None:
        self.container[self.key] = v


class EnumValue(str):
    __slots__ = ()


def throw(type_name: str, message: str | None = None, param: str | None = None):
    raise CsThrow(CsException(type_name, message, param))


EXCEPTION_BASE = {
    "ArgumentNullException": "ArgumentException", "ArgumentOutOfRangeException": "ArgumentException",
    "ArgumentException": "SystemException", "InvalidOperationException": "SystemException",
    "NullReferenceException": "SystemException", "IndexOutOfRangeException": "SystemException",
    "DivideByZeroException": "ArithmeticException", "OverflowException": "ArithmeticException",
    "ArithmeticException": "SystemException", "KeyNotFoundException": "SystemException",
    "FormatException": "SystemException", "NotSupportedException": "SystemException",
    "NotImplementedException": "SystemException", "InvalidCastException": "SystemException",
    "ObjectDisposedException": "InvalidOperationException", "SystemException": "Exception",
}


def exception_is(type_name: str, target: str) -> bool:
    t: str | None = type_name
    while t is not None:
        if t == target:
            return True
        t = EXCEPTION_BASE.get(t, "Exception" if t != "Exception" else None)
    return False


def from_python(e: BaseException) -> CsThrow:
    """Map a host error raised while running C# code to a C# exception."""
    if isinstance(e, CsThrow):
        return e
    if isinstance(e, ZeroDivisionError):
        return CsThrow(CsException("DivideByZeroException", "Attempted to divide by zero."))
    if isinstance(e, RecursionError):
        return CsThrow(CsException("StackOverflowException", "Stack overflow."))
    if isinstance(e, IndexError):
        return CsThrow(CsException("IndexOutOfRangeException", "Index was outside the bounds of the array."))
    if isinstance(e, (TypeError, AttributeError)) and "NoneType" in str(e):
        return CsThrow(CsException("NullReferenceException", "Object reference not set to an instance of an object."))
    return CsThrow(CsException("InvalidOperationException", f"{type(e).__name__}: {e}"))


def null_ref():
    throw("NullReferenceException", "Object reference not set to an instance of an object.")


# -- conversions and operators ---------------------------------------------------


def key_of(v):
    """Hash key with C# value semantics for strings, numbers and chars."""
    if isinstance(v, KeyValuePair):
        return ("kvp", key_of(v.Key), key_of(v.Value))
    if isinstance(v, (CsObject, list, CsSet, CsDict, StringBuilder, CsEnumerable)):
        return ("ref", id(v))
    if type(v) is Char:
        return ("c", str(v))
    return v


def format_double(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "∞" if v > 0 else "-∞"
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    r = repr(v)
    if "e" in r:
        mant, exp = r.split("e")
        sign = exp[0] if exp[0] in "+-" else "+"
        digits = exp.lstrip("+-").rjust(2, "0")
        return f"{mant}E{sign}{digits}"
    return r


def cs_str(v) -> str:
    if v is None:
        return ""
    t = type(v)
    if t is str or t is Char or t is EnumValue:
        return str(v)
    if t is bool:
        return "True" if v else "False"
    if t is int:
        return str(v)
    if t is float:
        return format_double(v)
    if t is StringBuilder:
        return v.text()
    if t is CsObject:
        return v.cls.to_string(v)
    if t is CsException:
        return f"System.{v.type}: {v.Message}"
    if t is KeyValuePair:
        return f"[{cs_str(v.Key)}, {cs_str(v.Value)}]"
    if t is CsArray:
        return f"System.{v.elem.capitalize()}[]"
    if t is CsList:
        return "System.Collections.Generic.List`1"
    return type(v).__name__


def to_num(v):
    return ord(v) if type(v) is Char else v


def op_add(a, b):
    ta, tb = type(a), type(b)
    if ta is str or tb is str or a is None or b is None:
        return new_string(cs_str(a) + cs_str(b))
    if ta is Char:
        a = ord(a)
    if tb is Char:
        b = ord(b)
    return a + b


def op_sub(a, b):
    return to_num(a) - to_num(b)


def op_mul(a, b):
    return to_num(a) * to_num(b)


def _ints(a, b) -> bool:
    return type(a) is int and type(b) is int


def op_div(a, b):
    a, b = to_num(a), to_num(b)
    if _ints(a, b):
        if b == 0:
            throw("DivideByZeroException", "Attempted to divide by zero.")
        q = abs(a) // abs(b)
        return q if (a >= 0) == (b >= 0) else -q
    if b == 0:
        if a == 0 or a != a:
            return math.nan
        return math.copysign(math.inf, a) * (1 if math.copysign(1, b) > 0 else -1)
    return a / b


def op_mod(a, b):
    a, b = to_num(a), to_num(b)
    if _ints(a, b):
        if b == 0:
            throw("DivideByZeroException", "Attempted to divide by zero.")
        return a - b * op_div(a, b)
    if b == 0:
        return math.nan
    return math.fmod(a, b)


def cs_equals(a, b) -> bool:
    if a is b:
        return True
    if a is None or b is None:
        return False
    ta, tb = type(a), type(b)
    if ta is Char and tb is Char:
        return str(a) == str(b)
    if ta is Char or tb is Char:
        if isinstance(a, str) and isinstance(b, str):
            return str(a) == str(b)
        return to_num(a) == to_num(b)
    if ta is CsObject and tb is CsObject:
        return a.cls.equals(a, b)
    return a == b


def compare(a, b) -> int:
    """Default comparer: numbers, chars and strings (ordinal)."""
    if a is None:
        return 0 if b is None else -1
    if b is None:
        return 1
    if isinstance(a, str) and isinstance(b, str) and not (type(a) is Char) ^ (type(b) is Char):
        a, b = str(a), str(b)
    else:
        a, b = to_num(a), to_num(b)
    return (a > b) - (a < b)


class SortKey:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, o):
        return compare(self.v, o.v) < 0


def cast(v, ty: str):
    if ty in ("int", "long", "short", "byte", "uint", "ulong"):
        v = to_num(v)
        if type(v) is float:
            if v != v or math.isinf(v):
                return -(1 << 31) if ty == "int" else 0
            return int(v)
        return v
    if ty in ("double", "float", "decimal"):
        return float(to_num(v))
    if ty == "char":
        return v if type(v) is Char else Char(chr(int(to_num(v)) & 0xFFFF))
    return v


def coerce(v, ty: str | None):
    """Implicit conversion on storage into a slot typed ``ty``."""
    if ty is None:
        return v
    tv = type(v)
    if ty in ("double", "float", "decimal"):
        if tv is int:
            return float(v)
        if tv is Char:
            return float(ord(v))
    elif ty in ("int", "long") and tv is Char:
        return ord(v)
    return v


def default_of(ty: str | None):
    if ty in ("int", "long", "short", "byte", "uint", "ulong"):
        return 0
    if ty in ("double", "float", "decimal"):
        return 0.0
    if ty == "bool":
        return False
    if ty == "char":
        return Char("\0")
    return None


def truthy(v) -> bool:
    return v is True


# -- iteration ------------------------------------------------------------------


def iterate(v) -> Iterator:
    """foreach semantics; lazy sequences pay for a heap enumerator."""
    if v is None:
        null_ref()
    t = type(v)
    if t is str:
        return (Char(c) for c in v)
    if t is CsEnumerable or t is Grouping:
        METER.alloc(32)
    elif isinstance(v, (CsSet, CsDict)):
        pass
    elif t is StringBuilder or t is CsObject:
        throw("InvalidOperationException", "type is not enumerable")
    return iter(v)


def _ticked(v) -> Iterator:
    m = METER
    for x in iterate(v):
        m.ticks += 1
        yield x


def is_collection(v) -> bool:
    return isinstance(v, (list, str, CsSet, CsDict))


def call(fn, *args):
    if fn is None:
        null_ref()
    return fn(*args)


def _arity(fn) -> int:
    return getattr(fn, "nparams", 1)


# -- LINQ -----------------------------------------------------------------------


def _need(src):
    if src is None:
        throw("ArgumentNullException", "Value cannot be null. (Parameter 'source')")


def _lazy(gen: Callable[[], Iterator]) -> CsEnumerable:
    return CsEnumerable(gen)


def l_where(src, pred):
    _need(src)
    if _arity(pred) == 2:
        return _lazy(lambda: (x for i, x in enumerate(_ticked(src)) if pred(x, i) is True))
    return _lazy(lambda: (x for x in _ticked(src) if pred(x) is True))


def l_select(src, f):
    _need(src)
    if _arity(f) == 2:
        return _lazy(lambda: (f(x, i) for i, x in enumerate(_ticked(src))))
    return _lazy(lambda: (f(x) for x in _ticked(src)))


def l_select_many(src, f):
    _need(src)
    return _lazy(lambda: (y for x in _ticked(src) for y in _ticked(f(x))))


def l_any(src, pred=None):
    _need(src)
    if pred is None:
        if is_collection(src):
            METER.ticks += 2
            return len(src) > 0
        for _ in _ticked(src):
            return True
        return False
    for x in _ticked(src):
        if pred(x) is True:
            return True
    return False


def l_all(src, pred):
    _need(src)
    return all(pred(x) is True for x in _ticked(src))


def l_count(src, pred=None):
    _need(src)
    if pred is None:
        if is_collection(src):
            METER.ticks += 2
            return len(src)
        return sum(1 for _ in _ticked(src))
    return sum(1 for x in _ticked(src) if pred(x) is True)


def _first(src, pred, default, last=False, single=False):
    _need(src)
    if pred is None and not single and isinstance(src, list):
        METER.ticks += 2
        if src:
            return src[-1] if last else src[0]
        if default:
            return None
        throw("InvalidOperationException", "Sequence contains no elements")
    found, value, matched = False, None, False
    for x in _ticked(src):
        if pred is None or pred(x) is True:
            if single and found:
                throw("InvalidOperationException", "Sequence contains more than one matching element")
            found, value = True, x
            matched = True
            if not last and not single:
                break
    if not matched:
        if default:
            return None
        throw("InvalidOperationException", "Sequence contains no matching element" if pred else "Sequence contains no elements")
    return value


def l_sum(src, f=None):
    total = 0
    for x in _ticked(src):
        total += to_num(f(x) if f else x)
    return total


def _extreme(src, f, sign):
    best, seen = None, False
    for x in _ticked(src):
        v = f(x) if f else x
        if not seen or compare(v, best) * sign > 0:
            best, seen = v, True
    if not seen:
        throw("InvalidOperationException", "Sequence contains no elements")
    return best


def l_average(src, f=None):
    n, total = 0, 0
    for x in _ticked(src):
        total += to_num(f(x) if f else x)
        n += 1
    if n == 0:
        throw("InvalidOperationException", "Sequence contains no elements")
    return total / n


def _materialize(src) -> list:
    items = list(_ticked(src))
    METER.alloc(24 + 8 * len(items))
    return items


def l_order_by(src, key, desc=False):
    _need(src)

    def gen():
        items = _materialize(src)
        METER.ticks += len(items) * max(1, len(items).bit_length())
        return iter(sorted(items, key=lambda x: SortKey(key(x)), reverse=desc))

    return _lazy(gen)


def l_to_list(src):
    _need(src)
    if is_collection(src) and not isinstance(src, str):
        METER.ticks += len(src) >> 2
        return CsList(iter(src), cap=len(src))
    out = CsList()
    for x in _ticked(src):
        out.add(x)
    return out


def _elem_name(items) -> str:
    if not items:
        return "object"
    t = type(items[0])
    return {Char: "char", int: "int", float: "double", bool: "bool"}.get(t, "object")


def l_to_array(src):
    _need(src)
    if isinstance(src, CsArray):
        return CsArray(src, src.elem)
    items = list(src) if is_collection(src) else list(_ticked(src))
    if not is_collection(src):
        METER.alloc(24 + 8 * len(items))  # intermediate buffer
    return CsArray(items, _elem_name(items))


def l_distinct(src):
    def gen():
        seen = CsSet()
        return (x for x in _ticked(src) if seen.add(x))

    return _lazy(gen)


def l_skip(src, n):
    return _lazy(lambda: (x for i, x in enumerate(_ticked(src)) if i >= n))


def l_take(src, n):
    def gen():
        if n <= 0:
            return
        for i, x in enumerate(_ticked(src)):
            yield x
            if i + 1 >= n:
                return

    return _lazy(gen)


def l_take_while(src, pred):
    def gen():
        for x in _ticked(src):
            if pred(x) is not True:
                return
            yield x

    return _lazy(gen)


def l_skip_while(src, pred):
    def gen():
        skipping = True
        for x in _ticked(src):
            if skipping and pred(x) is True:
                continue
            skipping = False
            yield x

    return _lazy(gen)


def l_reverse(src):
    return _lazy(lambda: iter(list(reversed(_materialize(src)))))


def l_concat(a, b):
    return _lazy(lambda: (x for s in (a, b) for x in _ticked(s)))


def l_union(a, b):
    return l_distinct(l_concat(a, b))


def l_intersect(a, b):
    def gen():
        other = CsSet(_ticked(b))
        return (x for x in l_distinct(a) if x in other)

    return _lazy(gen)


def l_except(a, b):
    def gen():
        other = CsSet(_ticked(b))
        return (x for x in l_distinct(a) if x not in other)

    return _lazy(gen)


def l_contains(src, v):
    if isinstance(src, CsSet):
        return v in src
    return any(cs_equals(x, v) for x in _ticked(src))


def l_sequence_equal(a, b):
    xs, ys = list(_ticked(a)), list(_ticked(b))
    return len(xs) == len(ys) and all(cs_equals(x, y) for x, y in zip(xs, ys))


def l_element_at(src, i):
    if isinstance(src, (list, str)):
        if not 0 <= i < len(src):
            throw("ArgumentOutOfRangeException", "Index was out of range.")
        return Char(src[i]) if isinstance(src, str) else src[i]
    for j, x in enumerate(_ticked(src)):
        if j == i:
            return x
    throw("ArgumentOutOfRangeException", "Index was out of range.")


def l_aggregate(src, *args):
    it = iter(_ticked(src))
    if len(args) == 1:
        f = args[0]
        try:
            acc = next(it)
        except StopIteration:
            throw("InvalidOperationException", "Sequence contains no elements")
    else:
        acc, f = args[0], args[1]
    for x in it:
        acc = f(acc, x)
    return acc if len(args) < 3 else args[2](acc)


def l_group_by(src, key):
    def gen():
        groups: dict = {}
        for x in _ticked(src):
            k = key(x)
            g = groups.get(key_of(k))
            if g is None:
                g = groups[key_of(k)] = Grouping(k)
            g.add(x)
        return iter(list(groups.values()))

    return _lazy(gen)


def l_to_dictionary(src, key, value=None):
    d = CsDict()
    for x in _ticked(src):
        k = key(x)
        if key_of(k) in d.d:
            throw("ArgumentException", f"An item with the same key has already been added. Key: {cs_str(k)}")
        d.set(k, value(x) if value else x)
    return d


LINQ: dict[str, Callable] = {
    "Where": l_where, "Select": l_select, "SelectMany": l_select_many, "Any": l_any, "All": l_all,
    "Count": l_count, "LongCount": l_count,
    "First": lambda s, p=None: _first(s, p, False), "FirstOrDefault": lambda s, p=None: _first(s, p, True),
    "Last": lambda s, p=None: _first(s, p, False, last=True),
    "LastOrDefault": lambda s, p=None: _first(s, p, True, last=True),
    "Single": lambda s, p=None: _first(s, p, False, single=True),
    "SingleOrDefault": lambda s, p=None: _first(s, p, True, single=True),
    "Sum": l_sum, "Min": lambda s, f=None: _extreme(s, f, -1), "Max": lambda s, f=None: _extreme(s, f, 1),
    "Average": l_average, "OrderBy": l_order_by, "OrderByDescending": lambda s, k: l_order_by(s, k, True),
    "ThenBy": l_order_by, "ToList": l_to_list, "ToArray": l_to_array, "ToHashSet": lambda s: CsSet(_ticked(s)),
    "Distinct": l_distinct, "Skip": l_skip, "Take": l_take, "TakeWhile": l_take_while, "SkipWhile": l_skip_while,
    "Reverse": l_reverse, "Concat": l_concat, "Union": l_union, "Intersect": l_intersect, "Except": l_except,
    "Contains": l_contains, "SequenceEqual": l_sequence_equal, "ElementAt": l_element_at,
    "Aggregate": l_aggregate, "GroupBy": l_group_by, "ToDictionary": l_to_dictionary,
}


# -- strings ----------------------------------------------------------------------


def _chars(arg) -> str:
    if arg is None:
        return ""
    if isinstance(arg, str):
        return str(arg)
    return "".join(str(c) for c in arg)


def _scan(s: str) -> None:
    METER.ticks += len(s) >> 3


def s_split(s, *args):
    opts = [a for a in args if type(a) is EnumValue]
    args = tuple(a for a in args if type(a) is not EnumValue)
    remove_empty = any(o == "RemoveEmptyEntries" for o in opts)
    trim = any(o == "TrimEntries" for o in opts)
    seps: list[str] = []
    for a in args:
        if isinstance(a, list):
            seps.extend(str(x) for x in a)
        elif isinstance(a, str):
            seps.append(str(a))
    _scan(s)
    if not seps:
        parts, cur = [], []
        for c in s:
            if c.isspace():
                parts.append("".join(cur))
                cur = []
            else:
                cur.append(c)
        parts.append("".join(cur))
    else:
        parts, i, start = [], 0, 0
        while i <= len(s):
            hit = next((p for p in seps if p and s.startswith(p, i)), None)
            if i == len(s):
                parts.append(s[start:])
                break
            if hit is not None:
                parts.append(s[start:i])
                i += len(hit)
                start = i
            else:
                i += 1
    if trim:
        parts = [p.strip() for p in parts]
    if remove_empty:
        parts = [p for p in parts if p]
    return CsArray([new_string(p) for p in parts], "string")


def s_substring(s, start, length=None):
    if length is None:
        length = len(s) - start
    if start < 0 or length < 0 or start + length > len(s):
        throw("ArgumentOutOfRangeException", "Index and length must refer to a location within the string.")
    return new_string(s[start:start + length])


def s_index_of(s, v, start=0, *rest):
    if type(v) is EnumValue:
        start = 0
    elif type(start) is EnumValue:
        start = 0
    _scan(s)
    return s.find(str(v), start)


def s_index_of_any(s, chars, start=0):
    _scan(s)
    cs = set(_chars(chars))
    for i in range(start, len(s)):
        if s[i] in cs:
            return i
    return -1


def s_last_index_of_any(s, chars):
    _scan(s)
    cs = set(_chars(chars))
    for i in range(len(s) - 1, -1, -1):
        if s[i] in cs:
            return i
    return -1


def _ignore_case(args) -> bool:
    return any(type(a) is EnumValue and a.endswith("IgnoreCase") for a in args)


def s_contains(s, v, *opts):
    _scan(s)
    if _ignore_case(opts):
        return str(v).casefold() in s.casefold()
    return str(v) in s


def s_starts_with(s, v, *opts):
    if _ignore_case(opts):
        return s.casefold().startswith(str(v).casefold())
    return s.startswith(str(v))


def s_ends_with(s, v, *opts):
    if _ignore_case(opts):
        return s.casefold().endswith(str(v).casefold())
    return s.endswith(str(v))


def s_replace(s, a, b):
    _scan(s)
    r = s.replace(str(a), cs_str(b))
    return r if r == s else new_string(r)


def s_trim(which):
    def f(s, *chars):
        cs = _chars(chars[0]) if len(chars) == 1 and isinstance(chars[0], (list, str)) else "".join(map(str, chars))
        r = {"both": s.strip, "start": s.lstrip, "end": s.rstrip}[which](cs or None)
        return r if r == s else new_string(r)

    return f


def s_pad(left: bool):
    def f(s, width, ch=" "):
        r = s.rjust(width, str(ch)) if left else s.ljust(width, str(ch))
        return r if r == s else new_string(r)

    return f


def s_equals(s, o, *opts):
    if o is None or not isinstance(o, str):
        return False
    if _ignore_case(opts):
        return s.casefold() == str(o).casefold()
    return str(s) == str(o)


STRING_METHODS: dict[str, Callable] = {
    "ToCharArray": lambda s: CsArray((Char(c) for c in s), "char"),
    "Split": s_split, "Substring": s_substring,
    "ToUpper": lambda s: new_string(s.upper()), "ToLower": lambda s: new_string(s.lower()),
    "ToUpperInvariant": lambda s: new_string(s.upper()), "ToLowerInvariant": lambda s: new_string(s.lower()),
    "Trim": s_trim("both"), "TrimStart": s_trim("start"), "TrimEnd": s_trim("end"),
    "Replace": s_replace, "Insert": lambda s, i, v: new_string(s[:i] + v + s[i:]),
    "Remove": lambda s, i, n=None: new_string(s[:i] + ("" if n is None else s[i + n:])),
    "PadLeft": s_pad(True), "PadRight": s_pad(False),
    "Contains": s_contains, "StartsWith": s_starts_with, "EndsWith": s_ends_with,
    "IndexOf": s_index_of, "IndexOfAny": s_index_of_any, "LastIndexOf": lambda s, v, *a: s.rfind(str(v)),
    "LastIndexOfAny": s_last_index_of_any, "CompareTo": lambda s, o: compare(s, o),
    "Equals": s_equals, "ToString": lambda s: s, "GetHashCode": lambda s: _stable_hash(s),
}


def _stable_hash(s: str) -> int:
    h = 5381
    for c in s:
        h = ((h * 33) ^ ord(c)) & 0xFFFFFFFF
    return h - (1 << 32) if h >= 1 << 31 else h


# -- other collections --------------------------------------------------------------


def _check_index(lst, i):
    if type(i) is not int or not 0 <= i < len(lst):
        throw("ArgumentOutOfRangeException", "Index was out of range. Must be non-negative and less than the size of the collection.")


def list_remove(lst, v):
    for i, x in enumerate(lst):
        if cs_equals(x, v):
            METER.ticks += (len(lst) - i) >> 2
            del lst[i]
            return True
    return False


def list_add_range(lst, items):
    xs = list(iterate(items))
    lst.grow(len(lst) + len(xs))
    lst.extend(xs)


def list_insert(lst, i, v):
    if not 0 <= i <= len(lst):
        throw("ArgumentOutOfRangeException", "Index must be within the bounds of the List.")
    lst.grow(len(lst) + 1)
    METER.ticks += (len(lst) - i) >> 2
    lst.insert(i, v)


def list_remove_at(lst, i):
    _check_index(lst, i)
    METER.ticks += (len(lst) - i) >> 2
    del lst[i]


def list_sort(lst, cmp=None):
    METER.ticks += len(lst) * max(1, len(lst).bit_length())
    if cmp is None:
        lst.sort(key=SortKey)
    else:
        import functools

        lst.sort(key=functools.cmp_to_key(lambda a, b: cmp(a, b)))


def list_find(lst, pred):
    for x in _ticked(lst):
        if pred(x) is True:
            return x
    return None


def list_index_of(lst, v, *rest):
    for i, x in enumerate(lst):
        if cs_equals(x, v):
            METER.ticks += i >> 2
            return i
    METER.ticks += len(lst) >> 2
    return -1


def list_for_each(lst, f):
    for x in _ticked(lst):
        f(x)


LIST_METHODS: dict[str, Callable] = {
    "Add": lambda l, v: l.add(v), "AddRange": list_add_range, "Clear": lambda l: l.clear(),
    "Contains": lambda l, v: list_index_of(l, v) >= 0, "IndexOf": list_index_of, "Insert": list_insert,
    "Remove": list_remove, "RemoveAt": list_remove_at, "Sort": list_sort, "Reverse": lambda l: l.reverse(),
    "ToArray": lambda l: CsArray(l, _elem_name(l)), "Find": list_find,
    "Exists": lambda l, p: any(p(x) is True for x in _ticked(l)), "ForEach": list_for_each,
}

ARRAY_METHODS: dict[str, Callable] = {
    "Clone": lambda a: CsArray(a, a.elem),
}

SET_METHODS: dict[str, Callable] = {
    "Add": lambda s, v: s.add(v), "Contains": lambda s, v: v in s, "Clear": lambda s: s.d.clear(),
    "Remove": lambda s, v: s.d.pop(key_of(v), _MISSING) is not _MISSING,
}

_MISSING = object()


def dict_try_get(d, k, out):
    hit = d.d.get(key_of(k))
    if hit is None:
        out.set(None)
        return False
    out.set(hit[1])
    return True


def dict_add(d, k, v):
    if key_of(k) in d.d:
        throw("ArgumentException", f"An item with the same key has already been added. Key: {cs_str(k)}")
    d.set(k, v)


DICT_METHODS: dict[str, Callable] = {
    "ContainsKey": lambda d, k: key_of(k) in d.d, "TryGetValue": dict_try_get, "Add": dict_add,
    "Remove": lambda d, k: d.d.pop(key_of(k), _MISSING) is not _MISSING, "Clear": lambda d: d.d.clear(),
}


def _dequeue(q, stack=False):
    if not q:
        throw("InvalidOperationException", "Stack empty." if stack else "Queue empty.")
    return q.pop() if stack else q.pop(0)


QUEUE_METHODS: dict[str, Callable] = {
    "Enqueue": lambda q, v: q.append(v), "Dequeue": _dequeue, "Peek": lambda q: q[0] if q else _dequeue(q),
    "Clear": lambda q: q.clear(), "Contains": lambda q, v: any(cs_equals(x, v) for x in q),
}
STACK_METHODS: dict[str, Callable] = {
    "Push": lambda q, v: q.append(v), "Pop": lambda q: _dequeue(q, True), "Peek": lambda q: q[-1] if q else _dequeue(q, True),
    "Clear": lambda q: q.clear(), "Contains": lambda q, v: any(cs_equals(x, v) for x in q),
}


def sb_append(sb, v=None, *rest):
    if rest:  # Append(char, repeat)
        return sb.append(str(v) * rest[0])
    return sb.append(cs_str(v))


def sb_insert(sb, i, v):
    t = sb.text()
    sb.set_text(t[:i] + cs_str(v) + t[i:])
    return sb


def sb_remove(sb, i, n):
    t = sb.text()
    sb.set_text(t[:i] + t[i + n:])
    return sb


def sb_clear(sb):
    sb.parts = []
    sb.length = 0
    return sb


BUILDER_METHODS: dict[str, Callable] = {
    "Append": sb_append, "AppendLine": lambda sb, v="": sb.append(cs_str(v) + "\n"),
    "Insert": sb_insert, "Remove": sb_remove, "Clear": sb_clear,
    "Replace": lambda sb, a, b: (sb.set_text(sb.text().replace(str(a), cs_str(b))), sb)[1],
    "ToString": lambda sb: new_string(sb.text()),
}


def _num_methods():
    return {"CompareTo": compare, "Equals": cs_equals, "ToString": lambda v, fmt=None: new_string(format_value(v, fmt))}


INSTANCE_METHODS: dict[type, dict[str, Callable]] = {
    str: STRING_METHODS, Char: {"ToString": lambda c: new_string(str(c)), "Equals": cs_equals, "CompareTo": compare},
    CsArray: ARRAY_METHODS, CsList: LIST_METHODS, Grouping: LIST_METHODS, CsSet: SET_METHODS, CsDict: DICT_METHODS,
    CsQueue: QUEUE_METHODS, CsStack: STACK_METHODS, StringBuilder: BUILDER_METHODS,
    int: _num_methods(), float: _num_methods(), bool: _num_methods(),
}


def _len_prop(v):
    return len(v)


INSTANCE_PROPS: dict[type, dict[str, Callable]] = {
    str: {"Length": _len_prop},
    CsArray: {"Length": _len_prop},
    CsList: {"Count": _len_prop, "Capacity": lambda l: l.cap},
    Grouping: {"Count": _len_prop, "Key": lambda g: g.Key},
    CsSet: {"Count": _len_prop},
    CsDict: {
        "Count": _len_prop,
        "Keys": lambda d: CsEnumerable(lambda: iter([k for k, _ in d.d.values()]), 24),
        "Values": lambda d: CsEnumerable(lambda: iter([v for _, v in d.d.values()]), 24),
    },
    CsQueue: {"Count": _len_prop}, CsStack: {"Count": _len_prop},
    KeyValuePair: {"Key": lambda p: p.Key, "Value": lambda p: p.Value},
    StringBuilder: {"Length": lambda sb: sb.length, "Capacity": lambda sb: sb.cap},
    CsException: {"Message": lambda e: e.Message, "ParamName": lambda e: e.ParamName},
}


def _object_method(name: str):
    if name == "ToString":
        return lambda v: new_string(cs_str(v))
    if name == "Equals":
        return cs_equals
    if name == "GetHashCode":
        return lambda v: _stable_hash(cs_str(v)) if isinstance(v, str) else id(v) & 0x7FFFFFFF
    return None


def invoke_builtin(obj, name: str, args: tuple):
    """Call a library instance method (or LINQ extension) on ``obj``."""
    if obj is None:
        null_ref()
    table = INSTANCE_METHODS.get(type(obj))
    fn = table.get(name) if table else None
    if fn is None:
        fn = LINQ.get(name)
        if fn is None or isinstance(obj, (StringBuilder, CsException)) or type(obj) in (int, float, bool):
            fn = _object_method(name)
    if fn is None:
        throw("MissingMethodException", f"Method not found: '{type(obj).__name__}.{name}'.")
    return fn(obj, *args)


def get_builtin_prop(obj, name: str):
    if obj is None:
        null_ref()
    table = INSTANCE_PROPS.get(type(obj))
    fn = table.get(name) if table else None
    if fn is None:
        throw("MissingMemberException", f"Member not found: '{type(obj).__name__}.{name}'.")
    return fn(obj)


# -- formatting ---------------------------------------------------------------------


def format_value(v, fmt: str | None, align: int | None = None) -> str:
    s = _format(v, fmt)
    if align:
        s = s.rjust(align) if align > 0 else s.ljust(-align)
    return s


def _format(v, fmt: str | None) -> str:
    if not fmt or v is None or isinstance(v, str):
        return cs_str(v)
    kind, digits = fmt[0].upper(), fmt[1:]
    n = to_num(v)
    if type(n) not in (int, float):
        return cs_str(v)
    prec = int(digits) if digits.isdigit() else None
    if kind == "F":
        return f"{n:.{2 if prec is None else prec}f}"
    if kind == "N":
        return f"{n:,.{2 if prec is None else prec}f}"
    if kind == "D" and type(n) is int:
        return f"{n:0{prec or 1}d}" if n >= 0 else "-" + f"{-n:0{prec or 1}d}"
    if kind == "X" and type(n) is int:
        s = f"{n & 0xFFFFFFFF if n < 0 else n:0{prec or 1}X}"
        return s if fmt[0] == "X" else s.lower()
    if kind == "P":
        return f"{n * 100:.{2 if prec is None else prec}f} %"
    if kind == "E":
        return f"{n:.{6 if prec is None else prec}E}"
    return cs_str(v)


def string_format(fmt: str, *args) -> str:
    if len(args) == 1 and isinstance(args[0], CsArray) and args[0].elem == "object":
        args = tuple(args[0])
    out, i = [], 0
    while i < len(fmt):
        c = fmt[i]
        if c == "{" and fmt.startswith("{{", i):
            out.append("{")
            i += 2
        elif c == "}" and fmt.startswith("}}", i):
            out.append("}")
            i += 2
        elif c == "{":
            j = fmt.index("}", i)
            spec = fmt[i + 1:j]
            body, _, f = spec.partition(":")
            idx, _, al = body.partition(",")
            out.append(format_value(args[int(idx)], f or None, int(al) if al else None))
            i = j + 1
        else:
            out.append(c)
            i += 1
    return new_string("".join(out))


# -- statics ------------------------------------------------------------------------


def _seq_args(args) -> list:
    if len(args) == 1 and not isinstance(args[0], str) and (isinstance(args[0], (list, CsSet, CsEnumerable))):
        return list(iterate(args[0]))
    return list(args)


def st_join(sep, *args):
    items = _seq_args(args)
    METER.ticks += len(items)
    return new_string(cs_str(sep).join(cs_str(x) for x in items))


def st_concat(*args):
    items = _seq_args(args)
    return new_string("".join(cs_str(x) for x in items))


def _char_pred(pred):
    def f(c, *idx):
        if idx:  # char.IsX(string, index)
            c = c[idx[0]]
        return pred(str(c))

    return f


def _char_map(fn):
    def f(c):
        r = fn(str(c))
        return Char(r if len(r) == 1 else str(c))

    return f


def _parse_int(s, *rest):
    if s is None:
        throw("ArgumentNullException", "Value cannot be null. (Parameter 's')")
    t = str(s).strip()
    try:
        v = int(t)
    except ValueError:
        throw("FormatException", f"The input string '{s}' was not in a correct format.")
    if not -(1 << 31) <= v < (1 << 31):
        throw("OverflowException", "Value was either too large or too small for an Int32.")
    return v


def _try_parse(parser):
    def f(s, out, *rest):
        try:
            out.set(parser(s))
            return True
        except CsThrow:
            out.set(parser.__defaults__ and 0 or 0)
            return False

    return f


def _parse_double(s, *rest):
    try:
        return float(str(s).strip())
    except ValueError:
        throw("FormatException", f"The input string '{s}' was not in a correct format.")


def _math_minmax(pick):
    def f(a, b):
        r = pick(to_num(a), to_num(b))
        return float(r) if float in (type(a), type(b)) else r

    return f


def _round(x, digits=0, *rest):
    if type(digits) is EnumValue:
        mode, digits = digits, 0
    else:
        mode = rest[0] if rest else "ToEven"
    if mode == "AwayFromZero":
        q = 10 ** digits
        return math.copysign(math.floor(abs(x) * q + 0.5) / q, x)
    return float(round(x, digits))


def _array_copy(*a):
    if len(a) == 3:
        src, dst, n = a
        si = di = 0
    else:
        src, si, dst, di, n = a
    METER.ticks += n >> 2
    dst[di:di + n] = src[si:si + n]


def _range(start, count):
    if count < 0:
        throw("ArgumentOutOfRangeException", "Specified argument was out of the range of valid values. (Parameter 'count')")
    return CsEnumerable(lambda: iter(range(start, start + count)), 40)


def _console(newline: bool):
    def f(*args):
        text = string_format(args[0], *args[1:]) if len(args) > 1 else (cs_str(args[0]) if args else "")
        sys.stdout.write(text + ("\n" if newline else ""))

    return f


def _unicat(c: str) -> str:
    return unicodedata.category(c) if c else ""


STATIC_METHODS: dict[str, dict[str, Callable]] = {
    "string": {
        "Join": st_join, "Concat": st_concat, "Format": string_format,
        "IsNullOrEmpty": lambda s: s is None or s == "",
        "IsNullOrWhiteSpace": lambda s: s is None or str(s).strip() == "",
        "Equals": lambda a, b, *o: (a is None and b is None) or (a is not None and s_equals(a, b, *o)),
        "Compare": lambda a, b, *o: compare(str(a).casefold(), str(b).casefold()) if _ignore_case(o) else compare(a, b),
    },
    "char": {
        "IsUpper": _char_pred(str.isupper), "IsLower": _char_pred(str.islower),
        "IsDigit": _char_pred(str.isdecimal), "IsLetter": _char_pred(str.isalpha),
        "IsLetterOrDigit": _char_pred(lambda c: c.isalpha() or c.isdecimal()),
        "IsWhiteSpace": _char_pred(str.isspace), "IsPunctuation": _char_pred(lambda c: _unicat(c).startswith("P")),
        "IsSeparator": _char_pred(lambda c: _unicat(c).startswith("Z")),
        "IsControl": _char_pred(lambda c: _unicat(c) == "Cc"), "IsNumber": _char_pred(lambda c: _unicat(c).startswith("N")),
        "IsSymbol": _char_pred(lambda c: _unicat(c).startswith("S")),
        "ToUpper": _char_map(str.upper), "ToLower": _char_map(str.lower),
        "ToUpperInvariant": _char_map(str.upper), "ToLowerInvariant": _char_map(str.lower),
    },
    "int": {"Parse": _parse_int, "TryParse": _try_parse(_parse_int)},
    "long": {"Parse": lambda s, *r: int(str(s).strip())},
    "double": {"Parse": _parse_double, "TryParse": _try_parse(_parse_double)},
    "Math": {
        "Max": _math_minmax(max), "Min": _math_minmax(min),
        "Abs": lambda x: abs(to_num(x)), "Sqrt": lambda x: math.sqrt(x) if x >= 0 else math.nan,
        "Pow": lambda a, b: float(math.pow(a, b)), "Floor": lambda x: float(math.floor(x)),
        "Ceiling": lambda x: float(math.ceil(x)), "Round": _round,
        "Log": lambda x, b=None: (math.log(x) if b is None else math.log(x, b)) if x > 0 else (-math.inf if x == 0 else math.nan),
        "Sign": lambda x: (x > 0) - (x < 0),
    },
    "Console": {"WriteLine": _console(True), "Write": _console(False)},
    "Array": {
        "IndexOf": lambda a, v, *r: list_index_of(a, v), "Sort": lambda a, *r: list_sort(a, *r),
        "Reverse": lambda a: a.reverse(), "Copy": _array_copy, "Empty": lambda: CsArray([], "object"),
    },
    "Enumerable": {
        "Range": _range,
        "Repeat": lambda v, n: CsEnumerable(lambda: iter([v] * n), 40),
        "Empty": lambda: CsEnumerable(lambda: iter(()), 0),
    },
}

STATIC_PROPS: dict[str, dict[str, object]] = {
    "string": {"Empty": ""},
    "char": {"MaxValue": Char("￿"), "MinValue": Char("\0")},
    "int": {"MaxValue": (1 << 31) - 1, "MinValue": -(1 << 31)},
    "long": {"MaxValue": (1 << 63) - 1, "MinValue": -(1 << 63)},
    "double": {"MaxValue": sys.float_info.max, "MinValue": -sys.float_info.max, "Epsilon": 5e-324},
    "Math": {"PI": math.pi},
    "Environment": {"NewLine": "\n"},
    "StringSplitOptions": {k: EnumValue(k) for k in ("None", "RemoveEmptyEntries", "TrimEntries")},
    "StringComparison": {
        k: EnumValue(k) for k in (
            "Ordinal", "OrdinalIgnoreCase", "CurrentCulture", "CurrentCultureIgnoreCase",
            "InvariantCulture", "InvariantCultureIgnoreCase",
        )
    },
    "MidpointRounding": {k: EnumValue(k) for k in ("ToEven", "AwayFromZero")},
}


# -- construction -------------------------------------------------------------------


def _new_list(*args):
    if args and not isinstance(args[0], int):
        return l_to_list(args[0])
    return CsList(cap=args[0] if args else 0)


def _new_string(*args):
    if len(args) == 2:
        return new_string(str(args[0]) * args[1])
    return new_string(_chars(args[0]))


def _new_dict(*args):
    d = CsDict()
    if args and isinstance(args[0], CsDict):
        for k, v in args[0].d.values():
            d.set(k, v)
    return d


def _new_set(*args):
    return CsSet(iterate(args[0]) if args and not isinstance(args[0], int) else ())


def _new_exception(type_name: str):
    def f(*args):
        msg = args[0] if args else None
        if type_name == "ArgumentNullException" and args:
            return CsException(type_name, f"Value cannot be null. (Parameter '{args[0]}')" if len(args) == 1 else args[1], args[0])
        if type_name in ("ArgumentException", "ArgumentOutOfRangeException") and len(args) == 2:
            return CsException(type_name, f"{args[0]} (Parameter '{args[1]}')", args[1])
        return CsException(type_name, msg)

    return f


CONSTRUCTORS: dict[str, Callable] = {
    "List": _new_list, "Dictionary": _new_dict, "HashSet": _new_set,
    "Queue": lambda *a: CsQueue(iterate(a[0]) if a and not isinstance(a[0], int) else ()),
    "Stack": lambda *a: CsStack(iterate(a[0]) if a and not isinstance(a[0], int) else ()),
    "StringBuilder": lambda *a: StringBuilder(a[0] if a and isinstance(a[0], str) else "", a[0] if a and type(a[0]) is int else 16),
    "string": _new_string, "KeyValuePair": lambda k, v: KeyValuePair(k, v),
    "object": lambda: CsObject(None, {}),
    **{name: _new_exception(name) for name in (set(EXCEPTION_BASE) | {"Exception"})},
}
