"""Within-file call relations and before/after method pairing."""
from __future__ import annotations

from dataclasses import dataclass

from .model import ClassModel, MethodModel, SourceUnit


@dataclass
class FocalMethodPair:
    signature: str
    before: MethodModel
    after: MethodModel
    class_name: str = ""


def _resolve(inv, cls: ClassModel, by_class: dict[str, ClassModel]) -> list[MethodModel]:
    if inv.qualifier in (None, "this", "base"):
        target = cls
    else:
        target = by_class.get(inv.qualifier) or by_class.get(inv.qualifier.split(".")[-1])
        if target is None:
            return []
    return [m for m in target.methods if m.name == inv.name and m.accepts(inv.arity)]


def call_graph(unit: SourceUnit) -> SourceUnit:
    """Fill ``callees``/``callers`` on every method of ``unit`` (in place).

    An edge m -> n exists when m's body calls a method named like n with an
    argument count n accepts. Unqualified and ``this.``/``base.`` calls resolve
    in m's class; ``Type.Name(...)`` resolves in class ``Type`` of the unit.
    Calls through other receivers are not resolvable without types and are
    ignored.
    """
    by_class: dict[str, ClassModel] = {}
    for c in unit.classes:
        by_class.setdefault(c.name, c)
        by_class.setdefault(c.name.split(".")[-1], c)
    for c in unit.classes:
        for m in c.methods:
            m.callees = set()
            m.callers = set()
    for c in unit.classes:
        for m in c.methods:
            for inv in m.invocations:
                for target in _resolve(inv, c, by_class):
                    m.callees.add(target.signature)
                    target.callers.add(m.signature)
    return unit


def pair_methods(before: SourceUnit, after: SourceUnit) -> list[FocalMethodPair]:
    """Match methods across two versions of a file by signature.

    Pairs whose normalized bodies are equal are dropped; what remains are the
    focal methods of the change.
    """
    pairs = []
    for cls in before.classes:
        after_cls = next((c for c in after.classes if c.name == cls.name), None)
        if after_cls is None:
            continue
        for m in cls.methods:
            other = after_cls.method(m.signature)
            if other is None or other.normalized_body == m.normalized_body:
                continue
            pairs.append(FocalMethodPair(m.signature, m, other, cls.name))
    return pairs
