"""CodeBLEU for C#: n-gram, keyword-weighted n-gram, syntax and dataflow match."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from ..code_model.abstraction import variable_occurrences
from ..code_model.syntax import Fragment, node_text, parse_fragment, walk
from ..errors import TokenizationFailure

MAX_N = 4
KEYWORD_WEIGHT = 5.0

CSHARP_KEYWORDS = frozenset(
    """abstract as base bool break byte case catch char checked class const continue decimal default
    delegate do double else enum event explicit extern false finally fixed float for foreach goto if
    implicit in int interface internal is lock long namespace new null object operator out override
    params private protected public readonly ref return sbyte sealed short sizeof stackalloc static
    string struct switch this throw true try typeof uint ulong unchecked unsafe ushort using virtual
    void volatile while add alias ascending async await by descending dynamic equals from get global
    group into join let nameof notnull on orderby partial record remove select set unmanaged value var
    when where with yield""".split()
)


@dataclass(frozen=True)
class CodeBleuWeights:
    alpha: float = 0.1  # n-gram BLEU
    beta: float = 0.1  # keyword-weighted BLEU
    gamma: float = 0.4  # syntax subtree match
    delta: float = 0.4  # dataflow match

    def __post_init__(self):
        total = self.alpha + self.beta + self.gamma + self.delta
        if any(w < 0 for w in (self.alpha, self.beta, self.gamma, self.delta)) or abs(total - 1.0) > 1e-9:
            raise ValueError(f"CodeBLEU weights must be non-negative and sum to 1, got {total}")


DEFAULT_WEIGHTS = CodeBleuWeights()


@dataclass(frozen=True)
class CodeBleuScore:
    score: float
    bleu: float
    weighted_bleu: float
    ast_match: float
    dataflow_match: float


class _Parsed:
    """Tokens, syntax subtrees and def-use edges of one text."""

    def __init__(self, text: str):
        if not isinstance(text, str):
            raise TokenizationFailure(f"expected text, got {type(text).__name__}")
        try:
            frag = parse_fragment(text)
        except Exception as exc:  # pragma: no cover - tree-sitter rarely raises
            raise TokenizationFailure(str(exc)) from exc
        self.tokens = _tokens(frag)
        self.subtrees = _subtrees(frag)
        self.edges = _dataflow(frag)


@lru_cache(maxsize=4096)
def _parsed(text: str) -> _Parsed:
    return _Parsed(text)


def _own(frag: Fragment, node) -> bool:
    return frag.to_original(node.start_byte) is not None and frag.to_original(node.end_byte) is not None


def _tokens(frag: Fragment) -> tuple[str, ...]:
    toks = []
    for n in walk(frag.root):
        if n.child_count == 0 and n.type != "comment" and n.end_byte > n.start_byte and _own(frag, n):
            toks.append(node_text(n))
    return tuple(toks)


def _container(frag: Fragment, node) -> bool:
    if node.id == frag.root.id:
        return True
    return frag.wrapped and not _own(frag, node)


def _subtrees(frag: Fragment) -> Counter:
    """Node-type s-expressions of every named subtree of depth >= 1."""
    out: Counter = Counter()
    for n in walk(frag.root):
        if not n.is_named or n.named_child_count == 0 or n.type == "comment":
            continue
        if _container(frag, n):
            continue
        out[str(n)] += 1
    return out


_ASSIGN_TARGET = {"variable_declarator": "name", "assignment_expression": "left"}


def _dataflow(frag: Fragment) -> Counter:
    """Def-use edges between abstracted variables.

    ``(target, source)`` for each variable read on the right-hand side of a
    declaration, assignment or foreach header; ``("RET", source)`` for
    variables read by a return statement; compound updates add a self edge.
    """
    var_of: dict[int, int] = {n.id: i for n, i in variable_occurrences(frag)}
    edges: Counter = Counter()

    def reads(node) -> list[int]:
        return [var_of[c.id] for c in walk(node) if c.id in var_of]

    for n in walk(frag.root):
        t = n.type
        if t == "variable_declarator":
            name = n.child_by_field_name("name")
            if name is None or name.id not in var_of:
                continue
            target = var_of[name.id]
            for c in n.named_children:
                if c.id != name.id:
                    for s in reads(c):
                        edges[(target, s)] += 1
        elif t == "assignment_expression":
            left, right = n.child_by_field_name("left"), n.child_by_field_name("right")
            if left is None or left.id not in var_of:
                continue
            target = var_of[left.id]
            op = n.child_by_field_name("operator")
            if op is not None and node_text(op) != "=":
                edges[(target, target)] += 1
            if right is not None:
                for s in reads(right):
                    edges[(target, s)] += 1
        elif t in ("postfix_unary_expression", "prefix_unary_expression"):
            ops = {node_text(c) for c in n.children if not c.is_named}
            if ops & {"++", "--"}:
                operand = n.named_children[0] if n.named_children else None
                if operand is not None and operand.id in var_of:
                    edges[(var_of[operand.id], var_of[operand.id])] += 1
        elif t == "foreach_statement":
            left, right = n.child_by_field_name("left"), n.child_by_field_name("right")
            if left is None or right is None:
                continue
            targets = [var_of[c.id] for c in walk(left) if c.id in var_of]
            for target in targets:
                for s in reads(right):
                    edges[(target, s)] += 1
        elif t == "return_statement":
            for s in reads(n):
                edges[("RET", s)] += 1
    return edges


# ---------------------------------------------------------------------------


def _ngrams(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _brevity(c: int, r: int) -> float:
    if c == 0:
        return 0.0
    return 1.0 if c > r else math.exp(1.0 - r / c)


def bleu(candidate: tuple[str, ...], reference: tuple[str, ...], max_n: int = MAX_N) -> float:
    """Sentence BLEU: clipped n-gram precisions with add-one smoothing,
    uniform weights over 1..max_n, brevity penalty."""
    if not candidate and not reference:
        return 1.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand, ref = _ngrams(candidate, n), _ngrams(reference, n)
        matched = sum((cand & ref).values())
        total = sum(cand.values())
        log_sum += math.log((matched + 1) / (total + 1)) / max_n
    return _brevity(len(candidate), len(reference)) * math.exp(log_sum)


def weighted_bleu(
    candidate: tuple[str, ...],
    reference: tuple[str, ...],
    keywords=CSHARP_KEYWORDS,
    keyword_weight: float = KEYWORD_WEIGHT,
    max_n: int = MAX_N,
) -> float:
    """BLEU whose unigram precision counts keyword tokens ``keyword_weight`` times."""
    if not candidate and not reference:
        return 1.0
    cand1, ref1 = Counter(candidate), Counter(reference)

    def w(tok: str) -> float:
        return keyword_weight if tok in keywords else 1.0

    matched = sum(w(t) * c for t, c in (cand1 & ref1).items())
    total = sum(w(t) * c for t, c in cand1.items())
    log_sum = math.log((matched + 1) / (total + 1)) / max_n
    for n in range(2, max_n + 1):
        cand, ref = _ngrams(candidate, n), _ngrams(reference, n)
        log_sum += math.log((sum((cand & ref).values()) + 1) / (sum(cand.values()) + 1)) / max_n
    return _brevity(len(candidate), len(reference)) * math.exp(log_sum)


def _recall(cand: Counter, ref: Counter) -> float:
    return sum((cand & ref).values()) / sum(ref.values())


def codebleu_components(candidate: str, reference: str, weights: CodeBleuWeights = DEFAULT_WEIGHTS) -> CodeBleuScore:
    c, r = _parsed(candidate), _parsed(reference)
    b = bleu(c.tokens, r.tokens)
    wb = weighted_bleu(c.tokens, r.tokens)
    ast = b if not c.subtrees or not r.subtrees else _recall(c.subtrees, r.subtrees)
    df = ast if not r.edges else _recall(c.edges, r.edges)
    score = weights.alpha * b + weights.beta * wb + weights.gamma * ast + weights.delta * df
    return CodeBleuScore(min(1.0, max(0.0, score)), b, wb, ast, df)


def codebleu(candidate: str, reference: str, weights: CodeBleuWeights = DEFAULT_WEIGHTS) -> float:
    """Weighted sum of BLEU, keyword BLEU, syntax match and dataflow match, in [0, 1]."""
    return codebleu_components(candidate, reference, weights).score


def code_tokens(text: str) -> tuple[str, ...]:
    return _parsed(text).tokens
