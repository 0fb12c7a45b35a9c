"""Comment stripping and whitespace collapsing for C# method bodies."""
from __future__ import annotations


def _skip_string(text: str, i: int) -> int:
    """Return the index just past the string/char literal starting at ``i``.

    Handles regular, verbatim (``@"..."``), interpolated (``$"..."``, ``$@"..."``),
    raw (``\"\"\"...\"\"\"``) string literals and character literals.
    """
    n = len(text)
    j = i
    verbatim = False
    while j < n and text[j] in "@$":
        verbatim = verbatim or text[j] == "@"
        j += 1
    quote = text[j]
    if quote == '"' and text.startswith('"""', j):
        k = j
        while k < n and text[k] == '"':
            k += 1
        fence = text[j:k]
        end = text.find(fence, k)
        return n if end < 0 else end + len(fence)
    j += 1
    while j < n:
        ch = text[j]
        if verbatim:
            if ch == '"':
                if j + 1 < n and text[j + 1] == '"':
                    j += 2
                    continue
                return j + 1
        else:
            if ch == "\\":
                j += 2
                continue
            if ch == quote or ch == "\n":
                return j + 1
        j += 1
    return n


def _literal_start(text: str, i: int) -> bool:
    ch = text[i]
    if ch in "\"'":
        return True
    if ch in "@$":
        j = i
        while j < len(text) and text[j] in "@$" and j - i < 3:
            j += 1
        return j < len(text) and text[j] == '"'
    return False


def strip_comments(text: str) -> str:
    """Replace every ``//`` and ``/* */`` comment with a single space.

    String and character literals are copied through untouched.
    """
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            end = text.find("\n", i)
            out.append(" ")
            i = n if end < 0 else end
        elif ch == "/" and i + 1 < n and text[i + 1] == "*":
            end = text.find("*/", i + 2)
            out.append(" ")
            i = n if end < 0 else end + 2
        elif _literal_start(text, i):
            # identifiers like `x@` never precede a literal in valid C#
            if ch in "@$" and i > 0 and (text[i - 1].isalnum() or text[i - 1] == "_"):
                out.append(ch)
                i += 1
                continue
            end = _skip_string(text, i)
            out.append(text[i:end])
            i = end
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def collapse_whitespace(text: str) -> str:
    """Collapse whitespace runs outside literals to one space and trim the ends."""
    out: list[str] = []
    i, n = 0, len(text)
    pending_space = False
    while i < n:
        ch = text[i]
        if ch.isspace():
            pending_space = True
            i += 1
            continue
        if pending_space and out:
            out.append(" ")
        pending_space = False
        if _literal_start(text, i) and not (
            ch in "@$" and i > 0 and (text[i - 1].isalnum() or text[i - 1] == "_")
        ):
            end = _skip_string(text, i)
            out.append(text[i:end])
            i = end
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def normalize_body(body_text: str) -> str:
    """Remove comments and collapse whitespace so trivial edits compare equal.

    >>> normalize_body("x\\n\\t=  1; // note")
    'x = 1;'
    """
    return collapse_whitespace(strip_comments(body_text))
