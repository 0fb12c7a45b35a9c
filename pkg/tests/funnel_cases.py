"""Fifty planted suggestions against the mini repository's head revision.

Each case carries the stage it must reach and, for compile failures, the
error code planted in it. Expected categories come from the published code
table, not from the validator.
"""
from perfpatch.fixtures.minirepo import SOURCE_PATH
from perfpatch.suggest.engine import Suggestion

# code -> category name, as tabulated for the compile-error breakdown
CODE_CATEGORY = {
    "CS1061": "UndefinedIdentifier",
    "CS1503": "IncorrectArguments",
    "CS0234": "IncorrectUsing",
    "CS0266": "TypeMismatch",
}

SIGS = {
    "IsEmpty": ("bool IsEmpty()", "public bool IsEmpty()"),
    "HasNoLongWords": ("bool HasNoLongWords(int)", "public bool HasNoLongWords(int minLength)"),
    "FindLong": ("string FindLong(int)", "public string FindLong(int minLength)"),
    "CountUpper": ("int CountUpper(string)", "public static int CountUpper(string text)"),
    "CountSeparators": ("int CountSeparators()", "public int CountSeparators()"),
    "Join": ("string Join(string)", "public string Join(string separator)"),
    "Longest": ("string Longest()", "public string Longest()"),
}


def _m(method, body, prefix=""):
    return method, f"{prefix}{SIGS[method][1]}\n{{\n{body}\n}}"


CORRECT = [
    _m("IsEmpty", "    return _words.Count == 0;"),
    _m("IsEmpty", "    return !_words.Any();"),
    _m("HasNoLongWords", "    return !_words.Any(w => w.Length >= minLength);"),
    _m("FindLong", "    return _words.FirstOrDefault(w => w.Length >= minLength);"),
    _m("CountUpper", "    int count = 0;\n    foreach (char c in text)\n    {\n        if (char.IsUpper(c)) count++;\n    }\n    return count;"),
    _m("CountSeparators", "    int total = 0;\n    foreach (string word in _words)\n    {\n        foreach (char c in word)\n        {\n            if (c == ',' || c == ';') total++;\n        }\n    }\n    return total;"),
    _m("CountSeparators", "    int total = 0;\n    foreach (string word in _words)\n    {\n        total += word.Split(s_separators).Length - 1;\n    }\n    return total;",
       "private static readonly char[] s_separators = { ',', ';' };\n\n"),
    _m("Join", "    var sb = new StringBuilder();\n    foreach (string word in _words)\n    {\n        sb.Append(word).Append(separator);\n    }\n    return sb.ToString();",
       "using System.Text;\n\n"),
    _m("Join", "    return string.Concat(_words.Select(w => w + separator));"),
    _m("Longest", "    string best = \"\";\n    for (int i = 0; i < _words.Count; i++)\n    {\n        if (_words[i].Length > best.Length) best = _words[i];\n    }\n    return best;"),
]

SYNTAX = [
    _m("IsEmpty", "    return _words.Count == 0"),
    _m("HasNoLongWords", "    return !_words.Any(w => w.Length >= minLength;"),
    _m("FindLong", "    return _words.FirstOrDefault(w => w.Length >= minLength))"),
    _m("CountUpper", "    int count = 0;\n    foreach (char c in text\n    {\n        count++;\n    }\n    return count;"),
    _m("CountSeparators", "    int total = 0;\n    return return total;"),
    _m("Join", "    string result = \"\";\n    foreach (string word in _words)\n    {\n        result += word + separator;\n    return result;"),
    _m("Longest", "    string best = ;\n    return best;"),
    _m("IsEmpty", "    if (_words.Count == 0 {\n        return true;\n    }\n    return false;"),
]

CS1061 = [
    _m("IsEmpty", "    return _words.Length == 0;"),
    _m("IsEmpty", "    return _words.IsEmpty;"),
    _m("HasNoLongWords", "    return !_words.Any(w => w.Lenght >= minLength);"),
    _m("CountUpper", "    int count = 0;\n    foreach (char c in text)\n    {\n        if (c.IsUpper()) count++;\n    }\n    return count;"),
    _m("Join", "    return _words.JoinWith(separator);"),
    _m("Longest", "    return _words.MaxBy(w => w.Length).Text;"),
]

CS1503 = [
    _m("HasNoLongWords", "    return FindLong(\"long\") == null;"),
    _m("FindLong", "    return CountUpper(minLength) > 0 ? null : \"\";"),
    _m("IsEmpty", "    return HasNoLongWords(\"0\");"),
    _m("Join", "    return FindLong(separator);"),
    _m("Longest", "    return Join(0);"),
    _m("CountSeparators", "    return CountUpper(_words);"),
]

CS0234 = [
    _m("IsEmpty", "    return !_words.Any();", "using System.Linq.Fast;\n\n"),
    _m("Join", "    return string.Concat(_words);", "using System.Text.Builders;\n\n"),
    _m("FindLong", "    return _words.FirstOrDefault(w => w.Length >= minLength);", "using System.Collections.Fast;\n\n"),
    _m("CountUpper", "    return text.Count(char.IsUpper);", "using System.Globalization.Extra;\n\n"),
    _m("Longest", "    return _words.FirstOrDefault() ?? \"\";", "using System.Collections.Generic.Pooled;\n\n"),
    _m("HasNoLongWords", "    return !_words.Any(w => w.Length >= minLength);", "using System.Linq.Parallel;\n\n"),
]

CS0266 = [
    _m("IsEmpty", "    int n = 3L;\n    return _words.Count == 0;"),
    _m("CountUpper", "    double total = 0;\n    foreach (char c in text)\n    {\n        if (char.IsUpper(c)) total += 1;\n    }\n    return total;"),
    _m("CountSeparators", "    long total = 0;\n    foreach (string word in _words)\n    {\n        total += word.Split(',', ';').Length - 1;\n    }\n    return total;"),
    _m("Longest", "    object best = _words.FirstOrDefault();\n    return best;"),
    _m("FindLong", "    long min = minLength;\n    int limit = min;\n    return _words.FirstOrDefault(w => w.Length >= limit);"),
    _m("HasNoLongWords", "    double limit = minLength;\n    int m = limit;\n    return !_words.Any(w => w.Length >= m);"),
]

FAILING = [
    _m("IsEmpty", "    return _words.Count != 0;"),
    _m("HasNoLongWords", "    return !_words.Any(w => w.Length > minLength);"),
    _m("FindLong", "    return _words.LastOrDefault(w => w.Length >= minLength);"),
    _m("CountUpper", "    int count = 0;\n    foreach (char c in text)\n    {\n        if (char.IsLower(c)) count++;\n    }\n    return count;"),
    _m("CountSeparators", "    int total = 0;\n    foreach (string word in _words)\n    {\n        total += word.Split(',').Length - 1;\n    }\n    return total;"),
    _m("Join", "    return string.Join(separator, _words);"),
    _m("Longest", "    string best = \"\";\n    foreach (string word in _words)\n    {\n        if (word.Length >= best.Length) best = word;\n    }\n    return best;"),
    _m("Longest", "    return _words.Last();"),
]

# (group, expected stage, planted code)
GROUPS = [
    (CORRECT, "PassedUnitTests", None),
    (SYNTAX, "SyntaxError", None),
    (CS1061, "CompilationError", "CS1061"),
    (CS1503, "CompilationError", "CS1503"),
    (CS0234, "CompilationError", "CS0234"),
    (CS0266, "CompilationError", "CS0266"),
    (FAILING, "FailedUnitTests", None),
]


def planted_cases() -> list[tuple[Suggestion, str, str | None]]:
    out = []
    for group, stage, code in GROUPS:
        for method, text in group:
            sig = SIGS[method][0]
            s = Suggestion(text, -len(out) / 100, "planted", len(out) + 1, "funnel", sig, SOURCE_PATH)
            out.append((s, stage, code))
    return out
