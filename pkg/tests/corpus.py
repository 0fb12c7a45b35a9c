"""Seeded C# snippet generators shared by the metric and acceptance tests."""
import random

# {a}, {b}, {c} are local or parameter names; everything else is fixed
TEMPLATES = [
    "public int Sum(int[] {a})\n{{\n    int {b} = 0;\n    foreach (int {c} in {a})\n    {{\n        {b} += {c};\n    }}\n    return {b};\n}}",
    "public bool IsEmpty()\n{{\n    return !_items.Any();\n}}",
    "public string Join(List<string> {a}, string {b})\n{{\n    var {c} = new StringBuilder();\n    foreach (var w in {a})\n    {{\n        {c}.Append(w).Append({b});\n    }}\n    return {c}.ToString();\n}}",
    "public int CountUpper(string {a})\n{{\n    int {b} = 0;\n    foreach (char {c} in {a})\n    {{\n        if (char.IsUpper({c})) {b}++;\n    }}\n    return {b};\n}}",
    "public T FirstMatch<T>(IEnumerable<T> {a}, Func<T, bool> {b})\n{{\n    return {a}.FirstOrDefault({b});\n}}",
    "private static double Mean(double[] {a})\n{{\n    double {b} = 0;\n    for (int {c} = 0; {c} < {a}.Length; {c}++)\n    {{\n        {b} += {a}[{c}];\n    }}\n    return {b} / {a}.Length;\n}}",
    "public void Clear()\n{{\n    _cache.Clear();\n    _count = 0;\n}}",
    "public int Max(List<int> {a})\n{{\n    int {b} = int.MinValue;\n    for (int {c} = 0; {c} < {a}.Count; {c}++)\n    {{\n        if ({a}[{c}] > {b}) {b} = {a}[{c}];\n    }}\n    return {b};\n}}",
    "public bool Contains(string {a})\n{{\n    return _set.Contains({a});\n}}",
    "public string Describe(int {a})\n{{\n    string {b} = {a} > 0 ? \"positive\" : \"other\";\n    return $\"{{{a}}} is {{{b}}}\";\n}}",
    "public Dictionary<string, int> Histogram(IEnumerable<string> {a})\n{{\n    var {b} = new Dictionary<string, int>();\n    foreach (var {c} in {a})\n    {{\n        {b}.TryGetValue({c}, out int n);\n        {b}[{c}] = n + 1;\n    }}\n    return {b};\n}}",
    "public async Task<int> LoadAsync(string {a})\n{{\n    var {b} = await File.ReadAllTextAsync({a});\n    return {b}.Length;\n}}",
    "public int Fib(int {a})\n{{\n    if ({a} < 2) return {a};\n    int {b} = 0, {c} = 1;\n    while ({a}-- > 1)\n    {{\n        int t = {b} + {c};\n        {b} = {c};\n        {c} = t;\n    }}\n    return {c};\n}}",
]

NAME_POOL = [
    "x", "y", "z", "item", "value", "total", "acc", "result", "items", "words", "s", "sep", "i", "j", "k",
    "count", "best", "current", "pred", "data", "buffer", "entry", "node", "text", "input", "output",
    "left", "right", "tmp", "index", "n1", "n2", "seen", "key", "list", "arr", "sum", "avg", "cur",
]
RESERVED = {"_items", "_cache", "_count", "_set", "w", "n", "t"}


def fill(template: str, rng: random.Random) -> tuple[str, dict[str, str]]:
    names = rng.sample([n for n in NAME_POOL if n not in RESERVED], 3)
    mapping = dict(zip("abc", names))
    return template.format(**mapping), mapping


def snippets(count: int, seed: int = 0) -> list[str]:
    rng = random.Random(seed)
    return [fill(TEMPLATES[i % len(TEMPLATES)], rng)[0] for i in range(count)]


def renaming_pair(rng: random.Random) -> tuple[str, str]:
    """The same template under two bijective renamings of its variables."""
    tpl = rng.choice(TEMPLATES)
    return fill(tpl, rng)[0], fill(tpl, rng)[0]


def mutate(text: str, rng: random.Random) -> str:
    """A small structural edit that usually changes the abstracted form."""
    edits = [
        lambda s: s.replace("+=", "-=", 1),
        lambda s: s.replace("return", "return 1 +", 1) if "return " in s else s + " ",
        lambda s: s.replace("0", "1", 1),
        lambda s: s.replace("foreach", "for", 1),
        lambda s: s,
    ]
    return rng.choice(edits)(text)
