"""Splice suggestions into a working copy and run the syntax/compile/test funnel."""
from __future__ import annotations

import configparser
import enum
import json
import logging
import os
import re
import shlex
import shutil
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

from .code_model.model import PatchParts, parse_parts, parse_source
from .errors import CommandNotFound, ConfigError, SpliceFailure, StageTimeout, UnparseableFile

log = logging.getLogger(__name__)


class Stage(str, enum.Enum):
    SYNTAX_ERROR = "SyntaxError"
    COMPILATION_ERROR = "CompilationError"
    FAILED_UNIT_TESTS = "FailedUnitTests"
    PASSED_UNIT_TESTS = "PassedUnitTests"


FUNNEL_ORDER = tuple(Stage)


class ErrorCategory(str, enum.Enum):
    UNDEFINED_IDENTIFIER = "UndefinedIdentifier"
    INCORRECT_ARGUMENTS = "IncorrectArguments"
    INCORRECT_USING = "IncorrectUsing"
    TYPE_MISMATCH = "TypeMismatch"
    OTHER = "Other"


CATEGORY_ORDER = tuple(ErrorCategory)

_CATEGORY_OF = {
    **dict.fromkeys(("CS1061", "CS0117", "CS0246", "CS0103", "CS1579"), ErrorCategory.UNDEFINED_IDENTIFIER),
    **dict.fromkeys(
        ("CS1503", "CS1501", "CS1729", "CS7036", "CS0305", "CS0029", "CS0019"), ErrorCategory.INCORRECT_ARGUMENTS
    ),
    "CS0234": ErrorCategory.INCORRECT_USING,
    **dict.fromkeys(("CS0266", "CS0738", "CS0508"), ErrorCategory.TYPE_MISMATCH),
}


def categorize_compile_error(error_code: str | None) -> ErrorCategory:
    if not error_code:
        return ErrorCategory.OTHER
    return _CATEGORY_OF.get(error_code.strip().upper(), ErrorCategory.OTHER)


# ---------------------------------------------------------------------------
# toolchain


@dataclass(frozen=True)
class ToolchainConfig:
    """Command templates run inside the working copy.

    ``{tree}`` is replaced by the working-copy path and ``{python}`` by the
    running interpreter. A bench template may also use ``{out}``, the path the
    benchmark summary is written to; without it the summary is read from
    standard output.
    """

    compile_command: str
    unit_test_command: str
    bench_command: str = ""
    compile_timeout: float = 600.0
    test_timeout: float = 600.0
    bench_timeout: float = 3600.0
    error_code_pattern: str = r"CS\d{4}"
    keep_failed_trees: bool = False

    def __post_init__(self):
        for name in ("compile_command", "unit_test_command", "bench_command"):
            tmpl = getattr(self, name)
            if (tmpl or name != "bench_command") and "{tree}" not in tmpl:
                raise ConfigError(f"toolchain {name} must contain the {{tree}} placeholder: {tmpl!r}")
        try:
            re.compile(self.error_code_pattern)
        except re.error as exc:
            raise ConfigError(f"bad error_code_pattern: {exc}") from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "ToolchainConfig":
        """Read the ``[toolchain]`` section of an INI file."""
        cp = configparser.ConfigParser(interpolation=None)
        if not cp.read(path, encoding="utf-8"):
            raise ConfigError(f"cannot read toolchain config {path}")
        if not cp.has_section("toolchain"):
            raise ConfigError(f"{path}: missing [toolchain] section")
        sec = cp["toolchain"]
        known = {f.name: f for f in fields(cls)}
        unknown = set(sec) - set(known)
        if unknown:
            raise ConfigError(f"{path}: unknown toolchain keys {sorted(unknown)}")
        kwargs = {}
        for key, value in sec.items():
            ftype = known[key].type
            if ftype == "float":
                kwargs[key] = sec.getfloat(key)
            elif ftype == "bool":
                kwargs[key] = sec.getboolean(key)
            else:
                kwargs[key] = value
        for required in ("compile_command", "unit_test_command"):
            if required not in kwargs:
                raise ConfigError(f"{path}: missing toolchain key {required}")
        return cls(**kwargs)


def fixture_toolchain() -> ToolchainConfig:
    """The bundled C#-subset checker, test runner and benchmark."""
    return ToolchainConfig(
        compile_command="{python} -m perfpatch.minisharp build {tree}",
        unit_test_command="{python} -m perfpatch.minisharp test {tree}",
        bench_command="{python} -m perfpatch.minisharp bench {tree} --out {out}",
        compile_timeout=60.0,
        test_timeout=60.0,
        bench_timeout=120.0,
    )


@dataclass(frozen=True)
class StageResult:
    exit_status: int
    output: str
    duration: float

    @property
    def ok(self) -> bool:
        return self.exit_status == 0


def _expand(template: str, tree: Path, extra: dict[str, str] | None = None) -> list[str]:
    subs = {"tree": str(tree), "python": sys.executable, **(extra or {})}
    return [re.sub(r"\{(\w+)\}", lambda m: subs.get(m.group(1), m.group(0)), arg) for arg in shlex.split(template)]


def run_stage(tree_path: str | Path, command_template: str, timeout: float, extra: dict[str, str] | None = None) -> StageResult:
    """Run one toolchain command in ``tree_path``; stdout and stderr are merged."""
    tree = Path(tree_path)
    if not tree.is_dir():
        raise FileNotFoundError(f"working tree {tree} does not exist")
    argv = _expand(command_template, tree, extra)
    if not argv:
        raise CommandNotFound("empty command")
    env = dict(os.environ)
    env.setdefault("PYTHONHASHSEED", "0")
    start = time.monotonic()
    try:
        proc = subprocess.run(
            argv,
            cwd=tree,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            timeout=timeout,
            env=env,
        )
    except FileNotFoundError as exc:
        raise CommandNotFound(f"{argv[0]}: not found") from exc
    except subprocess.TimeoutExpired as exc:
        out = (exc.output or b"").decode("utf-8", errors="replace")
        raise StageTimeout(" ".join(argv), timeout, out) from exc
    return StageResult(proc.returncode, proc.stdout.decode("utf-8", errors="replace"), time.monotonic() - start)


# ---------------------------------------------------------------------------
# syntax and splicing


def check_syntax(patch_text: str) -> tuple[bool, list[str]]:
    """``(ok, diagnostics)`` for a suggestion in output format."""
    if not patch_text.strip():
        return False, ["empty suggestion"]
    parts = parse_parts(patch_text)
    if not parts.ok:
        from .code_model.syntax import diagnostics

        return False, diagnostics(parts.fragment.root) or ["syntax error"]
    if not parts.methods:
        return False, ["no method declaration found"]
    if parts.other:
        return False, [f"unexpected member: {parts.other[0][:40]!r}"]
    return True, []


def _indent_of(text: bytes, pos: int) -> bytes:
    line_start = text.rfind(b"\n", 0, pos) + 1
    prefix = text[line_start:pos]
    return prefix if not prefix.strip() else re.match(rb"[ \t]*", prefix).group(0)


def reindent(member_text: str, indent: str) -> str:
    """Shift a member whose first line carries no indentation to ``indent``.

    Continuation lines lose their common leading whitespace and gain
    ``indent``.
    """
    lines = member_text.split("\n")
    rest = [ln for ln in lines[1:] if ln.strip()]
    common = min((len(ln) - len(ln.lstrip(" \t")) for ln in rest), default=0)
    out = [lines[0]]
    for ln in lines[1:]:
        out.append(indent + ln[common:] if ln.strip() else "")
    return "\n".join(out)


def _focal_in_patch(parts: PatchParts, signature: str):
    exact = [m for m in parts.methods if m.signature == signature]
    if exact:
        return exact[0]
    name = signature.split("(")[0].split(" ")[-1].split("`")[0]
    by_name = [m for m in parts.methods if m.name == name]
    if len(by_name) == 1:
        return by_name[0]
    return None


def apply_patch(file_text: str, patch_text: str, focal_signature: str) -> str:
    """Splice a suggestion into the file that holds the focal method.

    The focal method and any method whose signature already exists in the
    focal class are replaced; other methods are appended to that class.
    Attributes replace same-named ones or go after the last existing
    attribute. Imports missing from the file go after the last using
    directive.
    """
    try:
        unit = parse_source(file_text)
    except UnparseableFile as exc:
        raise SpliceFailure(f"target file does not parse: {exc}") from exc
    located = unit.find_method(focal_signature)
    if located is None:
        raise SpliceFailure(f"focal method {focal_signature} not found in file")
    cls, focal = located
    parts = parse_parts(patch_text)
    if not parts.ok:
        raise SpliceFailure("suggestion does not parse")
    new_focal = _focal_in_patch(parts, focal_signature)
    if new_focal is None:
        raise SpliceFailure(f"suggestion has no method matching {focal_signature}")

    src = file_text.encode("utf-8")
    indent = _indent_of(src, focal.span[0]).decode()
    edits: list[tuple[int, int, str]] = [(focal.span[0], focal.span[1], reindent(new_focal.text, indent))]

    appended = []
    for m in parts.methods:
        if m is new_focal:
            continue
        existing = cls.method(m.signature)
        if existing is not None:
            if existing.signature == focal_signature:
                raise SpliceFailure(f"suggestion defines {focal_signature} twice")
            edits.append((existing.span[0], existing.span[1], reindent(m.text, indent)))
        else:
            appended.append(reindent(m.text, indent))

    new_attrs = []
    for a in parts.attributes:
        existing = next((x for x in cls.attributes if set(x.names) & set(a.names)), None)
        if existing is not None:
            if existing.normalized != a.normalized:
                edits.append((existing.span[0], existing.span[1], reindent(a.text, indent)))
        else:
            new_attrs.append(reindent(a.text, indent))
    if new_attrs:
        if cls.attributes:
            at = max(x.span[1] for x in cls.attributes)
            edits.append((at, at, "".join(f"\n{indent}{t}" for t in new_attrs)))
        else:
            at = cls.body_span[0]
            edits.append((at, at, "".join(f"\n{indent}{t}" for t in new_attrs) + "\n"))

    if appended:
        close = cls.body_span[1]
        line_start = src.rfind(b"\n", 0, close) + 1
        at = line_start if not src[line_start:close].strip() else close
        edits.append((at, at, "".join(f"\n{indent}{t}\n" for t in appended)))

    have = {u.normalized for u in unit.usings}
    imports = []
    for u in parts.imports:
        if u.normalized not in have and u.normalized not in imports:
            imports.append(u.normalized)
    if imports:
        if unit.usings:
            at = max(u.span[1] for u in unit.usings)
            edits.append((at, at, "".join(f"\n{t}" for t in imports)))
        else:
            edits.append((0, 0, "".join(f"{t}\n" for t in imports) + "\n"))

    out = bytearray(src)
    spans = sorted(edits, key=lambda e: (e[0], e[1]))
    for (s1, e1, _), (s2, _, _) in zip(spans, spans[1:]):
        if s2 < e1:
            raise SpliceFailure("overlapping splice sites")
    for start, end, repl in sorted(edits, key=lambda e: (e[0], e[1]), reverse=True):
        out[start:end] = repl.encode("utf-8")
    result = out.decode("utf-8")
    after = parse_source(result)
    if len(after.diagnostics) > len(unit.diagnostics):
        raise SpliceFailure("spliced file does not parse: " + "; ".join(after.diagnostics[:3]))
    return result


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class ValidationVerdict:
    suggestion_id: str
    stage_reached: Stage
    error_category: ErrorCategory | None = None
    first_error_code: str | None = None
    logs: str = ""
    example_id: str = ""
    rank: int = 0

    def __post_init__(self):
        self.stage_reached = Stage(self.stage_reached)
        if self.error_category is not None:
            self.error_category = ErrorCategory(self.error_category)
        if (self.error_category is not None) != (self.stage_reached is Stage.COMPILATION_ERROR):
            raise ValueError("error_category is set exactly for compilation errors")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stage_reached"] = self.stage_reached.value
        d["error_category"] = self.error_category.value if self.error_category else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ValidationVerdict":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


_LOG_LIMIT = 4000


def _clip(text: str, tree: Path) -> str:
    text = text.replace(str(tree), "<tree>")
    return text if len(text) <= _LOG_LIMIT else text[:_LOG_LIMIT] + "\n[truncated]"


def first_error_code(output: str, pattern: str = r"CS\d{4}") -> str | None:
    m = re.search(rf"\berror\s+({pattern})\b", output) or re.search(rf"\b({pattern})\b", output)
    return m.group(1) if m else None


_IGNORE = shutil.ignore_patterns(".git", "bin", "obj", "__pycache__")


def validate(
    suggestion,
    repo_tree: str | Path,
    toolchain: ToolchainConfig,
    file_path: str | None = None,
    focal_signature: str | None = None,
) -> ValidationVerdict:
    """Run the funnel for one suggestion in a private copy of ``repo_tree``.

    Stops at the first failing stage. Tool failures (timeouts, missing
    commands, splice problems) are recorded in the verdict, never raised.
    """
    file_path = file_path or suggestion.file_path
    focal_signature = focal_signature or suggestion.focal_signature
    base = dict(suggestion_id=suggestion.suggestion_id, example_id=suggestion.example_id, rank=suggestion.rank)

    ok, diags = check_syntax(suggestion.patch_text)
    if not ok:
        return ValidationVerdict(stage_reached=Stage.SYNTAX_ERROR, logs="\n".join(diags), **base)

    with tempfile.TemporaryDirectory(prefix="perfpatch-") as tmp:
        tree = Path(tmp) / "tree"
        shutil.copytree(repo_tree, tree, ignore=_IGNORE, symlinks=True)
        target = tree / file_path
        try:
            original = target.read_text(encoding="utf-8-sig")
            target.write_text(apply_patch(original, suggestion.patch_text, focal_signature), encoding="utf-8")
        except (SpliceFailure, OSError) as exc:
            return ValidationVerdict(
                stage_reached=Stage.COMPILATION_ERROR,
                error_category=ErrorCategory.OTHER,
                logs=f"splice failed: {exc}",
                **base,
            )

        try:
            res = run_stage(tree, toolchain.compile_command, toolchain.compile_timeout)
        except (StageTimeout, CommandNotFound) as exc:
            return ValidationVerdict(
                stage_reached=Stage.COMPILATION_ERROR,
                error_category=ErrorCategory.OTHER,
                logs=_clip(f"compile stage: {exc}", tree),
                **base,
            )
        if not res.ok:
            code = first_error_code(res.output, toolchain.error_code_pattern)
            return ValidationVerdict(
                stage_reached=Stage.COMPILATION_ERROR,
                error_category=categorize_compile_error(code),
                first_error_code=code,
                logs=_clip(res.output, tree),
                **base,
            )

        try:
            res = run_stage(tree, toolchain.unit_test_command, toolchain.test_timeout)
        except (StageTimeout, CommandNotFound) as exc:
            return ValidationVerdict(stage_reached=Stage.FAILED_UNIT_TESTS, logs=_clip(f"test stage: {exc}", tree), **base)
        stage = Stage.PASSED_UNIT_TESTS if res.ok else Stage.FAILED_UNIT_TESTS
        return ValidationVerdict(stage_reached=stage, logs=_clip(res.output, tree), **base)


def validate_many(
    suggestions: Sequence,
    repo_tree: str | Path,
    toolchain: ToolchainConfig,
    workers: int = 1,
) -> list[ValidationVerdict]:
    """Validate in parallel; each worker owns its copy. Output keeps input order."""
    if workers <= 1:
        return [validate(s, repo_tree, toolchain) for s in suggestions]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: validate(s, repo_tree, toolchain), suggestions))


def patched_tree(suggestion, repo_tree: str | Path, dest: str | Path) -> Path:
    """Copy ``repo_tree`` to ``dest`` and apply ``suggestion`` there."""
    dest = Path(dest)
    shutil.copytree(repo_tree, dest, ignore=_IGNORE, symlinks=True)
    target = dest / suggestion.file_path
    text = target.read_text(encoding="utf-8-sig")
    target.write_text(apply_patch(text, suggestion.patch_text, suggestion.focal_signature), encoding="utf-8")
    return dest


def run_benchmark(tree: str | Path, toolchain: ToolchainConfig) -> str:
    """Run the bench command and return the summary text it produced."""
    if not toolchain.bench_command:
        raise ConfigError("toolchain has no bench_command")
    tree = Path(tree)
    with tempfile.TemporaryDirectory(prefix="perfpatch-bench-") as tmp:
        out = Path(tmp) / "summary.csv"
        res = run_stage(tree, toolchain.bench_command, toolchain.bench_timeout, {"out": str(out)})
        if not res.ok:
            raise RuntimeError(f"benchmark failed with status {res.exit_status}:\n{res.output[-2000:]}")
        if "{out}" in toolchain.bench_command:
            return out.read_text(encoding="utf-8")
        return res.output


# ---------------------------------------------------------------------------
# funnel tables


@dataclass
class FunnelSummary:
    stage_counts: dict[str, int] = field(default_factory=dict)
    category_counts: dict[str, int] = field(default_factory=dict)
    error_codes: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.stage_counts.values())


def summarize(verdicts: Iterable[ValidationVerdict]) -> FunnelSummary:
    s = FunnelSummary({st.value: 0 for st in FUNNEL_ORDER}, {c.value: 0 for c in CATEGORY_ORDER}, {})
    for v in verdicts:
        s.stage_counts[v.stage_reached.value] += 1
        if v.error_category is not None:
            s.category_counts[v.error_category.value] += 1
        if v.first_error_code:
            s.error_codes[v.first_error_code] = s.error_codes.get(v.first_error_code, 0) + 1
    s.error_codes = dict(sorted(s.error_codes.items()))
    return s


def write_verdicts(verdicts: Iterable[ValidationVerdict], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for v in verdicts:
            fh.write(json.dumps(v.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_verdicts(path: str | Path) -> list[ValidationVerdict]:
    with open(path, encoding="utf-8") as fh:
        return [ValidationVerdict.from_dict(json.loads(line)) for line in fh if line.strip()]


# ---------------------------------------------------------------------------
# target selection from coverage


DEFAULT_COVERAGE_THRESHOLD = 0.8


def select_methods(coverage_path: str | Path, threshold: float = DEFAULT_COVERAGE_THRESHOLD) -> list[dict]:
    """Methods worth targeting: on a benchmark path and covered by unit tests.

    The coverage report is JSON: ``{"methods": [{"file": str, "signature": str,
    "line_coverage": float in [0, 1], "on_benchmark_path": bool}]}``. Returns
    the qualifying entries sorted by file and signature.
    """
    with open(coverage_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    rows = doc.get("methods") if isinstance(doc, dict) else None
    if not isinstance(rows, list):
        raise ValueError(f"{coverage_path}: expected an object with a 'methods' list")
    picked = []
    for i, r in enumerate(rows):
        try:
            cov = float(r["line_coverage"])
            on_path = bool(r["on_benchmark_path"])
            r["file"], r["signature"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{coverage_path}: bad method entry {i}: {exc}") from exc
        if not 0.0 <= cov <= 1.0:
            raise ValueError(f"{coverage_path}: entry {i} coverage {cov} outside [0, 1]")
        if on_path and cov >= threshold:
            picked.append(r)
    return sorted(picked, key=lambda r: (r["file"], r["signature"]))
