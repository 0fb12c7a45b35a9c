"""Benchmark summary parsing and the improvement/regression decision.

Duration improves when a one-tailed Welch test says the candidate mean is
lower *and* the candidate's upper Tukey fence sits below the baseline's lower
fence. Memory improves on any strict drop in allocated bytes. A suggestion
only counts when neither axis gets worse.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import BenchmarkNameMismatch, DegenerateSample, SchemaError, UnitError
from .student_t import t_sf

log = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.05
TUKEY_K = 1.5

TIME_UNITS = {"ns": 1e-9, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ms": 1e-3, "s": 1.0}
SIZE_UNITS = {"B": 0, "KB": 1, "MB": 2}
REQUIRED_COLUMNS = ("Mean", "StdDev", "Iterations", "Q1", "Q3", "Allocated")
NAME_COLUMNS = ("Benchmark", "Method", "Name")
_MISSING = {"", "-", "NA", "N/A", "?"}


@dataclass(frozen=True)
class BenchmarkSummary:
    benchmark_name: str
    mean: float  # seconds
    stddev: float
    n: int
    q1: float
    q3: float
    allocated_bytes: int | None = None


class MemoryChange(str, enum.Enum):
    IMPROVED = "improved"
    REGRESSED = "regressed"
    EQUAL = "equal"


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float
    reject: bool


@dataclass
class PerfVerdict:
    benchmark_name: str
    duration_improved: bool
    memory_improved: bool
    duration_regressed: bool
    memory_regressed: bool
    t_stat: float
    df: float
    p_value: float
    fences: tuple[float, float]  # (candidate upper, baseline lower)
    duration_change_pct: float = 0.0
    memory_change_pct: float | None = None

    @property
    def improved(self) -> bool:
        return (self.duration_improved or self.memory_improved) and not (
            self.duration_regressed or self.memory_regressed
        )


@dataclass
class Judgement:
    benchmarks: list[PerfVerdict] = field(default_factory=list)

    @property
    def improved(self) -> bool:
        if not self.benchmarks:
            return False
        any_gain = any(v.duration_improved or v.memory_improved for v in self.benchmarks)
        any_loss = any(v.duration_regressed or v.memory_regressed for v in self.benchmarks)
        return any_gain and not any_loss

    def to_dict(self) -> dict:
        return {
            "improved": self.improved,
            "benchmarks": [dict(asdict(v), improved=v.improved) for v in self.benchmarks],
        }


# ---------------------------------------------------------------------------
# tests


def welch_one_tailed(
    base: tuple[float, float, int],
    sugg: tuple[float, float, int],
    alpha: float = DEFAULT_ALPHA,
) -> WelchResult:
    """One-tailed Welch test of H1: suggestion mean < baseline mean.

    ``base`` and ``sugg`` are ``(mean, sd, n)``. When both standard
    deviations are zero the test degenerates to comparing the means, with p
    reported as 0 (suggestion lower) or 1.
    """
    mb, sb, nb = base
    ms, ss, ns = sugg
    if nb < 2 or ns < 2:
        raise DegenerateSample(f"need at least 2 samples per side, got {nb} and {ns}")
    if sb < 0 or ss < 0:
        raise ValueError("standard deviations must be non-negative")
    vb, vs = sb * sb / nb, ss * ss / ns
    se2 = vb + vs
    if se2 == 0.0:
        lower = ms < mb
        t = math.inf if lower else (-math.inf if ms > mb else 0.0)
        return WelchResult(t, float(nb + ns - 2), 0.0 if lower else 1.0, lower)
    t = (mb - ms) / math.sqrt(se2)
    df = se2 * se2 / (vb * vb / (nb - 1) + vs * vs / (ns - 1))
    p = t_sf(t, df)
    return WelchResult(t, df, p, p < alpha)


def tukey_fences(q1: float, q3: float, k: float = TUKEY_K) -> tuple[float, float]:
    iqr = q3 - q1
    return q1 - k * iqr, q3 + k * iqr


def tukey_separated(base: tuple[float, float], sugg: tuple[float, float]) -> bool:
    """True when the suggestion's upper fence is below the baseline's lower fence."""
    _, sugg_upper = tukey_fences(*sugg)
    base_lower, _ = tukey_fences(*base)
    return sugg_upper < base_lower


def compare_memory(base_alloc: int | None, sugg_alloc: int | None) -> MemoryChange:
    if base_alloc is None or sugg_alloc is None:
        return MemoryChange.EQUAL
    if sugg_alloc < base_alloc:
        return MemoryChange.IMPROVED
    if sugg_alloc > base_alloc:
        return MemoryChange.REGRESSED
    return MemoryChange.EQUAL


def _pct(before: float, after: float) -> float:
    return 0.0 if before == 0 else 100.0 * (before - after) / before


def judge(
    baseline: Sequence[BenchmarkSummary],
    candidate: Sequence[BenchmarkSummary],
    alpha: float = DEFAULT_ALPHA,
) -> Judgement:
    """Per-benchmark verdicts plus the overall no-cross-regression decision."""
    base_by = {b.benchmark_name: b for b in baseline}
    cand_by = {c.benchmark_name: c for c in candidate}
    missing_c = sorted(set(base_by) - set(cand_by))
    missing_b = sorted(set(cand_by) - set(base_by))
    if missing_c or missing_b:
        raise BenchmarkNameMismatch(missing_c, missing_b)
    out = Judgement()
    for name in [b.benchmark_name for b in baseline]:
        b, c = base_by[name], cand_by[name]
        faster = welch_one_tailed((b.mean, b.stddev, b.n), (c.mean, c.stddev, c.n), alpha)
        slower = welch_one_tailed((c.mean, c.stddev, c.n), (b.mean, b.stddev, b.n), alpha)
        separated = tukey_separated((b.q1, b.q3), (c.q1, c.q3))
        if b.allocated_bytes is None or c.allocated_bytes is None:
            log.warning("benchmark %s has no allocation data; memory axis ignored", name)
        mem = compare_memory(b.allocated_bytes, c.allocated_bytes)
        mem_pct = None
        if b.allocated_bytes is not None and c.allocated_bytes is not None:
            mem_pct = _pct(b.allocated_bytes, c.allocated_bytes)
        out.benchmarks.append(
            PerfVerdict(
                benchmark_name=name,
                duration_improved=faster.reject and separated,
                memory_improved=mem is MemoryChange.IMPROVED,
                duration_regressed=slower.reject,
                memory_regressed=mem is MemoryChange.REGRESSED,
                t_stat=faster.t,
                df=faster.df,
                p_value=faster.p,
                fences=(tukey_fences(c.q1, c.q3)[1], tukey_fences(b.q1, b.q3)[0]),
                duration_change_pct=_pct(b.mean, c.mean),
                memory_change_pct=mem_pct,
            )
        )
    return out


# ---------------------------------------------------------------------------
# summary files

_QUANTITY = re.compile(r"^\s*([-+]?[\d.,]+(?:[eE][-+]?\d+)?)\s*([^\d\s]*)\s*$")


def _number(text: str, row: int, column: str) -> float:
    try:
        return float(text.replace(",", ""))
    except ValueError:
        raise SchemaError(f"not a number: {text!r}", row, column) from None


def parse_duration(value, row: int = 0, column: str = "") -> float:
    """``"10.2 ms"`` -> 0.0102. Bare JSON numbers are taken as seconds."""
    if isinstance(value, (int, float)):
        return float(value)
    m = _QUANTITY.match(str(value))
    if not m:
        raise SchemaError(f"unreadable duration {value!r}", row, column)
    number, unit = m.groups()
    if unit not in TIME_UNITS:
        raise UnitError(f"unknown time unit {unit!r}", row, column)
    return _number(number, row, column) * TIME_UNITS[unit]


def parse_size(value, row: int = 0, column: str = "", kilo: int = 1024) -> int | None:
    """``"1.2 KB"`` -> 1228 (KB = ``kilo`` bytes, fractional bytes truncated)."""
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return int(value)
    if str(value).strip() in _MISSING:
        return None
    m = _QUANTITY.match(str(value))
    if not m:
        raise SchemaError(f"unreadable size {value!r}", row, column)
    number, unit = m.groups()
    if unit not in SIZE_UNITS:
        raise UnitError(f"unknown size unit {unit!r}", row, column)
    return int(_number(number, row, column) * kilo ** SIZE_UNITS[unit])


def _summary_from_row(raw: dict, row: int, kilo: int) -> BenchmarkSummary:
    name_col = next((c for c in NAME_COLUMNS if c in raw), None)
    if name_col is None:
        raise SchemaError("missing benchmark name column", row, "/".join(NAME_COLUMNS))
    for col in REQUIRED_COLUMNS:
        if col not in raw:
            raise SchemaError("missing column", row, col)
    n = int(_number(str(raw["Iterations"]), row, "Iterations"))
    summary = BenchmarkSummary(
        benchmark_name=str(raw[name_col]).strip(),
        mean=parse_duration(raw["Mean"], row, "Mean"),
        stddev=parse_duration(raw["StdDev"], row, "StdDev"),
        n=n,
        q1=parse_duration(raw["Q1"], row, "Q1"),
        q3=parse_duration(raw["Q3"], row, "Q3"),
        allocated_bytes=parse_size(raw["Allocated"], row, "Allocated", kilo),
    )
    if summary.allocated_bytes is None:
        log.warning("row %d (%s): no allocation value; enable allocation tracking in the harness", row, summary.benchmark_name)
    if summary.q1 > summary.q3:
        raise SchemaError("Q1 exceeds Q3", row, "Q1")
    if summary.stddev < 0:
        raise SchemaError("negative StdDev", row, "StdDev")
    if summary.n < 2:
        raise SchemaError("fewer than 2 iterations", row, "Iterations")
    return summary


def parse_summary_text(text: str, kilo: int = 1024) -> list[BenchmarkSummary]:
    """Parse the CSV (``;`` or ``,`` separated) or JSON summary format."""
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        doc = json.loads(text)
        rows = doc["benchmarks"] if isinstance(doc, dict) else doc
    else:
        header = stripped.splitlines()[0] if stripped else ""
        delim = ";" if ";" in header else ","
        reader = csv.DictReader(io.StringIO(stripped), delimiter=delim)
        rows = [{k.strip(): (v or "").strip() for k, v in r.items() if k is not None} for r in reader]
        if reader.fieldnames is not None:
            present = {f.strip() for f in reader.fieldnames}
            for col in REQUIRED_COLUMNS:
                if col not in present:
                    raise SchemaError("missing column", 1, col)
    out = []
    seen: set[str] = set()
    for i, raw in enumerate(rows, start=2):
        s = _summary_from_row(raw, i, kilo)
        if s.benchmark_name in seen:
            raise SchemaError(f"duplicate benchmark {s.benchmark_name!r}", i, "Benchmark")
        seen.add(s.benchmark_name)
        out.append(s)
    return out


def parse_summary(report_file: str | Path, kilo: int = 1024) -> list[BenchmarkSummary]:
    return parse_summary_text(Path(report_file).read_text(encoding="utf-8"), kilo)


def format_duration(seconds: float) -> str:
    for unit, scale in (("s", 1.0), ("ms", 1e-3), ("us", 1e-6)):
        if abs(seconds) >= scale:
            return f"{seconds / scale:.6f} {unit}"
    return f"{seconds / 1e-9:.6f} ns"


def write_summary_csv(summaries: Sequence[BenchmarkSummary], path: str | Path) -> None:
    lines = ["Benchmark;" + ";".join(REQUIRED_COLUMNS)]
    for s in summaries:
        alloc = "-" if s.allocated_bytes is None else f"{s.allocated_bytes} B"
        lines.append(
            ";".join(
                [
                    s.benchmark_name,
                    format_duration(s.mean),
                    format_duration(s.stddev),
                    str(s.n),
                    format_duration(s.q1),
                    format_duration(s.q3),
                    alloc,
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
