"""Human-readable and JSON reports over a pipeline work directory."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .validator import CATEGORY_ORDER, FUNNEL_ORDER, ValidationVerdict, read_verdicts, summarize

VERDICTS_FILE = "verdicts.jsonl"
EVALUATION_FILE = "evaluation.json"
BENCH_FILE = "bench.jsonl"

_STAGE_LABELS = {
    "SyntaxError": "Syntax error",
    "CompilationError": "Compilation error",
    "FailedUnitTests": "Failed unit tests",
    "PassedUnitTests": "Passed unit tests",
}
_CATEGORY_LABELS = {
    "UndefinedIdentifier": "Undefined identifier",
    "IncorrectArguments": "Incorrect arguments",
    "IncorrectUsing": "Incorrect using",
    "TypeMismatch": "Type mismatch",
    "Other": "Other",
}


def partition_percentages(counts: Sequence[int], decimals: int = 1) -> list[float]:
    """Percentages of ``counts`` rounded so they sum to exactly 100.

    Largest-remainder rounding; an all-zero batch gives all zeros.
    """
    total = sum(counts)
    if total == 0:
        return [0.0] * len(counts)
    scale = 10 ** decimals
    exact = [c * 100 * scale / total for c in counts]
    floors = [math.floor(x) for x in exact]
    short = 100 * scale - sum(floors)
    order = sorted(range(len(counts)), key=lambda i: (-(exact[i] - floors[i]), i))
    for i in order[:short]:
        floors[i] += 1
    return [f / scale for f in floors]


@dataclass
class Artifacts:
    verdicts: list[ValidationVerdict] = field(default_factory=list)
    evaluation: dict | None = None
    bench: list[dict] = field(default_factory=list)


def load_artifacts(directory: str | Path) -> Artifacts:
    """Read whatever report inputs exist in ``directory``."""
    d = Path(directory)
    art = Artifacts()
    if (d / VERDICTS_FILE).exists():
        art.verdicts = read_verdicts(d / VERDICTS_FILE)
    if (d / EVALUATION_FILE).exists():
        art.evaluation = json.loads((d / EVALUATION_FILE).read_text(encoding="utf-8"))
    if (d / BENCH_FILE).exists():
        with open(d / BENCH_FILE, encoding="utf-8") as fh:
            art.bench = [json.loads(line) for line in fh if line.strip()]
    return art


def report_data(art: Artifacts) -> dict:
    s = summarize(art.verdicts)
    stage_counts = [s.stage_counts[st.value] for st in FUNNEL_ORDER]
    stage_pct = partition_percentages(stage_counts)
    n_compile = s.stage_counts["CompilationError"]
    cat_counts = [s.category_counts[c.value] for c in CATEGORY_ORDER]
    cat_pct = partition_percentages(cat_counts)
    improvements = []
    for row in art.bench:
        for b in row.get("benchmarks", []):
            if b.get("duration_improved") or b.get("memory_improved"):
                improvements.append({
                    "suggestion_id": row["suggestion_id"],
                    "focal_signature": row.get("focal_signature", ""),
                    "benchmark": b["benchmark_name"],
                    "duration_change_pct": b.get("duration_change_pct"),
                    "memory_change_pct": b.get("memory_change_pct"),
                    "overall_improved": row.get("improved", False),
                })
    return {
        "funnel": {
            "rows": [
                {"stage": st.value, "count": c, "percent": p}
                for st, c, p in zip(FUNNEL_ORDER, stage_counts, stage_pct)
            ],
            "total": s.total,
        },
        "compile_errors": {
            "rows": [
                {"category": cat.value, "count": c, "percent": p}
                for cat, c, p in zip(CATEGORY_ORDER, cat_counts, cat_pct)
            ],
            "total": n_compile,
            "error_codes": s.error_codes,
        },
        "metrics": _metric_summary(art.evaluation),
        "improvements": {
            "rows": improvements,
            "improved_suggestions": sum(1 for r in art.bench if r.get("improved")),
            "benchmarked_suggestions": len(art.bench),
        },
    }


def _metric_summary(ev: dict | None) -> dict | None:
    if ev is None:
        return None
    return {
        "n_examples": ev.get("n_examples", 0),
        "verbatim_pct": ev.get("verbatim_pct", 0.0),
        "abstracted_pct": ev.get("abstracted_pct", 0.0),
        "codebleu_mean": ev.get("codebleu_mean", 0.0),
        "topk_accuracy": ev.get("topk_accuracy", {}),
    }


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]

    def line(cells):
        return "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))

    return [line(headers), "  ".join("-" * w for w in widths), *(line(r) for r in rows)]


def _pct(v) -> str:
    return "-" if v is None else f"{v:.1f}%"


def render_text(data: dict) -> str:
    out = ["Unit test funnel", ""]
    f = data["funnel"]
    rows = [[_STAGE_LABELS[r["stage"]], str(r["count"]), _pct(r["percent"])] for r in f["rows"]]
    rows.append(["Total", str(f["total"]), _pct(100.0 if f["total"] else 0.0)])
    out += _table(["Stage", "Count", "Percent"], rows)

    out += ["", "Compilation errors by category", ""]
    c = data["compile_errors"]
    rows = [[_CATEGORY_LABELS[r["category"]], str(r["count"]), _pct(r["percent"])] for r in c["rows"]]
    rows.append(["Total", str(c["total"]), _pct(100.0 if c["total"] else 0.0)])
    out += _table(["Category", "Count", "Percent"], rows)
    if c["error_codes"]:
        out.append("")
        out.append("First error codes: " + ", ".join(f"{k} x{v}" for k, v in c["error_codes"].items()))

    m = data["metrics"]
    out += ["", "Suggestion metrics", ""]
    if m is None:
        out.append("(no evaluation artifact)")
    else:
        rows = [
            ["Examples", str(m["n_examples"])],
            ["Verbatim match", _pct(m["verbatim_pct"])],
            ["Abstracted match", _pct(m["abstracted_pct"])],
            ["CodeBLEU (rank 1, mean)", f"{m['codebleu_mean']:.4f}"],
        ]
        rows += [[f"Top-{k} accuracy", _pct(v)] for k, v in m["topk_accuracy"].items()]
        out += _table(["Metric", "Value"], rows)

    imp = data["improvements"]
    out += ["", "Benchmark improvements", ""]
    out.append(f"{imp['improved_suggestions']} of {imp['benchmarked_suggestions']} benchmarked suggestions improved overall")
    if imp["rows"]:
        out.append("")
        rows = [
            [r["focal_signature"] or r["suggestion_id"], r["benchmark"],
             _pct(r["duration_change_pct"]), _pct(r["memory_change_pct"]), "yes" if r["overall_improved"] else "no"]
            for r in imp["rows"]
        ]
        out += _table(["Method", "Benchmark", "Time saved", "Memory saved", "Overall"], rows)
    return "\n".join(out) + "\n"


def render_report(artifacts: Artifacts | str | Path, fmt: str = "text") -> str:
    """Render the funnel, error-category, metric and improvement tables."""
    art = artifacts if isinstance(artifacts, Artifacts) else load_artifacts(artifacts)
    data = report_data(art)
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    return render_text(data)
