import json

from hypothesis import given
from hypothesis import strategies as st

from perfpatch.report import Artifacts, partition_percentages, render_report
from perfpatch.validator import ValidationVerdict


@given(st.lists(st.integers(0, 10_000), min_size=1, max_size=8))
def test_percentages_partition(counts):
    pct = partition_percentages(counts)
    if sum(counts) == 0:
        assert pct == [0.0] * len(counts)
    else:
        assert round(sum(pct), 6) == 100.0
        for c, p in zip(counts, pct):
            assert abs(p - 100 * c / sum(counts)) <= 0.1 + 1e-9


def test_thirds():
    assert partition_percentages([1, 1, 1]) == [33.4, 33.3, 33.3]


def _verdicts():
    v = [ValidationVerdict(f"s{i}", "PassedUnitTests") for i in range(3)]
    v += [ValidationVerdict("c1", "CompilationError", "UndefinedIdentifier", "CS1061"),
          ValidationVerdict("c2", "CompilationError", "TypeMismatch", "CS0266"),
          ValidationVerdict("x", "SyntaxError"), ValidationVerdict("f", "FailedUnitTests")]
    return v


def test_text_tables_have_funnel_layout():
    text = render_report(Artifacts(verdicts=_verdicts()))
    funnel = text.split("Compilation errors by category")[0]
    for label in ("Syntax error", "Compilation error", "Failed unit tests", "Passed unit tests", "Total"):
        assert label in funnel
    cats = text.split("Compilation errors by category")[1].split("Suggestion metrics")[0]
    for label in ("Undefined identifier", "Incorrect arguments", "Incorrect using", "Type mismatch", "Other", "Total"):
        assert label in cats
    assert "CS0266 x1" in text


def test_json_report():
    bench = [{"suggestion_id": "s0", "focal_signature": "bool F()", "improved": True,
              "benchmarks": [{"benchmark_name": "F", "duration_improved": True, "memory_improved": False,
                              "duration_change_pct": 12.5, "memory_change_pct": 0.0}]}]
    ev = {"n_examples": 1, "verbatim_pct": 0.0, "abstracted_pct": 100.0, "codebleu_mean": 0.8,
          "topk_accuracy": {"1": 100.0}}
    data = json.loads(render_report(Artifacts(_verdicts(), ev, bench), "json"))
    rows = data["funnel"]["rows"]
    assert [r["stage"] for r in rows] == ["SyntaxError", "CompilationError", "FailedUnitTests", "PassedUnitTests"]
    assert sum(r["count"] for r in rows) == data["funnel"]["total"] == 7
    assert round(sum(r["percent"] for r in rows), 6) == 100.0
    assert data["compile_errors"]["total"] == 2
    assert data["improvements"]["rows"][0]["duration_change_pct"] == 12.5
    assert data["metrics"]["abstracted_pct"] == 100.0


def test_empty_batch(tmp_path):
    data = json.loads(render_report(tmp_path, "json"))
    assert data["funnel"]["total"] == 0
    assert all(r["percent"] == 0.0 for r in data["funnel"]["rows"])
    assert "(no evaluation artifact)" in render_report(tmp_path, "text")
