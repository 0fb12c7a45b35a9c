import pytest

from perfpatch.metrics.report import Judgment, evaluate, read_judgments
from perfpatch.metrics.retrieval import closest_match, cosine, similarity, topk_accuracy
from perfpatch.suggest.engine import Suggestion

TRUTH = "public bool IsEmpty()\n{\n    return !_words.Any();\n}"
CLOSE = "public bool IsEmpty()\n{\n    return !_items.Any();\n}"
FAR = "public void Log(string m)\n{\n    Console.WriteLine(m);\n}"


def test_similarity_bounds_and_identity():
    assert similarity(TRUTH, TRUTH) == pytest.approx(1.0)
    assert 0.0 <= similarity(TRUTH, FAR) < similarity(TRUTH, CLOSE) < 1.0


def test_cosine_empty():
    from collections import Counter

    assert cosine(Counter(), Counter()) == 1.0
    assert cosine(Counter(a=1), Counter()) == 0.0


def test_closest_match_reports_likelihood_rank():
    sugg = [Suggestion(FAR, -0.1, "b", 1), Suggestion(CLOSE, -0.2, "b", 2), Suggestion(TRUTH, -0.3, "b", 3)]
    cm = closest_match(sugg, TRUTH)
    assert cm.rank == 3 and cm.similarity == pytest.approx(1.0)
    assert closest_match([], TRUTH) is None


def test_topk_accuracy_counts():
    judged = [(True, 1), (True, 5), (False, 1), (True, 50)]
    assert topk_accuracy(judged, (1, 10, 100)) == {1: 25.0, 10: 50.0, 100: 75.0}
    assert topk_accuracy([], (1,)) == {1: 0.0}


def _s(text, rank, ex):
    return Suggestion(text, -rank / 10, "b", rank, example_id=ex)


def test_evaluate_mixed_corpus():
    truth = {"e1": TRUTH, "e2": TRUTH, "e3": TRUTH}
    sugg = [_s(TRUTH, 1, "e1"), _s(FAR, 1, "e2"), _s(CLOSE, 2, "e2")]
    rep = evaluate(sugg, truth, ks=(1, 10))
    assert rep.verbatim_pct == pytest.approx(100 / 3)
    assert rep.abstracted_pct == pytest.approx(100 / 3)  # _items is a field, not a variable
    assert rep.per_example[2].n_suggestions == 0
    assert rep.per_example[0].codebleu == pytest.approx(1.0)
    assert rep.topk_accuracy[1] == pytest.approx(100 / 3)


def test_evaluate_with_judgments(tmp_path):
    p = tmp_path / "j.csv"
    p.write_text("example_id,accepted,rank\ne1,yes,3\ne2,no,\n", encoding="utf-8")
    judged = read_judgments(p)
    assert judged["e1"] == Judgment(True, 3)
    rep = evaluate([_s(FAR, 1, "e1"), _s(FAR, 1, "e2")], {"e1": TRUTH, "e2": TRUTH}, judged, ks=(1, 5))
    assert rep.topk_accuracy == {1: 0.0, 5: 50.0}
    assert rep.judgments_source == "file"


def test_read_judgments_rejects_missing_columns(tmp_path):
    p = tmp_path / "j.csv"
    p.write_text("id,ok\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_judgments(p)
