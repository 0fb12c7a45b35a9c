import subprocess

import pytest

from perfpatch.errors import BranchNotFound, RepositoryUnreadable
from perfpatch.fixtures.minirepo import PERF_MESSAGE, SOURCE_PATH
from perfpatch.miner import (
    classify_perf_commit,
    crawl_history,
    mine_single_file_perf_commits,
    read_commits,
    write_jsonl,
)


@pytest.mark.parametrize("msg,want", [
    ("Improve performance of X", True),
    ("reduce ALLOCATIONS in loop", True),
    ("Optimize lookup", True),
    ("Fix typo", False),
    ("", False),
])
def test_classify(msg, want):
    assert classify_perf_commit(msg) is want


def test_crawl_history_newest_first(minirepo):
    recs = list(crawl_history(minirepo))
    assert len(recs) == 4
    assert [r.is_perf for r in recs] == [False, True, False, False]
    assert recs[0].file_changes == ()  # README only
    assert recs[-1].parent_id == ""
    head = subprocess.run(["git", "rev-parse", "HEAD"], cwd=minirepo, capture_output=True, text=True).stdout.strip()
    assert recs[0].commit_id == head
    assert {r.repo_id for r in recs} == {minirepo.name}


def test_single_file_perf_commit(minirepo):
    (rec,) = mine_single_file_perf_commits(minirepo)
    assert rec.message == PERF_MESSAGE
    (fc,) = rec.file_changes
    assert fc.path == SOURCE_PATH
    assert "_words.Count() == 0" in fc.before_text and "!_words.Any()" in fc.after_text


def test_max_commits_and_keywords(minirepo):
    assert len(list(crawl_history(minirepo, max_commits=2))) == 2
    recs = list(crawl_history(minirepo, keywords=("document",)))
    assert [r.is_perf for r in recs] == [True, False, False, False]


def test_jsonl_roundtrip(minirepo, tmp_path):
    recs = list(crawl_history(minirepo, repo_id="mini"))
    p = tmp_path / "c.jsonl"
    assert write_jsonl(recs, p) == 4
    assert read_commits(p) == recs


def test_errors(minirepo, tmp_path):
    with pytest.raises(BranchNotFound):
        list(crawl_history(minirepo, "nope"))
    with pytest.raises(RepositoryUnreadable):
        list(crawl_history(tmp_path))
