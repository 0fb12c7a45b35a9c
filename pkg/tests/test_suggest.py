import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from perfpatch.errors import BackendFailure, BackendTimeout, MalformedResponse
from perfpatch.example_builder import build_wild_input
from perfpatch.fixtures.minirepo import SOURCE_PATH
from perfpatch.suggest.backends import EndpointConfig, RemoteBackend, RuleBackend, make_backend
from perfpatch.suggest.engine import (
    Suggestion,
    rank_hypotheses,
    read_suggestions,
    sample_and_rank,
    suggest_for_examples,
    write_suggestions,
)

EXPECTED_RULES = {
    "bool IsEmpty()": [],
    "bool HasNoLongWords(int)": ["R1", "R2"],
    "string FindLong(int)": ["R2"],
    "int CountUpper(string)": ["R3"],
    "int CountSeparators()": ["R4"],
    "string Join(string)": ["R5"],
    "string Longest()": [],
}


@pytest.fixture(scope="module")
def head_source(minirepo):
    return (minirepo / SOURCE_PATH).read_text(encoding="utf-8")


@pytest.mark.parametrize("sig", sorted(EXPECTED_RULES))
def test_rules_fire_on_planted_methods(head_source, sig):
    text, _ = build_wild_input(head_source, sig)
    assert RuleBackend().fired(text) == EXPECTED_RULES[sig]


def test_rule_rewrites(head_source):
    b = RuleBackend()
    text, _ = build_wild_input(head_source, "bool HasNoLongWords(int)")
    r1 = b.sample(text, 10)[0][0]
    assert "!_words.Where(w => w.Length >= minLength).Any()" in r1 or "!_words.Any(" in r1
    text, _ = build_wild_input(head_source, "string FindLong(int)")
    assert "_words.FirstOrDefault(w => w.Length >= minLength)" in b.sample(text, 10)[0][0]
    text, _ = build_wild_input(head_source, "string Join(string)")
    out = b.sample(text, 10)[0][0]
    assert out.startswith("using System.Text;") and "StringBuilder" in out


def test_rule_subset_and_unknown(head_source):
    text, _ = build_wild_input(head_source, "bool HasNoLongWords(int)")
    assert RuleBackend(rules=("R2",)).fired(text) == ["R2"]
    with pytest.raises(ValueError):
        RuleBackend(rules=("R9",))


def test_no_markers_gives_nothing():
    assert RuleBackend().sample("public int F() { return 1; }", 5) == []


def test_rank_merges_and_orders():
    ranked = rank_hypotheses([("b", -0.5), ("a", -0.1), ("b", -0.05), ("c", -0.1)], 2, "x")
    assert [(s.patch_text, s.rank) for s in ranked] == [("b", 1), ("a", 2)]
    assert ranked[0].avg_token_loglik == -0.05


def test_sample_and_rank_validates_counts():
    with pytest.raises(ValueError):
        sample_and_rank("x", 5, 10, RuleBackend())


class _Boom:
    backend_id = "boom"

    def sample(self, *a, **k):
        raise RuntimeError("down")


def test_backend_errors_are_wrapped():
    with pytest.raises(BackendFailure):
        sample_and_rank("x", 5, 1, _Boom())


def test_suggestions_roundtrip(tmp_path):
    s = [Suggestion("p", -1.0, "b", 1, "e", "void F()", "f.cs")]
    write_suggestions(s, tmp_path / "s.jsonl")
    assert read_suggestions(tmp_path / "s.jsonl") == s


class _Handler(BaseHTTPRequestHandler):
    mode = "ok"
    seen: list = []

    def do_POST(self):
        body = self.rfile.read(int(self.headers["Content-Length"]))
        req = json.loads(body.decode().splitlines()[0])
        type(self).seen.append(req)
        if self.mode == "slow":
            time.sleep(1.0)
        if self.mode == "bad":
            payload = b"not json\n"
        else:
            hyps = [{"text": f"h{i}", "avg_loglik": -i / 10} for i in range(req["n"] + 2)]
            payload = (json.dumps({"hypotheses": hyps}) + "\n").encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *a):
        pass


@pytest.fixture
def server():
    httpd = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    t = threading.Thread(target=httpd.serve_forever, daemon=True)
    t.start()
    _Handler.mode = "ok"
    _Handler.seen = []
    yield f"http://127.0.0.1:{httpd.server_address[1]}/generate"
    httpd.shutdown()


def test_remote_backend_protocol(server):
    b = make_backend("remote", server, timeout=5)
    out = b.sample("input text", 3, seed=7)
    assert out == [("h0", 0.0), ("h1", -0.1), ("h2", -0.2)]
    assert _Handler.seen == [{"input": "input text", "n": 3, "seed": 7}]


def test_remote_backend_malformed(server):
    _Handler.mode = "bad"
    with pytest.raises(MalformedResponse):
        RemoteBackend(EndpointConfig(server)).sample("x", 2)


def test_remote_backend_timeout(server):
    _Handler.mode = "slow"
    with pytest.raises(BackendTimeout):
        RemoteBackend(EndpointConfig(server, timeout=0.2)).sample("x", 2)


def test_remote_backend_unreachable():
    with pytest.raises(BackendFailure):
        RemoteBackend(EndpointConfig("http://127.0.0.1:9/none", timeout=1)).sample("x", 2)


def test_parallel_examples_keep_order(server):
    from perfpatch.example_builder import TransformationExample

    exs = [TransformationExample(f"e{i}", "r", "c", "f.cs", "void F()", f"in{i}", "", True) for i in range(6)]
    out = suggest_for_examples(exs, make_backend("remote", server, max_in_flight=3), 4, 2, seed=1, workers=3)
    assert [s.suggestion_id for s in out] == [f"e{i}#{r}" for i in range(6) for r in (1, 2)]
