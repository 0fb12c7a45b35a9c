"""Backends that produce hypotheses for an example input."""
from __future__ import annotations

import json
import logging
import socket
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass

from ..code_model.model import parse_parts
from ..errors import BackendFailure, BackendTimeout, MalformedResponse
from ..example_builder import BEGIN_MARKER, END_MARKER
from .rules import RULES, _Method, focal_context

log = logging.getLogger(__name__)


class RuleBackend:
    """Deterministic rewrites of the marked focal method.

    Each rule that fires yields one hypothesis with likelihood 0, in rule-id
    order. Hypotheses that would not parse or would change the focal
    signature are dropped.
    """

    backend_id = "rules"

    def __init__(self, rules: tuple[str, ...] | None = None, markers: tuple[str, str] = (BEGIN_MARKER, END_MARKER)):
        unknown = set(rules or ()) - set(RULES)
        if unknown:
            raise ValueError(f"unknown rules: {sorted(unknown)}")
        self.rules = tuple(sorted(rules)) if rules else tuple(sorted(RULES))
        self.markers = markers

    def sample(self, input_text: str, n: int, seed: int | None = None) -> list[tuple[str, float]]:
        ctx = focal_context(input_text, self.markers)
        if ctx is None:
            return []
        method = _Method(ctx.method_text)
        if method.node is None:
            return []
        original = parse_parts(ctx.method_text).methods[0].signature
        out = []
        for rule_id in self.rules:
            rewrite = RULES[rule_id](method, ctx)
            if rewrite is None:
                continue
            text = rewrite.render()
            parts = parse_parts(text)
            if not parts.ok or not parts.methods or parts.methods[0].signature != original:
                log.warning("rule %s produced an invalid rewrite; dropped", rule_id)
                continue
            out.append((text, 0.0))
        return out[:n]

    def fired(self, input_text: str) -> list[str]:
        """Ids of the rules that fire on ``input_text``."""
        ctx = focal_context(input_text, self.markers)
        if ctx is None:
            return []
        method = _Method(ctx.method_text)
        if method.node is None:
            return []
        return [r for r in self.rules if RULES[r](method, ctx) is not None]


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    timeout: float = 60.0
    max_in_flight: int = 4
    backend_id: str = "remote"


class RemoteBackend:
    """Client for a model server speaking newline-delimited JSON over HTTP.

    Request body: one line ``{"input": str, "n": int, "seed": int|null}``.
    Response body: one line ``{"hypotheses": [{"text": str, "avg_loglik": float}]}``.
    """

    def __init__(self, config: EndpointConfig):
        self.config = config
        self.backend_id = config.backend_id
        self._slots = threading.BoundedSemaphore(max(1, config.max_in_flight))

    def sample(self, input_text: str, n: int, seed: int | None = None) -> list[tuple[str, float]]:
        body = (json.dumps({"input": input_text, "n": n, "seed": seed}) + "\n").encode("utf-8")
        req = urllib.request.Request(
            self.config.url, data=body, method="POST", headers={"Content-Type": "application/x-ndjson"}
        )
        with self._slots:
            try:
                with urllib.request.urlopen(req, timeout=self.config.timeout) as resp:
                    raw = resp.read()
            except (socket.timeout, TimeoutError) as exc:
                raise BackendTimeout(self.backend_id, f"no response within {self.config.timeout}s") from exc
            except urllib.error.URLError as exc:
                if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                    raise BackendTimeout(self.backend_id, f"no response within {self.config.timeout}s") from exc
                raise BackendFailure(self.backend_id, f"request failed: {exc}") from exc
        return _parse_response(raw, n, self.backend_id)


def _parse_response(raw: bytes, n: int, backend_id: str) -> list[tuple[str, float]]:
    try:
        lines = [ln for ln in raw.decode("utf-8").splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty response")
        doc = json.loads(lines[0])
    except (UnicodeDecodeError, ValueError) as exc:
        raise MalformedResponse(backend_id, f"response is not JSON: {exc}") from exc
    hyps = doc.get("hypotheses") if isinstance(doc, dict) else None
    if not isinstance(hyps, list):
        raise MalformedResponse(backend_id, "response lacks a 'hypotheses' list")
    out = []
    for i, h in enumerate(hyps):
        if not isinstance(h, dict) or not isinstance(h.get("text"), str):
            raise MalformedResponse(backend_id, f"hypothesis {i} lacks a text field")
        ll = h.get("avg_loglik")
        if isinstance(ll, bool) or not isinstance(ll, (int, float)):
            raise MalformedResponse(backend_id, f"hypothesis {i} lacks a numeric avg_loglik")
        out.append((h["text"], float(ll)))
    if len(out) > n:
        log.warning("backend %s returned %d hypotheses for n=%d; truncating", backend_id, len(out), n)
    return out[:n]


def make_backend(kind: str, endpoint: str | None = None, timeout: float = 60.0, max_in_flight: int = 4):
    if kind == "rules":
        return RuleBackend()
    if kind == "remote":
        if not endpoint:
            raise ValueError("remote backend needs an endpoint URL")
        return RemoteBackend(EndpointConfig(endpoint, timeout, max_in_flight))
    raise ValueError(f"unknown backend {kind!r}")
