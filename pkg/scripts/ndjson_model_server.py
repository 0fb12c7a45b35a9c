#!/usr/bin/env python3
"""Serve the rule backend over the remote backend's ND-JSON protocol.

Handy for trying ``--backend remote`` without a model:

    python scripts/ndjson_model_server.py --port 8765 &
    perfpatch suggest --backend remote --endpoint http://127.0.0.1:8765/ ...

Each hypothesis gets a made-up likelihood that falls with its position.
"""
import argparse
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from perfpatch.suggest.backends import RuleBackend

BACKEND = RuleBackend()


class Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        body = self.rfile.read(int(self.headers.get("Content-Length", 0)))
        try:
            req = json.loads(body.decode("utf-8").splitlines()[0])
            hyps = BACKEND.sample(req["input"], int(req.get("n", 1)), req.get("seed"))
        except (ValueError, KeyError, IndexError) as exc:
            self.send_error(400, str(exc))
            return
        doc = {"hypotheses": [{"text": t, "avg_loglik": -0.05 * (i + 1)} for i, (t, _) in enumerate(hyps)]}
        payload = (json.dumps(doc) + "\n").encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8765)
    a = ap.parse_args()
    ThreadingHTTPServer((a.host, a.port), Handler).serve_forever()
