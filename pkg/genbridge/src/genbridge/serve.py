"""Serving a checkpoint over the generation contract.

Request: one JSON line/body ``{"id", "input"}``.  Response: ``{"id", "text"}``
with a single-line text field.  Malformed requests get a structured error
response and the server keeps running.  Decoding is always greedy, so
identical requests yield identical responses.
"""

from __future__ import annotations

import json
import logging
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Union

import torch
from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

log = logging.getLogger(__name__)


class Generator:
    """Greedy single-request generation around a saved checkpoint."""

    def __init__(self, checkpoint: Union[str, Path], max_new_tokens: int = 256):
        self.tokenizer = AutoTokenizer.from_pretrained(str(checkpoint))
        self.model = AutoModelForSeq2SeqLM.from_pretrained(str(checkpoint))
        self.model.eval()
        self.max_new_tokens = max_new_tokens

    def generate(self, text: str) -> str:
        encoded = self.tokenizer(text, return_tensors="pt", truncation=True, max_length=1024)
        with torch.no_grad():
            output = self.model.generate(
                input_ids=encoded["input_ids"],
                attention_mask=encoded["attention_mask"],
                max_new_tokens=self.max_new_tokens,
                do_sample=False,
                num_beams=1,
            )
        decoded = self.tokenizer.decode(output[0], skip_special_tokens=True)
        return " ".join(decoded.split())  # contract: one line, never multi-line

    def answer(self, raw_request: Union[str, bytes]) -> dict:
        """One contract exchange: returns the response payload, never raises."""
        try:
            payload = json.loads(raw_request)
        except json.JSONDecodeError as err:
            return {"error": f"request is not JSON: {err}"}
        if not isinstance(payload, dict) or not isinstance(payload.get("input"), str):
            return {"error": "request must be an object with an input string", "id": _maybe_id(payload)}
        request_id = payload.get("id")
        try:
            return {"id": request_id, "text": self.generate(payload["input"])}
        except Exception as err:  # the server must survive any single request
            log.exception("generation failed for id %r", request_id)
            return {"id": request_id, "error": f"generation failed: {err}"}


def _maybe_id(payload):
    return payload.get("id") if isinstance(payload, dict) else None


def serve_pipe(generator: Generator, stdin=None, stdout=None) -> None:
    """Speak the contract on stdin/stdout, one JSON line each way."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        response = generator.answer(line)
        stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
        stdout.flush()


def make_http_server(generator: Generator, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """An HTTP server answering ``POST /generate``; start it with
    ``serve_forever`` (callers own the thread)."""

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            if self.path != "/generate":
                self._reply(404, {"error": f"unknown path {self.path}"})
                return
            length = int(self.headers.get("Content-Length", "0"))
            response = generator.answer(self.rfile.read(length))
            status = 200 if "error" not in response else 400
            self._reply(status, response)

        def _reply(self, status: int, payload: dict):
            body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            log.debug("http: %s", args)

    return ThreadingHTTPServer((host, port), Handler)


def serve_http(generator: Generator, host: str, port: int) -> None:
    server = make_http_server(generator, host, port)
    log.info("serving on http://%s:%d/generate", *server.server_address)
    try:
        server.serve_forever()
    finally:
        server.server_close()
