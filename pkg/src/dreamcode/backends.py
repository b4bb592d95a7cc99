"""Generation backends behind a single wire contract.

Request: one JSON line ``{"id": str, "input": str}``.  Response: one JSON
line ``{"id": str, "text": str}``.  One request is in flight per connection;
callers wanting parallelism open multiple connections.  Transports: a child
process speaking the contract on stdin/stdout ("pipe:CMD"), a local HTTP
endpoint accepting ``POST /generate`` ("http:URL"), or in-process mocks
("mock:NAME") that keep the whole pipeline runnable without a model.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
import zlib
from typing import Mapping, Optional

import requests


class BackendUnavailable(RuntimeError):
    """The backend cannot be started or reached at all."""


class TransportError(RuntimeError):
    """A single exchange violated the wire contract (bad JSON, id mismatch,
    non-200 status); the run records a null prediction and continues."""


class GenerationTimeout(RuntimeError):
    """The backend did not answer one request in time."""


class Backend:
    """One generation connection; sequential request/response."""

    def generate(self, request_id: str, text: str) -> str:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


class EchoGoldBackend(Backend):
    """Returns the prepared gold target text for each narrative id."""

    name = "echo-gold"

    def __init__(self, targets: Mapping[str, str]):
        self.targets = dict(targets)

    def generate(self, request_id: str, text: str) -> str:
        if request_id not in self.targets:
            raise TransportError(f"no gold target prepared for id {request_id!r}")
        return self.targets[request_id]


class AlwaysEmptyBackend(Backend):
    """Claims every narrative has no characters and no emotions."""

    name = "always-empty"

    def generate(self, request_id: str, text: str) -> str:
        return "There is no character. There is no emotion."


class FormatCorruptorBackend(Backend):
    """Returns the gold target text with a deterministic, per-id format
    corruption, exercising the strict decoder's null path."""

    name = "format-corruptor"

    def __init__(self, targets: Mapping[str, str]):
        self.targets = dict(targets)

    def generate(self, request_id: str, text: str) -> str:
        if request_id not in self.targets:
            raise TransportError(f"no gold target prepared for id {request_id!r}")
        target = self.targets[request_id]
        mutation = zlib.crc32(request_id.encode("utf-8")) % 3
        if mutation == 0:
            for label in ("known", "stranger", "prominent", "occupational", "ethnic"):
                if label in target:
                    return target.replace(label, "student", 1)
            return "identity is student"
        if mutation == 1:
            return target[: max(1, len(target) - 9)]
        return (
            target.replace("[CHARACTER]", "[CHAR]")
            .replace("[EMOTION]", "[EMO]")
            .replace("There is no", "There was no")
        )


class PipeBackend(Backend):
    """Child process speaking the contract on stdin/stdout, one line each way."""

    def __init__(self, command: str, timeout: Optional[float] = 60.0):
        self.timeout = timeout
        try:
            self.process = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as err:
            raise BackendUnavailable(f"cannot start backend process: {err}") from err
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        assert self.process.stdout is not None
        for line in self.process.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def generate(self, request_id: str, text: str) -> str:
        if self.process.poll() is not None:
            raise BackendUnavailable("backend process has exited")
        assert self.process.stdin is not None
        try:
            self.process.stdin.write(json.dumps({"id": request_id, "input": text}) + "\n")
            self.process.stdin.flush()
        except (BrokenPipeError, OSError) as err:
            raise BackendUnavailable(f"backend pipe closed: {err}") from err
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise GenerationTimeout(f"no response within {self.timeout}s for id {request_id!r}")
        if line is None:
            raise BackendUnavailable("backend process closed its output")
        return _validate_response(line, request_id)

    def close(self):
        if self.process.poll() is None:
            if self.process.stdin is not None:
                self.process.stdin.close()
            try:
                self.process.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.process.kill()


class HttpBackend(Backend):
    """POSTs each request to a ``/generate`` endpoint."""

    def __init__(self, url: str, timeout: Optional[float] = 60.0):
        self.url = url if url.rstrip("/").endswith("/generate") else url.rstrip("/") + "/generate"
        self.timeout = timeout
        self.session = requests.Session()

    def generate(self, request_id: str, text: str) -> str:
        try:
            response = self.session.post(
                self.url, json={"id": request_id, "input": text}, timeout=self.timeout
            )
        except requests.Timeout as err:
            raise GenerationTimeout(str(err)) from err
        except requests.ConnectionError as err:
            raise BackendUnavailable(f"cannot reach {self.url}: {err}") from err
        if response.status_code != 200:
            raise TransportError(f"backend answered HTTP {response.status_code}")
        return _validate_response(response.text, request_id)

    def close(self):
        self.session.close()


def _validate_response(payload_text: str, request_id: str) -> str:
    try:
        payload = json.loads(payload_text)
    except json.JSONDecodeError as err:
        raise TransportError(f"response is not JSON: {err}") from err
    if not isinstance(payload, dict) or "text" not in payload:
        raise TransportError(f"response lacks a text field: {payload_text[:200]!r}")
    if payload.get("id") != request_id:
        raise TransportError(
            f"response id {payload.get('id')!r} does not match request id {request_id!r}"
        )
    if not isinstance(payload["text"], str):
        raise TransportError("response text field must be a string")
    return payload["text"]


MOCK_NAMES = ("echo-gold", "always-empty", "format-corruptor")


def make_backend(
    spec: str,
    gold_targets: Optional[Mapping[str, str]] = None,
    timeout: Optional[float] = 60.0,
) -> Backend:
    """Build a backend from its command-line form: ``mock:NAME``, ``pipe:CMD``
    or ``http:URL``.  Gold-replaying mocks need ``gold_targets``."""
    kind, _, rest = spec.partition(":")
    if kind == "mock":
        if rest == "always-empty":
            return AlwaysEmptyBackend()
        if rest in ("echo-gold", "format-corruptor"):
            if gold_targets is None:
                raise ValueError(f"mock:{rest} needs gold targets")
            return EchoGoldBackend(gold_targets) if rest == "echo-gold" else FormatCorruptorBackend(gold_targets)
        raise ValueError(f"unknown mock backend {rest!r}; expected one of {MOCK_NAMES}")
    if kind == "pipe":
        if not rest:
            raise ValueError("pipe backend needs a command")
        return PipeBackend(rest, timeout)
    if kind in ("http", "https"):
        # Accept both "http:URL" and a bare "http://host:port" URL.
        url = spec if rest.startswith("//") else rest
        if not url:
            raise ValueError("http backend needs a URL")
        return HttpBackend(url, timeout)
    raise ValueError(f"unknown backend spec {spec!r}; expected mock:, pipe: or http:")
