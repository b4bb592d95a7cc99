from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from dreamcode.backends import (
    AlwaysEmptyBackend,
    BackendUnavailable,
    EchoGoldBackend,
    FormatCorruptorBackend,
    GenerationTimeout,
    HttpBackend,
    PipeBackend,
    TransportError,
    make_backend,
)
from dreamcode.codes import AnnotationSet
from dreamcode.serialization import NullPrediction, Strategy, decode, encode
from conftest import random_annotation

import random


def test_echo_gold_replays_targets():
    backend = EchoGoldBackend({"a": "alpha text"})
    assert backend.generate("a", "whatever narrative") == "alpha text"
    with pytest.raises(TransportError):
        backend.generate("missing", "x")


def test_always_empty_decodes_to_empty_annotation():
    backend = AlwaysEmptyBackend()
    text = backend.generate("any", "narrative")
    assert decode(text, Strategy.BASELINE) == AnnotationSet()


def test_format_corruptor_output_fails_strict_decoding():
    rng = random.Random(17)
    targets = {}
    for i in range(30):
        annotation = random_annotation(rng)
        targets[f"id-{i}"] = encode(annotation, Strategy.BASELINE)
    backend = FormatCorruptorBackend(targets)
    for request_id, target in targets.items():
        corrupted = backend.generate(request_id, "text")
        assert corrupted != target
        outcome = decode(corrupted, Strategy.BASELINE)
        assert isinstance(outcome, NullPrediction)
        assert outcome.reason


def test_format_corruptor_is_deterministic():
    targets = {"x": "[CHARACTER] status is individual alive, gender is female, "
                    "identity is known, age is adult [SYMBOL] 1FKA There is no emotion."}
    a = FormatCorruptorBackend(targets).generate("x", "t")
    b = FormatCorruptorBackend(targets).generate("x", "t")
    assert a == b


PIPE_ECHO_SCRIPT = """\
import json
import sys

for line in sys.stdin:
    request = json.loads(line)
    print(json.dumps({"id": request["id"], "text": request["input"].upper()}), flush=True)
"""

PIPE_SLEEPY_SCRIPT = """\
import json
import sys
import time

for line in sys.stdin:
    request = json.loads(line)
    time.sleep(5)
    print(json.dumps({"id": request["id"], "text": "late"}), flush=True)
"""

PIPE_WRONG_ID_SCRIPT = """\
import json
import sys

for line in sys.stdin:
    print(json.dumps({"id": "someone-else", "text": "hello"}), flush=True)
"""


def _pipe_backend(tmp_path, script, timeout=10.0):
    path = tmp_path / "backend_script.py"
    path.write_text(script, encoding="utf-8")
    return PipeBackend(f"python3 {path}", timeout=timeout)


def test_pipe_backend_round_trip(tmp_path):
    with _pipe_backend(tmp_path, PIPE_ECHO_SCRIPT) as backend:
        assert backend.generate("n1", "hello there") == "HELLO THERE"
        assert backend.generate("n2", "second") == "SECOND"


def test_pipe_backend_timeout(tmp_path):
    with _pipe_backend(tmp_path, PIPE_SLEEPY_SCRIPT, timeout=0.3) as backend:
        with pytest.raises(GenerationTimeout):
            backend.generate("n1", "hello")


def test_pipe_backend_id_mismatch(tmp_path):
    with _pipe_backend(tmp_path, PIPE_WRONG_ID_SCRIPT) as backend:
        with pytest.raises(TransportError):
            backend.generate("n1", "hello")


def test_pipe_backend_missing_command():
    with pytest.raises(BackendUnavailable):
        PipeBackend("definitely-not-a-real-binary-anywhere")


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        request = json.loads(self.rfile.read(length))
        if self.path != "/generate":
            self.send_error(404)
            return
        payload = {"id": request["id"], "text": f"echo: {request['input']}"}
        body = json.dumps(payload).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def test_http_backend_round_trip(http_server):
    with HttpBackend(http_server) as backend:
        assert backend.generate("n1", "dream text") == "echo: dream text"


def test_http_backend_unreachable():
    backend = HttpBackend("http://127.0.0.1:1", timeout=0.5)
    with pytest.raises(BackendUnavailable):
        backend.generate("n1", "x")


def test_make_backend_parsing(http_server):
    assert isinstance(make_backend("mock:always-empty"), AlwaysEmptyBackend)
    assert isinstance(make_backend("mock:echo-gold", gold_targets={}), EchoGoldBackend)
    assert isinstance(
        make_backend("mock:format-corruptor", gold_targets={}), FormatCorruptorBackend
    )
    assert isinstance(make_backend(f"http:{http_server}"), HttpBackend)
    assert isinstance(make_backend(http_server), HttpBackend)  # bare URL
    with pytest.raises(ValueError):
        make_backend("mock:nope")
    with pytest.raises(ValueError):
        make_backend("telepathy:foo")
    with pytest.raises(ValueError):
        make_backend("mock:echo-gold")  # needs gold targets
