"""HTTP client tests against small in-process mock servers, plus the wire
protocol conformance fixture run against a compliant mock (the same fixture
any real generation sidecar must pass)."""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from textforge.corpus import Document, from_documents
from textforge.generation import (
    GenerationClient,
    GenerationRequest,
    SamplerConfig,
    SchemaError,
    StatusError,
    TransportError,
    external_generate,
    generate_corpus,
)
from textforge.protocol import assert_conformance, run_conformance_suite


class _MockHandler(BaseHTTPRequestHandler):
    """Protocol-compliant mock: deterministic echo-style generator."""

    classes = ["pos", "neg"]

    def log_message(self, *args):
        pass

    def _send(self, code, payload):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/health":
            self._send(200, {"status": "ok", "classes": self.classes})
        else:
            self._send(404, {"error": "not found"})

    def do_POST(self):
        if self.path != "/generate":
            self._send(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length", 0))
        req = json.loads(self.rfile.read(length))
        if req.get("label") not in self.classes:
            self._send(400, {"error": f"unknown class {req.get('label')!r}"})
            return
        rng = np.random.default_rng(req["seed"])
        n = int(rng.integers(1, 6))
        words = [req["prompt"]] + [f"tok{int(rng.integers(100))}" for _ in range(n)]
        self._send(200, {"text": " ".join(words), "backend_id": "mock-echo"})


def _serve(handler_cls):
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler_cls)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, f"http://127.0.0.1:{server.server_address[1]}"


@pytest.fixture(scope="module")
def mock_server():
    server, url = _serve(_MockHandler)
    yield url
    server.shutdown()


def _request(prompt="hello", seed=5, label="pos"):
    return GenerationRequest(label, prompt, SamplerConfig(seed=seed, max_tokens=16))


def test_echo_round_trip(mock_server):
    result = external_generate(mock_server, _request())
    assert result.text.startswith("hello")
    assert result.backend_id == "mock-echo"
    assert result.request.label == "pos"


def test_seed_determinism_over_the_wire(mock_server):
    a = external_generate(mock_server, _request(seed=9))
    b = external_generate(mock_server, _request(seed=9))
    assert a.text == b.text


def test_status_error_carries_code(mock_server):
    with pytest.raises(StatusError) as exc:
        external_generate(mock_server, _request(label="__nope__"))
    assert exc.value.status_code == 400


def test_malformed_json_is_a_schema_error():
    class BrokenHandler(_MockHandler):
        def do_POST(self):
            body = b"this is { not json"
            self.send_response(200)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    server, url = _serve(BrokenHandler)
    try:
        with pytest.raises(SchemaError):
            external_generate(url, _request())
    finally:
        server.shutdown()


def test_missing_fields_is_a_schema_error():
    class MissingFieldHandler(_MockHandler):
        def do_POST(self):
            self._send(200, {"text": 42, "backend_id": "x"})

    server, url = _serve(MissingFieldHandler)
    try:
        with pytest.raises(SchemaError, match="text"):
            external_generate(url, _request())
    finally:
        server.shutdown()


def test_timeout_is_a_transport_error():
    class SlowHandler(_MockHandler):
        def do_POST(self):
            time.sleep(0.5)
            try:
                self._send(200, {"text": "late", "backend_id": "slow"})
            except (BrokenPipeError, ConnectionResetError):
                pass  # client gave up already

    server, url = _serve(SlowHandler)
    try:
        with pytest.raises(TransportError, match="timeout"):
            external_generate(url, _request(), timeout=0.1)
    finally:
        server.shutdown()


def test_unreachable_endpoint_is_a_transport_error():
    with pytest.raises(TransportError):
        external_generate("http://127.0.0.1:1", _request(), timeout=0.5)


def test_generate_corpus_through_client(mock_server):
    client = GenerationClient(mock_server, concurrency=3)
    prompt_src = from_documents([Document(id="p", text="alpha beta gamma", label="pos")])
    out = generate_corpus(client, "pos", 6, SamplerConfig(seed=1, max_tokens=16), prompt_src)
    assert len(out) == 6
    assert all(d.gen_meta.backend_id == "mock-echo" for d in out)
    # concurrency must not change the result
    serial = GenerationClient(mock_server, concurrency=1)
    out2 = generate_corpus(serial, "pos", 6, SamplerConfig(seed=1, max_tokens=16), prompt_src)
    assert out == out2


def test_client_health(mock_server):
    client = GenerationClient(mock_server)
    payload = client.health()
    assert payload["status"] == "ok"
    assert payload["classes"] == ["pos", "neg"]


def test_conformance_suite_against_compliant_mock(mock_server):
    checks = run_conformance_suite(mock_server)
    assert [c.name for c in checks] == [
        "health-schema", "generate-schema", "unknown-class-400", "seed-determinism"]
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
    assert_conformance(mock_server)


def test_conformance_suite_flags_noncompliant_server():
    class NonDeterministic(_MockHandler):
        counter = 0

        def do_POST(self):
            NonDeterministic.counter += 1
            self._send(200, {"text": f"v{NonDeterministic.counter}", "backend_id": "bad"})

    server, url = _serve(NonDeterministic)
    try:
        checks = {c.name: c.passed for c in run_conformance_suite(url)}
        assert checks["seed-determinism"] is False
        assert checks["unknown-class-400"] is False
        with pytest.raises(AssertionError, match="conformance"):
            assert_conformance(url)
    finally:
        server.shutdown()
