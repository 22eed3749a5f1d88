"""Generation over the wire: start a protocol-compliant toy server in a
thread, run the conformance fixture against it, then generate a corpus
through the HTTP client exactly as with the built-in backend."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from textforge import Document, GenerationClient, SamplerConfig, from_documents, generate_corpus
from textforge.protocol import run_conformance_suite


class ToyHandler(BaseHTTPRequestHandler):
    classes = ["pos", "neg"]

    def log_message(self, *args):
        pass

    def _send(self, code, payload):
        body = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        self._send(200, {"status": "ok", "classes": self.classes})

    def do_POST(self):
        req = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if req["label"] not in self.classes:
            self._send(400, {"error": f"unknown class {req['label']!r}"})
            return
        rng = np.random.default_rng(req["seed"])
        mood = ["great", "fine"] if req["label"] == "pos" else ["bad", "poor"]
        n = int(rng.integers(2, req["max_tokens"]))
        text = " ".join([req["prompt"]] + [mood[int(rng.integers(2))] for _ in range(n)])
        self._send(200, {"text": text, "backend_id": "toy-server"})


server = ThreadingHTTPServer(("127.0.0.1", 0), ToyHandler)
threading.Thread(target=server.serve_forever, daemon=True).start()
url = f"http://127.0.0.1:{server.server_address[1]}"
print(f"toy generation server listening on {url}")

for check in run_conformance_suite(url):
    print(f"  conformance {check.name}: {'ok' if check.passed else 'FAIL ' + check.detail}")

client = GenerationClient(url, concurrency=2)
prompts = from_documents([Document(id="p0", text="really great day", label="pos")])
corpus = generate_corpus(client, "pos", 4, SamplerConfig(seed=1, max_tokens=8), prompts)
for doc in corpus:
    print(f"  generated: {doc.text!r} (backend {doc.gen_meta.backend_id})")

server.shutdown()
