"""HTTP server for the generation wire protocol.

GET /health -> {"status": "ok", "classes": [...]}
POST /generate {"label", "prompt", "max_tokens", "temperature", "top_k",
                "top_p", "seed"} -> {"text", "backend_id"}

One model directory per class label; all models must load before the
server starts.  Request concurrency is bounded by a semaphore, and each
request draws from its own seeded generator, so responses are
deterministic per seed regardless of interleaving.  Model weights are
never exposed over the wire.
"""

import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .model import load_model_dir


@dataclass
class ServerConfig:
    model_dirs: dict               # class label -> model directory
    host: str = "127.0.0.1"
    port: int = 8901
    temperature: float = 0.7
    top_p: float = 0.9
    top_k: int = 40
    max_tokens: int = 120
    max_concurrent: int = 4

    def __post_init__(self):
        if not self.model_dirs:
            raise ValueError("at least one class model is required")
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")


def _load_models(config: ServerConfig) -> dict:
    models = {}
    for label, path in config.model_dirs.items():
        models[label] = load_model_dir(path)   # failure here aborts startup
    return models


class _Handler(BaseHTTPRequestHandler):
    server_version = "genserver/0.1"

    def log_message(self, *args):
        pass

    def _send(self, code: int, payload: dict):
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path != "/health":
            self._send(404, {"error": "unknown path"})
            return
        self._send(200, {"status": "ok", "classes": sorted(self.server.models)})

    def do_POST(self):
        if self.path != "/generate":
            self._send(404, {"error": "unknown path"})
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
            request = json.loads(self.rfile.read(length))
        except (ValueError, TypeError):
            self._send(400, {"error": "request body is not valid JSON"})
            return
        if not isinstance(request, dict):
            self._send(400, {"error": "request body must be a JSON object"})
            return

        label = request.get("label")
        if label not in self.server.models:
            self._send(400, {"error": f"unknown class {label!r}"})
            return
        prompt = request.get("prompt", "")
        if not isinstance(prompt, str):
            self._send(400, {"error": "field 'prompt' must be a string"})
            return
        cfg = self.server.config
        try:
            params = {
                "max_tokens": int(request.get("max_tokens", cfg.max_tokens)),
                "temperature": float(request.get("temperature", cfg.temperature)),
                "top_k": int(request.get("top_k", cfg.top_k)),
                "top_p": float(request.get("top_p", cfg.top_p)),
                "seed": int(request.get("seed", 0)),
            }
        except (TypeError, ValueError):
            self._send(400, {"error": "malformed sampling parameters"})
            return

        with self.server.slots:
            try:
                text = self.server.models[label].generate(prompt, **params)
            except ValueError as e:
                self._send(400, {"error": str(e)})
                return
        self._send(200, {"text": text, "backend_id": f"genserver-{label}"})


class GenerationServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, config: ServerConfig, models: dict):
        super().__init__((config.host, config.port), _Handler)
        self.config = config
        self.models = models
        self.slots = threading.Semaphore(config.max_concurrent)

    @property
    def url(self) -> str:
        return f"http://{self.server_address[0]}:{self.server_address[1]}"


def build_server(config: ServerConfig) -> GenerationServer:
    """Load every model (refusing to start on failure) and bind the port."""
    return GenerationServer(config, _load_models(config))


def serve(config: ServerConfig) -> None:
    """Run until interrupted."""
    server = build_server(config)
    print(f"genserver listening on {server.url} "
          f"(classes: {', '.join(sorted(server.models))})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


def discover_model_dirs(root) -> dict:
    """Each subdirectory of ``root`` is a class named after the directory."""
    root = Path(root)
    dirs = {p.name: str(p) for p in sorted(root.iterdir()) if p.is_dir()}
    if not dirs:
        raise FileNotFoundError(f"no model directories under {root}")
    return dirs
