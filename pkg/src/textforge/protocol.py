"""Generation wire protocol: schemas and a conformance fixture.

POST /generate  {"label": str, "prompt": str, "max_tokens": int,
                 "temperature": number, "top_k": int, "top_p": number,
                 "seed": int}
    -> 200 {"text": str, "backend_id": str}
GET /health -> 200 {"status": "ok", "classes": [str, ...]}

This module is the single source of truth for both sides: the built-in HTTP
client validates responses against it, and any external generation sidecar
can be checked with :func:`run_conformance_suite`.
"""

from dataclasses import dataclass

import requests

GENERATE_REQUEST_FIELDS = {
    "label": str,
    "prompt": str,
    "max_tokens": int,
    "temperature": (int, float),
    "top_k": int,
    "top_p": (int, float),
    "seed": int,
}


def validate_generate_request(payload) -> list[str]:
    """Return a list of problems (empty when the request is well-formed)."""
    problems = []
    if not isinstance(payload, dict):
        return ["request body is not a JSON object"]
    for name, types in GENERATE_REQUEST_FIELDS.items():
        if name not in payload:
            problems.append(f"missing field {name!r}")
        elif not isinstance(payload[name], types) or isinstance(payload[name], bool):
            problems.append(f"field {name!r} has wrong type {type(payload[name]).__name__}")
    return problems


def validate_generate_response(payload) -> list[str]:
    problems = []
    if not isinstance(payload, dict):
        return ["response body is not a JSON object"]
    if not isinstance(payload.get("text"), str):
        problems.append("missing string field 'text'")
    if not isinstance(payload.get("backend_id"), str):
        problems.append("missing string field 'backend_id'")
    return problems


def validate_health_response(payload) -> list[str]:
    problems = []
    if not isinstance(payload, dict):
        return ["health body is not a JSON object"]
    if payload.get("status") != "ok":
        problems.append("field 'status' must be 'ok'")
    classes = payload.get("classes")
    if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
        problems.append("field 'classes' must be a list of strings")
    elif not classes:
        problems.append("field 'classes' must not be empty")
    return problems


@dataclass(frozen=True)
class ConformanceCheck:
    name: str
    passed: bool
    detail: str = ""


def run_conformance_suite(base_url: str, timeout: float = 10.0) -> list[ConformanceCheck]:
    """Exercise a generation service: health schema, generate schema,
    400 on unknown class, and per-seed determinism."""
    base = base_url.rstrip("/")
    checks: list[ConformanceCheck] = []

    def record(name, passed, detail=""):
        checks.append(ConformanceCheck(name, bool(passed), detail))
        return passed

    classes = []
    try:
        resp = requests.get(base + "/health", timeout=timeout)
        if resp.status_code != 200:
            record("health-schema", False, f"status {resp.status_code}")
        else:
            payload = resp.json()
            problems = validate_health_response(payload)
            if record("health-schema", not problems, "; ".join(problems)):
                classes = payload["classes"]
    except (requests.RequestException, ValueError) as e:
        record("health-schema", False, str(e))

    if not classes:
        record("generate-schema", False, "skipped: no advertised classes")
        record("unknown-class-400", False, "skipped: health failed")
        record("seed-determinism", False, "skipped: health failed")
        return checks

    body = {
        "label": classes[0],
        "prompt": "hello",
        "max_tokens": 16,
        "temperature": 0.7,
        "top_k": 40,
        "top_p": 0.9,
        "seed": 1234,
    }

    def generate(payload):
        return requests.post(base + "/generate", json=payload, timeout=timeout)

    try:
        resp = generate(body)
        if resp.status_code != 200:
            record("generate-schema", False, f"status {resp.status_code}: {resp.text[:120]}")
            first_text = None
        else:
            payload = resp.json()
            problems = validate_generate_response(payload)
            record("generate-schema", not problems, "; ".join(problems))
            first_text = payload.get("text") if not problems else None
    except (requests.RequestException, ValueError) as e:
        record("generate-schema", False, str(e))
        first_text = None

    try:
        resp = generate({**body, "label": "__no_such_class__"})
        record("unknown-class-400", resp.status_code == 400,
               f"status {resp.status_code}")
    except requests.RequestException as e:
        record("unknown-class-400", False, str(e))

    if first_text is None:
        record("seed-determinism", False, "skipped: generate failed")
    else:
        try:
            resp = generate(body)
            same = resp.status_code == 200 and resp.json().get("text") == first_text
            record("seed-determinism", same,
                   "" if same else "same seed produced different text")
        except (requests.RequestException, ValueError) as e:
            record("seed-determinism", False, str(e))

    return checks


def assert_conformance(base_url: str, timeout: float = 10.0) -> None:
    checks = run_conformance_suite(base_url, timeout=timeout)
    failed = [c for c in checks if not c.passed]
    if failed:
        lines = ", ".join(f"{c.name} ({c.detail})" for c in failed)
        raise AssertionError(f"protocol conformance failed: {lines}")
