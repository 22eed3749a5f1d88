"""Per-class text generation.

Two interchangeable backends produce texts for one class at a time: a
built-in n-gram language model (absolute discounting with backoff, grounded
in an add-1 unigram) and an HTTP client speaking the generation wire
protocol, so a neural generator can be plugged in unchanged.

Sampling is a fixed pipeline applied to the next-token distribution:
temperature reshaping, top-k truncation, then top-p (nucleus) truncation,
each followed by renormalization; ties inside the truncations break
lexicographically so generation is fully determined by the seed.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import requests

from .corpus import Document, GenMeta, LabeledCorpus

EOS_TOKEN = "</s>"
BOS_TOKEN = "<s>"


class GenerationError(Exception):
    pass


class GenerationClientError(GenerationError):
    """Base for errors talking to an external generation service."""


class TransportError(GenerationClientError):
    pass


class StatusError(GenerationClientError):
    def __init__(self, status_code: int, detail: str = ""):
        self.status_code = status_code
        super().__init__(f"server returned status {status_code}" + (f": {detail}" if detail else ""))


class SchemaError(GenerationClientError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    temperature: float = 0.7
    top_p: float = 0.9
    top_k: int = 40
    max_tokens: int = 120
    seed: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass(frozen=True)
class GenerationRequest:
    label: str
    prompt_word: str
    config: SamplerConfig

    def to_wire(self) -> dict:
        return {
            "label": self.label,
            "prompt": self.prompt_word,
            "max_tokens": self.config.max_tokens,
            "temperature": self.config.temperature,
            "top_k": self.config.top_k,
            "top_p": self.config.top_p,
            "seed": self.config.seed,
        }


@dataclass(frozen=True)
class GenerationResult:
    text: str
    backend_id: str
    request: GenerationRequest

    @property
    def is_empty(self) -> bool:
        return not self.text.strip()


def derive_seed(master_seed: int, index: int) -> int:
    """Scheduling-independent per-document seed."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


# -- sampling pipeline -------------------------------------------------


def _truncate(probs: np.ndarray, sort_keys: np.ndarray, config: SamplerConfig):
    """Apply temperature / top-k / top-p in order; returns (kept positions,
    renormalized probabilities) relative to the input arrays."""
    q = probs.astype(np.float64) ** (1.0 / config.temperature)
    q /= q.sum()
    order = np.lexsort((sort_keys, -q))
    kept = order[: min(config.top_k, order.size)]
    qk = q[kept]
    qk = qk / qk.sum()
    cum = np.cumsum(qk)
    cut = int(np.searchsorted(cum, config.top_p - 1e-12)) + 1
    kept = kept[:cut]
    qk = qk[:cut]
    return kept, qk / qk.sum()


def sample_next(dist: dict, config: SamplerConfig, rng: np.random.Generator) -> str:
    """Draw one token from a token→probability distribution."""
    if not dist:
        raise ValueError("empty distribution")
    tokens = np.array(sorted(dist.keys()))
    probs = np.array([dist[t] for t in tokens], dtype=np.float64)
    kept, q = _truncate(probs, tokens, config)
    return str(tokens[kept[rng.choice(kept.size, p=q)]])


@lru_cache(maxsize=64)
def _token_occurrences(subcorpus: LabeledCorpus) -> tuple[str, ...]:
    occ = []
    for doc in subcorpus:
        occ.extend(doc.tokens())
    return tuple(occ)


def draw_prompt_word(subcorpus: LabeledCorpus, rng: np.random.Generator) -> str:
    """Frequency-weighted prompt word: uniform over token occurrences."""
    if len(subcorpus) == 0:
        raise ValueError("cannot draw a prompt from an empty corpus")
    occ = _token_occurrences(subcorpus)
    return occ[int(rng.integers(len(occ)))]


# -- n-gram backend ----------------------------------------------------


class _ContextEntry:
    __slots__ = ("ids", "counts", "total")

    def __init__(self, ids, counts):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.float64)
        self.total = float(self.counts.sum())


class ClassConditionalLM:
    """n-gram language model for one class, absolute discounting with
    backoff down to an add-1 unigram over vocabulary ∪ {</s>}."""

    def __init__(self, label: str, order: int, discount: float, vocab: list[str],
                 tables: list, unigram_counts: np.ndarray):
        self.label = label
        self.order = order
        self.discount = discount
        self.vocab = list(vocab)
        self._token_id = {t: i for i, t in enumerate(self.vocab)}
        self.eos_id = len(self.vocab)
        self.bos_id = len(self.vocab) + 1
        self._tables = tables            # index L -> dict[ctx tuple] -> _ContextEntry
        self._unigram_counts = np.asarray(unigram_counts, dtype=np.float64)
        self._unigram = (self._unigram_counts + 1.0) / (
            self._unigram_counts.sum() + self._unigram_counts.size)
        self._unigram.setflags(write=False)
        self._dist_cache: dict = {}
        self._trunc_cache: dict = {}
        self._sort_keys = np.array(self.vocab + [EOS_TOKEN])

    @property
    def backend_id(self) -> str:
        return f"ngram-order{self.order}"

    def _canon(self, ctx: tuple) -> tuple:
        while ctx and ctx not in self._tables[len(ctx)]:
            ctx = ctx[1:]
        return ctx

    def _dist(self, ctx: tuple) -> np.ndarray:
        ctx = self._canon(ctx)
        if not ctx:
            return self._unigram
        cached = self._dist_cache.get(ctx)
        if cached is not None:
            return cached
        entry = self._tables[len(ctx)][ctx]
        lower = self._dist(ctx[1:])
        lam = self.discount * entry.ids.size / entry.total
        p = lower * lam
        p[entry.ids] += (entry.counts - self.discount) / entry.total
        p.setflags(write=False)
        self._dist_cache[ctx] = p
        return p

    def _context_ids(self, context_tokens) -> tuple:
        ids = [self._token_id.get(t, -1) if t != BOS_TOKEN else self.bos_id
               for t in context_tokens]
        ids = ids[-(self.order - 1):]
        pad = [self.bos_id] * (self.order - 1 - len(ids))
        return tuple(pad + ids)

    def next_token_dist(self, context_tokens) -> dict:
        """P(token | context) over vocabulary ∪ {</s>}; sums to 1."""
        p = self._dist(self._context_ids(context_tokens))
        out = {t: float(p[i]) for i, t in enumerate(self.vocab)}
        out[EOS_TOKEN] = float(p[self.eos_id])
        return out

    def _sample_step(self, ctx: tuple, config: SamplerConfig, rng) -> int:
        key = (self._canon(ctx), config.temperature, config.top_k, config.top_p)
        cached = self._trunc_cache.get(key)
        if cached is None:
            p = self._dist(ctx)
            kept, q = _truncate(p, self._sort_keys, config)
            cached = (kept, q)
            self._trunc_cache[key] = cached
        kept, q = cached
        return int(kept[rng.choice(kept.size, p=q)])

    def generate_one(self, label: str, prompt_word: str, config: SamplerConfig,
                     seed: int, rng: np.random.Generator) -> tuple[str, str]:
        """Walk from <s>-padding plus the prompt word until </s> or the
        token budget; the prompt word counts as the first token."""
        if label != self.label:
            raise GenerationError(f"LM is fitted for class {self.label!r}, not {label!r}")
        prompt_id = self._token_id.get(prompt_word, -1)
        ctx = (self.bos_id,) * (self.order - 2) + (prompt_id,)
        tokens = [prompt_word]
        while len(tokens) < config.max_tokens:
            tid = self._sample_step(ctx, config, rng)
            if tid == self.eos_id:
                break
            tokens.append(self.vocab[tid])
            ctx = ctx[1:] + (tid,)
        return " ".join(tokens), self.backend_id

    # -- persistence ---------------------------------------------------

    def to_json(self) -> str:
        tables = []
        for length in range(1, self.order):
            for ctx, entry in sorted(self._tables[length].items()):
                tables.append({
                    "ctx": [int(i) for i in ctx],
                    "ids": [int(i) for i in entry.ids],
                    "counts": [int(c) for c in entry.counts],
                })
        payload = {
            "format_version": 1,
            "kind": "ngram-lm",
            "label": self.label,
            "order": self.order,
            "discount": self.discount,
            "vocab": self.vocab,
            "unigram_counts": [int(c) for c in self._unigram_counts],
            "tables": tables,
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True)

    def save(self, path) -> None:
        path = os.fspath(path)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
        os.replace(tmp, path)

    @classmethod
    def from_json(cls, payload: str) -> "ClassConditionalLM":
        d = json.loads(payload)
        if d.get("kind") != "ngram-lm":
            raise ValueError("not a serialized n-gram language model")
        if d.get("format_version") != 1:
            raise ValueError(f"unsupported LM format version {d.get('format_version')}")
        order = int(d["order"])
        tables: list[dict] = [dict() for _ in range(order)]
        for item in d["tables"]:
            ctx = tuple(item["ctx"])
            tables[len(ctx)][ctx] = _ContextEntry(item["ids"], item["counts"])
        return cls(d["label"], order, float(d["discount"]), list(d["vocab"]),
                   tables, np.asarray(d["unigram_counts"], dtype=np.float64))

    @classmethod
    def load(cls, path) -> "ClassConditionalLM":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def fit_lm(subcorpus: LabeledCorpus, order: int = 4, discount: float = 0.75) -> ClassConditionalLM:
    """Count n-grams of orders 1..order over <s>-padded, </s>-terminated
    token streams of a single-class corpus."""
    if len(subcorpus) == 0:
        raise ValueError("cannot fit a language model on an empty corpus")
    if len(subcorpus.classes) != 1:
        raise ValueError(f"subcorpus must contain exactly one class, got {list(subcorpus.classes)}")
    if order < 2:
        raise ValueError("order must be >= 2")
    if not 0 < discount < 1:
        raise ValueError("discount must be in (0, 1)")

    label = subcorpus.classes[0]
    vocab: dict[str, int] = {}
    streams = []
    for doc in subcorpus:
        ids = []
        for t in doc.tokens():
            if t not in vocab:
                vocab[t] = len(vocab)
            ids.append(vocab[t])
        streams.append(ids)

    eos_id = len(vocab)
    bos_id = len(vocab) + 1
    raw: list[dict] = [dict() for _ in range(order)]   # raw[L]: ctx len L
    unigram_counts = np.zeros(eos_id + 1, dtype=np.float64)
    for ids in streams:
        padded = [bos_id] * (order - 1) + ids + [eos_id]
        for pos in range(order - 1, len(padded)):
            target = padded[pos]
            unigram_counts[target] += 1
            for length in range(1, order):
                ctx = tuple(padded[pos - length:pos])
                bucket = raw[length].setdefault(ctx, {})
                bucket[target] = bucket.get(target, 0) + 1

    tables: list[dict] = [dict() for _ in range(order)]
    for length in range(1, order):
        for ctx, bucket in raw[length].items():
            ids_arr = sorted(bucket)
            tables[length][ctx] = _ContextEntry(ids_arr, [bucket[i] for i in ids_arr])

    return ClassConditionalLM(label, order, discount, list(vocab), tables, unigram_counts)


# -- external backend --------------------------------------------------


def _validate_generate_response(payload) -> tuple[str, str]:
    if not isinstance(payload, dict):
        raise SchemaError("response is not a JSON object")
    text = payload.get("text")
    backend_id = payload.get("backend_id")
    if not isinstance(text, str):
        raise SchemaError("response missing string field 'text'")
    if not isinstance(backend_id, str):
        raise SchemaError("response missing string field 'backend_id'")
    return text, backend_id


def external_generate(endpoint: str, request: GenerationRequest,
                      timeout: float = 30.0) -> GenerationResult:
    """One HTTP round-trip to a generation service."""
    url = endpoint.rstrip("/") + "/generate"
    try:
        resp = requests.post(url, json=request.to_wire(), timeout=timeout)
    except requests.Timeout as e:
        raise TransportError(f"timeout after {timeout}s talking to {url}") from e
    except requests.RequestException as e:
        raise TransportError(f"transport failure talking to {url}: {e}") from e
    if resp.status_code != 200:
        raise StatusError(resp.status_code, resp.text[:200])
    try:
        payload = resp.json()
    except ValueError as e:
        raise SchemaError(f"response is not valid JSON: {e}") from e
    text, backend_id = _validate_generate_response(payload)
    return GenerationResult(text=text, backend_id=backend_id, request=request)


class GenerationClient:
    """Backend adapter for an external service; bounded request concurrency."""

    def __init__(self, endpoint: str, timeout: float = 30.0, concurrency: int = 4):
        if concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        self.endpoint = endpoint
        self.timeout = timeout
        self.concurrency = concurrency

    def health(self) -> dict:
        url = self.endpoint.rstrip("/") + "/health"
        try:
            resp = requests.get(url, timeout=self.timeout)
        except requests.RequestException as e:
            raise TransportError(f"transport failure talking to {url}: {e}") from e
        if resp.status_code != 200:
            raise StatusError(resp.status_code, resp.text[:200])
        try:
            payload = resp.json()
        except ValueError as e:
            raise SchemaError(f"health response is not valid JSON: {e}") from e
        if not isinstance(payload, dict) or payload.get("status") != "ok" \
                or not isinstance(payload.get("classes"), list):
            raise SchemaError("health response must be {'status':'ok','classes':[...]}")
        return payload

    def generate_one(self, label: str, prompt_word: str, config: SamplerConfig,
                     seed: int, rng=None) -> tuple[str, str]:
        request = GenerationRequest(label, prompt_word, replace(config, seed=seed))
        result = external_generate(self.endpoint, request, timeout=self.timeout)
        return result.text, result.backend_id


def generate_corpus(backend, label: str, count: int, config: SamplerConfig,
                    prompt_source: LabeledCorpus) -> LabeledCorpus:
    """Produce ``count`` generated documents for one class.

    Each document's randomness is derived from (config.seed, index), so the
    output is independent of scheduling and reproducible per document.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    prompts = []
    for i in range(count):
        doc_seed = derive_seed(config.seed, i)
        rng = np.random.default_rng(doc_seed)
        prompts.append((doc_seed, draw_prompt_word(prompt_source, rng), rng))

    def _one(item):
        doc_seed, prompt_word, rng = item
        try:
            return backend.generate_one(label, prompt_word, config, doc_seed, rng)
        except GenerationClientError as e:
            raise GenerationError(
                f"backend failed for class {label!r}, request seed {doc_seed}: {e}"
            ) from e

    workers = getattr(backend, "concurrency", 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_one, prompts))
    else:
        outputs = [_one(item) for item in prompts]

    docs = []
    for i, ((doc_seed, prompt_word, _), (text, backend_id)) in enumerate(zip(prompts, outputs)):
        if not text.strip():
            raise GenerationError(
                f"backend {backend_id!r} returned an empty generation "
                f"(class {label!r}, request seed {doc_seed})"
            )
        docs.append(Document(
            id=f"gen-{label}-s{config.seed}-{i:05d}",
            text=text,
            label=label,
            provenance="generated",
            gen_meta=GenMeta(
                backend_id=backend_id,
                intended_label=label,
                prompt_word=prompt_word,
                seed=doc_seed,
            ),
        ))
    return LabeledCorpus(documents=tuple(docs), classes=(label,))
