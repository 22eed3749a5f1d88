"""Labeled text corpora: data model, JSONL/CSV ingestion, persistence,
per-class views and stratified splitting.

A corpus is immutable after construction; the class list is fixed in
first-appearance order and every class-indexed array downstream uses that
order.
"""

import csv
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import text_norm

PROVENANCE_ORIGINAL = "original"
PROVENANCE_GENERATED = "generated"

_GEN_META_FIELDS = ("backend_id", "intended_label", "prompt_word", "seed")


class CorpusFormatError(ValueError):
    """Malformed record on ingestion; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class GenMeta:
    backend_id: str
    intended_label: str
    prompt_word: str
    seed: int

    def to_dict(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "intended_label": self.intended_label,
            "prompt_word": self.prompt_word,
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenMeta":
        missing = [k for k in _GEN_META_FIELDS if k not in d]
        if missing:
            raise ValueError(f"gen_meta missing fields: {missing}")
        return cls(
            backend_id=str(d["backend_id"]),
            intended_label=str(d["intended_label"]),
            prompt_word=str(d["prompt_word"]),
            seed=int(d["seed"]),
        )


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    label: str
    provenance: str = PROVENANCE_ORIGINAL
    gen_meta: GenMeta | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        if self.provenance not in (PROVENANCE_ORIGINAL, PROVENANCE_GENERATED):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if (self.provenance == PROVENANCE_GENERATED) != (self.gen_meta is not None):
            raise ValueError(
                f"document {self.id!r}: gen_meta must be present iff provenance is generated"
            )
        if not text_norm.tokenize(self.text):
            raise ValueError(f"document {self.id!r}: text empty after normalization")

    def tokens(self) -> list[str]:
        return text_norm.tokenize(self.text)


@dataclass(frozen=True)
class LabeledCorpus:
    documents: tuple[Document, ...]
    classes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        object.__setattr__(self, "classes", tuple(self.classes))
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("duplicate class identifiers")
        class_set = set(self.classes)
        seen_ids = set()
        for doc in self.documents:
            if doc.id in seen_ids:
                raise ValueError(f"duplicate document id {doc.id!r}")
            seen_ids.add(doc.id)
            if doc.label not in class_set:
                raise ValueError(f"document {doc.id!r} has label {doc.label!r} not in classes")

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def class_index(self, label: str) -> int:
        return self.classes.index(label)

    def labels_as_indices(self) -> list[int]:
        idx = {c: i for i, c in enumerate(self.classes)}
        return [idx[d.label] for d in self.documents]

    def restrict(self, label: str) -> "LabeledCorpus":
        """Per-class subcorpus view (single-class corpus)."""
        if label not in self.classes:
            raise ValueError(f"unknown class {label!r}")
        docs = tuple(d for d in self.documents if d.label == label)
        return LabeledCorpus(documents=docs, classes=(label,))

    def texts(self) -> list[str]:
        return [d.text for d in self.documents]


def from_documents(documents, classes=None) -> LabeledCorpus:
    """Build a corpus, inferring classes in first-appearance order if absent."""
    documents = tuple(documents)
    if classes is None:
        classes = []
        for d in documents:
            if d.label not in classes:
                classes.append(d.label)
    return LabeledCorpus(documents=documents, classes=tuple(classes))


def merge(*corpora: LabeledCorpus) -> LabeledCorpus:
    """Concatenate corpora; class order follows first appearance across inputs."""
    docs = []
    classes = []
    for c in corpora:
        docs.extend(c.documents)
        for cl in c.classes:
            if cl not in classes:
                classes.append(cl)
    return LabeledCorpus(documents=tuple(docs), classes=tuple(classes))


@dataclass(frozen=True)
class ClassStats:
    doc_counts: dict = field(default_factory=dict)
    token_counts: dict = field(default_factory=dict)
    imbalance_ratio: float = 1.0


def class_stats(corpus: LabeledCorpus) -> ClassStats:
    doc_counts = {c: 0 for c in corpus.classes}
    token_counts = {c: 0 for c in corpus.classes}
    for d in corpus.documents:
        doc_counts[d.label] += 1
        token_counts[d.label] += len(d.tokens())
    counts = [n for n in doc_counts.values() if n > 0]
    ratio = max(counts) / min(counts) if counts else 1.0
    return ClassStats(doc_counts=doc_counts, token_counts=token_counts, imbalance_ratio=ratio)


def _doc_from_record(rec: dict, line: int, index: int) -> Document:
    if "text" not in rec:
        raise CorpusFormatError("record missing 'text' field", line=line)
    if "label" not in rec:
        raise CorpusFormatError("record missing 'label' field", line=line)
    text = rec["text"]
    if not isinstance(text, str) or not text_norm.tokenize(text):
        raise CorpusFormatError("record has empty text", line=line)
    doc_id = rec.get("id")
    if doc_id is None:
        doc_id = f"doc-{index}"
    provenance = rec.get("provenance", PROVENANCE_ORIGINAL)
    gen_meta = rec.get("gen_meta")
    try:
        return Document(
            id=str(doc_id),
            text=text,
            label=str(rec["label"]),
            provenance=provenance,
            gen_meta=GenMeta.from_dict(gen_meta) if gen_meta is not None else None,
        )
    except ValueError as e:
        raise CorpusFormatError(str(e), line=line) from e


def load_corpus(path, format: str | None = None) -> LabeledCorpus:
    """Load a corpus from JSONL (canonical) or CSV.

    Classes are inferred from labels in first-appearance order; records
    without an id get ``doc-<index>``.  Duplicate ids and records with
    empty text are errors, with the line number reported.
    """
    path = os.fspath(path)
    if format is None:
        format = "csv" if path.endswith(".csv") else "jsonl"
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unknown corpus format {format!r}")

    docs: list[Document] = []
    seen_ids: set[str] = set()

    def _add(rec: dict, line: int):
        doc = _doc_from_record(rec, line, index=len(docs))
        if doc.id in seen_ids:
            raise CorpusFormatError(f"duplicate document id {doc.id!r}", line=line)
        seen_ids.add(doc.id)
        docs.append(doc)

    if format == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    rec = json.loads(raw)
                except json.JSONDecodeError as e:
                    raise CorpusFormatError(f"invalid JSON ({e.msg})", line=lineno) from e
                if not isinstance(rec, dict):
                    raise CorpusFormatError("record is not a JSON object", line=lineno)
                _add(rec, lineno)
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "text" not in reader.fieldnames or "label" not in reader.fieldnames:
                raise CorpusFormatError("CSV must have 'text' and 'label' columns", line=1)
            for rec in reader:
                rec = {k: v for k, v in rec.items() if v is not None and k in ("id", "text", "label")}
                _add(rec, reader.line_num)

    if not docs:
        raise CorpusFormatError("empty corpus file")
    return from_documents(docs)


def _atomic_write(path, payload: str):
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def document_to_record(doc: Document) -> dict:
    rec = {"id": doc.id, "text": doc.text, "label": doc.label, "provenance": doc.provenance}
    if doc.gen_meta is not None:
        rec["gen_meta"] = doc.gen_meta.to_dict()
    return rec


def save_corpus(corpus: LabeledCorpus, path) -> None:
    """Write JSONL; round-trips through :func:`load_corpus` field-by-field."""
    lines = [json.dumps(document_to_record(d), ensure_ascii=False) for d in corpus.documents]
    _atomic_write(path, "\n".join(lines) + "\n" if lines else "")


def stratified_split(corpus: LabeledCorpus, test_fraction: float, seed: int):
    """Deterministic per-class train/test split.

    Per-class test count is ``round(test_fraction * class_count)``, at least
    1 and at most ``class_count - 1`` so both sides stay populated.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    by_class: dict[str, list[int]] = {c: [] for c in corpus.classes}
    for i, d in enumerate(corpus.documents):
        by_class[d.label].append(i)
    for c, idxs in by_class.items():
        if len(idxs) < 2:
            raise ValueError(f"class {c!r} has {len(idxs)} document(s); need at least 2 to split")

    rng = np.random.default_rng(seed)
    test_idx: set[int] = set()
    for c in corpus.classes:
        idxs = by_class[c]
        k = int(round(test_fraction * len(idxs)))
        k = max(1, min(k, len(idxs) - 1))
        chosen = rng.permutation(len(idxs))[:k]
        test_idx.update(idxs[j] for j in chosen)

    train_docs = tuple(d for i, d in enumerate(corpus.documents) if i not in test_idx)
    test_docs = tuple(d for i, d in enumerate(corpus.documents) if i in test_idx)
    train = LabeledCorpus(documents=train_docs, classes=corpus.classes)
    test = LabeledCorpus(documents=test_docs, classes=corpus.classes)
    return train, test


def relabel(doc: Document, label: str) -> Document:
    """Copy of ``doc`` with a different label; id and gen_meta untouched."""
    return replace(doc, label=label)
