"""TF-IDF vectorizer with smoothed idf and L2-normalized output.

Weights: ``tf * (ln((1+N)/(1+df)) + 1)``, then the document vector is scaled
to unit Euclidean norm.  Out-of-vocabulary tokens are ignored at transform
time; a text with no in-vocabulary token maps to the empty sparse vector.
"""

import hashlib
import json
import os
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import text_norm
from .corpus import LabeledCorpus

FORMAT_VERSION = 1


@dataclass(frozen=True)
class SparseVector:
    """(index, value) pairs with strictly increasing indices."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.indices.shape != self.values.shape:
            raise ValueError("indices/values length mismatch")
        if self.indices.size and not np.all(np.diff(self.indices) > 0):
            raise ValueError("indices must be strictly increasing")
        if self.values.size and not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite value in sparse vector")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def to_pairs(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]


def stack(vectors: list[SparseVector]) -> sp.csr_matrix:
    """Stack sparse vectors into a CSR matrix (rows in input order)."""
    if not vectors:
        raise ValueError("cannot stack zero vectors")
    dim = vectors[0].dim
    for v in vectors:
        if v.dim != dim:
            raise ValueError(f"dimension mismatch: {v.dim} != {dim}")
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([v.nnz for v in vectors])
    indices = np.concatenate([v.indices for v in vectors]) if indptr[-1] else np.zeros(0, dtype=np.int64)
    data = np.concatenate([v.values for v in vectors]) if indptr[-1] else np.zeros(0, dtype=np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


class TfIdfVectorizer:
    def __init__(self, min_df: int = 1):
        if min_df < 1:
            raise ValueError("min_df must be >= 1")
        self.min_df = int(min_df)
        self.vocabulary: dict[str, int] = {}
        self.doc_freq: np.ndarray = np.zeros(0, dtype=np.int64)
        self.n_docs: int = 0

    @property
    def fitted(self) -> bool:
        return self.n_docs > 0

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def fit(self, corpus: LabeledCorpus) -> "TfIdfVectorizer":
        """Learn vocabulary (first-appearance order) and document frequencies."""
        if len(corpus) == 0:
            raise ValueError("cannot fit on an empty corpus")
        vocab: dict[str, int] = {}
        df = Counter()
        for doc in corpus:
            toks = doc.tokens()
            for t in toks:
                if t not in vocab:
                    vocab[t] = len(vocab)
            df.update(set(toks))
        if self.min_df > 1:
            kept = [t for t in vocab if df[t] >= self.min_df]
            vocab = {t: i for i, t in enumerate(kept)}
        self.vocabulary = vocab
        self.doc_freq = np.array([df[t] for t in vocab], dtype=np.int64)
        self.n_docs = len(corpus)
        self._idf = np.log((1.0 + self.n_docs) / (1.0 + self.doc_freq.astype(np.float64))) + 1.0
        return self

    def idf(self) -> np.ndarray:
        self._require_fitted()
        return self._idf.copy()

    def _require_fitted(self):
        if not self.fitted:
            raise ValueError("vectorizer is not fitted")

    def transform(self, text: str) -> SparseVector:
        self._require_fitted()
        counts = Counter(text_norm.tokenize(text))
        idx_tf = sorted(
            (self.vocabulary[t], tf) for t, tf in counts.items() if t in self.vocabulary
        )
        if not idx_tf:
            return SparseVector(np.zeros(0, dtype=np.int64), np.zeros(0), self.dim)
        indices = np.array([i for i, _ in idx_tf], dtype=np.int64)
        weights = np.array([tf for _, tf in idx_tf], dtype=np.float64) * self._idf[indices]
        weights /= np.linalg.norm(weights)
        return SparseVector(indices, weights, self.dim)

    def transform_many(self, texts) -> list[SparseVector]:
        return [self.transform(t) for t in texts]

    # -- persistence ---------------------------------------------------

    def _payload(self) -> dict:
        self._require_fitted()
        return {
            "format_version": FORMAT_VERSION,
            "kind": "tfidf-vectorizer",
            "min_df": self.min_df,
            "n_docs": self.n_docs,
            "vocabulary": list(self.vocabulary.keys()),
            "doc_freq": [int(x) for x in self.doc_freq],
        }

    def to_json(self) -> str:
        return json.dumps(self._payload(), ensure_ascii=False, sort_keys=True)

    def fingerprint(self) -> str:
        """Stable hash of the fitted state; classifiers pin this."""
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        path = os.fspath(path)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
        os.replace(tmp, path)

    @classmethod
    def from_json(cls, payload: str) -> "TfIdfVectorizer":
        d = json.loads(payload)
        if d.get("kind") != "tfidf-vectorizer":
            raise ValueError("not a serialized vectorizer")
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported vectorizer format version {d.get('format_version')}")
        v = cls(min_df=d["min_df"])
        v.vocabulary = {t: i for i, t in enumerate(d["vocabulary"])}
        v.doc_freq = np.array(d["doc_freq"], dtype=np.int64)
        v.n_docs = int(d["n_docs"])
        v._idf = np.log((1.0 + v.n_docs) / (1.0 + v.doc_freq.astype(np.float64))) + 1.0
        return v

    @classmethod
    def load(cls, path) -> "TfIdfVectorizer":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())
