import numpy as np
import pytest

from textforge.corpus import Document, from_documents


def make_corpus(texts_by_label: dict, prefix: str = "d"):
    """Build a corpus from {label: [text, ...]}; ids are deterministic."""
    docs = []
    for label, texts in texts_by_label.items():
        for i, text in enumerate(texts):
            docs.append(Document(id=f"{prefix}-{label}-{i}", text=text, label=label))
    return from_documents(docs)


@pytest.fixture
def two_class_corpus():
    return make_corpus({
        "pos": ["good great fine", "good good wonderful", "great nice good day"],
        "neg": ["bad awful poor", "bad bad terrible", "awful poor worst day"],
    })


def random_token_corpus(rng: np.random.Generator, labels, docs_per_label, vocab,
                        doc_len=(4, 10), prefix="r"):
    """Random bag-of-words corpus over the given vocabulary list."""
    docs = []
    for label in labels:
        for i in range(docs_per_label):
            n = int(rng.integers(doc_len[0], doc_len[1] + 1))
            toks = [vocab[int(rng.integers(len(vocab)))] for _ in range(n)]
            docs.append(Document(id=f"{prefix}-{label}-{i}", text=" ".join(toks), label=label))
    return from_documents(docs)
