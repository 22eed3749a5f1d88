"""The three corpus transformations applied to generated texts.

* leakage filter: drop a generated text when any run of `window` consecutive
  tokens occurs verbatim in a same-class original (confidentiality +
  duplicate control); identical generated texts within a class collapse to
  one.
* label filter: keep a generated text only when a classifier trained on the
  originals assigns it its intended class.
* label-noise injector: corrupt labels of randomly chosen documents so the
  expected label accuracy hits a target, simulating a filter of that
  quality.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import linear_classifier
from .corpus import LabeledCorpus, relabel
from .linear_classifier import LinearModel
from .vectorizer import TfIdfVectorizer


@dataclass(frozen=True)
class FilterReport:
    input_count: int
    kept_count: int
    removed_count: int
    reasons: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kept_count + self.removed_count != self.input_count:
            raise ValueError("kept + removed must equal input")

    @property
    def removal_rate(self) -> float:
        return self.removed_count / self.input_count if self.input_count else 0.0

    def to_dict(self) -> dict:
        return {
            "input": self.input_count,
            "kept": self.kept_count,
            "removed": self.removed_count,
            "removal_rate": self.removal_rate,
            "reasons": dict(self.reasons),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


class ShingleIndex:
    """Per-class sets of `window`-token shingles from an original corpus."""

    def __init__(self, originals: LabeledCorpus, window: int):
        if window < 2:
            raise ValueError("window must be >= 2")
        self.window = window
        self.per_class: dict[str, set] = {c: set() for c in originals.classes}
        for doc in originals:
            self.per_class[doc.label].update(self._shingles(doc.tokens()))

    def _shingles(self, tokens: list[str]):
        w = self.window
        return (tuple(tokens[i:i + w]) for i in range(len(tokens) - w + 1))

    def overlaps(self, tokens: list[str], label: str, all_classes: bool = False) -> bool:
        if all_classes:
            targets = list(self.per_class.values())
        else:
            targets = [self.per_class.get(label, set())]
        for sh in self._shingles(tokens):
            for t in targets:
                if sh in t:
                    return True
        return False


def leakage_filter(generated: LabeledCorpus, originals: LabeledCorpus,
                   window: int = 5, all_classes: bool = False):
    """Remove generated texts sharing a `window`-token run with a same-class
    original (or any class when ``all_classes``), and collapse exact
    duplicates within a class.  Returns (kept corpus, report)."""
    unknown = set(generated.classes) - set(originals.classes)
    if unknown:
        raise ValueError(f"generated corpus has classes unknown to the originals: {sorted(unknown)}")
    index = ShingleIndex(originals, window)
    kept = []
    reasons: dict[str, str] = {}
    seen: dict[tuple, str] = {}
    for doc in generated:
        tokens = doc.tokens()
        if index.overlaps(tokens, doc.label, all_classes=all_classes):
            scope = "any original" if all_classes else "same-class original"
            reasons[doc.id] = f"shares a {window}-token window with a {scope}"
            continue
        key = (doc.label, tuple(tokens))
        if key in seen:
            reasons[doc.id] = f"duplicate of generated document {seen[key]}"
            continue
        seen[key] = doc.id
        kept.append(doc)
    report = FilterReport(
        input_count=len(generated),
        kept_count=len(kept),
        removed_count=len(generated) - len(kept),
        reasons=reasons,
    )
    return LabeledCorpus(documents=tuple(kept), classes=generated.classes), report


def label_filter(generated: LabeledCorpus, filter_model: LinearModel,
                 vectorizer: TfIdfVectorizer):
    """Keep generated documents the filter classifier assigns to their
    intended class.  Returns (kept corpus, report)."""
    if filter_model.vectorizer_fingerprint is not None:
        actual = vectorizer.fingerprint()
        if filter_model.vectorizer_fingerprint != actual:
            raise ValueError(
                "filter model was trained against a different vectorizer "
                f"(fingerprint {filter_model.vectorizer_fingerprint!r} != {actual!r})"
            )
    kept = []
    reasons: dict[str, str] = {}
    for doc in generated:
        x = vectorizer.transform(doc.text)
        pred = filter_model.classes[linear_classifier.predict(filter_model, x)]
        if pred == doc.label:
            kept.append(doc)
        else:
            reasons[doc.id] = f"classified as {pred!r}, intended {doc.label!r}"
    report = FilterReport(
        input_count=len(generated),
        kept_count=len(kept),
        removed_count=len(generated) - len(kept),
        reasons=reasons,
    )
    return LabeledCorpus(documents=tuple(kept), classes=generated.classes), report


def inject_label_noise(corpus: LabeledCorpus, target_accuracy: float, seed: int):
    """Re-label k = round(N(1-a)/(1-1/n)) randomly chosen documents with a
    uniform class draw (self-draws allowed), so expected label accuracy is
    the target.  Returns (corpus, report); the report's "removed" count is
    the number of re-drawn labels."""
    n = len(corpus.classes)
    if n < 2:
        raise ValueError("need at least 2 classes to inject label noise")
    if target_accuracy < 1.0 / n:
        raise ValueError(f"target accuracy {target_accuracy} below chance level 1/{n}")
    if target_accuracy > 1.0:
        raise ValueError("target accuracy cannot exceed 1")

    size = len(corpus)
    k = int(round(size * (1.0 - target_accuracy) / (1.0 - 1.0 / n)))
    k = min(k, size)
    rng = np.random.default_rng(seed)
    chosen = set(rng.choice(size, size=k, replace=False).tolist()) if k else set()

    docs = []
    reasons: dict[str, str] = {}
    for i, doc in enumerate(corpus.documents):
        if i in chosen:
            new_label = corpus.classes[int(rng.integers(n))]
            reasons[doc.id] = f"label re-drawn: {doc.label!r} -> {new_label!r}"
            docs.append(relabel(doc, new_label))
        else:
            docs.append(doc)
    report = FilterReport(
        input_count=size,
        kept_count=size - k,
        removed_count=k,
        reasons=reasons,
    )
    return LabeledCorpus(documents=tuple(docs), classes=corpus.classes), report
