"""Confusion-matrix evaluation (micro/macro-F1, multiclass MCC) and
two-model agreement counts.

Conventions: per-class F1 is 0 when precision+recall is 0, MCC is 0 when its
denominator vanishes, and macro-F1 averages over ALL classes including ones
absent from the gold labels.  Every zero-division fallback is surfaced in
``EvaluationReport.flags``.
"""

import json
from dataclasses import dataclass

import numpy as np


def confusion_matrix(gold, pred, n_classes: int) -> np.ndarray:
    gold = np.asarray(gold, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if gold.shape != pred.shape:
        raise ValueError(f"gold/pred length mismatch: {gold.size} != {pred.size}")
    if gold.size == 0:
        raise ValueError("cannot evaluate zero predictions")
    if n_classes < 1:
        raise ValueError("n_classes must be >= 1")
    for name, arr in (("gold", gold), ("pred", pred)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise ValueError(f"{name} contains a class index outside [0, {n_classes})")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (gold, pred), 1)
    return cm


@dataclass(frozen=True)
class PerClass:
    label: str
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvaluationReport:
    confusion: np.ndarray
    class_labels: tuple[str, ...]
    micro_f1: float
    macro_f1: float
    mcc: float
    per_class: tuple[PerClass, ...]
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "mcc": self.mcc,
            "per_class": [
                {"label": p.label, "precision": p.precision, "recall": p.recall, "f1": p.f1}
                for p in self.per_class
            ],
            "confusion": [[int(v) for v in row] for row in self.confusion],
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


def mcc_from_confusion(cm: np.ndarray) -> tuple[float, bool]:
    """Multiclass MCC from confusion-matrix marginals; (value, degenerate)."""
    cm = np.asarray(cm, dtype=np.float64)
    c = np.trace(cm)
    s = cm.sum()
    t = cm.sum(axis=1)    # per-class gold counts (row sums)
    p = cm.sum(axis=0)    # per-class predicted counts (column sums)
    num = c * s - float(p @ t)
    den_sq = (s * s - float(p @ p)) * (s * s - float(t @ t))
    if den_sq <= 0.0:
        return 0.0, True
    return num / np.sqrt(den_sq), False


def evaluate(gold, pred, n_classes: int, class_labels=None) -> EvaluationReport:
    """Score predictions against gold class indices."""
    cm = confusion_matrix(gold, pred, n_classes)
    if class_labels is None:
        class_labels = tuple(str(i) for i in range(n_classes))
    class_labels = tuple(class_labels)
    if len(class_labels) != n_classes:
        raise ValueError("class_labels length must equal n_classes")

    total = int(cm.sum())
    micro = float(np.trace(cm)) / total

    flags = []
    per_class = []
    f1s = np.zeros(n_classes)
    for c in range(n_classes):
        tp = float(cm[c, c])
        col = float(cm[:, c].sum())
        row = float(cm[c, :].sum())
        if col == 0.0:
            precision = 0.0
            flags.append(f"precision[{class_labels[c]}]=0 (no predictions)")
        else:
            precision = tp / col
        if row == 0.0:
            recall = 0.0
            flags.append(f"recall[{class_labels[c]}]=0 (no gold examples)")
        else:
            recall = tp / row
        if precision + recall == 0.0:
            f1 = 0.0
            flags.append(f"f1[{class_labels[c]}]=0 (zero precision+recall)")
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        f1s[c] = f1
        per_class.append(PerClass(class_labels[c], precision, recall, f1))

    mcc, degenerate = mcc_from_confusion(cm)
    if degenerate:
        flags.append("mcc=0 (zero denominator)")

    return EvaluationReport(
        confusion=cm,
        class_labels=class_labels,
        micro_f1=micro,
        macro_f1=float(np.mean(f1s)),
        mcc=float(mcc),
        per_class=tuple(per_class),
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class AgreementReport:
    """Per-(gold, predicted) cell counts split by which model put a document
    there: both, only model A, only model B."""

    both: np.ndarray
    only_a: np.ndarray
    only_b: np.ndarray
    class_labels: tuple[str, ...] = ()

    def shared_errors(self) -> np.ndarray:
        """Off-diagonal cells where both models made the same mistake."""
        out = self.both.copy()
        np.fill_diagonal(out, 0)
        return out

    def union(self) -> np.ndarray:
        return self.both + self.only_a + self.only_b

    def to_dict(self) -> dict:
        return {
            "both": [[int(v) for v in r] for r in self.both],
            "only_a": [[int(v) for v in r] for r in self.only_a],
            "only_b": [[int(v) for v in r] for r in self.only_b],
            "labels": list(self.class_labels),
        }


def agreement(gold, pred_a, pred_b, n_classes: int | None = None,
              class_labels=None) -> AgreementReport:
    """Compare two prediction runs cell by cell against the same gold labels."""
    gold = np.asarray(gold, dtype=np.int64)
    pred_a = np.asarray(pred_a, dtype=np.int64)
    pred_b = np.asarray(pred_b, dtype=np.int64)
    if not (gold.shape == pred_a.shape == pred_b.shape):
        raise ValueError("gold, pred_a and pred_b must have equal lengths")
    if gold.size == 0:
        raise ValueError("cannot compare zero predictions")
    if n_classes is None:
        n_classes = int(max(gold.max(), pred_a.max(), pred_b.max())) + 1
    if class_labels is None:
        class_labels = tuple(str(i) for i in range(n_classes))

    both = np.zeros((n_classes, n_classes), dtype=np.int64)
    only_a = np.zeros_like(both)
    only_b = np.zeros_like(both)
    agree = pred_a == pred_b
    np.add.at(both, (gold[agree], pred_a[agree]), 1)
    np.add.at(only_a, (gold[~agree], pred_a[~agree]), 1)
    np.add.at(only_b, (gold[~agree], pred_b[~agree]), 1)
    return AgreementReport(both=both, only_a=only_a, only_b=only_b,
                           class_labels=tuple(class_labels))
