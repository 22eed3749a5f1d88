"""Corpus handling: build a small labeled corpus, save it as JSONL, reload
it, inspect per-class statistics, and make a stratified split."""

import tempfile
from pathlib import Path

from textforge import Document, class_stats, from_documents, load_corpus, save_corpus, stratified_split

corpus = from_documents(
    [Document(id=f"rev-{i}", text=text, label=label) for i, (text, label) in enumerate([
        ("loved it, truly great stuff", "pos"),
        ("wonderful read, great characters", "pos"),
        ("what a great and fine surprise", "pos"),
        ("utterly boring and bad", "neg"),
        ("bad plot, awful pacing", "neg"),
        ("terrible, would not recommend", "neg"),
    ])]
)

workdir = Path(tempfile.mkdtemp(prefix="textforge-demo-"))
path = workdir / "reviews.jsonl"
save_corpus(corpus, path)
again = load_corpus(path)
print(f"saved and reloaded {len(again)} documents, classes = {list(again.classes)}")

stats = class_stats(again)
for label in again.classes:
    print(f"  {label}: {stats.doc_counts[label]} docs, {stats.token_counts[label]} tokens")
print(f"  imbalance ratio: {stats.imbalance_ratio:.2f}")

train, test = stratified_split(again, test_fraction=0.34, seed=7)
print(f"stratified split: {len(train)} train / {len(test)} test")
print("  test ids:", [d.id for d in test])
