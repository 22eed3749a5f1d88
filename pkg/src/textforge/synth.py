"""Synthetic benchmark generator: a desk-scale stand-in for the fake-news
tweet and product-review classification tasks, with controllable difficulty.

Documents are bags of tokens drawn from per-class Zipf-shaped multinomials
sharing 30% of their mass on a common stop-word block; the remaining mass
mixes a class-private word slice with a confusion distribution over all
class slices, so classes overlap without being identical.

Two stress knobs mirror properties of the real datasets:

* ``imbalance`` scales per-class training counts (the tweet corpus is
  heavily skewed, and the macro-F1 gains of balanced generated data come
  precisely from rescuing minority classes).  ``train_per_class`` is the
  majority-class size.
* ``mislabel`` is a train-set annotation-noise rate: that fraction of
  training documents is drawn from a different class's distribution while
  keeping the nominal label.  Test sets are always clean and balanced.
"""

import numpy as np

from .corpus import Document, LabeledCorpus

_ZIPF_SHARED = 1.3
_ZIPF_SPECIFIC = 1.2
DEFAULT_IMBALANCE = (1.0, 0.6, 0.3)


def _zipf(n: int, exponent: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** exponent
    return w / w.sum()


def make_synthetic_benchmark(
    n_classes: int = 3,
    train_per_class: int = 50,
    test_per_class: int = 500,
    vocab_size: int = 400,
    shared_mass: float = 0.3,
    doc_len: tuple[int, int] = (8, 25),
    slice_size: int = 40,
    confusion: float = 0.5,
    imbalance: tuple | None = None,
    mislabel: float = 0.0,
    seed: int = 0,
):
    """Build (train, test) corpora; deterministic given the seed."""
    n_shared = vocab_size // 4
    if not 2 <= n_classes <= (vocab_size - n_shared) // slice_size:
        raise ValueError("n_classes out of range for the vocabulary layout")
    if not 0.0 <= mislabel < 1.0:
        raise ValueError("mislabel must be in [0, 1)")
    if imbalance is None:
        imbalance = DEFAULT_IMBALANCE
    ratios = (tuple(imbalance) + (imbalance[-1],) * n_classes)[:n_classes]

    rng = np.random.default_rng(seed)
    words = np.array([f"w{i:03d}" for i in range(vocab_size)])

    shared = np.zeros(vocab_size)
    shared[:n_shared] = _zipf(n_shared, _ZIPF_SHARED)

    union_size = n_classes * slice_size
    union = np.zeros(vocab_size)
    union[n_shared:n_shared + union_size] = \
        _zipf(union_size, _ZIPF_SPECIFIC)[np.argsort(rng.permutation(union_size))]

    class_dists = []
    for c in range(n_classes):
        lo = n_shared + c * slice_size
        specific = np.zeros(vocab_size)
        specific[lo:lo + slice_size] = \
            _zipf(slice_size, _ZIPF_SPECIFIC)[np.argsort(rng.permutation(slice_size))]
        class_dists.append(
            shared_mass * shared
            + (1.0 - shared_mass) * ((1.0 - confusion) * specific + confusion * union))

    labels = [f"class-{chr(ord('a') + c)}" for c in range(n_classes)]

    def sample_text(c: int) -> str:
        length = int(rng.integers(doc_len[0], doc_len[1] + 1))
        return " ".join(rng.choice(words, size=length, p=class_dists[c]))

    def build(prefix: str, per_class: int, class_ratios, noisy: bool) -> LabeledCorpus:
        docs = []
        for c, label in enumerate(labels):
            count = max(2, int(round(per_class * class_ratios[c])))
            for i in range(count):
                source = c
                if noisy and mislabel > 0 and rng.random() < mislabel:
                    source = int((c + 1 + rng.integers(n_classes - 1)) % n_classes)
                docs.append(Document(id=f"{prefix}-{label}-{i:04d}",
                                     text=sample_text(source), label=label))
        return LabeledCorpus(documents=tuple(docs), classes=tuple(labels))

    train = build("train", train_per_class, ratios, noisy=True)
    test = build("test", test_per_class, [1.0] * n_classes, noisy=False)
    return train, test
