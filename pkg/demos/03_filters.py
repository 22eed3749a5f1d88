"""The three pool transformations: leakage filtering against the original
corpus, classifier-based label filtering, and label-noise injection."""

from textforge import (
    SamplerConfig,
    TfIdfVectorizer,
    TrainConfig,
    fit_lm,
    generate_corpus,
    inject_label_noise,
    label_filter,
    leakage_filter,
    merge,
    train,
)
from textforge.synth import make_synthetic_benchmark

originals, _ = make_synthetic_benchmark(train_per_class=50, seed=3)

parts = []
for ci, label in enumerate(originals.classes):
    sub = originals.restrict(label)
    lm = fit_lm(sub)
    parts.append(generate_corpus(lm, label, 300, SamplerConfig(seed=ci), sub))
pool = merge(*parts)
print(f"generated pool: {len(pool)} documents")

pool, leak_report = leakage_filter(pool, originals, window=5)
print(f"leakage filter: kept {leak_report.kept_count}/{leak_report.input_count} "
      f"(removal rate {leak_report.removal_rate:.1%})")
example_id, example_reason = next(iter(leak_report.reasons.items()))
print(f"  e.g. {example_id}: {example_reason}")

vec = TfIdfVectorizer().fit(originals)
filter_model = train(vec.transform_many(originals.texts()),
                     originals.labels_as_indices(), TrainConfig(),
                     classes=originals.classes)
filter_model.vectorizer_fingerprint = vec.fingerprint()
pool_f, label_report = label_filter(pool, filter_model, vec)
print(f"label filter: kept {label_report.kept_count}/{label_report.input_count} "
      f"(removal rate {label_report.removal_rate:.1%})")

noised, noise_report = inject_label_noise(pool_f, target_accuracy=0.7, seed=9)
print(f"noise injector at target accuracy 0.7: re-drew {noise_report.removed_count} labels")
realized = sum(a.label == b.label for a, b in zip(pool_f, noised)) / len(pool_f)
print(f"  realized label accuracy: {realized:.3f}")
