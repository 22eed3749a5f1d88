"""TF-IDF + one-vs-rest logistic regression: train two classifiers on the
benchmark, score them, and compare their decisions cell by cell."""

import numpy as np

from textforge import TfIdfVectorizer, TrainConfig, agreement, evaluate, predict_many, train
from textforge.synth import make_synthetic_benchmark

train_corpus, test_corpus = make_synthetic_benchmark(train_per_class=50, seed=5)
class_idx = {c: i for i, c in enumerate(train_corpus.classes)}

vec = TfIdfVectorizer().fit(train_corpus)
x_train = vec.transform_many(train_corpus.texts())
y_train = train_corpus.labels_as_indices()

model_full = train(x_train, y_train, TrainConfig(max_iter=2500), classes=train_corpus.classes)
model_tiny = train(x_train, y_train, TrainConfig(max_iter=5), classes=train_corpus.classes)
print("iterations run per class (full):", model_full.iterations)

x_test = vec.transform_many(test_corpus.texts())
gold = [class_idx[d.label] for d in test_corpus]
for name, model in (("converged", model_full), ("5-iteration", model_tiny)):
    report = evaluate(gold, predict_many(model, x_test).tolist(),
                      len(train_corpus.classes), class_labels=train_corpus.classes)
    print(f"\n{name} model: micro-F1 {report.micro_f1:.4f}  "
          f"macro-F1 {report.macro_f1:.4f}  MCC {report.mcc:.4f}")
    for pc in report.per_class:
        print(f"  {pc.label}: P {pc.precision:.3f}  R {pc.recall:.3f}  F1 {pc.f1:.3f}")

pred_a = predict_many(model_full, x_test)
pred_b = predict_many(model_tiny, x_test)
rep = agreement(gold, pred_a, pred_b, n_classes=len(train_corpus.classes),
                class_labels=train_corpus.classes)
agree_count = int(rep.both.sum())
print(f"\nmodels agree on {agree_count}/{len(gold)} test documents")
print("shared errors per (gold, predicted) cell:")
print(np.array2string(rep.shared_errors(), prefix="  "))
