"""Class-conditional generation: fit a per-class n-gram model on the
synthetic benchmark and sample new documents with the default
temperature / top-k / top-p pipeline."""

from textforge import SamplerConfig, fit_lm, generate_corpus
from textforge.synth import make_synthetic_benchmark

train, _ = make_synthetic_benchmark(train_per_class=50, seed=1)
label = train.classes[0]
sub = train.restrict(label)
print(f"fitting an order-4 model on {len(sub)} documents of class {label!r}")

lm = fit_lm(sub, order=4, discount=0.75)
print(f"vocabulary: {len(lm.vocab)} tokens")

dist = lm.next_token_dist([])
top = sorted(dist.items(), key=lambda kv: -kv[1])[:5]
print("most likely sentence openers:", [t for t, _ in top])

generated = generate_corpus(lm, label, count=5,
                            config=SamplerConfig(seed=42), prompt_source=sub)
print("\nfive generated documents (prompt word first):")
for doc in generated:
    print(f"  [{doc.gen_meta.prompt_word:>6}] {doc.text}")

again = generate_corpus(lm, label, count=5,
                        config=SamplerConfig(seed=42), prompt_source=sub)
print("\nsame seed reproduces the corpus exactly:", generated == again)
