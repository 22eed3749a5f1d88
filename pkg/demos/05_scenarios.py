"""The four training scenarios side by side on the synthetic benchmark:
baseline (originals only), substitution (generated only), complement
(originals + generated), and sequential (generated then originals)."""

from textforge import ScenarioSpec, run_scenario
from textforge.synth import make_synthetic_benchmark

train, test = make_synthetic_benchmark(train_per_class=50, seed=0)
counts = {c: len(train.restrict(c)) for c in train.classes}
print(f"benchmark: train counts {counts}, test {len(test)} docs\n")

print(f"{'scenario':<26} {'micro-F1':>9} {'macro-F1':>9} {'MCC':>7}  train sizes")
for kind, filtered in [("baseline", False), ("substitution", True),
                       ("complement", True), ("sequential", True)]:
    spec = ScenarioSpec(kind=kind, filtered=filtered, seed=0, gen_count=2000)
    result = run_scenario(train, test, spec)
    r = result.report
    name = kind + (" (filtered)" if filtered else "")
    print(f"{name:<26} {r.micro_f1:>9.4f} {r.macro_f1:>9.4f} {r.mcc:>7.4f}  "
          f"{list(result.train_sizes)}")

print("\nthe complement and substitution rows rebalance the skewed training set")
print("with 2000 generated documents per class, which is where the macro-F1")
print("gain over the baseline comes from.")
