"""Experiment harness: the four training scenarios (baseline, substitution,
complement, sequential) and the filter-quality sweep.

Pipeline for a non-baseline run: fit one n-gram LM per class on the original
training set, generate per class, apply the leakage filter against the
originals, optionally train a filter classifier on the originals and apply
the label filter, optionally inject label noise (the simulated filter),
assemble the final training set, fit the vectorizer on it, train, evaluate
on the held-out test set.  Everything is derived from the spec seed.
"""

import csv
import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace

from . import corpus as corpus_mod
from . import linear_classifier as lc
from .corpus import LabeledCorpus
from .filters import inject_label_noise, label_filter, leakage_filter
from .generation import SamplerConfig, derive_seed, fit_lm, generate_corpus
from .linear_classifier import TrainConfig
from .metrics import EvaluationReport, evaluate
from .vectorizer import TfIdfVectorizer

SCENARIO_KINDS = ("baseline", "substitution", "complement", "sequential")

_NOISE_TAG = 10_001


class ScenarioStageError(RuntimeError):
    def __init__(self, stage: str, error: Exception):
        self.stage = stage
        self.error = error
        super().__init__(f"stage {stage!r}: {error}")


@contextmanager
def _stage(name: str, timings: dict):
    start = time.perf_counter()
    try:
        yield
    except ScenarioStageError:
        raise
    except Exception as e:
        raise ScenarioStageError(name, e) from e
    finally:
        timings[name] = time.perf_counter() - start


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    filtered: bool = False
    seed: int = 42
    gen_count: int = 16000
    lm_order: int = 4
    lm_discount: float = 0.75
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    leak_window: int = 5
    leak_all_classes: bool = False
    train_config: TrainConfig = field(default_factory=TrainConfig)
    filter_train_config: TrainConfig = field(default_factory=TrainConfig)
    noise_accuracy: float | None = None
    refit_vectorizer_on_final: bool = True

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.gen_count < 0:
            raise ValueError("gen_count must be >= 0")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "filtered": self.filtered,
            "seed": self.seed,
            "gen_count": self.gen_count,
            "lm_order": self.lm_order,
            "lm_discount": self.lm_discount,
            "sampler": {
                "temperature": self.sampler.temperature,
                "top_p": self.sampler.top_p,
                "top_k": self.sampler.top_k,
                "max_tokens": self.sampler.max_tokens,
            },
            "leak_window": self.leak_window,
            "leak_all_classes": self.leak_all_classes,
            "train": {
                "max_iter": self.train_config.max_iter,
                "tol": self.train_config.tol,
                "C": self.train_config.C,
            },
            "noise_accuracy": self.noise_accuracy,
            "refit_vectorizer_on_final": self.refit_vectorizer_on_final,
        }


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    report: EvaluationReport
    filter_reports: dict
    train_sizes: tuple[int, ...]
    classes: tuple[str, ...]
    timings: dict = field(default_factory=dict, repr=False)

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "classes": list(self.classes),
            "train_sizes": list(self.train_sizes),
            "metrics": self.report.to_dict(),
            "filter_reports": {k: r.to_dict() for k, r in self.filter_reports.items()},
        }
        if include_timings:
            out["timings"] = dict(self.timings)
        return out


def _pool_key(spec: ScenarioSpec) -> tuple:
    s = spec.sampler
    return (spec.seed, spec.gen_count, spec.lm_order, spec.lm_discount,
            s.temperature, s.top_p, s.top_k, s.max_tokens,
            spec.leak_window, spec.leak_all_classes, spec.filtered)


def _build_pool(train: LabeledCorpus, spec: ScenarioSpec, timings: dict):
    """Generated pool after leakage (and, when filtered, label) filtering."""
    reports = {}
    with _stage("fit-lms", timings):
        lms = {c: fit_lm(train.restrict(c), order=spec.lm_order, discount=spec.lm_discount)
               for c in train.classes}
    with _stage("generate", timings):
        if spec.gen_count > 0:
            parts = [
                generate_corpus(
                    lms[c], c, spec.gen_count,
                    replace(spec.sampler, seed=derive_seed(spec.seed, ci)),
                    train.restrict(c),
                )
                for ci, c in enumerate(train.classes)
            ]
            pool = corpus_mod.merge(*parts)
        else:
            pool = LabeledCorpus(documents=(), classes=train.classes)
    with _stage("leakage-filter", timings):
        pool, reports["leakage"] = leakage_filter(
            pool, train, window=spec.leak_window, all_classes=spec.leak_all_classes)
    if spec.filtered:
        with _stage("label-filter", timings):
            vec_t = TfIdfVectorizer().fit(train)
            x_t = vec_t.transform_many(train.texts())
            filter_model = lc.train(x_t, train.labels_as_indices(),
                                    spec.filter_train_config, classes=train.classes)
            filter_model.vectorizer_fingerprint = vec_t.fingerprint()
            pool, reports["label"] = label_filter(pool, filter_model, vec_t)
    return pool, reports


def run_scenario(train: LabeledCorpus, test: LabeledCorpus, spec: ScenarioSpec,
                 _pool_cache: dict | None = None) -> ScenarioResult:
    """Run one training scenario end to end; deterministic given spec.seed."""
    if set(train.classes) != set(test.classes):
        raise ValueError("train and test must share the same class set")
    if len(test) == 0:
        raise ValueError("test corpus is empty")

    timings: dict = {}
    reports: dict = {}
    pool = None

    if spec.kind != "baseline":
        key = _pool_key(spec)
        if _pool_cache is not None and key in _pool_cache:
            pool, reports = _pool_cache[key]
            reports = dict(reports)
        else:
            pool, reports = _build_pool(train, spec, timings)
            if _pool_cache is not None:
                _pool_cache[key] = (pool, dict(reports))
        if spec.noise_accuracy is not None:
            with _stage("inject-noise", timings):
                pool, reports["noise"] = inject_label_noise(
                    pool, spec.noise_accuracy, derive_seed(spec.seed, _NOISE_TAG))

    with _stage("assemble", timings):
        if spec.kind == "baseline":
            phases = [train]
        elif spec.kind == "substitution":
            if pool is None or len(pool) == 0:
                raise ValueError("empty training set (no generated documents to substitute)")
            phases = [pool]
        elif spec.kind == "complement":
            phases = [corpus_mod.merge(train, pool)] if len(pool) else [train]
        else:  # sequential
            if pool is None or len(pool) == 0:
                raise ValueError("empty training set for the generated phase")
            phases = [pool, train]

        test_ids = {d.id for d in test}
        for phase in phases:
            overlap = test_ids & {d.id for d in phase}
            if overlap:
                raise ValueError(f"test documents leaked into training: {sorted(overlap)[:5]}")

    with _stage("vectorize", timings):
        if spec.refit_vectorizer_on_final:
            fit_on = phases[0] if len(phases) == 1 else corpus_mod.merge(*phases)
        else:
            fit_on = train
        vec = TfIdfVectorizer().fit(fit_on)

    class_idx = {c: i for i, c in enumerate(train.classes)}
    with _stage("train", timings):
        model = None
        for phase_i, phase in enumerate(phases):
            cfg = spec.train_config
            max_iter = cfg.max_iter if phase_i == 0 else max(1, cfg.max_iter // 3)
            phase_cfg = TrainConfig(max_iter=max_iter, tol=cfg.tol, C=cfg.C,
                                    seed=cfg.seed, warm_start=model)
            x = vec.transform_many(phase.texts())
            y = [class_idx[d.label] for d in phase]
            model = lc.train(x, y, phase_cfg, classes=train.classes)
        model.vectorizer_fingerprint = vec.fingerprint()

    with _stage("evaluate", timings):
        x_test = vec.transform_many(test.texts())
        preds = lc.predict_many(model, x_test)
        gold = [class_idx[d.label] for d in test]
        report = evaluate(gold, preds, len(train.classes), class_labels=train.classes)

    return ScenarioResult(
        spec=spec,
        report=report,
        filter_reports=reports,
        train_sizes=tuple(len(p) for p in phases),
        classes=train.classes,
        timings=timings,
    )


@dataclass(frozen=True)
class SweepCell:
    accuracy: float | None
    strategy: str
    seed: int
    result: ScenarioResult


def run_filter_quality_sweep(train: LabeledCorpus, test: LabeledCorpus,
                             accuracies, strategies=("substitution", "complement"),
                             seeds=(0,), base_spec: ScenarioSpec | None = None,
                             jobs: int = 1) -> list[SweepCell]:
    """Simulate filters of varying accuracy by label-noising the generated
    pool, and run each strategy on the noised pool.

    A no-augmentation baseline cell is included per seed (accuracy None).
    With accuracy 1.0 no label changes and a cell reproduces the plain
    unfiltered scenario exactly.
    """
    n = len(train.classes)
    accuracies = list(accuracies)
    for a in accuracies:
        if not (1.0 / n < a <= 1.0):
            raise ValueError(f"accuracy {a} outside (1/{n}, 1]")
    for s in strategies:
        if s not in ("substitution", "complement", "sequential"):
            raise ValueError(f"unsupported sweep strategy {s!r}")
    if base_spec is None:
        base_spec = ScenarioSpec(kind="baseline")

    tasks = []
    for seed in seeds:
        tasks.append((None, "baseline", seed,
                      replace(base_spec, kind="baseline", seed=seed, noise_accuracy=None)))
        for a in accuracies:
            for strat in strategies:
                tasks.append((a, strat, seed,
                              replace(base_spec, kind=strat, filtered=False,
                                      seed=seed, noise_accuracy=a)))

    pool_cache: dict = {}
    if jobs > 1:
        # warm the per-seed generation pools serially, then train in parallel
        for seed in seeds:
            spec0 = replace(base_spec, kind=strategies[0], filtered=False,
                            seed=seed, noise_accuracy=None)
            _build_pool_into_cache(train, spec0, pool_cache)
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(
                lambda t: run_scenario(train, test, t[3], _pool_cache=pool_cache), tasks))
    else:
        results = [run_scenario(train, test, t[3], _pool_cache=pool_cache) for t in tasks]

    return [SweepCell(accuracy=a, strategy=s, seed=seed, result=r)
            for (a, s, seed, _), r in zip(tasks, results)]


def _build_pool_into_cache(train, spec, cache):
    key = _pool_key(spec)
    if key not in cache:
        cache[key] = _build_pool(train, spec, {})


def _as_row(item) -> dict:
    if isinstance(item, SweepCell):
        accuracy, strategy, seed, result = item.accuracy, item.strategy, item.seed, item.result
    else:
        result = item
        accuracy = result.spec.noise_accuracy
        strategy = result.spec.kind
        seed = result.spec.seed
    return {
        "accuracy": accuracy,
        "strategy": strategy,
        "seed": seed,
        "macro_f1": result.report.macro_f1,
        "micro_f1": result.report.micro_f1,
        "mcc": result.report.mcc,
        "result": result.to_dict(),
    }


def emit_report(results, path) -> tuple[str, str]:
    """Write a JSON results table plus a plotting CSV
    (columns accuracy,strategy,seed,macro_f1); returns both paths."""
    path = os.fspath(path)
    rows = [_as_row(r) for r in results]
    payload = json.dumps({"schema_version": 1, "results": rows},
                         ensure_ascii=False, sort_keys=True, indent=2)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(payload)
    os.replace(tmp, path)

    csv_path = os.path.splitext(path)[0] + ".csv"
    tmp = csv_path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["accuracy", "strategy", "seed", "macro_f1"])
        for row in rows:
            writer.writerow([
                "" if row["accuracy"] is None else row["accuracy"],
                row["strategy"], row["seed"], repr(row["macro_f1"]),
            ])
    os.replace(tmp, csv_path)
    return path, csv_path
