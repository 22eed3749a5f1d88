"""Command-line entry point wiring all pipeline stages.

Subcommands compose the library operations 1:1: ingest, fit-lm, generate,
filter-leak, filter-label, inject-noise, train, evaluate, scenario, sweep,
agree.  Configuration precedence is flags > config file (JSON) > defaults;
all randomness derives from --seed (env fallback TEXTFORGE_SEED, default
42).  File outputs are written atomically and every result JSON embeds the
fully-resolved configuration, so a run is reproducible from its output.
"""

import argparse
import json
import os
import sys

from . import linear_classifier as lc
from .corpus import CorpusFormatError, class_stats, load_corpus, save_corpus
from .filters import inject_label_noise, label_filter, leakage_filter
from .generation import (
    ClassConditionalLM,
    GenerationClient,
    GenerationError,
    SamplerConfig,
    fit_lm,
    generate_corpus,
)
from .metrics import agreement, evaluate
from .scenarios import (
    ScenarioSpec,
    ScenarioStageError,
    emit_report,
    run_filter_quality_sweep,
    run_scenario,
)
from .vectorizer import TfIdfVectorizer

DEFAULT_SEED = 42
DEFAULT_ACCURACY_GRID = "0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"

_ERRORS = (ValueError, OSError, CorpusFormatError, GenerationError, ScenarioStageError)


def _env_seed() -> int:
    raw = os.environ.get("TEXTFORGE_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"TEXTFORGE_SEED must be an integer, got {raw!r}")


def _atomic_write_json(path, payload: dict):
    path = os.fspath(path)
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_write_text(path, text: str):
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


class _Resolved(dict):
    """Flags > config-file section > registered defaults."""

    def __getattr__(self, name):
        try:
            return self[name]
        except KeyError:
            raise AttributeError(name)


def _resolve(args, command: str, defaults: dict) -> _Resolved:
    merged = dict(defaults)
    config = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError("config file must hold a JSON object")
    section = config.get(command, {})
    if not isinstance(section, dict):
        raise ValueError(f"config section {command!r} must be a JSON object")
    for key in merged:
        if key in section:
            merged[key] = section[key]
    for key in merged:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
    if merged.get("seed") is None:
        merged["seed"] = config.get("seed", _env_seed())
    return _Resolved(merged)


def _sampler_from(cfg) -> SamplerConfig:
    return SamplerConfig(
        temperature=cfg.temperature,
        top_p=cfg.top_p,
        top_k=cfg.top_k,
        max_tokens=cfg.max_tokens,
        seed=cfg.seed,
    )


def _load_model_and_vectorizer(model_path, vectorizer_path):
    vec = TfIdfVectorizer.load(vectorizer_path)
    model = lc.load_model(model_path, expected_fingerprint=vec.fingerprint())
    return model, vec


# -- subcommand implementations -----------------------------------------


def _cmd_ingest(args):
    cfg = _resolve(args, "ingest", {
        "input": None, "format": None, "output": None, "seed": None,
    })
    corpus = load_corpus(cfg.input, format=cfg.format)
    save_corpus(corpus, cfg.output)
    stats = class_stats(corpus)
    print(f"ingested {len(corpus)} documents, {len(corpus.classes)} classes -> {cfg.output}")
    for c in corpus.classes:
        print(f"  {c}: {stats.doc_counts[c]} docs, {stats.token_counts[c]} tokens")
    print(f"  imbalance ratio: {stats.imbalance_ratio:.3f}")
    return 0


def _cmd_fit_lm(args):
    cfg = _resolve(args, "fit-lm", {
        "train": None, "label": None, "order": 4, "discount": 0.75,
        "output": None, "seed": None,
    })
    corpus = load_corpus(cfg.train)
    lm = fit_lm(corpus.restrict(cfg.label), order=cfg.order, discount=cfg.discount)
    lm.save(cfg.output)
    print(f"fitted order-{cfg.order} LM for class {cfg.label!r} "
          f"({len(lm.vocab)} token vocabulary) -> {cfg.output}")
    return 0


def _cmd_generate(args):
    cfg = _resolve(args, "generate", {
        "lm": None, "endpoint": None, "label": None, "count": 16000,
        "temperature": 0.7, "top_p": 0.9, "top_k": 40, "max_tokens": 120,
        "prompt_source": None, "output": None, "timeout": 30.0,
        "concurrency": 4, "seed": None,
    })
    if (cfg.lm is None) == (cfg.endpoint is None):
        raise ValueError("exactly one of --lm and --endpoint is required")
    source = load_corpus(cfg.prompt_source)
    prompt_source = source.restrict(cfg.label) if cfg.label in source.classes else source
    if cfg.lm is not None:
        backend = ClassConditionalLM.load(cfg.lm)
    else:
        backend = GenerationClient(cfg.endpoint, timeout=cfg.timeout,
                                   concurrency=cfg.concurrency)
    generated = generate_corpus(backend, cfg.label, cfg.count,
                                _sampler_from(cfg), prompt_source)
    save_corpus(generated, cfg.output)
    print(f"generated {len(generated)} documents for class {cfg.label!r} -> {cfg.output}")
    return 0


def _write_filter_outputs(cfg, kept, report, what: str):
    save_corpus(kept, cfg.output)
    if cfg.report:
        _atomic_write_json(cfg.report, {"config": dict(cfg), "report": report.to_dict()})
    print(f"{what}: kept {report.kept_count}/{report.input_count} "
          f"(removal rate {report.removal_rate:.3f}) -> {cfg.output}")


def _cmd_filter_leak(args):
    cfg = _resolve(args, "filter-leak", {
        "generated": None, "originals": None, "window": 5,
        "all_classes": False, "output": None, "report": None, "seed": None,
    })
    generated = load_corpus(cfg.generated)
    originals = load_corpus(cfg.originals)
    kept, report = leakage_filter(generated, originals, window=cfg.window,
                                  all_classes=cfg.all_classes)
    _write_filter_outputs(cfg, kept, report, "leakage filter")
    return 0


def _cmd_filter_label(args):
    cfg = _resolve(args, "filter-label", {
        "generated": None, "model": None, "vectorizer": None,
        "output": None, "report": None, "seed": None,
    })
    generated = load_corpus(cfg.generated)
    model, vec = _load_model_and_vectorizer(cfg.model, cfg.vectorizer)
    kept, report = label_filter(generated, model, vec)
    _write_filter_outputs(cfg, kept, report, "label filter")
    return 0


def _cmd_inject_noise(args):
    cfg = _resolve(args, "inject-noise", {
        "input": None, "accuracy": None, "output": None, "report": None,
        "seed": None,
    })
    corpus = load_corpus(cfg.input)
    noised, report = inject_label_noise(corpus, cfg.accuracy, cfg.seed)
    _write_filter_outputs(cfg, noised, report, f"label noise (target accuracy {cfg.accuracy})")
    return 0


def _cmd_train(args):
    cfg = _resolve(args, "train", {
        "train": None, "model_out": None, "vectorizer_out": None,
        "vectorizer": None, "warm_start": None,
        "max_iter": 2500, "tol": 1e-6, "C": 1.0, "seed": None,
    })
    corpus = load_corpus(cfg.train)
    if cfg.vectorizer:
        vec = TfIdfVectorizer.load(cfg.vectorizer)
    else:
        vec = TfIdfVectorizer().fit(corpus)
    warm = None
    if cfg.warm_start:
        if not cfg.vectorizer:
            raise ValueError("--warm-start requires --vectorizer (the feature space must match)")
        warm = lc.load_model(cfg.warm_start, expected_fingerprint=vec.fingerprint())
    config = lc.TrainConfig(max_iter=cfg.max_iter, tol=cfg.tol, C=cfg.C,
                            seed=cfg.seed, warm_start=warm)
    x = vec.transform_many(corpus.texts())
    model = lc.train(x, corpus.labels_as_indices(), config, classes=corpus.classes)
    model.vectorizer_fingerprint = vec.fingerprint()
    lc.save_model(model, cfg.model_out)
    if cfg.vectorizer_out:
        vec.save(cfg.vectorizer_out)
    iters = ", ".join(str(i) for i in model.iterations)
    print(f"trained one-vs-rest model on {len(corpus)} docs "
          f"({len(corpus.classes)} classes; iterations per class: {iters}) -> {cfg.model_out}")
    return 0


def _cmd_evaluate(args):
    cfg = _resolve(args, "evaluate", {
        "model": None, "vectorizer": None, "test": None, "output": None,
        "seed": None,
    })
    test = load_corpus(cfg.test)
    model, vec = _load_model_and_vectorizer(cfg.model, cfg.vectorizer)
    class_idx = {c: i for i, c in enumerate(model.classes)}
    unknown = [d.label for d in test if d.label not in class_idx]
    if unknown:
        raise ValueError(f"test corpus has labels unknown to the model: {sorted(set(unknown))}")
    preds = lc.predict_many(model, vec.transform_many(test.texts()))
    gold = [class_idx[d.label] for d in test]
    report = evaluate(gold, preds, len(model.classes), class_labels=model.classes)
    if cfg.output:
        _atomic_write_json(cfg.output, {"config": dict(cfg), "metrics": report.to_dict()})
    print(f"micro-F1 {report.micro_f1:.4f}  macro-F1 {report.macro_f1:.4f}  "
          f"MCC {report.mcc:.4f}")
    return 0


def _scenario_spec_from(cfg) -> ScenarioSpec:
    return ScenarioSpec(
        kind=cfg.kind,
        filtered=cfg.filtered,
        seed=cfg.seed,
        gen_count=cfg.count,
        lm_order=cfg.order,
        lm_discount=cfg.discount,
        sampler=SamplerConfig(temperature=cfg.temperature, top_p=cfg.top_p,
                              top_k=cfg.top_k, max_tokens=cfg.max_tokens),
        leak_window=cfg.window,
        leak_all_classes=cfg.all_classes,
        train_config=lc.TrainConfig(max_iter=cfg.max_iter, tol=cfg.tol, C=cfg.C),
        noise_accuracy=cfg.noise_accuracy,
    )


_SCENARIO_DEFAULTS = {
    "train": None, "test": None, "kind": None, "filtered": False,
    "count": 16000, "order": 4, "discount": 0.75, "window": 5,
    "all_classes": False, "temperature": 0.7, "top_p": 0.9, "top_k": 40,
    "max_tokens": 120, "max_iter": 2500, "tol": 1e-6, "C": 1.0,
    "noise_accuracy": None, "output": None, "seed": None,
}


def _cmd_scenario(args):
    cfg = _resolve(args, "scenario", dict(_SCENARIO_DEFAULTS))
    train = load_corpus(cfg.train)
    test = load_corpus(cfg.test)
    result = run_scenario(train, test, _scenario_spec_from(cfg))
    payload = {"config": dict(cfg), "result": result.to_dict()}
    if cfg.output:
        _atomic_write_json(cfg.output, payload)
    if args.verbose:
        for stage, secs in result.timings.items():
            print(f"  [{stage}] {secs:.2f}s", file=sys.stderr)
    r = result.report
    print(f"{cfg.kind}{' (filtered)' if cfg.filtered else ''}: "
          f"micro-F1 {r.micro_f1:.4f}  macro-F1 {r.macro_f1:.4f}  MCC {r.mcc:.4f}")
    return 0


def _cmd_sweep(args):
    defaults = dict(_SCENARIO_DEFAULTS)
    defaults.pop("kind")
    defaults.pop("filtered")
    defaults.pop("noise_accuracy")
    defaults.update({
        "accuracies": DEFAULT_ACCURACY_GRID,
        "strategies": "substitution,complement",
        "seeds": None,
        "jobs": 1,
    })
    cfg = _resolve(args, "sweep", defaults)
    train = load_corpus(cfg.train)
    test = load_corpus(cfg.test)
    accuracies = [float(a) for a in str(cfg.accuracies).split(",") if a]
    strategies = [s.strip() for s in str(cfg.strategies).split(",") if s.strip()]
    seeds = [int(s) for s in str(cfg.seeds).split(",") if s] if cfg.seeds else [cfg.seed]
    base = _scenario_spec_from(_Resolved({**cfg, "kind": "baseline", "filtered": False,
                                          "noise_accuracy": None}))
    cells = run_filter_quality_sweep(train, test, accuracies, strategies,
                                     seeds=seeds, base_spec=base, jobs=cfg.jobs)
    json_path, csv_path = emit_report(cells, cfg.output)
    print(f"swept {len(accuracies)} accuracies x {len(strategies)} strategies "
          f"x {len(seeds)} seeds -> {json_path}, {csv_path}")
    return 0


def _cmd_agree(args):
    cfg = _resolve(args, "agree", {
        "test": None, "model_a": None, "vectorizer_a": None,
        "model_b": None, "vectorizer_b": None, "output": None, "seed": None,
    })
    test = load_corpus(cfg.test)
    model_a, vec_a = _load_model_and_vectorizer(cfg.model_a, cfg.vectorizer_a)
    model_b, vec_b = _load_model_and_vectorizer(cfg.model_b, cfg.vectorizer_b)
    if model_a.classes != model_b.classes:
        raise ValueError("models must share the same class order to be compared")
    class_idx = {c: i for i, c in enumerate(model_a.classes)}
    gold = [class_idx[d.label] for d in test]
    pred_a = lc.predict_many(model_a, vec_a.transform_many(test.texts()))
    pred_b = lc.predict_many(model_b, vec_b.transform_many(test.texts()))
    rep = agreement(gold, pred_a, pred_b, n_classes=len(model_a.classes),
                    class_labels=model_a.classes)
    if cfg.output:
        _atomic_write_json(cfg.output, {"config": dict(cfg), "agreement": rep.to_dict()})
    agree_n = int(rep.both.sum())
    total = len(gold)
    shared = int(rep.shared_errors().sum())
    print(f"models agree on {agree_n}/{total} documents; shared errors: {shared}")
    return 0


# -- parser ---------------------------------------------------------------


def _add_common(p):
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: $TEXTFORGE_SEED or 42)")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textforge",
        description="Generate, filter and evaluate artificial training texts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a JSONL/CSV corpus, validate, re-emit JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default=None)
    p.add_argument("--output", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("fit-lm", help="fit a per-class n-gram language model")
    p.add_argument("--train", required=True)
    p.add_argument("--class", dest="label", required=True)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--discount", type=float, default=None)
    p.add_argument("--output", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_fit_lm)

    p = sub.add_parser("generate", help="generate texts for one class")
    p.add_argument("--lm", default=None, help="serialized LM file (built-in backend)")
    p.add_argument("--endpoint", default=None, help="external generation service URL")
    p.add_argument("--class", dest="label", required=True)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--top-p", type=float, default=None)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--max-tokens", type=int, default=None)
    p.add_argument("--prompt-source", required=True, help="corpus to draw prompt words from")
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--concurrency", type=int, default=None)
    p.add_argument("--output", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("filter-leak", help="remove generated texts overlapping originals")
    p.add_argument("--generated", required=True)
    p.add_argument("--originals", required=True)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--all-classes", action="store_const", const=True, default=None)
    p.add_argument("--output", required=True)
    p.add_argument("--report", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_filter_leak)

    p = sub.add_parser("filter-label", help="keep generated texts the filter classifier agrees with")
    p.add_argument("--generated", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--vectorizer", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_filter_label)

    p = sub.add_parser("inject-noise", help="randomly re-label documents to a target accuracy")
    p.add_argument("--input", required=True)
    p.add_argument("--accuracy", type=float, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_inject_noise)

    p = sub.add_parser("train", help="fit TF-IDF + one-vs-rest logistic regression")
    p.add_argument("--train", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--vectorizer-out", default=None)
    p.add_argument("--vectorizer", default=None, help="reuse an existing vectorizer")
    p.add_argument("--warm-start", default=None, help="continue from an existing model")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--C", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score a model on a test corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--vectorizer", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--output", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("scenario", help="run one training scenario end to end")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--kind", required=True,
                   choices=["baseline", "substitution", "complement", "sequential"])
    p.add_argument("--filtered", action="store_const", const=True, default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--discount", type=float, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--all-classes", action="store_const", const=True, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--top-p", type=float, default=None)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--max-tokens", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--C", type=float, default=None)
    p.add_argument("--noise-accuracy", type=float, default=None)
    p.add_argument("--output", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("sweep", help="filter-quality sweep over an accuracy grid")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--accuracies", default=None, help=f"default {DEFAULT_ACCURACY_GRID}")
    p.add_argument("--strategies", default=None, help="default substitution,complement")
    p.add_argument("--seeds", default=None, help="comma-separated; default the master seed")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--discount", type=float, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--all-classes", action="store_const", const=True, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--top-p", type=float, default=None)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--max-tokens", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--C", type=float, default=None)
    p.add_argument("--output", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("agree", help="agreement analysis between two models")
    p.add_argument("--test", required=True)
    p.add_argument("--model-a", required=True)
    p.add_argument("--vectorizer-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--vectorizer-b", required=True)
    p.add_argument("--output", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_agree)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioStageError as e:
        print(f"textforge: error in {e.stage} stage: {e.error}", file=sys.stderr)
        return 1
    except _ERRORS as e:
        print(f"textforge: error: {e}", file=sys.stderr)
        return 1


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
