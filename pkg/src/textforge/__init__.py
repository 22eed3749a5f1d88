"""textforge: generate class-conditional artificial text corpora, filter
them for leakage and label fidelity, and evaluate them as substitutes for or
complements to the original training data of bag-of-words classifiers."""

from .corpus import (
    ClassStats,
    Document,
    GenMeta,
    LabeledCorpus,
    class_stats,
    from_documents,
    load_corpus,
    merge,
    save_corpus,
    stratified_split,
)
from .filters import FilterReport, ShingleIndex, inject_label_noise, label_filter, leakage_filter
from .generation import (
    ClassConditionalLM,
    GenerationClient,
    GenerationRequest,
    GenerationResult,
    SamplerConfig,
    draw_prompt_word,
    external_generate,
    fit_lm,
    generate_corpus,
    sample_next,
)
from .linear_classifier import (
    LinearModel,
    TrainConfig,
    load_model,
    predict,
    predict_many,
    predict_scores,
    save_model,
    train,
)
from .metrics import AgreementReport, EvaluationReport, agreement, confusion_matrix, evaluate
from .scenarios import (
    ScenarioResult,
    ScenarioSpec,
    SweepCell,
    emit_report,
    run_filter_quality_sweep,
    run_scenario,
)
from .synth import make_synthetic_benchmark
from .text_norm import tokenize
from .vectorizer import SparseVector, TfIdfVectorizer

__version__ = "0.1.0"

__all__ = [
    "AgreementReport", "ClassConditionalLM", "ClassStats", "Document",
    "EvaluationReport", "FilterReport", "GenMeta", "GenerationClient",
    "GenerationRequest", "GenerationResult", "LabeledCorpus", "LinearModel",
    "SamplerConfig", "ScenarioResult", "ScenarioSpec", "ShingleIndex",
    "SparseVector", "SweepCell", "TfIdfVectorizer", "TrainConfig",
    "agreement", "class_stats", "confusion_matrix", "draw_prompt_word",
    "emit_report", "evaluate", "external_generate", "fit_lm",
    "from_documents", "generate_corpus", "inject_label_noise",
    "label_filter", "leakage_filter", "load_corpus", "load_model", "merge",
    "make_synthetic_benchmark", "predict", "predict_many", "predict_scores",
    "run_filter_quality_sweep", "run_scenario", "sample_next", "save_corpus",
    "save_model", "stratified_split", "tokenize", "train",
]
