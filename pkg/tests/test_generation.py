import numpy as np
import pytest

from textforge.corpus import Document, from_documents
from textforge.generation import (
    ClassConditionalLM,
    SamplerConfig,
    derive_seed,
    draw_prompt_word,
    fit_lm,
    generate_corpus,
    sample_next,
)

from conftest import random_token_corpus


def _one_doc(text, label="x"):
    return from_documents([Document(id="d0", text=text, label=label)])


# -- fit_lm --------------------------------------------------------------


def test_bigram_probabilities_hand_computed():
    # one doc "a b", order 2, discount d:
    #   P(b|a) = (1-d)/1 + d * P1(b),  P1 = add-1 unigram = 1/3 each of {a,b,</s>}
    d = 0.4
    lm = fit_lm(_one_doc("a b"), order=2, discount=d)
    expected = (1 - d) + d / 3
    assert lm.next_token_dist(["a"])["b"] == pytest.approx(expected, abs=1e-12)
    assert lm.next_token_dist(["b"])["</s>"] == pytest.approx(expected, abs=1e-12)
    assert expected >= 0.5


def test_distributions_sum_to_one_over_random_contexts():
    rng = np.random.default_rng(0)
    vocab = [f"w{i}" for i in range(25)]
    corpus = random_token_corpus(rng, ["x"], 40, vocab)
    lm = fit_lm(corpus, order=4, discount=0.75)
    all_tokens = vocab + ["unseen-token"]
    for _ in range(1000):
        ctx_len = int(rng.integers(0, 4))
        ctx = [all_tokens[int(rng.integers(len(all_tokens)))] for _ in range(ctx_len)]
        total = sum(lm.next_token_dist(ctx).values())
        assert total == pytest.approx(1.0, abs=1e-9)


def test_unseen_context_backs_off_to_unigram():
    lm = fit_lm(_one_doc("a b"), order=2, discount=0.4)
    dist = lm.next_token_dist(["zzz"])
    assert dist == pytest.approx({"a": 1 / 3, "b": 1 / 3, "</s>": 1 / 3})


def test_fit_lm_validation():
    with pytest.raises(ValueError, match="empty"):
        fit_lm(from_documents([]), order=2, discount=0.5)
    mixed = from_documents([
        Document(id="1", text="a", label="x"),
        Document(id="2", text="b", label="y"),
    ])
    with pytest.raises(ValueError, match="one class"):
        fit_lm(mixed, order=2, discount=0.5)
    with pytest.raises(ValueError, match="order"):
        fit_lm(_one_doc("a b"), order=1, discount=0.5)
    with pytest.raises(ValueError, match="discount"):
        fit_lm(_one_doc("a b"), order=2, discount=1.0)


# -- sample_next ---------------------------------------------------------


def _scalar_pipeline(dist: dict, temperature: float, top_k: int, top_p: float) -> dict:
    """Independent reimplementation of the truncation pipeline in plain
    Python, used as the oracle for the numpy version."""
    items = {t: p ** (1.0 / temperature) for t, p in dist.items()}
    total = sum(items.values())
    items = {t: p / total for t, p in items.items()}
    ranked = sorted(items.items(), key=lambda kv: (-kv[1], kv[0]))
    ranked = ranked[:top_k]
    total = sum(p for _, p in ranked)
    ranked = [(t, p / total) for t, p in ranked]
    kept, cum = [], 0.0
    for t, p in ranked:
        kept.append((t, p))
        cum += p
        if cum >= top_p - 1e-12:
            break
    total = sum(p for _, p in kept)
    return {t: p / total for t, p in kept}


def test_top_k_one_returns_argmax():
    dist = {"a": 0.2, "b": 0.5, "c": 0.3}
    rng = np.random.default_rng(0)
    for temp in (0.3, 1.0, 4.0):
        cfg = SamplerConfig(temperature=temp, top_k=1, top_p=1.0)
        for _ in range(20):
            assert sample_next(dist, cfg, rng) == "b"


def test_top_p_prefix_rule_on_uniform():
    dist = {"a": 0.25, "b": 0.25, "c": 0.25, "d": 0.25}
    oracle = _scalar_pipeline(dist, 1.0, 40, 0.5)
    assert set(oracle) == {"a", "b"}          # lexicographic tie-break
    assert oracle["a"] == pytest.approx(0.5)
    rng = np.random.default_rng(1)
    cfg = SamplerConfig(temperature=1.0, top_k=40, top_p=0.5)
    seen = {sample_next(dist, cfg, rng) for _ in range(500)}
    assert seen == {"a", "b"}


def test_pipeline_order_top_k_before_top_p():
    # top_k = 2 removes c entirely even with top_p = 1.0
    dist = {"a": 0.5, "b": 0.3, "c": 0.2}
    rng = np.random.default_rng(2)
    cfg = SamplerConfig(temperature=1.0, top_k=2, top_p=1.0)
    draws = [sample_next(dist, cfg, rng) for _ in range(10000)]
    assert "c" not in draws


def test_monte_carlo_matches_scalar_oracle():
    dist = {"a": 0.7, "b": 0.2, "c": 0.1}
    cfg = SamplerConfig(temperature=1.0, top_k=40, top_p=1.0)
    oracle = _scalar_pipeline(dist, 1.0, 40, 1.0)
    rng = np.random.default_rng(3)
    n = 10000
    counts = {t: 0 for t in dist}
    for _ in range(n):
        counts[sample_next(dist, cfg, rng)] += 1
    tv = 0.5 * sum(abs(counts[t] / n - oracle.get(t, 0.0)) for t in dist)
    assert tv < 0.02


def test_sample_next_empty_distribution_raises():
    with pytest.raises(ValueError, match="empty"):
        sample_next({}, SamplerConfig(), np.random.default_rng(0))


def test_sampler_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(temperature=0.0)
    with pytest.raises(ValueError):
        SamplerConfig(top_p=0.0)
    with pytest.raises(ValueError):
        SamplerConfig(top_p=1.5)
    with pytest.raises(ValueError):
        SamplerConfig(top_k=0)
    with pytest.raises(ValueError):
        SamplerConfig(max_tokens=0)


# -- draw_prompt_word ------------------------------------------------------


def test_prompt_word_singleton():
    corpus = _one_doc("a")
    rng = np.random.default_rng(0)
    assert all(draw_prompt_word(corpus, rng) == "a" for _ in range(10))


def test_prompt_word_frequency_weighted():
    corpus = _one_doc("a a b")
    rng = np.random.default_rng(1)
    n = 10000
    hits = sum(draw_prompt_word(corpus, rng) == "a" for _ in range(n))
    assert hits / n == pytest.approx(2 / 3, abs=0.03)


def test_prompt_word_seed_determinism():
    corpus = _one_doc("a b c d e")
    a = [draw_prompt_word(corpus, np.random.default_rng(7)) for _ in range(5)]
    b = [draw_prompt_word(corpus, np.random.default_rng(7)) for _ in range(5)]
    assert a == b


def test_prompt_word_empty_corpus_raises():
    with pytest.raises(ValueError):
        draw_prompt_word(from_documents([]), np.random.default_rng(0))


# -- generate_corpus -------------------------------------------------------


def test_argmax_walk_reproduces_training_text():
    lm = fit_lm(_one_doc("a b"), order=2, discount=0.4)
    prompt_src = from_documents([Document(id="p", text="a", label="x")])
    out = generate_corpus(lm, "x", 5, SamplerConfig(top_k=1, seed=0), prompt_src)
    assert [d.text for d in out] == ["a b"] * 5


def test_generate_corpus_contract():
    corpus = _one_doc("a b c a b c d")
    lm = fit_lm(corpus, order=3, discount=0.75)
    out = generate_corpus(lm, "x", 5, SamplerConfig(seed=11), corpus)
    assert len(out) == 5
    assert out.classes == ("x",)
    for doc in out:
        assert doc.label == "x"
        assert doc.provenance == "generated"
        assert doc.gen_meta is not None
        assert doc.gen_meta.intended_label == "x"
        assert doc.gen_meta.backend_id == "ngram-order3"
        assert doc.gen_meta.prompt_word == doc.tokens()[0]
        assert "<s>" not in doc.tokens() and "</s>" not in doc.tokens()
        assert len(doc.tokens()) <= 120


def test_generate_corpus_deterministic():
    corpus = _one_doc("a b c a b d e")
    lm = fit_lm(corpus, order=3, discount=0.75)
    a = generate_corpus(lm, "x", 8, SamplerConfig(seed=21), corpus)
    b = generate_corpus(lm, "x", 8, SamplerConfig(seed=21), corpus)
    assert a == b
    c = generate_corpus(lm, "x", 8, SamplerConfig(seed=22), corpus)
    assert [d.text for d in a] != [d.text for d in c]


def test_generate_corpus_respects_max_tokens():
    # LM with no </s> mass concentrated: force long walks, cap at max_tokens
    rng = np.random.default_rng(4)
    vocab = [f"w{i}" for i in range(10)]
    corpus = random_token_corpus(rng, ["x"], 20, vocab, doc_len=(30, 40))
    lm = fit_lm(corpus, order=2, discount=0.75)
    out = generate_corpus(lm, "x", 5, SamplerConfig(seed=5, max_tokens=15), corpus)
    for doc in out:
        assert len(doc.tokens()) <= 15


def test_generate_corpus_count_validation():
    lm = fit_lm(_one_doc("a b"), order=2, discount=0.5)
    with pytest.raises(ValueError):
        generate_corpus(lm, "x", 0, SamplerConfig(), _one_doc("a b"))


def test_wrong_label_for_lm_raises():
    lm = fit_lm(_one_doc("a b"), order=2, discount=0.5)
    from textforge.generation import GenerationError
    with pytest.raises(GenerationError, match="fitted for class"):
        generate_corpus(lm, "y", 1, SamplerConfig(), _one_doc("a b"))


def test_derive_seed_is_stable():
    assert derive_seed(42, 0) == derive_seed(42, 0)
    assert derive_seed(42, 0) != derive_seed(42, 1)
    assert derive_seed(42, 0) != derive_seed(43, 0)


def test_lm_serialization_round_trip(tmp_path):
    corpus = _one_doc("a b c a b c d e f")
    lm = fit_lm(corpus, order=3, discount=0.6)
    path = tmp_path / "lm.json"
    lm.save(path)
    again = ClassConditionalLM.load(path)
    assert again.to_json() == lm.to_json()
    g1 = generate_corpus(lm, "x", 4, SamplerConfig(seed=2), corpus)
    g2 = generate_corpus(again, "x", 4, SamplerConfig(seed=2), corpus)
    assert g1 == g2
