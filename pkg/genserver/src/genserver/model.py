"""A small word-level autoregressive language model (embedding + GRU +
softmax head) that can be initialized from a vocabulary, fine-tuned on a
one-class corpus for a bounded number of steps, and saved as a model
directory the server can load.

Deliberately tiny so fine-tuning runs in seconds on a CPU; the same code
paths scale to a larger budget (the real experiments behind this setup
fine-tune a large pretrained transformer for a ~2,000-epoch budget, about
an hour per dataset on a data-center accelerator — that regime is
documented here, not unit-tested).
"""

import json
from pathlib import Path

import torch
import torch.nn as nn
import torch.nn.functional as F

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
SPECIALS = (BOS, EOS, UNK)

MODEL_FILE = "weights.pt"
CONFIG_FILE = "config.json"


def simple_tokenize(text: str) -> list[str]:
    return text.lower().split()


class TinyCausalLM(nn.Module):
    def __init__(self, vocab: list[str], embed_dim: int = 32, hidden_dim: int = 64):
        super().__init__()
        for s in SPECIALS:
            if s not in vocab:
                raise ValueError(f"vocabulary must contain {s!r}")
        self.vocab = list(vocab)
        self.token_id = {t: i for i, t in enumerate(self.vocab)}
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.embedding = nn.Embedding(len(vocab), embed_dim)
        self.rnn = nn.GRU(embed_dim, hidden_dim, batch_first=True)
        self.head = nn.Linear(hidden_dim, len(vocab))

    def forward(self, ids: torch.Tensor, state: torch.Tensor | None = None):
        emb = self.embedding(ids)
        out, state = self.rnn(emb, state)
        return self.head(out), state

    def encode(self, tokens: list[str]) -> list[int]:
        unk = self.token_id[UNK]
        return [self.token_id.get(t, unk) for t in tokens]

    @torch.no_grad()
    def generate(self, prompt: str, max_tokens: int = 120, temperature: float = 0.7,
                 top_k: int = 40, top_p: float = 0.9, seed: int = 0) -> str:
        """Deterministic per seed: one torch.Generator drives all draws."""
        from .sampling import sample_token

        self.eval()
        gen = torch.Generator(device="cpu")
        gen.manual_seed(int(seed) & 0x7FFFFFFFFFFFFFFF)
        prompt_tokens = simple_tokenize(prompt)
        ids = self.encode([BOS] + prompt_tokens)
        x = torch.tensor([ids], dtype=torch.long)
        logits, state = self.forward(x)
        step_logits = logits[0, -1]

        eos_id = self.token_id[EOS]
        banned = torch.tensor([self.token_id[BOS], self.token_id[UNK]])
        out_tokens = list(prompt_tokens)
        while len(out_tokens) < max_tokens:
            masked = step_logits.clone()
            masked[banned] = float("-inf")
            next_id = sample_token(masked, temperature=temperature, top_k=top_k,
                                   top_p=top_p, generator=gen)
            if next_id == eos_id:
                break
            out_tokens.append(self.vocab[next_id])
            x = torch.tensor([[next_id]], dtype=torch.long)
            logits, state = self.forward(x, state)
            step_logits = logits[0, -1]
        return " ".join(out_tokens)


def build_vocab(texts: list[str]) -> list[str]:
    vocab = list(SPECIALS)
    seen = set(vocab)
    for text in texts:
        for tok in simple_tokenize(text):
            if tok not in seen:
                seen.add(tok)
                vocab.append(tok)
    return vocab


def save_model_dir(model: TinyCausalLM, out_dir, extra: dict | None = None) -> str:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {
        "format_version": 1,
        "kind": "tiny-causal-lm",
        "vocab": model.vocab,
        "embed_dim": model.embed_dim,
        "hidden_dim": model.hidden_dim,
    }
    if extra:
        config.update(extra)
    (out_dir / CONFIG_FILE).write_text(json.dumps(config, ensure_ascii=False))
    torch.save(model.state_dict(), out_dir / MODEL_FILE)
    return str(out_dir)


def load_model_dir(model_dir) -> TinyCausalLM:
    model_dir = Path(model_dir)
    config_path = model_dir / CONFIG_FILE
    weights_path = model_dir / MODEL_FILE
    if not config_path.is_file() or not weights_path.is_file():
        raise FileNotFoundError(f"{model_dir} is not a model directory "
                                f"(needs {CONFIG_FILE} and {MODEL_FILE})")
    config = json.loads(config_path.read_text())
    if config.get("kind") != "tiny-causal-lm":
        raise ValueError(f"{model_dir}: unknown model kind {config.get('kind')!r}")
    model = TinyCausalLM(config["vocab"], config["embed_dim"], config["hidden_dim"])
    model.load_state_dict(torch.load(weights_path, weights_only=True))
    model.eval()
    return model


def init_base(vocab_source: list[str], out_dir, embed_dim: int = 32,
              hidden_dim: int = 64, seed: int = 0) -> str:
    """Create a randomly initialized base model over the given texts' vocabulary."""
    torch.manual_seed(seed)
    model = TinyCausalLM(build_vocab(vocab_source), embed_dim, hidden_dim)
    return save_model_dir(model, out_dir, extra={"base_seed": seed})


def finetune(texts: list[str], base_dir, steps: int, out_dir,
             lr: float = 5e-3, batch_size: int = 16, seed: int = 0) -> str:
    """Continue training a base model on one class's texts for a bounded
    number of optimizer steps; steps=0 copies the base unchanged."""
    if not texts:
        raise ValueError("cannot fine-tune on an empty corpus")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    model = load_model_dir(base_dir)
    if steps == 0:
        return save_model_dir(model, out_dir, extra={"finetune_steps": 0})

    torch.manual_seed(seed)
    sequences = [model.encode([BOS] + simple_tokenize(t) + [EOS]) for t in texts]
    sequences = [s for s in sequences if len(s) >= 2]
    if not sequences:
        raise ValueError("corpus has no usable text")

    pad = model.token_id[EOS]   # padded positions are masked out of the loss
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    model.train()
    order = torch.randperm(len(sequences)).tolist()
    cursor = 0
    for _ in range(steps):
        batch = []
        for _ in range(min(batch_size, len(sequences))):
            batch.append(sequences[order[cursor]])
            cursor += 1
            if cursor == len(order):
                order = torch.randperm(len(sequences)).tolist()
                cursor = 0
        width = max(len(s) for s in batch)
        ids = torch.full((len(batch), width), pad, dtype=torch.long)
        mask = torch.zeros((len(batch), width), dtype=torch.bool)
        for r, s in enumerate(batch):
            ids[r, :len(s)] = torch.tensor(s)
            mask[r, :len(s)] = True
        logits, _ = model(ids[:, :-1])
        targets = ids[:, 1:]
        loss = F.cross_entropy(logits.reshape(-1, len(model.vocab)),
                               targets.reshape(-1), reduction="none")
        loss = (loss * mask[:, 1:].reshape(-1)).sum() / mask[:, 1:].sum()
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    model.eval()
    return save_model_dir(model, out_dir, extra={"finetune_steps": steps})
