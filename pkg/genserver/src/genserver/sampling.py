"""Logit sampling: temperature scaling, then top-k, then top-p (nucleus)
truncation, then a multinomial draw from the surviving tokens."""

import torch


def sample_token(logits: torch.Tensor, temperature: float = 0.7, top_k: int = 40,
                 top_p: float = 0.9, generator: torch.Generator | None = None) -> int:
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if not 0 < top_p <= 1:
        raise ValueError("top_p must be in (0, 1]")

    logits = logits / temperature
    if top_k < logits.numel():
        kth = torch.topk(logits, top_k).values[-1]
        logits = torch.where(logits < kth, torch.tensor(float("-inf")), logits)

    probs = torch.softmax(logits, dim=-1)
    sorted_probs, sorted_idx = torch.sort(probs, descending=True)
    cumulative = torch.cumsum(sorted_probs, dim=-1)
    cut = int(torch.searchsorted(cumulative, torch.tensor(top_p - 1e-12))) + 1
    keep = sorted_idx[:cut]
    kept = probs[keep]
    kept = kept / kept.sum()
    choice = int(torch.multinomial(kept, 1, generator=generator))
    return int(keep[choice])
