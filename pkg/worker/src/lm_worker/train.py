"""Training loop and perplexity evaluation."""

from __future__ import annotations

import math
import time

import torch
import torch.nn.functional as F

from .config import TrainerConfig
from .data import Corpus, batchify
from .model import LstmLm, detach_hidden

PROB_FLOOR = 1e-12
LOG_FLOOR = math.log(PROB_FLOOR)


class TrainError(RuntimeError):
    """Training failed (numeric divergence or an unusable corpus)."""


def perplexity_from_probs(probs) -> float:
    """exp of the mean negative log-probability, floored at 1e-12."""
    if not probs:
        raise ValueError("need at least one prediction step")
    total = -sum(math.log(max(p, PROB_FLOOR)) for p in probs)
    return math.exp(total / len(probs))


def sequence_nll(model: LstmLm, tokens, bptt: int) -> tuple[float, int]:
    """Summed negative log-likelihood and step count over one token stream."""
    model.eval()
    hidden = model.init_hidden(1)
    total, steps = 0.0, 0
    with torch.no_grad():
        for inputs, targets in batchify(tokens, bptt):
            x = torch.tensor(inputs, dtype=torch.long).unsqueeze(1)
            y = torch.tensor(targets, dtype=torch.long)
            logits, hidden = model(x, hidden)
            # float64 keeps summed and length-weighted mean NLL in agreement
            logp = F.log_softmax(logits.squeeze(1).double(), dim=-1)
            picked = logp.gather(1, y.unsqueeze(1)).squeeze(1)
            total += float(-picked.clamp(min=LOG_FLOOR).sum())
            steps += len(targets)
    return total, steps


def perplexity(model: LstmLm, tokens, bptt: int = 70) -> float:
    total, steps = sequence_nll(model, tokens, bptt)
    return math.exp(total / steps)


def build_model(cfg: TrainerConfig, vocab_size: int) -> LstmLm:
    torch.manual_seed(cfg.seed)
    return LstmLm(vocab_size, cfg)


def _columns(tokens, batch_size: int) -> torch.Tensor:
    rows = len(tokens) // batch_size
    data = torch.tensor(tokens[: rows * batch_size], dtype=torch.long)
    return data.view(batch_size, rows).t().contiguous()


def train_model(
    model: LstmLm, cfg: TrainerConfig, corpus: Corpus, batch_size: int = 16
) -> float:
    """Run cfg.epochs of SGD with gradient-norm clipping; returns final mean loss."""
    # keep batch columns at least two rows long so a window always exists
    batch_size = max(1, min(batch_size, len(corpus.train) // 2))
    source = _columns(corpus.train, batch_size)
    if source.size(0) < 2:
        raise TrainError("training split too small for one prediction window")

    torch.manual_seed(cfg.seed + 1)
    final_loss = float("nan")
    for _ in range(cfg.epochs):
        model.train()
        hidden = model.init_hidden(batch_size)
        total, steps = 0.0, 0
        for i in range(0, source.size(0) - 1, cfg.bptt):
            length = min(cfg.bptt, source.size(0) - 1 - i)
            x = source[i:i + length]
            y = source[i + 1:i + 1 + length].reshape(-1)
            hidden = detach_hidden(hidden)
            model.zero_grad()
            logits, hidden = model(x, hidden)
            loss = F.cross_entropy(logits.view(-1, model.vocab_size), y)
            loss_value = loss.item()
            if not math.isfinite(loss_value):
                raise TrainError("training loss diverged")
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.clip)
            with torch.no_grad():
                for p in model.parameters():
                    if p.grad is not None:
                        p.add_(p.grad, alpha=-cfg.lr)
            total += loss_value * length
            steps += length
        final_loss = total / steps
    return final_loss


def train(cfg: TrainerConfig, corpus: Corpus, batch_size: int = 16) -> dict:
    """Train from scratch and report valid/test perplexity plus metadata."""
    n_threads = torch.get_num_threads()
    torch.set_num_threads(1)  # deterministic reductions
    t0 = time.perf_counter()
    try:
        model = build_model(cfg, corpus.vocab_size)
        train_loss = train_model(model, cfg, corpus, batch_size=batch_size)
        valid_ppl = perplexity(model, corpus.valid, cfg.bptt)
        test_ppl = perplexity(model, corpus.test, cfg.bptt)
    finally:
        torch.set_num_threads(n_threads)
    if not (math.isfinite(valid_ppl) and math.isfinite(test_ppl)):
        raise TrainError("perplexity diverged")
    return {
        "test_perplexity": test_ppl,
        "valid_perplexity": valid_ppl,
        "train_loss": train_loss if cfg.epochs > 0 else None,
        "vocab_size": corpus.vocab_size,
        "split": "80/10/10 by line count",
        "train_seconds": time.perf_counter() - t0,
    }
