"""Word-level LSTM language model with five distinct dropout mechanisms."""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import TrainerConfig


def locked_dropout(x: torch.Tensor, p: float, training: bool) -> torch.Tensor:
    """Variational dropout: one mask per sequence, shared across time steps."""
    if not training or p == 0.0:
        return x
    mask = x.new_empty(1, x.size(1), x.size(2)).bernoulli_(1 - p) / (1 - p)
    return x * mask


def embedded_dropout(
    embed: nn.Embedding, words: torch.Tensor, p: float, training: bool
) -> torch.Tensor:
    """Embedding lookup that zeroes whole word rows with probability p."""
    weight = embed.weight
    if training and p > 0.0:
        mask = weight.new_empty(weight.size(0), 1).bernoulli_(1 - p) / (1 - p)
        weight = weight * mask
    return F.embedding(words, weight)


class WeightDrop(nn.Module):
    """Applies dropout to a module's named weight on every forward pass.

    The original parameter is re-registered under ``<name>_raw``; the dropped
    tensor is assigned back under the original name, which nn.LSTM picks up
    through its flat-weights bookkeeping.
    """

    def __init__(self, module: nn.Module, name: str, p: float):
        super().__init__()
        self.module = module
        self.name = name
        self.p = p
        raw = getattr(module, name)
        del module._parameters[name]
        module.register_parameter(name + "_raw", nn.Parameter(raw.data))
        with torch.no_grad():
            setattr(module, name, raw.data.clone())

    def forward(self, *args):
        raw = getattr(self.module, self.name + "_raw")
        w = F.dropout(raw, p=self.p, training=self.training)
        if w is raw:
            # identity dropout returns the Parameter itself; assign a plain
            # tensor so the name never re-registers as a parameter
            w = raw * 1.0
        setattr(self.module, self.name, w)
        return self.module(*args)


class LstmLm(nn.Module):
    """Stacked LSTM language model.

    Dropout plumbing: dropoute zeroes embedding rows, dropouti masks the
    embedded inputs, dropouth sits between LSTM layers, dropout sits before
    the decoder, and wdrop masks each layer's hidden-to-hidden weights.
    """

    def __init__(self, vocab_size: int, cfg: TrainerConfig):
        super().__init__()
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.embed = nn.Embedding(vocab_size, cfg.emsize)
        layers = []
        for i in range(cfg.nlayers):
            input_size = cfg.emsize if i == 0 else cfg.nhid
            lstm = nn.LSTM(input_size, cfg.nhid, num_layers=1)
            if cfg.wdrop > 0.0:
                layers.append(WeightDrop(lstm, "weight_hh_l0", cfg.wdrop))
            else:
                layers.append(lstm)
        self.layers = nn.ModuleList(layers)
        self.decoder = nn.Linear(cfg.nhid, vocab_size)
        nn.init.uniform_(self.embed.weight, -0.1, 0.1)
        nn.init.zeros_(self.decoder.bias)
        nn.init.uniform_(self.decoder.weight, -0.1, 0.1)

    def init_hidden(self, batch_size: int):
        p = self.decoder.weight
        return [
            (p.new_zeros(1, batch_size, self.cfg.nhid),
             p.new_zeros(1, batch_size, self.cfg.nhid))
            for _ in self.layers
        ]

    def forward(self, x: torch.Tensor, hidden):
        cfg = self.cfg
        out = embedded_dropout(self.embed, x, cfg.dropoute, self.training)
        out = locked_dropout(out, cfg.dropouti, self.training)
        new_hidden = []
        for i, layer in enumerate(self.layers):
            out, h = layer(out, hidden[i])
            new_hidden.append(h)
            if i < len(self.layers) - 1:
                out = locked_dropout(out, cfg.dropouth, self.training)
        out = locked_dropout(out, cfg.dropout, self.training)
        logits = self.decoder(out)
        return logits, new_hidden


def detach_hidden(hidden):
    return [(h.detach(), c.detach()) for h, c in hidden]
