"""Reference LSTM language-model worker for the hypersweep wire protocol."""

from .config import KNOWN_KEYS, TrainerConfig, config_from_wire
from .data import (
    Corpus,
    Vocab,
    batchify,
    default_corpus_path,
    load_corpus,
    preprocess,
    split_lines,
    tokenize_line,
)
from .model import LstmLm, WeightDrop, embedded_dropout, locked_dropout
from .train import (
    TrainError,
    build_model,
    perplexity,
    perplexity_from_probs,
    sequence_nll,
    train,
    train_model,
)
from .serve import serve

__all__ = [
    "KNOWN_KEYS",
    "TrainerConfig",
    "config_from_wire",
    "Corpus",
    "Vocab",
    "batchify",
    "default_corpus_path",
    "load_corpus",
    "preprocess",
    "split_lines",
    "tokenize_line",
    "LstmLm",
    "WeightDrop",
    "embedded_dropout",
    "locked_dropout",
    "TrainError",
    "build_model",
    "perplexity",
    "perplexity_from_probs",
    "sequence_nll",
    "train",
    "train_model",
    "serve",
]
