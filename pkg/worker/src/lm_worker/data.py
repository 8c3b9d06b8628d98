"""Corpus handling: preprocessing, vocabulary, splits, and bptt windowing."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

UNK = "<unk>"


def default_corpus_path() -> Path:
    """Path of the bundled synthetic corpus."""
    return Path(str(resources.files("lm_worker").joinpath("data/corpus.txt")))


def tokenize_line(line: str) -> list[str]:
    """Whitespace-tokenize, drop mention/hashtag tokens, lowercase the rest."""
    return [t.lower() for t in line.split() if not t.startswith(("@", "#"))]


def preprocess(lines) -> list[str]:
    """Apply tokenize_line to each raw line, rejoined with single spaces."""
    return [" ".join(tokenize_line(line)) for line in lines]


class Vocab:
    """Word-to-id mapping built from training tokens only.

    Id 0 is the unknown token; out-of-vocabulary words map to it. An
    optional cap keeps the most frequent words (ties broken alphabetically).
    """

    def __init__(self, train_tokens, cap: int | None = None):
        counts = Counter(train_tokens)
        words = sorted(counts, key=lambda w: (-counts[w], w))
        if cap is not None:
            if cap < 2:
                raise ValueError("vocabulary cap must be >= 2")
            words = words[: cap - 1]  # reserve one slot for the unknown token
        self._words = [UNK] + words
        self._ids = {w: i for i, w in enumerate(self._words)}

    def __len__(self) -> int:
        return len(self._words)

    def __getitem__(self, word: str) -> int:
        return self._ids.get(word, 0)

    def word(self, idx: int) -> str:
        return self._words[idx]


@dataclass
class Corpus:
    train: list[int]
    valid: list[int]
    test: list[int]
    vocab: Vocab

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)


def split_lines(lines: list[str]) -> tuple[list[str], list[str], list[str]]:
    """80/10/10 split by line count, in file order."""
    n = len(lines)
    n_train = int(n * 0.8)
    n_valid = int(n * 0.1)
    return lines[:n_train], lines[n_train:n_train + n_valid], lines[n_train + n_valid:]


def load_corpus(path: str | Path, vocab_cap: int | None = None) -> Corpus:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    train_lines, valid_lines, test_lines = split_lines(lines)

    def tokens(split_lines_):
        out = []
        for line in split_lines_:
            out.extend(tokenize_line(line))
        return out

    train_tokens = tokens(train_lines)
    if len(train_tokens) < 2:
        raise ValueError("training split has fewer than 2 tokens")
    vocab = Vocab(train_tokens, cap=vocab_cap)
    return Corpus(
        train=[vocab[t] for t in train_tokens],
        valid=[vocab[t] for t in tokens(valid_lines)],
        test=[vocab[t] for t in tokens(test_lines)],
        vocab=vocab,
    )


def batchify(tokens, bptt: int) -> list[tuple[list, list]]:
    """Contiguous windows of length <= bptt with next-token targets."""
    if len(tokens) < 2:
        raise ValueError("need at least 2 tokens to form a prediction window")
    if bptt < 1:
        raise ValueError("bptt must be >= 1")
    windows = []
    for i in range(0, len(tokens) - 1, bptt):
        length = min(bptt, len(tokens) - 1 - i)
        windows.append((tokens[i:i + length], tokens[i + 1:i + 1 + length]))
    return windows
