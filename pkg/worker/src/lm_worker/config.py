"""Trainer configuration: the eleven tunable hyperparameters plus run knobs."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class TrainerConfig:
    """Hyperparameters of one training run.

    Defaults are desk-scale: a small model that trains in seconds on a CPU
    while still exercising every regularization mechanism.
    """

    emsize: int = 50
    nhid: int = 100
    nlayers: int = 2
    lr: float = 30.0
    clip: float = 0.25
    bptt: int = 70
    dropout: float = 0.4
    dropoute: float = 0.1
    dropouth: float = 0.3
    dropouti: float = 0.65
    wdrop: float = 0.5
    epochs: int = 5
    seed: int = 0

    def __post_init__(self):
        for name in ("emsize", "nhid", "nlayers"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("dropout", "dropoute", "dropouth", "dropouti", "wdrop"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {v!r}")
        if self.lr < 0:
            raise ValueError(f"lr must be >= 0, got {self.lr!r}")
        if self.clip <= 0:
            raise ValueError(f"clip must be > 0, got {self.clip!r}")
        if not isinstance(self.bptt, int) or self.bptt < 1:
            raise ValueError(f"bptt must be an integer >= 1, got {self.bptt!r}")
        if not isinstance(self.epochs, int) or self.epochs < 0:
            raise ValueError(f"epochs must be a non-negative integer, got {self.epochs!r}")


_INT_FIELDS = {"emsize", "nhid", "nlayers", "bptt", "epochs", "seed"}
KNOWN_KEYS = frozenset(
    f.name for f in fields(TrainerConfig) if f.name not in ("epochs", "seed")
)


def config_from_wire(config: dict, seed: int, epochs: int) -> TrainerConfig:
    """Build a TrainerConfig from an eval request; unknown keys are rejected."""
    unknown = sorted(set(config) - KNOWN_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {unknown}")
    kwargs = {}
    for name, value in config.items():
        if name in _INT_FIELDS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(f"{name} must be an integer, got {value!r}")
            value = int(value)
        else:
            value = float(value)
        kwargs[name] = value
    return TrainerConfig(epochs=int(epochs), seed=int(seed), **kwargs)
