"""Objectives mapping configurations to test perplexity, plus the caching evaluator.

Three built-in objective families: synthetic surrogates (separable and
coupled, cheap enough to brute-force), a table oracle replaying journaled
results, and the subprocess worker client (see worker_client). Every
evaluation funnels through :class:`Evaluator`, which deduplicates by
canonical key and journals fresh results.
"""

from __future__ import annotations

import hashlib
import math
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

from .space import Config, ConfigSpace, Number, canonical_key, space_digest

STATUS_OK = "ok"
STATUS_ERROR = "error"
STATUS_TIMEOUT = "timeout"

DEFAULT_EPOCHS = 5


class ObjectiveError(Exception):
    """Objective misconfiguration (bad surrogate settings, startup failure)."""


@dataclass
class EvaluationRecord:
    """One completed objective evaluation."""

    config: Config
    canonical_key: str
    seed: int
    metrics: dict[str, float]
    status: str
    source: str = "baseline"
    generation: int | None = None
    wall_seconds: float = 0.0
    message: str | None = None
    cached: bool = False
    sequence: int | None = None
    space_digest: str | None = None

    def __post_init__(self) -> None:
        if self.status == STATUS_OK:
            ppl = self.metrics.get("test_perplexity")
            if ppl is None or not math.isfinite(ppl) or ppl <= 0:
                raise ValueError(f"ok record requires finite positive test_perplexity, got {ppl!r}")
        elif not self.message:
            raise ValueError(f"status {self.status!r} requires a message")

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def test_perplexity(self) -> float:
        return self.metrics["test_perplexity"]

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kind": "eval",
            "sequence": self.sequence,
            "config": self.config,
            "canonical_key": self.canonical_key,
            "seed": self.seed,
            "metrics": self.metrics,
            "status": self.status,
            "source": self.source,
            "generation": self.generation,
            "wall_seconds": self.wall_seconds,
        }
        if self.message is not None:
            out["message"] = self.message
        return out

    @classmethod
    def from_json_dict(cls, doc: dict[str, Any]) -> "EvaluationRecord":
        return cls(
            config=dict(doc["config"]),
            canonical_key=doc["canonical_key"],
            seed=int(doc["seed"]),
            metrics=dict(doc["metrics"]),
            status=doc["status"],
            source=doc.get("source", "baseline"),
            generation=doc.get("generation"),
            wall_seconds=float(doc.get("wall_seconds", 0.0)),
            message=doc.get("message"),
            sequence=doc.get("sequence"),
        )


class Objective:
    """Base class: maps a valid configuration to an EvaluationRecord."""

    def __init__(self, space: ConfigSpace):
        self.space = space

    def run(self, config: Config, seed: int, epochs: int) -> EvaluationRecord:
        raise NotImplementedError

    def close(self) -> None:
        """Release external resources (worker subprocesses)."""

    def _ok(self, config: Config, seed: int, metrics: dict[str, float]) -> EvaluationRecord:
        return EvaluationRecord(
            config=dict(config),
            canonical_key=canonical_key(self.space, config),
            seed=seed,
            metrics=metrics,
            status=STATUS_OK,
        )

    def _failed(self, config: Config, seed: int, status: str, message: str) -> EvaluationRecord:
        return EvaluationRecord(
            config=dict(config),
            canonical_key=canonical_key(self.space, config),
            seed=seed,
            metrics={},
            status=status,
            message=message,
        )


def _keyed_gauss(objective_seed: int, key: str, sd: float) -> float:
    """Deterministic noise keyed by (objective seed, canonical key)."""
    if sd == 0.0:
        return 0.0
    digest = hashlib.sha256(f"{objective_seed}:{key}".encode()).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    return rng.gauss(0.0, sd)


class SeparableSurrogate(Objective):
    """Quadratic bowl over grid indices: base + sum of per-param penalties.

    Off-grid values get fractionally interpolated indices, so they are
    strictly worse than the nearest on-grid optimum whenever the weight is
    positive. Noise, if any, is keyed by configuration so the same config
    always yields the same value.
    """

    def __init__(
        self,
        space: ConfigSpace,
        base: float,
        weights: dict[str, float],
        targets: dict[str, int],
        noise_sd: float = 0.0,
        seed: int = 0,
    ):
        super().__init__(space)
        if noise_sd < 0:
            raise ObjectiveError("noise_sd must be >= 0")
        missing = set(space.names) - set(weights) | set(space.names) - set(targets)
        if missing:
            raise ObjectiveError(f"weights/targets missing params: {sorted(missing)}")
        for name, w in weights.items():
            if w < 0:
                raise ObjectiveError(f"negative weight for {name}")
        for name, t in targets.items():
            if not 0 <= t < len(space.param(name).grid):
                raise ObjectiveError(f"target index {t} out of range for {name}")
        self.base = float(base)
        self.weights = dict(weights)
        self.targets = dict(targets)
        self.noise_sd = float(noise_sd)
        self.seed = seed

    def value(self, config: Config) -> float:
        total = self.base
        for p in self.space.params:
            idx = p.fractional_index(config[p.name])
            total += self.weights[p.name] * (idx - self.targets[p.name]) ** 2
        return total

    def optimum_config(self) -> Config:
        return {p.name: p.grid[self.targets[p.name]] for p in self.space.params}

    def run(self, config: Config, seed: int, epochs: int) -> EvaluationRecord:
        key = canonical_key(self.space, config)
        value = self.value(config) + _keyed_gauss(self.seed, key, self.noise_sd)
        return self._ok(config, seed, {"test_perplexity": value})


def separable_from_defaults(
    space: ConfigSpace, base: float = 100.0, weight: float = 1.0,
    noise_sd: float = 0.0, seed: int = 0,
) -> SeparableSurrogate:
    """Separable surrogate whose optimum is the grid point nearest each default."""
    weights = {name: weight for name in space.names}
    targets = {p.name: p.snap(p.default) for p in space.params}
    return SeparableSurrogate(space, base, weights, targets, noise_sd=noise_sd, seed=seed)


class CoupledSurrogate(Objective):
    """Deterministic surrogate with pairwise penalty tables between parameters.

    Couplings let the instance defeat coordinate-wise search (XOR-shaped
    tables have no single-coordinate descent path), which is exactly what the
    genetic search tests need.
    """

    def __init__(
        self,
        space: ConfigSpace,
        base: float,
        pairs: Sequence[tuple[str, str, Sequence[Sequence[float]]]],
    ):
        super().__init__(space)
        self.base = float(base)
        self.pairs: list[tuple[str, str, tuple[tuple[float, ...], ...]]] = []
        for a, b, matrix in pairs:
            pa, pb = space.param(a), space.param(b)
            rows = tuple(tuple(float(x) for x in row) for row in matrix)
            if len(rows) != len(pa.grid) or any(len(r) != len(pb.grid) for r in rows):
                raise ObjectiveError(
                    f"penalty matrix for ({a},{b}) must be {len(pa.grid)}x{len(pb.grid)}"
                )
            self.pairs.append((a, b, rows))

    def value(self, config: Config) -> float:
        total = self.base
        for a, b, rows in self.pairs:
            pa, pb = self.space.param(a), self.space.param(b)
            ia = pa.index_of(config[a])
            ib = pb.index_of(config[b])
            ia = pa.snap(config[a]) if ia is None else ia
            ib = pb.snap(config[b]) if ib is None else ib
            total += rows[ia][ib]
        return total

    def run(self, config: Config, seed: int, epochs: int) -> EvaluationRecord:
        return self._ok(config, seed, {"test_perplexity": self.value(config)})


class TableObjective(Objective):
    """Replay objective: serves stored records by canonical key; last write wins."""

    def __init__(self, space: ConfigSpace, records: Sequence[EvaluationRecord]):
        super().__init__(space)
        self.table: dict[str, EvaluationRecord] = {}
        for rec in records:
            if rec.ok:
                self.table[rec.canonical_key] = rec
        if not self.table:
            raise ObjectiveError("table objective requires at least one ok record")

    def run(self, config: Config, seed: int, epochs: int) -> EvaluationRecord:
        key = canonical_key(self.space, config)
        stored = self.table.get(key)
        if stored is None:
            return self._failed(config, seed, STATUS_ERROR, "not in table")
        return self._ok(config, seed, dict(stored.metrics))


class Evaluator:
    """Cache + journal front-end over an objective.

    Deduplicates by canonical key: a repeated configuration is served from the
    cache (marked ``cached``) without touching the objective or the journal.
    Batch evaluation may run concurrently, but results are committed to the
    cache and journal in candidate order, so journals are scheduling-independent.
    """

    def __init__(
        self,
        objective: Objective,
        journal=None,
        epochs: int = DEFAULT_EPOCHS,
        parallelism: int = 1,
        cache: dict[str, EvaluationRecord] | None = None,
    ):
        self.objective = objective
        self.space = objective.space
        self.space_digest = space_digest(objective.space)
        self.journal = journal
        self.epochs = epochs
        self.parallelism = max(1, parallelism)
        self.cache: dict[str, EvaluationRecord] = dict(cache) if cache else {}
        self.unique_keys: set[str] = set()
        self.invocations = 0
        self._lock = threading.Lock()

    @property
    def unique_evaluations(self) -> int:
        return len(self.unique_keys)

    def evaluate(
        self, config: Config, seed: int, source: str, generation: int | None = None
    ) -> EvaluationRecord:
        return self.evaluate_batch([config], seed, source, generation)[0]

    def evaluate_batch(
        self,
        configs: Sequence[Config],
        seed: int,
        source: str,
        generation: int | None = None,
    ) -> list[EvaluationRecord]:
        keys = [canonical_key(self.space, c) for c in configs]
        self.unique_keys.update(keys)

        # run the objective only for keys not yet cached, once per distinct key
        pending: dict[str, Config] = {}
        for key, config in zip(keys, configs):
            if key not in self.cache and key not in pending:
                pending[key] = config

        fresh: dict[str, EvaluationRecord] = {}

        def _run(item: tuple[str, Config]) -> tuple[str, EvaluationRecord]:
            key, config = item
            t0 = time.monotonic()
            rec = self.objective.run(config, seed, self.epochs)
            rec.wall_seconds = time.monotonic() - t0
            rec.source = source
            rec.generation = generation
            rec.space_digest = self.space_digest
            return key, rec

        items = list(pending.items())
        if items:
            with self._lock:
                self.invocations += len(items)
            if self.parallelism > 1 and len(items) > 1:
                with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
                    for key, rec in pool.map(_run, items):
                        fresh[key] = rec
            else:
                for item in items:
                    key, rec = _run(item)
                    fresh[key] = rec

        # commit in candidate order: journal order is deterministic
        out: list[EvaluationRecord] = []
        for key in keys:
            if key in fresh:
                rec = fresh.pop(key)
                self.cache[key] = rec
                if self.journal is not None:
                    self.journal.append(rec)
                out.append(rec)
            else:
                out.append(replace(self.cache[key], cached=True))
        return out

    def close(self) -> None:
        self.objective.close()
