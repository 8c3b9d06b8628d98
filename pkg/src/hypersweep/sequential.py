"""Sequential coordinate search over the grid, plus a random-search baseline.

The sequential method sweeps parameters in space order: for each parameter it
evaluates every grid value (plus the incumbent value, which may be off-grid)
with all other parameters fixed, fixes the winner, and moves on. Ties prefer
the incumbent, then the lower grid index.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .objective import EvaluationRecord, Evaluator
from .space import Config, canonical_key, iter_configs, random_config


class SearchError(Exception):
    """Search could not proceed (e.g. every candidate in a sweep failed)."""


@dataclass
class SweepStep:
    param: str
    chosen_value: float | int
    best_perplexity: float


@dataclass
class SearchResult:
    best_config: Config
    best_record: EvaluationRecord
    unique_evaluations: int
    trajectory: list[SweepStep] = field(default_factory=list)
    best_curve: list[float] = field(default_factory=list)
    exhausted: bool = False


def sequential_search(
    evaluator: Evaluator,
    start: Config | None = None,
    seed: int = 0,
    repeat_until_fixed_point: bool = False,
    param_order: list[str] | None = None,
) -> SearchResult:
    space = evaluator.space
    current = dict(start) if start is not None else space.default_config()
    space.validate_config(current)
    order = list(param_order) if param_order is not None else list(space.names)

    best_rec = evaluator.evaluate(current, seed, "sequential")
    if not best_rec.ok:
        raise SearchError(f"start configuration failed: {best_rec.message}")
    trajectory: list[SweepStep] = []

    while True:
        changed = False
        for name in order:
            spec = space.param(name)
            incumbent = current[name]
            values = list(spec.grid)
            if incumbent not in values:
                values.append(incumbent)
            candidates = [dict(current, **{name: v}) for v in values]
            records = evaluator.evaluate_batch(candidates, seed, "sequential")

            def rank(iv: tuple[int, EvaluationRecord]) -> tuple[float, int, int]:
                i, rec = iv
                is_incumbent = values[i] == incumbent
                idx = spec.index_of(values[i])
                return (rec.test_perplexity, 0 if is_incumbent else 1,
                        idx if idx is not None else len(spec.grid))

            ok = [(i, r) for i, r in enumerate(records) if r.ok]
            if not ok:
                raise SearchError(f"every candidate failed while sweeping {name!r}")
            win_i, win_rec = min(ok, key=rank)
            if values[win_i] != incumbent:
                changed = True
            current[name] = values[win_i]
            best_rec = win_rec
            trajectory.append(SweepStep(name, values[win_i], win_rec.test_perplexity))
        if not (repeat_until_fixed_point and changed):
            break

    return SearchResult(
        best_config=current,
        best_record=best_rec,
        unique_evaluations=evaluator.unique_evaluations,
        trajectory=trajectory,
        best_curve=[step.best_perplexity for step in trajectory],
    )


def random_search(evaluator: Evaluator, n: int, seed: int = 0) -> SearchResult:
    """Evaluate n distinct uniformly drawn configurations; returns the argmin."""
    if n < 1:
        raise SearchError("random search requires n >= 1")
    space = evaluator.space
    rng = random.Random(seed)
    size = space.size
    exhausted = False

    seen: set[str] = set()
    best: EvaluationRecord | None = None
    best_config: Config | None = None

    target = n
    if n >= size:
        target = size
        exhausted = True

    misses = 0
    configs_iter = None
    while len(seen) < target:
        if configs_iter is None:
            config = random_config(space, rng)
            key = canonical_key(space, config)
            if key in seen:
                misses += 1
                # rejection sampling stalls near exhaustion; fall back to a sweep
                if misses > 200 + 20 * target:
                    configs_iter = iter_configs(space)
                continue
        else:
            config = next(configs_iter, None)
            if config is None:
                exhausted = True
                break
            key = canonical_key(space, config)
            if key in seen:
                continue
        seen.add(key)
        rec = evaluator.evaluate(config, seed, "random")
        if rec.ok and (best is None or rec.test_perplexity < best.test_perplexity):
            best, best_config = rec, config
    if best is None:
        raise SearchError("no successful evaluations in random search")
    return SearchResult(
        best_config=best_config,
        best_record=best,
        unique_evaluations=evaluator.unique_evaluations,
        exhausted=exhausted,
    )
