"""Genetic search over the grid: roulette-wheel selection, single-point
crossover, one-step mutation, seeded from the default configuration's
neighborhood.

All stochastic choices come from purpose-split seeded streams (init,
selection, cut points, child pick, mutation), so a fixed seed reproduces the
run exactly regardless of evaluation scheduling.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .objective import EvaluationRecord, Evaluator
from .sequential import SearchError, SearchResult
from .space import Config, ConfigSpace, canonical_key, neighbor, random_config

FITNESS_SCHEMES = ("inverse", "window", "rank")

DEFAULT_BUDGET = 84


@dataclass(frozen=True)
class GaParams:
    population_size: int = 12
    generations: int = 7
    p_mut: float = 0.2
    fitness_scheme: str = "inverse"
    elitism: int = 0
    init_mode: str = "neighborhood"
    p_init: float = 0.5
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if not 0.0 <= self.p_mut <= 1.0:
            raise ValueError("p_mut must be in [0, 1]")
        if self.fitness_scheme not in FITNESS_SCHEMES:
            raise ValueError(f"fitness_scheme must be one of {FITNESS_SCHEMES}")
        if self.elitism < 0:
            raise ValueError("elitism must be >= 0")
        if self.init_mode not in ("neighborhood", "uniform"):
            raise ValueError("init_mode must be 'neighborhood' or 'uniform'")


@dataclass
class Generation:
    index: int
    individuals: list[tuple[Config, EvaluationRecord]]
    fitness: list[float] = field(default_factory=list)
    selection_prob: list[float] = field(default_factory=list)


def fitness(perplexities: list[float], scheme: str = "inverse") -> list[float]:
    """Nonnegative fitness decreasing in perplexity.

    inverse: 1/P. window: (Pmax - P) + 0.01*(Pmax - Pmin), all-equal input
    maps to all ones. rank: n - rank with rank 0 for the best (ties share the
    min rank).
    """
    if not perplexities:
        raise ValueError("empty perplexity list")
    for p in perplexities:
        if not (p > 0 and p == p and p != float("inf")):
            raise ValueError(f"perplexities must be finite and positive, got {p!r}")
    if scheme == "inverse":
        return [1.0 / p for p in perplexities]
    if scheme == "window":
        pmax, pmin = max(perplexities), min(perplexities)
        if pmax == pmin:
            return [1.0] * len(perplexities)
        pad = 0.01 * (pmax - pmin)
        return [(pmax - p) + pad for p in perplexities]
    if scheme == "rank":
        n = len(perplexities)
        order = sorted(set(perplexities))
        rank_of = {p: i for i, p in enumerate(order)}
        return [float(n - rank_of[p]) for p in perplexities]
    raise ValueError(f"unknown fitness scheme {scheme!r}")


def selection_probabilities(fit: list[float]) -> list[float]:
    total = sum(fit)
    if total <= 0 or any(f < 0 for f in fit):
        raise ValueError("selection requires nonnegative fitness with positive sum")
    return [f / total for f in fit]


def roulette_select(fit: list[float], rng: random.Random) -> int:
    """Cumulative-sum inversion of one uniform draw: P(j) = f_j / sum(f)."""
    total = sum(fit)
    if total <= 0 or any(f < 0 for f in fit):
        raise ValueError("roulette selection requires nonnegative fitness with positive sum")
    r = rng.random() * total
    acc = 0.0
    for j, f in enumerate(fit):
        acc += f
        if r < acc:
            return j
    return len(fit) - 1  # r landed on the accumulated rounding slack


def crossover(
    space: ConfigSpace, parent_a: Config, parent_b: Config, rng: random.Random
) -> Config:
    """Single-point crossover over the space's parameter order; returns one
    of the two children uniformly at random."""
    space.validate_config(parent_a)
    space.validate_config(parent_b)
    names = space.names
    k = rng.randrange(1, len(names)) if len(names) > 1 else 1
    child_a = {n: (parent_a if i < k else parent_b)[n] for i, n in enumerate(names)}
    child_b = {n: (parent_b if i < k else parent_a)[n] for i, n in enumerate(names)}
    return child_a if rng.random() < 0.5 else child_b


def mutate(space: ConfigSpace, config: Config, p_mut: float, rng: random.Random) -> Config:
    """Each gene independently moves one grid step in a random direction with
    probability p_mut (reflecting at the grid edges)."""
    out = dict(config)
    for name in space.names:
        if rng.random() < p_mut:
            step = 1 if rng.random() < 0.5 else -1
            out = neighbor(space, out, name, step)
    return out


def init_population(
    space: ConfigSpace,
    seed_config: Config,
    size: int,
    init_mode: str,
    rng: random.Random,
    p_init: float = 0.5,
) -> list[Config]:
    if size < 2:
        raise ValueError("population size must be >= 2")
    population: list[Config] = []
    seen: set[str] = set()

    def add(config: Config, redraw) -> None:
        key = canonical_key(space, config)
        attempts = 0
        while key in seen and attempts < 100:
            config = redraw()
            key = canonical_key(space, config)
            attempts += 1
        seen.add(key)
        population.append(config)

    if init_mode == "neighborhood":
        population.append(dict(seed_config))
        seen.add(canonical_key(space, seed_config))
        for _ in range(size - 1):
            add(mutate(space, seed_config, p_init, rng),
                lambda: mutate(space, seed_config, p_init, rng))
    elif init_mode == "uniform":
        for _ in range(size):
            add(random_config(space, rng), lambda: random_config(space, rng))
    else:
        raise ValueError(f"unknown init mode {init_mode!r}")
    return population


def _split_rngs(seed: int) -> dict[str, random.Random]:
    return {name: random.Random(f"{seed}:{name}") for name in
            ("init", "select", "cut", "pick", "mutate")}


def ga_search(
    evaluator: Evaluator,
    params: GaParams,
    seed: int = 0,
    seed_config: Config | None = None,
) -> SearchResult:
    space = evaluator.space
    rngs = _split_rngs(seed)
    if seed_config is None:
        seed_config = space.default_config()

    population = init_population(
        space, seed_config, params.population_size, params.init_mode,
        rngs["init"], p_init=params.p_init,
    )

    best: EvaluationRecord | None = None
    best_config: Config | None = None
    trajectory = []
    budget_hit = False

    for gen_index in range(params.generations):
        # respect the unique-evaluation budget mid-generation: evaluate only
        # as many new configurations as the budget allows
        to_eval: list[Config] = []
        projected = set(evaluator.unique_keys)
        for config in population:
            key = canonical_key(space, config)
            if key not in projected and len(projected) >= params.budget:
                budget_hit = True
                break
            projected.add(key)
            to_eval.append(config)
        if not to_eval:
            break
        records = evaluator.evaluate_batch(to_eval, seed, "ga", generation=gen_index)

        generation = Generation(index=gen_index, individuals=list(zip(to_eval, records)))
        ok_pairs = [(c, r) for c, r in generation.individuals if r.ok]
        if not ok_pairs:
            raise SearchError(f"every individual failed in generation {gen_index}")
        for config, rec in ok_pairs:
            if best is None or rec.test_perplexity < best.test_perplexity:
                best, best_config = rec, config
        trajectory.append(best.test_perplexity)

        if budget_hit or gen_index == params.generations - 1:
            break

        # failed individuals get the worst observed fitness so the population
        # size and roulette probabilities stay well-defined
        worst_ppl = max(r.test_perplexity for _, r in ok_pairs)
        ppls = [r.test_perplexity if r.ok else worst_ppl for _, r in generation.individuals]
        fit = fitness(ppls, params.fitness_scheme)
        generation.fitness = fit
        generation.selection_prob = selection_probabilities(fit)

        next_population: list[Config] = []
        if params.elitism > 0:
            ranked = sorted(range(len(ppls)), key=lambda j: ppls[j])
            for j in ranked[: params.elitism]:
                next_population.append(dict(generation.individuals[j][0]))
        while len(next_population) < params.population_size:
            a = roulette_select(fit, rngs["select"])
            b = roulette_select(fit, rngs["select"])
            if b == a:
                b = roulette_select(fit, rngs["select"])  # resample once, then accept
            child = crossover(
                space, generation.individuals[a][0], generation.individuals[b][0],
                _CutPickRng(rngs["cut"], rngs["pick"]),
            )
            next_population.append(mutate(space, child, params.p_mut, rngs["mutate"]))
        population = next_population

    if best is None:
        raise SearchError("genetic search produced no successful evaluations")
    return SearchResult(
        best_config=best_config,
        best_record=best,
        unique_evaluations=evaluator.unique_evaluations,
        best_curve=trajectory,
    )


class _CutPickRng:
    """Routes crossover's cut-point draw and child pick to their own streams."""

    def __init__(self, cut_rng: random.Random, pick_rng: random.Random):
        self._cut = cut_rng
        self._pick = pick_rng

    def randrange(self, *args) -> int:
        return self._cut.randrange(*args)

    def random(self) -> float:
        return self._pick.random()
