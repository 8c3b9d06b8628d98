import pytest

from hypersweep.objective import CoupledSurrogate, Evaluator, Objective, SeparableSurrogate
from hypersweep.sequential import SearchError, random_search, sequential_search
from hypersweep.space import ConfigSpace, ParamSpec, canonical_key, iter_configs

from helpers import coupled_space, small_space


class ConstantObjective(Objective):
    def run(self, config, seed, epochs):
        return self._ok(config, seed, {"test_perplexity": 42.0})


def brute_force_argmin(space, objective):
    best, best_v = None, None
    for cfg in iter_configs(space):
        v = objective.run(cfg, 0, 1).test_perplexity
        if best_v is None or v < best_v:
            best, best_v = cfg, v
    return best, best_v


def test_separable_reaches_global_optimum():
    sp = coupled_space(n_params=4, grid_size=4)
    obj = SeparableSurrogate(
        sp, 5.0,
        weights={f"p{i}": 1.0 + i for i in range(4)},
        targets={"p0": 3, "p1": 0, "p2": 2, "p3": 1},
    )
    oracle_cfg, oracle_v = brute_force_argmin(sp, obj)
    result = sequential_search(Evaluator(obj))
    assert result.best_config == oracle_cfg
    assert result.best_record.test_perplexity == oracle_v
    assert result.unique_evaluations <= 1 + 4 * 3


def test_constant_objective_keeps_start():
    sp = small_space()
    start = {"x": 2, "y": 1.0}
    result = sequential_search(Evaluator(ConstantObjective(sp)), start=start)
    assert result.best_config == start  # incumbent wins all ties


def test_trajectory_nonincreasing():
    sp = coupled_space(n_params=5, grid_size=4)
    obj = SeparableSurrogate(
        sp, 1.0,
        weights={f"p{i}": float(i + 1) for i in range(5)},
        targets={f"p{i}": (i * 2) % 4 for i in range(5)},
        noise_sd=0.5, seed=11,
    )
    result = sequential_search(Evaluator(obj))
    ppls = [step.best_perplexity for step in result.trajectory]
    assert all(a >= b for a, b in zip(ppls, ppls[1:]))


def test_off_grid_incumbent_joins_candidates():
    sp = ConfigSpace("s", (ParamSpec("x", "real", (0.3, 0.4), 0.65),))

    class Favors065(Objective):
        def run(self, config, seed, epochs):
            ppl = 1.0 if config["x"] == 0.65 else 2.0
            return self._ok(config, seed, {"test_perplexity": ppl})

    result = sequential_search(Evaluator(Favors065(sp)))
    assert result.best_config == {"x": 0.65}


def test_deceptive_coupled_defeats_sequential():
    # (1,1) is a strict local optimum under single-coordinate moves; the
    # global optimum (0,0) needs both coordinates to change at once
    sp = coupled_space(grid_size=2)
    obj = CoupledSurrogate(sp, 1.0, [("p0", "p1", [[0.0, 3.0], [3.0, 1.0]])])
    _, oracle_v = brute_force_argmin(sp, obj)
    result = sequential_search(Evaluator(obj), start={"p0": 1, "p1": 1})
    assert result.best_record.test_perplexity > oracle_v
    assert result.best_config == {"p0": 1, "p1": 1}


def test_all_candidates_failing_aborts():
    sp = small_space()

    class AlwaysFails(Objective):
        def run(self, config, seed, epochs):
            return self._failed(config, seed, "error", "broken")

    with pytest.raises(SearchError):
        sequential_search(Evaluator(AlwaysFails(sp)))


def test_budget_bound_with_off_grid_start():
    sp = ConfigSpace("s", (
        ParamSpec("a", "real", (0.3, 0.4, 0.5, 0.6), 0.65),
        ParamSpec("b", "integer", (1, 2, 3, 4), 2),
    ))
    obj = SeparableSurrogate(sp, 1.0, {"a": 1.0, "b": 1.0}, {"a": 0, "b": 0})
    result = sequential_search(Evaluator(obj))
    # off-grid incumbent for 'a' makes all 4 grid values fresh: 1 + 4 + 3
    assert result.unique_evaluations == 8


def test_determinism_across_parallelism():
    sp = coupled_space(n_params=4, grid_size=4)
    obj = SeparableSurrogate(
        sp, 5.0,
        weights={f"p{i}": 1.0 for i in range(4)},
        targets={f"p{i}": i for i in range(4)},
        noise_sd=1.0, seed=2,
    )
    r1 = sequential_search(Evaluator(obj, parallelism=1))
    r4 = sequential_search(Evaluator(obj, parallelism=4))
    assert r1.best_config == r4.best_config
    assert [s.__dict__ for s in r1.trajectory] == [s.__dict__ for s in r4.trajectory]


def test_random_search_unique_count():
    sp = coupled_space(n_params=3, grid_size=4)
    obj = SeparableSurrogate(sp, 1.0, {f"p{i}": 1.0 for i in range(3)}, {f"p{i}": 0 for i in range(3)})
    ev = Evaluator(obj)
    result = random_search(ev, n=20, seed=4)
    assert ev.unique_evaluations == 20
    assert not result.exhausted


def test_random_search_single_draw():
    sp = small_space()
    obj = SeparableSurrogate(sp, 1.0, {"x": 1.0, "y": 1.0}, {"x": 0, "y": 0})
    ev = Evaluator(obj)
    result = random_search(ev, n=1, seed=0)
    assert ev.unique_evaluations == 1
    assert result.best_record.canonical_key == canonical_key(sp, result.best_config)


def test_random_search_exhaustion():
    sp = small_space()  # size 6
    obj = SeparableSurrogate(sp, 1.0, {"x": 1.0, "y": 1.0}, {"x": 0, "y": 0})
    ev = Evaluator(obj)
    result = random_search(ev, n=10, seed=0)
    assert ev.unique_evaluations == 6
    assert result.exhausted
    assert result.best_config == {"x": 1, "y": 0.5}


def test_random_search_near_exhaustion_terminates():
    sp = small_space()
    obj = SeparableSurrogate(sp, 1.0, {"x": 1.0, "y": 1.0}, {"x": 0, "y": 0})
    ev = Evaluator(obj)
    result = random_search(ev, n=5, seed=1)  # 5 of 6: rejection sampling stalls
    assert ev.unique_evaluations == 5
