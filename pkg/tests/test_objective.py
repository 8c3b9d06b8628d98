import itertools

import pytest

from hypersweep.objective import (
    CoupledSurrogate,
    EvaluationRecord,
    Evaluator,
    ObjectiveError,
    SeparableSurrogate,
    TableObjective,
    separable_from_defaults,
)
from hypersweep.space import canonical_key, iter_configs

from helpers import coupled_space, small_space


def make_separable(noise=0.0, seed=0):
    sp = small_space()
    return sp, SeparableSurrogate(
        sp, base=50.0,
        weights={"x": 1.0, "y": 2.0},
        targets={"x": 1, "y": 0},
        noise_sd=noise, seed=seed,
    )


def test_separable_at_target():
    sp, obj = make_separable()
    rec = obj.run({"x": 2, "y": 0.5}, 0, 1)
    assert rec.ok and rec.test_perplexity == 50.0


def test_separable_one_step_off():
    sp, obj = make_separable()
    rec = obj.run({"x": 3, "y": 0.5}, 0, 1)
    assert rec.test_perplexity == 50.0 + 1.0
    rec = obj.run({"x": 2, "y": 1.0}, 0, 1)
    assert rec.test_perplexity == 50.0 + 2.0


def test_separable_two_steps_two_params():
    sp = coupled_space(n_params=2, grid_size=5)
    obj = SeparableSurrogate(
        sp, base=10.0,
        weights={"p0": 1.0, "p1": 1.0},
        targets={"p0": 0, "p1": 0},
    )
    rec = obj.run({"p0": 2, "p1": 2}, 0, 1)
    assert rec.test_perplexity == 10.0 + 8.0


def test_separable_keyed_noise_deterministic():
    sp, obj = make_separable(noise=3.0, seed=9)
    a = obj.run({"x": 1, "y": 0.5}, 0, 1).test_perplexity
    b = obj.run({"x": 1, "y": 0.5}, 0, 1).test_perplexity
    c = obj.run({"x": 2, "y": 0.5}, 0, 1).test_perplexity
    assert a == b
    assert a != c


def test_separable_negative_noise_rejected():
    sp = small_space()
    with pytest.raises(ObjectiveError):
        SeparableSurrogate(sp, 10.0, {"x": 1, "y": 1}, {"x": 0, "y": 0}, noise_sd=-1)


def test_separable_missing_weights_rejected():
    sp = small_space()
    with pytest.raises(ObjectiveError, match="missing"):
        SeparableSurrogate(sp, 10.0, {"x": 1}, {"x": 0, "y": 0})


def test_coupled_empty_pairs_constant():
    sp = coupled_space()
    obj = CoupledSurrogate(sp, 7.0, [])
    for cfg in iter_configs(sp):
        assert obj.run(cfg, 0, 1).test_perplexity == 7.0


def test_coupled_dimension_mismatch():
    sp = coupled_space(grid_size=2)
    with pytest.raises(ObjectiveError, match="matrix"):
        CoupledSurrogate(sp, 0.0, [("p0", "p1", [[0, 1, 2], [1, 0, 1]])])


def test_coupled_xor_defeats_coordinate_moves():
    # XOR penalty: (0,0) and (1,1) score base; flipping a single coordinate
    # from either optimum strictly worsens the value
    sp = coupled_space(grid_size=2)
    obj = CoupledSurrogate(sp, 1.0, [("p0", "p1", [[0, 5], [5, 0]])])
    values = {tuple(c.values()): obj.run(c, 0, 1).test_perplexity for c in iter_configs(sp)}
    assert values[(0, 0)] == values[(1, 1)] == 1.0
    assert values[(0, 1)] == values[(1, 0)] == 6.0


def test_coupled_brute_force_minimum():
    sp = coupled_space(n_params=3, grid_size=3)
    obj = CoupledSurrogate(sp, 2.0, [
        ("p0", "p1", [[4, 0, 3], [1, 5, 2], [3, 2, 0]]),
        ("p1", "p2", [[2, 1, 0], [0, 3, 4], [5, 0, 1]]),
    ])
    best = min(iter_configs(sp), key=lambda c: obj.run(c, 0, 1).test_perplexity)
    assert obj.run(best, 0, 1).test_perplexity == 2.0 + 0.0 + 0.0
    assert best == {"p0": 0, "p1": 1, "p2": 0}  # frozen from the exhaustive sweep above


def test_table_objective_replay():
    sp, obj = make_separable()
    records = [obj.run(c, 0, 1) for c in iter_configs(sp)]
    table = TableObjective(sp, records)
    rec = table.run({"x": 2, "y": 0.5}, 0, 1)
    assert rec.ok and rec.test_perplexity == 50.0


def test_table_objective_unknown_key():
    sp, obj = make_separable()
    table = TableObjective(sp, [obj.run({"x": 1, "y": 0.5}, 0, 1)])
    rec = table.run({"x": 3, "y": 1.0}, 0, 1)
    assert rec.status == "error"
    assert "not in table" in rec.message


def test_table_objective_last_record_wins():
    sp, obj = make_separable()
    cfg = {"x": 1, "y": 0.5}
    first = obj.run(cfg, 0, 1)
    second = obj.run(cfg, 0, 1)
    second.metrics = {"test_perplexity": 999.0}
    table = TableObjective(sp, [first, second])
    assert table.run(cfg, 0, 1).test_perplexity == 999.0


def test_record_invariants():
    with pytest.raises(ValueError):
        EvaluationRecord({}, "k", 0, {}, "ok")
    with pytest.raises(ValueError):
        EvaluationRecord({}, "k", 0, {}, "error")  # no message
    rec = EvaluationRecord({}, "k", 0, {}, "error", message="boom")
    assert not rec.ok


def test_evaluator_cache_hit_skips_objective():
    sp, obj = make_separable()
    ev = Evaluator(obj)
    cfg = {"x": 2, "y": 0.5}
    first = ev.evaluate(cfg, 0, "baseline")
    assert not first.cached and ev.invocations == 1
    second = ev.evaluate(cfg, 0, "baseline")
    assert second.cached and ev.invocations == 1
    assert second.metrics == first.metrics


def test_evaluator_unique_counting():
    sp, obj = make_separable()
    ev = Evaluator(obj)
    configs = list(iter_configs(sp))
    ev.evaluate_batch(configs + configs, 0, "baseline")
    assert ev.invocations == len(configs)
    assert ev.unique_evaluations == len(configs)


def test_evaluator_cache_transparent():
    # with/without caching, distinct-config results are identical
    sp, obj = make_separable(noise=1.0, seed=3)
    configs = list(iter_configs(sp))
    cached = [r.test_perplexity for r in Evaluator(obj).evaluate_batch(configs, 0, "x")]
    uncached = [obj.run(c, 0, 1).test_perplexity for c in configs]
    assert cached == uncached


def test_evaluator_parallel_matches_serial():
    sp, obj = make_separable(noise=2.0, seed=5)
    configs = list(iter_configs(sp))
    serial = [r.test_perplexity for r in Evaluator(obj, parallelism=1).evaluate_batch(configs, 0, "x")]
    parallel = [r.test_perplexity for r in Evaluator(obj, parallelism=4).evaluate_batch(configs, 0, "x")]
    assert serial == parallel
