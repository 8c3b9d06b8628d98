"""Acceptance tests for the reference worker and its end-to-end integration."""

import json
import time

import torch

from hypersweep.cli import main as hypersweep_main
from hypersweep.journal import load_journal

from lm_worker import (
    TrainerConfig,
    build_model,
    default_corpus_path,
    load_corpus,
    perplexity,
    train,
)

from workerlib import WORKER_CMD, tiny_corpus, tiny_corpus_file


def done(name):
    print(f"ACCEPTANCE {name}: PASS")


def test_worker_training_and_dropout_plumbing(tmp_path):
    corpus = load_corpus(default_corpus_path(), vocab_cap=2000)
    assert corpus.vocab_size == 2000

    # a uniform predictor scores exactly the vocabulary size
    cfg = TrainerConfig()
    model = build_model(cfg, corpus.vocab_size)
    with torch.no_grad():
        model.decoder.weight.zero_()
        model.decoder.bias.zero_()
    uniform_ppl = perplexity(model, corpus.valid, cfg.bptt)
    assert abs(uniform_ppl - corpus.vocab_size) / corpus.vocab_size <= 1e-6

    # five epochs at the default sizes must beat the uniform bound, quickly
    t0 = time.perf_counter()
    metrics = train(TrainerConfig(epochs=5, seed=1), corpus)
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"training too slow: {elapsed:.0f}s"
    assert 1.0 <= metrics["valid_perplexity"] < corpus.vocab_size

    # every dropout knob must affect training under a fixed seed
    fast = dict(emsize=16, nhid=24, nlayers=2, bptt=20, epochs=1, seed=5)
    zeros = dict(dropout=0.0, dropoute=0.0, dropouth=0.0, dropouti=0.0, wdrop=0.0)
    small = tiny_corpus(tmp_path)
    baseline = train(TrainerConfig(**fast, **zeros), small)["train_loss"]
    for knob in ("dropout", "dropoute", "dropouth", "dropouti", "wdrop"):
        cfg = TrainerConfig(**fast, **dict(zeros, **{knob: 0.4}))
        assert train(cfg, small)["train_loss"] != baseline, knob
    done("uniform bound, sub-5-minute training below vocab size, dropout plumbing")


def test_end_to_end_sequential_search_with_worker(tmp_path):
    space_file = tmp_path / "space.json"
    space_file.write_text(json.dumps({
        "name": "worker-e2e",
        "parameters": [
            {"name": "emsize", "kind": "integer", "grid": [8, 12, 16], "default": 8},
            {"name": "nhid", "kind": "integer", "grid": [8, 16, 24], "default": 8},
        ],
    }))
    corpus = tiny_corpus_file(tmp_path, n_lines=80)
    journal_path = tmp_path / "run.jsonl"
    cmd = f"{WORKER_CMD} --corpus {corpus} --batch-size 4"

    rc = hypersweep_main([
        "search", "sequential", "--space", str(space_file),
        "--objective", f"worker:{cmd}",
        "--journal", str(journal_path), "--epochs", "1", "--deterministic",
    ])
    assert rc == 0

    loaded = load_journal(journal_path)
    unique = {r.canonical_key for r in loaded.records}
    assert 5 <= len(unique) <= 7, len(unique)
    assert all(r.ok for r in loaded.records)
    assert all(r.test_perplexity > 1.0 for r in loaded.records)

    out = tmp_path / "analysis"
    rc = hypersweep_main([
        "analyze", "--journal", str(journal_path), "--space", str(space_file),
        "--out", str(out), "--deterministic",
    ])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert {p["name"] for p in report["parameters"]} == {"emsize", "nhid"}
    done("end-to-end sequential search over worker objective")
