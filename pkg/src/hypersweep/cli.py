"""Command-line entry point.

Commands: space validate | search sequential|ga|random | analyze | report compare.
Exit codes: 0 success, 2 input error, 3 objective/worker failure, 4 interrupted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path
from urllib.parse import parse_qsl

from . import analysis, ga, journal, sequential, space as space_mod, svgplot
from .objective import (
    CoupledSurrogate,
    Evaluator,
    ObjectiveError,
    SeparableSurrogate,
    TableObjective,
    separable_from_defaults,
)
from .worker_client import WorkerObjective, WorkerPool, WorkerStartupError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_OBJECTIVE = 3
EXIT_INTERRUPTED = 4


def builtin_space_path() -> Path:
    """Path of the bundled 11-parameter space file."""
    return Path(str(resources.files("hypersweep").joinpath("data/lstm_lm.json")))


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"environment variable {name} must be an integer, got {raw!r}")


def _env_float(name: str, fallback: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError:
        raise CliError(f"environment variable {name} must be a number, got {raw!r}")


def make_objective(spec: str, cfg_space: space_mod.ConfigSpace, eval_timeout: float, parallelism: int):
    """Build an objective from a URI-like spec string.

    Forms: surrogate:separable?noise=0&base=100&weight=1&seed=0,
    surrogate:coupled?pairs=pairs.json&base=100, table:journal.jsonl,
    worker:command line.
    """
    scheme, _, rest = spec.partition(":")
    if scheme == "surrogate":
        kind, _, query = rest.partition("?")
        opts = dict(parse_qsl(query))
        if kind == "separable":
            return separable_from_defaults(
                cfg_space,
                base=float(opts.get("base", 100.0)),
                weight=float(opts.get("weight", 1.0)),
                noise_sd=float(opts.get("noise", 0.0)),
                seed=int(opts.get("seed", 0)),
            )
        if kind == "coupled":
            pairs_path = opts.get("pairs")
            if not pairs_path:
                raise CliError("surrogate:coupled requires ?pairs=<json file>")
            doc = json.loads(Path(pairs_path).read_text(encoding="utf-8"))
            pairs = [(d["a"], d["b"], d["matrix"]) for d in doc]
            return CoupledSurrogate(cfg_space, float(opts.get("base", 100.0)), pairs)
        raise CliError(f"unknown surrogate kind {kind!r}")
    if scheme == "table":
        loaded = journal.load_journal(rest)
        return TableObjective(cfg_space, loaded.ok_records())
    if scheme == "worker":
        command = rest
        if not command.strip():
            raise CliError("worker objective requires a command line")
        if parallelism > 1:
            return WorkerPool(cfg_space, command, parallelism, eval_timeout=eval_timeout)
        return WorkerObjective(cfg_space, command, eval_timeout=eval_timeout)
    raise CliError(f"unknown objective spec {spec!r}")


def cmd_space_validate(args: argparse.Namespace) -> int:
    path = Path(args.path)
    if not path.exists():
        print(f"error: not found: {path}", file=sys.stderr)
        return EXIT_INPUT
    try:
        sp = space_mod.parse_space(path.read_text(encoding="utf-8"))
    except space_mod.SpaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"{len(sp.params)} parameters, {sp.size} configurations")
    for name in sp.off_grid_defaults:
        p = sp.param(name)
        print(f"warning: default {p.default} of {name!r} is off-grid")
    return EXIT_OK


def _load_space_arg(args: argparse.Namespace) -> space_mod.ConfigSpace:
    path = Path(args.space) if args.space else builtin_space_path()
    if not path.exists():
        raise CliError(f"space file not found: {path}")
    try:
        return space_mod.parse_space(path.read_text(encoding="utf-8"))
    except space_mod.SpaceError as exc:
        raise CliError(f"invalid space file: {exc}")


def cmd_search(args: argparse.Namespace) -> int:
    cfg_space = _load_space_arg(args)
    digest = space_mod.space_digest(cfg_space)
    parallelism = _env_int("HYPERSWEEP_PARALLEL", args.parallel)
    eval_timeout = _env_float("HYPERSWEEP_EVAL_TIMEOUT_SECS", args.eval_timeout)

    cache = None
    if args.resume:
        run_journal, loaded = journal.RunJournal.resume(args.resume)
        if loaded.header.space_digest != digest:
            run_journal.close()
            raise CliError("resume journal was produced for a different space")
        if loaded.header.method != args.method or loaded.header.seed != args.seed:
            run_journal.close()
            raise CliError(
                f"resume journal is a {loaded.header.method!r} run with seed "
                f"{loaded.header.seed}; requested {args.method!r} seed {args.seed}"
            )
        cache = loaded.key_cache
    else:
        if not args.journal:
            raise CliError("--journal is required (or use --resume)")
        header = journal.new_header(
            digest, args.method, args.seed,
            params=_search_params(args), deterministic=args.deterministic,
        )
        run_journal = journal.RunJournal.create(args.journal, header)

    try:
        objective = make_objective(args.objective, cfg_space, eval_timeout, parallelism)
    except WorkerStartupError as exc:
        run_journal.close()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OBJECTIVE

    evaluator = Evaluator(
        objective, journal=run_journal, epochs=args.epochs,
        parallelism=parallelism, cache=cache,
    )
    try:
        if args.method == "sequential":
            start = _start_config(cfg_space, args.start)
            result = sequential.sequential_search(evaluator, start=start, seed=args.seed)
        elif args.method == "ga":
            params = ga.GaParams(
                population_size=args.pop, generations=args.gens, p_mut=args.pmut,
                fitness_scheme=args.fitness, elitism=args.elitism,
                init_mode=args.init, budget=args.budget,
            )
            result = ga.ga_search(evaluator, params, seed=args.seed)
        else:
            result = sequential.random_search(evaluator, n=args.n, seed=args.seed)
    except sequential.SearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OBJECTIVE
    finally:
        evaluator.close()
        run_journal.close()

    print(f"best test_perplexity: {result.best_record.test_perplexity}")
    print(f"best config: {json.dumps(result.best_config, sort_keys=True)}")
    print(f"unique evaluations: {result.unique_evaluations}")
    if result.exhausted:
        print("note: search space exhausted")
    return EXIT_OK


def _search_params(args: argparse.Namespace) -> dict:
    if args.method == "ga":
        return {
            "pop": args.pop, "gens": args.gens, "p_mut": args.pmut,
            "fitness": args.fitness, "elitism": args.elitism,
            "init": args.init, "budget": args.budget,
        }
    if args.method == "random":
        return {"n": args.n}
    return {"start": args.start}


def _start_config(cfg_space: space_mod.ConfigSpace, mode: str) -> space_mod.Config:
    if mode == "default":
        return cfg_space.default_config()
    if mode == "grid-default":
        # snap every off-grid default to its nearest grid value
        return {p.name: p.grid[p.snap(p.default)] for p in cfg_space.params}
    raise CliError(f"unknown start mode {mode!r}")


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg_space = _load_space_arg(args)
    try:
        loaded = journal.load_journal(args.journal)
    except journal.JournalError as exc:
        raise CliError(str(exc))
    ok_records = loaded.ok_records()
    if not ok_records:
        raise CliError(f"journal {args.journal} has no successful evaluations")

    default_config = cfg_space.default_config()
    report = analysis.categorize(
        cfg_space, ok_records, default_config,
        alpha=args.alpha, near_threshold=args.near,
    )
    if args.deterministic:
        report.metadata["journal"] = Path(args.journal).name
    else:
        from datetime import datetime, timezone

        report.metadata["generated_at"] = datetime.now(timezone.utc).isoformat()
        report.metadata["journal"] = str(args.journal)
    report.metadata["n_records"] = len(ok_records)

    out_dir = Path(args.out)
    analysis.export_report(report, out_dir, formats=("json", "csv") if not args.csv_dir else ("json",))
    if args.csv_dir:
        analysis.export_report(report, Path(args.csv_dir), formats=("csv",))
    svg_dir = Path(args.svg_dir) if args.svg_dir else out_dir
    svg_dir.mkdir(parents=True, exist_ok=True)
    for p in report.parameters:
        doc = svgplot.render_boxplot_svg(
            p.groups, title=f"perplexity vs {p.name}", x_label=p.name,
        )
        (svg_dir / f"{p.name}.svg").write_text(doc, encoding="utf-8")

    try:
        comparison = analysis.compare_default_vs_best(cfg_space, ok_records, default_config)
    except analysis.AnalysisError:
        print("warning: default configuration not in journal; comparison omitted", file=sys.stderr)
        comparison = None
    if comparison is not None:
        changed = ", ".join(comparison.changed_params) if comparison.changed_params else "none"
        line = (
            f"{comparison.default_perplexity:g} -> {comparison.best_perplexity:g}, "
            f"changed: {changed}"
        )
        print(line)
        (out_dir / "comparison.json").write_text(
            json.dumps(
                {
                    "default_perplexity": comparison.default_perplexity,
                    "best_perplexity": comparison.best_perplexity,
                    "changed_params": comparison.changed_params,
                    "best_config": comparison.best_config,
                },
                indent=2, sort_keys=True,
            ) + "\n",
            encoding="utf-8",
        )
    for p in report.parameters:
        print(f"{p.name}: {p.bucket if p.analyzable else 'unanalyzable'}")
    return EXIT_OK


def cmd_report_compare(args: argparse.Namespace) -> int:
    cfg_space = _load_space_arg(args)
    try:
        loaded = journal.load_journal(args.journal)
    except journal.JournalError as exc:
        raise CliError(str(exc))
    try:
        comparison = analysis.compare_default_vs_best(
            cfg_space, loaded.ok_records(), cfg_space.default_config()
        )
    except analysis.AnalysisError as exc:
        raise CliError(str(exc))
    changed = ", ".join(comparison.changed_params) if comparison.changed_params else "none"
    print(f"{comparison.default_perplexity:g} -> {comparison.best_perplexity:g}, changed: {changed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypersweep")
    sub = parser.add_subparsers(dest="command", required=True)

    p_space = sub.add_parser("space", help="space file operations")
    space_sub = p_space.add_subparsers(dest="space_command", required=True)
    p_validate = space_sub.add_parser("validate", help="validate a space file")
    p_validate.add_argument("path")
    p_validate.set_defaults(func=cmd_space_validate)

    p_search = sub.add_parser("search", help="run a search")
    p_search.add_argument("method", choices=("sequential", "ga", "random"))
    p_search.add_argument("--space", help="space file (default: bundled 11-parameter space)")
    p_search.add_argument("--objective", default="surrogate:separable",
                          help="objective spec, e.g. surrogate:separable?noise=0.5 or worker:CMD")
    p_search.add_argument("--journal", help="journal output path (JSONL)")
    p_search.add_argument("--resume", help="resume an interrupted run from its journal")
    p_search.add_argument("--seed", type=int, default=0)
    p_search.add_argument("--epochs", type=int, default=5, help="epochs per worker evaluation")
    p_search.add_argument("--parallel", type=int, default=1)
    p_search.add_argument("--eval-timeout", type=float, default=3600.0)
    p_search.add_argument("--deterministic", action="store_true",
                          help="suppress timestamps and random run ids")
    p_search.add_argument("--start", default="default", choices=("default", "grid-default"),
                          help="sequential start config")
    p_search.add_argument("--pop", type=int, default=12)
    p_search.add_argument("--gens", type=int, default=7)
    p_search.add_argument("--pmut", type=float, default=0.2)
    p_search.add_argument("--fitness", default="inverse", choices=ga.FITNESS_SCHEMES)
    p_search.add_argument("--elitism", type=int, default=0)
    p_search.add_argument("--init", default="neighborhood", choices=("neighborhood", "uniform"))
    p_search.add_argument("--budget", type=int, default=ga.DEFAULT_BUDGET,
                          help="unique-evaluation budget for ga")
    p_search.add_argument("--n", type=int, default=84, help="samples for random search")
    p_search.set_defaults(func=cmd_search)

    p_analyze = sub.add_parser("analyze", help="sensitivity analysis of a journal")
    p_analyze.add_argument("--journal", required=True)
    p_analyze.add_argument("--space")
    p_analyze.add_argument("--alpha", type=float, default=analysis.DEFAULT_ALPHA)
    p_analyze.add_argument("--near", type=float, default=analysis.DEFAULT_NEAR_THRESHOLD)
    p_analyze.add_argument("--out", default="analysis_out")
    p_analyze.add_argument("--svg-dir")
    p_analyze.add_argument("--csv-dir")
    p_analyze.add_argument("--deterministic", action="store_true")
    p_analyze.set_defaults(func=cmd_analyze)

    p_report = sub.add_parser("report", help="report operations")
    report_sub = p_report.add_subparsers(dest="report_command", required=True)
    p_compare = report_sub.add_parser("compare", help="default-vs-best comparison")
    p_compare.add_argument("--journal", required=True)
    p_compare.add_argument("--space")
    p_compare.set_defaults(func=cmd_report_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (space_mod.SpaceError, journal.JournalError, analysis.AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ObjectiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OBJECTIVE
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
