"""Regenerate the bundled fixture journal and the golden analyze outputs.

Run from the repository root:

    python3 scripts/make_fixtures.py
"""

import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).parents[1]
FIXTURES = ROOT / "tests" / "fixtures"
GOLDEN = ROOT / "tests" / "golden"

sys.path.insert(0, str(ROOT / "src"))

from hypersweep.cli import builtin_space_path, main as cli_main  # noqa: E402
from hypersweep.ga import GaParams, ga_search  # noqa: E402
from hypersweep.journal import RunJournal, new_header  # noqa: E402
from hypersweep.objective import Evaluator, separable_from_defaults  # noqa: E402
from hypersweep.space import load_space, space_digest  # noqa: E402

SEED = 42


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    journal_path = FIXTURES / "fixture_journal.jsonl"

    space = load_space(str(builtin_space_path()))
    objective = separable_from_defaults(space, base=480.0, weight=8.0, noise_sd=12.0, seed=SEED)
    header = new_header(space_digest(space), "ga", SEED, params={"fixture": True},
                        deterministic=True)
    journal = RunJournal.create(journal_path, header)
    evaluator = Evaluator(objective, journal=journal)
    evaluator.evaluate(space.default_config(), SEED, "baseline")
    ga_search(evaluator, GaParams(init_mode="uniform"), seed=SEED)
    journal.close()
    print(f"wrote {journal_path} ({evaluator.unique_evaluations} unique evaluations)")

    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    rc = cli_main([
        "analyze", "--journal", str(journal_path), "--deterministic",
        "--out", str(GOLDEN),
    ])
    if rc != 0:
        raise SystemExit(f"analyze failed with exit code {rc}")
    print(f"wrote golden outputs to {GOLDEN}")


if __name__ == "__main__":
    main()
