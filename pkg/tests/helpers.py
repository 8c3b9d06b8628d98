import sys
from pathlib import Path

from hypersweep.space import ConfigSpace, ParamSpec

TESTS_DIR = Path(__file__).parent
SPACE_PATH = Path(__file__).parents[1] / "src" / "hypersweep" / "data" / "lstm_lm.json"
STUB_WORKER = TESTS_DIR / "stub_worker.py"
PYTHON = sys.executable


def small_space() -> ConfigSpace:
    """3x2 space used across unit tests."""
    return ConfigSpace(
        "small",
        (
            ParamSpec("x", "integer", (1, 2, 3), 1),
            ParamSpec("y", "real", (0.5, 1.0), 0.5),
        ),
    )


def coupled_space(n_params: int = 2, grid_size: int = 2) -> ConfigSpace:
    return ConfigSpace(
        "coupled",
        tuple(
            ParamSpec(f"p{i}", "integer", tuple(range(grid_size)), 0)
            for i in range(n_params)
        ),
    )


def strip_timing(doc: dict) -> dict:
    out = dict(doc)
    out.pop("wall_seconds", None)
    return out
