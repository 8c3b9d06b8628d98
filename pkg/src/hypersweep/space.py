"""Discrete hyperparameter grids: parameter specs, configurations, identity, traversal.

A search space is an ordered list of parameters, each with a finite, strictly
increasing grid of candidate values and a default (which may legally lie off
the grid). Configurations are plain dicts mapping parameter name to value.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterator

Number = int | float
Config = dict[str, Number]

DEFAULT_GUARD_LIMIT = 10_000_000

KINDS = ("integer", "real")


class SpaceError(ValueError):
    """Malformed space document or configuration invalid for its space."""


def _check_number(value: Any, where: str) -> Number:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpaceError(f"{where}: expected a number, got {value!r}")
    if value != value or value in (float("inf"), float("-inf")):
        raise SpaceError(f"{where}: non-finite number")
    return value


def _coerce(value: Number, kind: str, where: str) -> Number:
    _check_number(value, where)
    if kind == "integer":
        if float(value) != int(value):
            raise SpaceError(f"{where}: {value!r} is not an integer")
        return int(value)
    return float(value)


def render_value(value: Number, kind: str) -> str:
    """Canonical shortest round-trip rendering; 0.5 and 0.50 render identically."""
    if kind == "integer":
        return str(int(value))
    return repr(float(value))


@dataclass(frozen=True)
class ParamSpec:
    """One hyperparameter: its ordered candidate grid and its default value."""

    name: str
    kind: str
    grid: tuple[Number, ...]
    default: Number

    def __post_init__(self) -> None:
        if not self.name or not isinstance(self.name, str):
            raise SpaceError("parameter name must be a non-empty string")
        if self.kind not in KINDS:
            raise SpaceError(f"{self.name}: kind must be one of {KINDS}, got {self.kind!r}")
        if not self.grid:
            raise SpaceError(f"{self.name}: empty grid")
        grid = tuple(_coerce(v, self.kind, f"{self.name} grid") for v in self.grid)
        for a, b in zip(grid, grid[1:]):
            if a == b:
                raise SpaceError(f"{self.name}: duplicate grid value {a!r}")
            if a > b:
                raise SpaceError(f"{self.name}: grid not strictly increasing at {a!r} > {b!r}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "default", _coerce(self.default, self.kind, f"{self.name} default"))

    @property
    def default_on_grid(self) -> bool:
        return self.default in self.grid

    def conforms(self, value: Number) -> bool:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        if value != value or value in (float("inf"), float("-inf")):
            return False
        if self.kind == "integer":
            return float(value) == int(value)
        return True

    def index_of(self, value: Number) -> int | None:
        """Exact grid index of ``value``, or None if off-grid."""
        for i, g in enumerate(self.grid):
            if g == value:
                return i
        return None

    def snap(self, value: Number) -> int:
        """Index of the nearest grid value; ties resolve toward the lower index."""
        best, best_dist = 0, abs(self.grid[0] - value)
        for i, g in enumerate(self.grid[1:], start=1):
            d = abs(g - value)
            if d < best_dist:
                best, best_dist = i, d
        return best

    def fractional_index(self, value: Number) -> float:
        """Position of ``value`` on the grid's index axis, interpolating off-grid values.

        On-grid values map to their exact integer index; off-grid values are
        linearly interpolated (and extrapolated beyond the endpoints), so an
        off-grid value never aliases a grid point.
        """
        exact = self.index_of(value)
        if exact is not None:
            return float(exact)
        g = self.grid
        if len(g) == 1:
            return 0.0 if value == g[0] else (value - g[0])
        # pick the segment whose endpoints bracket value (clamped to end segments)
        if value <= g[0]:
            lo = 0
        elif value >= g[-1]:
            lo = len(g) - 2
        else:
            lo = max(i for i in range(len(g) - 1) if g[i] <= value)
        return lo + (value - g[lo]) / (g[lo + 1] - g[lo])


@dataclass(frozen=True)
class ConfigSpace:
    """Ordered collection of ParamSpecs; the order is the sweep order."""

    name: str
    params: tuple[ParamSpec, ...]
    guard_limit: int = DEFAULT_GUARD_LIMIT
    _by_name: dict[str, ParamSpec] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.params:
            raise SpaceError("empty space")
        object.__setattr__(self, "params", tuple(self.params))
        by_name: dict[str, ParamSpec] = {}
        for p in self.params:
            if p.name in by_name:
                raise SpaceError(f"duplicate parameter name {p.name!r}")
            by_name[p.name] = p
        object.__setattr__(self, "_by_name", by_name)
        if self.guard_limit < 1:
            raise SpaceError("guard_limit must be positive")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    def param(self, name: str) -> ParamSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise SpaceError(f"unknown parameter {name!r}") from None

    @property
    def size(self) -> int:
        n = 1
        for p in self.params:
            n *= len(p.grid)
        return n

    @property
    def off_grid_defaults(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params if not p.default_on_grid)

    def validate_config(self, config: Config) -> None:
        if set(config) != set(self.names):
            missing = set(self.names) - set(config)
            extra = set(config) - set(self.names)
            parts = []
            if missing:
                parts.append(f"missing {sorted(missing)}")
            if extra:
                parts.append(f"unknown {sorted(extra)}")
            raise SpaceError("configuration keys do not match space: " + ", ".join(parts))
        for p in self.params:
            if not p.conforms(config[p.name]):
                raise SpaceError(f"{p.name}: value {config[p.name]!r} does not conform to kind {p.kind}")

    def default_config(self) -> Config:
        return {p.name: p.default for p in self.params}


def canonical_key(space: ConfigSpace, config: Config) -> str:
    """Hex digest identifying a configuration independent of construction order."""
    space.validate_config(config)
    parts = []
    for name in sorted(space.names):
        p = space.param(name)
        parts.append(f"{name}={render_value(config[name], p.kind)}")
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()


def space_digest(space: ConfigSpace) -> str:
    """Hex digest of the space's semantic content (name, params, grids, defaults)."""
    parts = [space.name]
    for p in space.params:
        grid = ",".join(render_value(v, p.kind) for v in p.grid)
        parts.append(f"{p.name}:{p.kind}:[{grid}]:{render_value(p.default, p.kind)}")
    return hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()


def iter_configs(space: ConfigSpace) -> Iterator[Config]:
    """Lazily yield every grid configuration in lexicographic grid-index order."""
    names = space.names
    for values in itertools.product(*(p.grid for p in space.params)):
        yield dict(zip(names, values))


def materialize(space: ConfigSpace) -> list[Config]:
    if space.size > space.guard_limit:
        raise SpaceError(
            f"space size {space.size} exceeds guard limit {space.guard_limit}; "
            "refusing to materialize"
        )
    return list(iter_configs(space))


def neighbor(space: ConfigSpace, config: Config, param: str, step: int) -> Config:
    """Move one parameter |step| positions along its grid, reflecting at the edges.

    Off-grid current values snap to the nearest grid index (ties toward the
    lower index) before stepping, so the result is always on the grid.
    """
    space.validate_config(config)
    p = space.param(param)
    idx = p.index_of(config[param])
    if idx is None:
        idx = p.snap(config[param])
    n = len(p.grid)
    target = idx + step
    if n > 1:
        period = 2 * (n - 1)
        target %= period
        if target > n - 1:
            target = period - target
    else:
        target = 0
    out = dict(config)
    out[param] = p.grid[target]
    return out


def random_config(space: ConfigSpace, rng: random.Random) -> Config:
    """Draw each parameter independently and uniformly from its grid."""
    return {p.name: rng.choice(p.grid) for p in space.params}


def parse_space(document: str) -> ConfigSpace:
    """Parse a space-file JSON document into a validated ConfigSpace."""

    def _reject_constant(token: str) -> Number:
        raise SpaceError(f"non-finite number {token!r} in space document")

    try:
        doc = json.loads(document, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SpaceError(f"malformed space document: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpaceError("space document must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise SpaceError("space document missing string field 'name'")
    raw_params = doc.get("parameters")
    if not isinstance(raw_params, list) or not raw_params:
        raise SpaceError("empty space")
    specs = []
    for i, raw in enumerate(raw_params):
        if not isinstance(raw, dict):
            raise SpaceError(f"parameters[{i}] is not an object")
        for key in ("name", "kind", "grid", "default"):
            if key not in raw:
                raise SpaceError(f"parameters[{i}] missing field {key!r}")
        specs.append(
            ParamSpec(
                name=raw["name"],
                kind=raw["kind"],
                grid=tuple(raw["grid"]),
                default=raw["default"],
            )
        )
    guard = doc.get("guard_limit", DEFAULT_GUARD_LIMIT)
    if not isinstance(guard, int) or isinstance(guard, bool):
        raise SpaceError("guard_limit must be an integer")
    return ConfigSpace(name=name, params=tuple(specs), guard_limit=guard)


def serialize_space(space: ConfigSpace) -> str:
    """Render a ConfigSpace back to its space-file JSON form."""
    doc = {
        "name": space.name,
        "guard_limit": space.guard_limit,
        "parameters": [
            {"name": p.name, "kind": p.kind, "grid": list(p.grid), "default": p.default}
            for p in space.params
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def load_space(path: str) -> ConfigSpace:
    with open(path, encoding="utf-8") as fh:
        return parse_space(fh.read())
