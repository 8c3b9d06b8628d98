"""Sensitivity analysis over journaled evaluations.

Groups test perplexity by each hyperparameter's observed values, tests the
default value's group against the rest (Mann-Whitney U), and assigns one of
four buckets: better, not_worse_near_best, not_worse_not_best, worse. Also
produces the default-vs-best comparison and machine-readable exports.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .objective import EvaluationRecord
from .space import Config, ConfigSpace, render_value

DEFAULT_ALPHA = 0.05
DEFAULT_NEAR_THRESHOLD = 0.01

BUCKETS = ("better", "not_worse_near_best", "not_worse_not_best", "worse")


class AnalysisError(ValueError):
    """Empty inputs or records insufficient for the requested analysis."""


# ---------------------------------------------------------------------------
# box statistics


@dataclass
class BoxStats:
    value: float | int
    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    whisker_lo: float
    whisker_hi: float
    outliers: list[float] = field(default_factory=list)


def _interpolated_quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear interpolation at position q*(n-1) on sorted data."""
    n = len(sorted_values)
    pos = q * (n - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, n - 1)
    frac = pos - lo
    return sorted_values[lo] * (1 - frac) + sorted_values[hi] * frac


def box_stats(value: float | int, sample: Sequence[float]) -> BoxStats:
    if not sample:
        raise AnalysisError("empty sample")
    data = sorted(float(x) for x in sample)
    q1 = _interpolated_quantile(data, 0.25)
    med = _interpolated_quantile(data, 0.5)
    q3 = _interpolated_quantile(data, 0.75)
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = [x for x in data if lo_fence <= x <= hi_fence]
    outliers = [x for x in data if x < lo_fence or x > hi_fence]
    whisker_lo = min(inside) if inside else q1
    whisker_hi = max(inside) if inside else q3
    return BoxStats(
        value=value, n=len(data), min=data[0], q1=q1, median=med, q3=q3,
        max=data[-1], whisker_lo=whisker_lo, whisker_hi=whisker_hi,
        outliers=outliers,
    )


def group_records(
    records: Sequence[EvaluationRecord], param: str
) -> dict[float | int, list[float]]:
    groups: dict[float | int, list[float]] = {}
    for rec in records:
        if not rec.ok:
            continue
        if param not in rec.config:
            raise AnalysisError(f"unknown parameter {param!r}")
        groups.setdefault(rec.config[param], []).append(rec.test_perplexity)
    if not groups:
        raise AnalysisError("no ok records to group")
    return groups


def group_stats(records: Sequence[EvaluationRecord], param: str) -> list[BoxStats]:
    """One BoxStats per observed value of ``param``, ordered by value."""
    groups = group_records(records, param)
    return [box_stats(value, sample) for value, sample in sorted(groups.items())]


# ---------------------------------------------------------------------------
# Mann-Whitney U


def _midranks(pooled: Sequence[float]) -> list[float]:
    order = sorted(range(len(pooled)), key=lambda i: pooled[i])
    ranks = [0.0] * len(pooled)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1  # 1-based midrank
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _u_count_distribution(n1: int, n2: int) -> list[int]:
    """Number of rank arrangements giving each U value (no ties).

    The distribution is the coefficient list of the Gaussian binomial
    (n1+n2 choose n1)_q = prod_i (1 - q^(n2+i)) / (1 - q^i).
    """
    max_u = n1 * n2
    poly = [1]
    for i in range(1, n1 + 1):
        # multiply by (1 - q^(n2+i)) / (1 - q^i)
        # numerator: poly * (1 - q^(n2+i))
        num = poly + [0] * (n2 + i)
        for j, c in enumerate(poly):
            num[j + n2 + i] -= c
        # divide by (1 - q^i): synthetic division
        quot = [0] * (len(num) - i)
        for j in range(len(quot)):
            quot[j] = num[j] + (quot[j - i] if j >= i else 0)
        poly = quot
        while poly and poly[-1] == 0:
            poly.pop()
    counts = poly + [0] * (max_u + 1 - len(poly))
    return counts[: max_u + 1]


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sided Mann-Whitney U test.

    Returns (U statistic for sample a, two-sided p). Exact p by enumeration
    when the pooled sample has no ties and at most 16 points; otherwise a
    normal approximation with midrank tie correction and continuity
    correction.
    """
    if not a or not b:
        raise AnalysisError("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    pooled = list(a) + list(b)
    ranks = _midranks(pooled)
    r1 = sum(ranks[:n1])
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    has_ties = len(set(pooled)) < len(pooled)

    if not has_ties and n1 + n2 <= 16:
        counts = _u_count_distribution(n1, n2)
        total = sum(counts)
        umin = min(u1, u2)
        extreme = sum(c for u, c in enumerate(counts) if min(u, n1 * n2 - u) <= umin)
        return u1, extreme / total

    mean = n1 * n2 / 2.0
    n = n1 + n2
    tie_term = 0.0
    seen: dict[float, int] = {}
    for v in pooled:
        seen[v] = seen.get(v, 0) + 1
    for t in seen.values():
        tie_term += t**3 - t
    sigma_sq = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma_sq <= 0:
        return u1, 1.0
    ubig = max(u1, u2)
    z = (ubig - mean - 0.5) / math.sqrt(sigma_sq)  # continuity correction
    p = 2.0 * _normal_sf(max(z, 0.0))
    return u1, min(1.0, p)


# ---------------------------------------------------------------------------
# categorization


@dataclass
class ParamSensitivity:
    name: str
    default_value: float | int
    groups: list[BoxStats]
    analyzable: bool
    bucket: str | None = None
    p_value: float | None = None
    best_value: float | int | None = None
    default_median: float | None = None
    best_median: float | None = None
    note: str | None = None


@dataclass
class SensitivityReport:
    space_name: str
    alpha: float
    near_threshold: float
    test: str
    parameters: list[ParamSensitivity]
    metadata: dict[str, Any] = field(default_factory=dict)


def categorize(
    space: ConfigSpace,
    records: Sequence[EvaluationRecord],
    default_config: Config,
    alpha: float = DEFAULT_ALPHA,
    near_threshold: float = DEFAULT_NEAR_THRESHOLD,
) -> SensitivityReport:
    """Assign each hyperparameter one of the four sensitivity buckets.

    For each parameter the default value's perplexities are compared against
    all other values' pooled perplexities. A significant difference gives
    'better' or 'worse' by median direction; otherwise the default lands in
    'not_worse_near_best' when its group median is within ``near_threshold``
    (relative) of the best group median, else 'not_worse_not_best'.
    """
    ok = [r for r in records if r.ok]
    if not ok:
        raise AnalysisError("no ok records to analyze")
    params: list[ParamSensitivity] = []
    for spec in space.params:
        name = spec.name
        default_value = default_config[name]
        groups = group_records(ok, name)
        stats = [box_stats(v, s) for v, s in sorted(groups.items())]
        entry = ParamSensitivity(
            name=name, default_value=default_value, groups=stats, analyzable=True
        )
        if default_value not in groups:
            entry.analyzable = False
            entry.note = "default value never observed"
            params.append(entry)
            continue
        if len(groups) < 2:
            entry.analyzable = False
            entry.note = "only one value observed"
            params.append(entry)
            continue
        default_sample = groups[default_value]
        rest = [p for v, s in groups.items() if v != default_value for p in s]
        _, p_value = mann_whitney(default_sample, rest)
        medians = {st.value: st.median for st in stats}
        best_value = min(medians, key=lambda v: (medians[v], v))
        default_median = medians[default_value]
        best_median = medians[best_value]
        rest_median = box_stats(0, rest).median
        if p_value < alpha:
            bucket = "better" if default_median < rest_median else "worse"
        else:
            near = best_value == default_value or (
                best_median > 0 and (default_median - best_median) / best_median <= near_threshold
            )
            bucket = "not_worse_near_best" if near else "not_worse_not_best"
        entry.bucket = bucket
        entry.p_value = p_value
        entry.best_value = best_value
        entry.default_median = default_median
        entry.best_median = best_median
        params.append(entry)
    return SensitivityReport(
        space_name=space.name,
        alpha=alpha,
        near_threshold=near_threshold,
        test="mann_whitney_u_two_sided",
        parameters=params,
    )


# ---------------------------------------------------------------------------
# default-vs-best comparison


@dataclass
class DefaultComparison:
    default_perplexity: float
    best_perplexity: float
    changed_params: list[str]
    best_config: Config


def compare_default_vs_best(
    space: ConfigSpace,
    records: Sequence[EvaluationRecord],
    default_config: Config,
) -> DefaultComparison:
    from .space import canonical_key

    ok = [r for r in records if r.ok]
    if not ok:
        raise AnalysisError("no ok records")
    default_key = canonical_key(space, default_config)
    default_rec = next((r for r in ok if r.canonical_key == default_key), None)
    if default_rec is None:
        raise AnalysisError("default configuration absent from journal")
    best_rec = min(ok, key=lambda r: r.test_perplexity)
    changed = [
        name for name in space.names if best_rec.config[name] != default_config[name]
    ]
    return DefaultComparison(
        default_perplexity=default_rec.test_perplexity,
        best_perplexity=best_rec.test_perplexity,
        changed_params=changed,
        best_config=dict(best_rec.config),
    )


# ---------------------------------------------------------------------------
# export


def report_to_json_dict(report: SensitivityReport) -> dict[str, Any]:
    return {
        "space": report.space_name,
        "alpha": report.alpha,
        "near_threshold": report.near_threshold,
        "test": report.test,
        "metadata": report.metadata,
        "parameters": [
            {
                "name": p.name,
                "default_value": p.default_value,
                "analyzable": p.analyzable,
                "bucket": p.bucket,
                "p_value": p.p_value,
                "best_value": p.best_value,
                "default_median": p.default_median,
                "best_median": p.best_median,
                "note": p.note,
                "groups": [
                    {
                        "value": g.value, "n": g.n, "min": g.min, "q1": g.q1,
                        "median": g.median, "q3": g.q3, "max": g.max,
                        "outliers": g.outliers,
                    }
                    for g in p.groups
                ],
            }
            for p in report.parameters
        ],
    }


def export_report(
    report: SensitivityReport,
    destination: str | Path,
    formats: Sequence[str] = ("json", "csv"),
) -> list[Path]:
    """Write report.json and one quartile CSV per parameter; returns the paths."""
    if not report.parameters:
        raise AnalysisError("empty report")
    dest = Path(destination)
    dest.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if "json" in formats:
        path = dest / "report.json"
        path.write_text(
            json.dumps(report_to_json_dict(report), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        written.append(path)
    if "csv" in formats:
        for p in report.parameters:
            path = dest / f"{p.name}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["param", "value", "n", "min", "q1", "median", "q3", "max"])
                for g in p.groups:
                    writer.writerow([p.name, g.value, g.n, g.min, g.q1, g.median, g.q3, g.max])
            written.append(path)
    return written
