"""Robot-to-robot distances and dataset-scale queries.

Three metrics: Jaccard distance over feature sets, exact graph edit distance
with automatic fallback past the search budget, and the assignment upper
bound on its own.  Edit distances are computed on the multiplicity-expanded
graphs by default; feature sets do not change under expansion, so the
Jaccard metric never needs it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import EmptyDatasetError, KTooLargeError, MetamorphError
from .ged import CostModel, DistanceResult, SearchBudget, ged_exact, ged_upper_bound
from .morphology import (
    PROFILE_CONCEPTS,
    RobotMorphology,
    expand_multiplicities,
    feature_set,
)
from .taxonomy import Taxonomy

METRIC_JACCARD = "jaccard"
METRIC_GED = "ged"
METRIC_GED_UPPER = "ged-upper"
METRICS = (METRIC_JACCARD, METRIC_GED, METRIC_GED_UPPER)


def jaccard_index(a: frozenset[str], b: frozenset[str]) -> float:
    """Set overlap in [0, 1]; two empty sets count as identical (1.0)."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def jaccard_distance(a: frozenset[str], b: frozenset[str]) -> float:
    return 1.0 - jaccard_index(a, b)


def robot_distance(
    taxonomy: Taxonomy,
    a: RobotMorphology,
    b: RobotMorphology,
    metric: str = METRIC_JACCARD,
    cost: CostModel | None = None,
    budget: SearchBudget | None = None,
    profile: str = PROFILE_CONCEPTS,
    expand: bool = True,
) -> DistanceResult:
    if metric == METRIC_JACCARD:
        value = jaccard_distance(feature_set(a, profile), feature_set(b, profile))
        return DistanceResult(value=value, exact=True)
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if expand:
        a = expand_multiplicities(taxonomy, a)
        b = expand_multiplicities(taxonomy, b)
    if metric == METRIC_GED:
        return ged_exact(a, b, cost, budget)
    return ged_upper_bound(a, b, cost)


@dataclass(frozen=True)
class MatrixResult:
    names: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    exact: tuple[tuple[bool, ...], ...]
    diagnostics: tuple[str, ...]


def distance_matrix(
    taxonomy: Taxonomy,
    items: Sequence[tuple[str, RobotMorphology]],
    metric: str = METRIC_JACCARD,
    cost: CostModel | None = None,
    budget: SearchBudget | None = None,
    profile: str = PROFILE_CONCEPTS,
    expand: bool = True,
    progress: Callable[[int, int], None] | None = None,
) -> MatrixResult:
    """Pairwise distances over a robot collection.

    A failing pair poisons only its own cell: the value becomes NaN and the
    reason is appended to the diagnostics list.  With a symmetric cost model
    only the upper triangle is computed and mirrored.
    """
    if not items:
        raise EmptyDatasetError("distance matrix needs at least one robot")
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")

    names = [name for name, _ in items]
    n = len(items)
    values = [[0.0] * n for _ in range(n)]
    exact = [[True] * n for _ in range(n)]
    diagnostics: list[str] = []

    # Per-robot work done once: feature sets for Jaccard, expansion for GED.
    prepared: list[object] = []
    for name, morph in items:
        try:
            if metric == METRIC_JACCARD:
                prepared.append(feature_set(morph, profile))
            elif expand:
                prepared.append(expand_multiplicities(taxonomy, morph))
            else:
                prepared.append(morph)
        except MetamorphError as exc:
            prepared.append(exc)
            diagnostics.append(f"{name}: {exc}")

    symmetric = cost is None or cost.symmetric
    pairs = [
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and (not symmetric or i < j)
    ]
    total = len(pairs)
    for done, (i, j) in enumerate(pairs, start=1):
        left, right = prepared[i], prepared[j]
        if isinstance(left, MetamorphError) or isinstance(right, MetamorphError):
            values[i][j] = math.nan
            exact[i][j] = False
        else:
            try:
                if metric == METRIC_JACCARD:
                    values[i][j] = jaccard_distance(left, right)
                    exact[i][j] = True
                elif metric == METRIC_GED:
                    result = ged_exact(left, right, cost, budget)
                    values[i][j] = result.value
                    exact[i][j] = result.exact
                else:
                    result = ged_upper_bound(left, right, cost)
                    values[i][j] = result.value
                    exact[i][j] = result.exact
            except MetamorphError as exc:
                values[i][j] = math.nan
                exact[i][j] = False
                diagnostics.append(f"{names[i]} vs {names[j]}: {exc}")
        if symmetric:
            values[j][i] = values[i][j]
            exact[j][i] = exact[i][j]
        if progress is not None:
            progress(done, total)

    return MatrixResult(
        names=tuple(names),
        values=tuple(tuple(row) for row in values),
        exact=tuple(tuple(row) for row in exact),
        diagnostics=tuple(diagnostics),
    )


@dataclass(frozen=True)
class Neighbor:
    name: str
    value: float
    exact: bool


def nearest_neighbors(
    taxonomy: Taxonomy,
    items: Sequence[tuple[str, RobotMorphology]],
    probe: RobotMorphology,
    k: int,
    metric: str = METRIC_JACCARD,
    cost: CostModel | None = None,
    budget: SearchBudget | None = None,
    profile: str = PROFILE_CONCEPTS,
    expand: bool = True,
) -> tuple[Neighbor, ...]:
    """The k records closest to the probe; distance ties rank by name."""
    if not items:
        raise EmptyDatasetError("nearest-neighbour query over an empty dataset")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > len(items):
        raise KTooLargeError(f"k={k} exceeds the {len(items)} records available")

    scored = []
    for name, morph in items:
        result = robot_distance(
            taxonomy, probe, morph, metric=metric, cost=cost,
            budget=budget, profile=profile, expand=expand,
        )
        scored.append(Neighbor(name=name, value=result.value, exact=result.exact))
    scored.sort(key=lambda nb: (nb.value, nb.name))
    return tuple(scored[:k])
