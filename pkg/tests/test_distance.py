"""Jaccard metric, distance matrices, nearest neighbours."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import build_node, build_robot, random_connected_robot
from metamorph.distance import (
    METRIC_GED,
    METRIC_GED_UPPER,
    METRIC_JACCARD,
    distance_matrix,
    jaccard_distance,
    jaccard_index,
    nearest_neighbors,
    robot_distance,
)
from metamorph.errors import EmptyDatasetError, KTooLargeError
from metamorph.ged import SearchBudget
from metamorph.morphology import PROFILE_FULL


def test_jaccard_hand_values():
    a = frozenset({"Body", "Head", "Wheel"})
    b = frozenset({"Body", "Arm"})
    assert jaccard_index(a, b) == pytest.approx(0.25)
    assert jaccard_distance(a, b) == pytest.approx(0.75)
    assert jaccard_index(a, a) == 1.0
    assert jaccard_index(frozenset(), frozenset()) == 1.0
    assert jaccard_index(a, frozenset()) == 0.0


tokens = st.frozensets(st.sampled_from(["a", "b", "c", "d", "e", "f"]), max_size=6)


@given(a=tokens, b=tokens)
def test_jaccard_properties(a, b):
    index = jaccard_index(a, b)
    assert 0.0 <= index <= 1.0
    assert index == jaccard_index(b, a)
    assert jaccard_index(a, a) == 1.0


def test_robot_distance_jaccard_uses_profiles(mini):
    a = build_robot([build_node("x", "Body")], [], coverage="FullyCovered",
                    materials=["metal"])
    b = build_robot([build_node("y", "Body")], [], coverage="FullyVisible")
    same_concepts = robot_distance(mini, a, b, metric=METRIC_JACCARD)
    assert same_concepts.value == 0.0
    assert same_concepts.exact
    # The full profile sees the covering difference.
    full = robot_distance(mini, a, b, metric=METRIC_JACCARD, profile=PROFILE_FULL)
    assert full.value > 0.0


def test_ged_metric_expands_multiplicities(mini):
    compressed = build_robot(
        [build_node("b", "Body"), build_node("w", "Wheel", mult=4)],
        [("b", "w")],
    )
    expanded_by_hand = build_robot(
        [build_node("b", "Body")] + [build_node(f"w{i}", "Wheel") for i in range(4)],
        [("b", f"w{i}") for i in range(4)],
    )
    result = robot_distance(mini, compressed, expanded_by_hand, metric=METRIC_GED)
    assert result.value == 0.0
    assert result.exact
    # Without expansion the same pair costs three node inserts + edges.
    raw = robot_distance(mini, compressed, expanded_by_hand, metric=METRIC_GED,
                         expand=False)
    assert raw.value == 6.0


def test_unknown_metric_rejected(mini):
    a = build_robot([build_node("x", "Body")], [])
    with pytest.raises(ValueError):
        robot_distance(mini, a, a, metric="euclidean")
    with pytest.raises(ValueError):
        distance_matrix(mini, [("a", a)], metric="euclidean")


# --- matrices -------------------------------------------------------------------


def three_items():
    a = build_robot([build_node("x", "Body")], [])
    b = build_robot([build_node("x", "Body"), build_node("y", "Head")], [("x", "y")])
    c = build_robot([build_node("x", "Wheel")], [])
    return [("alpha", a), ("beta", b), ("gamma", c)]


def test_single_robot_matrix_is_zero(mini):
    result = distance_matrix(mini, three_items()[:1], metric=METRIC_GED)
    assert result.values == ((0.0,),)
    assert result.exact == ((True,),)
    assert result.diagnostics == ()


def test_matrix_symmetry_and_diagonal(mini):
    result = distance_matrix(mini, three_items(), metric=METRIC_GED)
    values = result.values
    assert all(values[i][i] == 0.0 for i in range(3))
    assert all(
        values[i][j] == values[j][i] for i in range(3) for j in range(3)
    )
    assert values[0][1] == 2.0  # grow by Head + edge
    assert values[0][2] == 1.0  # relabel
    assert all(flag for row in result.exact for flag in row)


def test_matrix_random_fixtures_stay_symmetric(mini):
    rng = random.Random(2024)
    items = [
        (f"r{i}", random_connected_robot(rng, 6)) for i in range(6)
    ]
    for metric in (METRIC_JACCARD, METRIC_GED, METRIC_GED_UPPER):
        result = distance_matrix(mini, items, metric=metric)
        assert result.values == tuple(zip(*result.values))


def test_matrix_poisoned_cell_gets_nan_not_abort(mini):
    # Two cores: multiplicity expansion cannot pick a root.
    broken = build_robot(
        [build_node("a", "Body"), build_node("b", "Base"), build_node("c", "Wheel", mult=2)],
        [("a", "b"), ("b", "c")],
    )
    items = three_items() + [("delta", broken)]
    result = distance_matrix(mini, items, metric=METRIC_GED)
    assert math.isnan(result.values[0][3])
    assert math.isnan(result.values[3][0])
    assert not result.exact[0][3]
    # Healthy cells are untouched.
    assert result.values[0][1] == 2.0
    assert result.diagnostics and "delta" in result.diagnostics[0]


def test_matrix_exactness_flags_track_budget(mini):
    rng = random.Random(55)
    big = random_connected_robot(rng, 16, extra_edges=0)
    while len(big.nodes) <= 12:
        big = random_connected_robot(rng, 16, extra_edges=0)
    items = [("small", three_items()[0][1]), ("large", big)]
    result = distance_matrix(mini, items, metric=METRIC_GED)
    assert result.exact[0][0] and result.exact[1][1]
    assert not result.exact[0][1]
    assert not math.isnan(result.values[0][1])


def test_matrix_progress_callback(mini):
    calls = []
    distance_matrix(
        mini, three_items(), metric=METRIC_JACCARD,
        progress=lambda done, total: calls.append((done, total)),
    )
    assert calls == [(1, 3), (2, 3), (3, 3)]


def test_empty_matrix_rejected(mini):
    with pytest.raises(EmptyDatasetError):
        distance_matrix(mini, [])


# --- nearest neighbours ------------------------------------------------------------


def test_knn_member_probe_is_its_own_neighbour(mini):
    items = three_items()
    got = nearest_neighbors(mini, items, items[1][1], k=1, metric=METRIC_GED)
    assert got[0].name == "beta"
    assert got[0].value == 0.0
    assert got[0].exact


def test_knn_full_ranking_is_monotone(mini):
    items = three_items()
    got = nearest_neighbors(mini, items, items[0][1], k=3, metric=METRIC_GED)
    assert [nb.name for nb in got] == ["alpha", "gamma", "beta"]
    assert [nb.value for nb in got] == sorted(nb.value for nb in got)


def test_knn_ties_rank_by_name(mini):
    twin = build_robot([build_node("x", "Body")], [])
    items = [("zulu", twin), ("alpha", twin), ("mike", twin)]
    got = nearest_neighbors(mini, items, twin, k=3)
    assert [nb.name for nb in got] == ["alpha", "mike", "zulu"]
    assert all(nb.value == 0.0 for nb in got)


def test_knn_argument_errors(mini):
    items = three_items()
    with pytest.raises(EmptyDatasetError):
        nearest_neighbors(mini, [], items[0][1], k=1)
    with pytest.raises(KTooLargeError):
        nearest_neighbors(mini, items, items[0][1], k=4)
    with pytest.raises(ValueError):
        nearest_neighbors(mini, items, items[0][1], k=0)


def test_knn_respects_budget_flag(mini):
    rng = random.Random(7)
    big = random_connected_robot(rng, 16, extra_edges=0)
    while len(big.nodes) <= 12:
        big = random_connected_robot(rng, 16, extra_edges=0)
    items = [("big", big)]
    got = nearest_neighbors(
        mini, items, three_items()[0][1], k=1, metric=METRIC_GED,
        budget=SearchBudget(max_nodes=4, max_states=10),
    )
    assert not got[0].exact
