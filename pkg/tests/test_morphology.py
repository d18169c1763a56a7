"""Morphology graphs: validation, feature sets, expansion, canonical form."""

from __future__ import annotations

from collections import Counter
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from metamorph.errors import NoRootError, NotATreeError, UnknownNodeError
from metamorph.morphology import (
    PROFILE_FULL,
    CoveringSpec,
    DescriptorValue,
    MorphNode,
    RobotMorphology,
    SilhouetteSpec,
    canonicalize,
    expand_multiplicities,
    feature_set,
    validate,
)


def node(nid, concept, mult=1, desc=()):
    return MorphNode(id=nid, concept=concept, multiplicity=mult, descriptors=tuple(desc))


def robot(
    nodes,
    edges,
    coverage="FullyVisible",
    materials=(),
    silhouette="Anthropomorphic",
    hybrid=None,
):
    return RobotMorphology(
        nodes=tuple(nodes),
        edges=tuple(edges),
        covering=CoveringSpec(coverage, frozenset(materials)),
        silhouette=SilhouetteSpec(silhouette, hybrid),
    )


@pytest.fixture()
def humanoid():
    return robot(
        nodes=[
            node("torso", "Torso", desc=[
                DescriptorValue("Morphism", "Technical"),
                DescriptorValue("Shape", "Sphere"),
            ]),
            node("head", "Head"),
            node("eye", "Eye", mult=2),
        ],
        edges=[("torso", "head"), ("head", "eye")],
        coverage="FullyCovered",
        materials=["metal", "plastic"],
        silhouette="Hybrid",
        hybrid=("Anthropomorphic", "Technomorphic"),
    )


# --- validation: errors -------------------------------------------------------


def test_valid_robot_has_no_issues(mini, humanoid):
    report = validate(mini, humanoid)
    assert report.ok
    assert report.errors == ()
    assert report.lints == ()


def error_codes(mini, m):
    return [issue.code for issue in validate(mini, m).errors]


def test_unknown_and_wrong_kind_concepts(mini):
    m = robot([node("a", "NoSuchConcept"), node("b", "Morphism")], [("a", "b")])
    codes = error_codes(mini, m)
    assert "unknown-concept" in codes
    assert "wrong-kind" in codes


def test_multiplicity_must_be_positive(mini):
    m = robot([node("a", "Torso", mult=0)], [])
    assert error_codes(mini, m) == ["multiplicity"]


def test_duplicate_node_id(mini):
    m = robot([node("a", "Torso"), node("a", "Head")], [])
    assert "duplicate-node-id" in error_codes(mini, m)


def test_descriptor_errors(mini):
    m = robot(
        [
            node("a", "Torso", desc=[
                DescriptorValue("Ghost", "x"),
                DescriptorValue("FingerCount", "3"),
                DescriptorValue("Morphism", "Robotic"),
                DescriptorValue("Shape", "Sphere"),
                DescriptorValue("Shape", "Sphere"),
            ]),
        ],
        [],
    )
    codes = error_codes(mini, m)
    assert "unknown-descriptor" in codes
    assert "descriptor-not-applicable" in codes  # FingerCount only fits hands
    assert "descriptor-value" in codes
    assert "duplicate-descriptor" in codes


def test_edge_errors(mini):
    m = robot(
        [node("a", "Torso"), node("b", "Head")],
        [("a", "a"), ("a", "ghost"), ("a", "b"), ("b", "a")],
    )
    codes = error_codes(mini, m)
    assert codes.count("self-loop") == 1
    assert codes.count("dangling-edge") == 1
    # The reversed pair is the same undirected edge.
    assert codes.count("duplicate-edge") == 1


def test_disconnected_graph(mini):
    m = robot([node("a", "Torso"), node("b", "Head")], [])
    assert "disconnected" in error_codes(mini, m)


def test_covering_errors(mini):
    bad_kind = robot([node("a", "Torso")], [], coverage="Torso")
    assert error_codes(mini, bad_kind) == ["covering"]

    visible_with_materials = robot([node("a", "Torso")], [], materials=["metal"])
    assert error_codes(mini, visible_with_materials) == ["covering-materials"]

    covered_without_materials = robot([node("a", "Torso")], [], coverage="FullyCovered")
    assert error_codes(mini, covered_without_materials) == ["covering-materials"]


def test_silhouette_errors(mini):
    wrong_kind = robot([node("a", "Torso")], [], silhouette="FullyCovered")
    assert error_codes(mini, wrong_kind) == ["silhouette"]

    hybrid_without_parts = robot([node("a", "Torso")], [], silhouette="Hybrid")
    assert "silhouette" in error_codes(mini, hybrid_without_parts)

    parts_without_hybrid = robot(
        [node("a", "Torso")], [], silhouette="Zoomorphic",
        hybrid=("Anthropomorphic", "Technomorphic"),
    )
    assert "silhouette" in error_codes(mini, parts_without_hybrid)

    equal_parts = robot(
        [node("a", "Torso")], [], silhouette="Hybrid",
        hybrid=("Zoomorphic", "Zoomorphic"),
    )
    assert "silhouette" in error_codes(mini, equal_parts)

    hybrid_part = robot(
        [node("a", "Torso")], [], silhouette="Hybrid",
        hybrid=("Hybrid", "Zoomorphic"),
    )
    assert "silhouette" in error_codes(mini, hybrid_part)


def test_empty_robot_is_structurally_valid(mini):
    m = robot([], [])
    report = validate(mini, m)
    assert report.ok
    assert report.lints == ()


# --- validation: lints ----------------------------------------------------------


def lint_codes(mini, m):
    report = validate(mini, m)
    assert report.ok, report.errors
    return [issue.code for issue in report.lints]


def test_degree_lints(mini):
    # Wheel is terminal but sits mid-chain; Leg is connecting but dangles.
    m = robot(
        [node("b", "Body"), node("w", "Wheel"), node("l", "Leg")],
        [("b", "w"), ("w", "l")],
    )
    codes = lint_codes(mini, m)
    assert "terminal-degree" in codes
    assert "connecting-degree" in codes


def test_missing_core_lint(mini):
    codes = lint_codes(mini, robot([node("a", "Arm")], []))
    assert "no-core" in codes
    assert "connecting-degree" in codes


def test_lints_suppressed_while_errors_present(mini):
    m = robot([node("a", "Arm"), node("b", "Wheel")], [])  # disconnected, no core
    report = validate(mini, m)
    assert not report.ok
    assert report.lints == ()


# --- feature sets ------------------------------------------------------------


def test_concept_profile_ignores_multiplicity(humanoid):
    assert feature_set(humanoid) == frozenset({"Torso", "Head", "Eye"})


def test_full_profile_tokens(humanoid):
    assert feature_set(humanoid, PROFILE_FULL) == frozenset({
        "Torso",
        "Head",
        "Eye",
        "desc:Morphism=Technical",
        "desc:Shape=Sphere",
        "covering:FullyCovered",
        "material:metal",
        "material:plastic",
        "silhouette:Hybrid",
        "silhouette:Anthropomorphic",
        "silhouette:Technomorphic",
    })


def test_unknown_profile_rejected(humanoid):
    with pytest.raises(ValueError):
        feature_set(humanoid, "everything")


# --- multiplicity expansion -----------------------------------------------------


def concept_counts(m):
    return Counter(n.concept for n in m.nodes)


def test_expansion_is_identity_without_multiplicities(mini, humanoid):
    flat = robot([node("a", "Torso"), node("b", "Head")], [("a", "b")])
    assert expand_multiplicities(mini, flat) is flat


def test_branch_expansion_duplicates_whole_subtree(mini):
    m = robot(
        [node("body", "Body"), node("arm", "Arm", mult=2), node("hand", "Hand")],
        [("body", "arm"), ("arm", "hand")],
    )
    out = expand_multiplicities(mini, m)
    assert concept_counts(out) == Counter({"Body": 1, "Arm": 2, "Hand": 2})
    assert len(out.edges) == 4
    assert all(n.multiplicity == 1 for n in out.nodes)
    # Each hand hangs off its own arm copy.
    adj = out.adjacency()
    hand_neighbours = {adj[n.id][0] for n in out.nodes if n.concept == "Hand"}
    assert len(hand_neighbours) == 2
    assert validate(mini, out).ok


def test_nested_multiplicities_multiply(mini):
    m = robot(
        [node("body", "Body"), node("arm", "Arm", mult=2), node("hand", "Hand", mult=2)],
        [("body", "arm"), ("arm", "hand")],
    )
    out = expand_multiplicities(mini, m)
    assert concept_counts(out) == Counter({"Body": 1, "Arm": 2, "Hand": 4})
    assert len(out.nodes) == 7
    assert len(out.edges) == 6


def test_expansion_keeps_descriptors(mini):
    m = robot(
        [node("body", "Body"),
         node("hand", "Hand", mult=3, desc=[DescriptorValue("FingerCount", "5")])],
        [("body", "hand")],
    )
    out = expand_multiplicities(mini, m)
    hands = [n for n in out.nodes if n.concept == "Hand"]
    assert len(hands) == 3
    assert all(n.descriptors == (DescriptorValue("FingerCount", "5"),) for n in hands)


def test_expansion_root_selection(mini):
    no_core = robot([node("a", "Arm", mult=2), node("b", "Leg")], [("a", "b")])
    with pytest.raises(NoRootError):
        expand_multiplicities(mini, no_core)
    # An explicit root rescues the rootless graph.
    out = expand_multiplicities(mini, no_core, root="b")
    assert concept_counts(out) == Counter({"Arm": 2, "Leg": 1})

    two_cores = robot(
        [node("a", "Body", mult=1), node("b", "Base", mult=2)], [("a", "b")]
    )
    with pytest.raises(NoRootError):
        expand_multiplicities(mini, two_cores)

    with pytest.raises(UnknownNodeError):
        expand_multiplicities(mini, no_core, root="ghost")


def test_expansion_requires_tree(mini):
    cyclic = robot(
        [node("a", "Body"), node("b", "Arm", mult=2), node("c", "Leg")],
        [("a", "b"), ("b", "c"), ("c", "a")],
    )
    with pytest.raises(NotATreeError):
        expand_multiplicities(mini, cyclic)


def test_expansion_survives_id_collisions(mini):
    m = robot(
        [node("body", "Body"), node("arm", "Arm", mult=2), node("arm#1", "Leg")],
        [("body", "arm"), ("body", "arm#1")],
    )
    out = expand_multiplicities(mini, m)
    ids = [n.id for n in out.nodes]
    assert len(set(ids)) == len(ids) == 4
    assert concept_counts(out) == Counter({"Body": 1, "Arm": 2, "Leg": 1})


# --- canonical form -----------------------------------------------------------


def test_canonical_order_and_ids(humanoid):
    out = canonicalize(humanoid)
    assert [n.id for n in out.nodes] == ["n001", "n002", "n003"]
    # Sorted by concept id: Eye, Head, Torso.
    assert [n.concept for n in out.nodes] == ["Eye", "Head", "Torso"]
    assert out.edges == (("n001", "n002"), ("n002", "n003"))
    # Node-level descriptor order is normalised too.
    assert out.nodes[2].descriptors == (
        DescriptorValue("Morphism", "Technical"),
        DescriptorValue("Shape", "Sphere"),
    )


def test_canonical_degree_breaks_concept_ties(mini):
    m = robot(
        [node("x", "Wheel"), node("hub", "Body"), node("y", "Wheel"), node("z", "Wheel")],
        [("hub", "x"), ("hub", "y"), ("hub", "z"), ("x", "y")],
    )
    out = canonicalize(m)
    # Body first, then wheels: the degree-1 wheel precedes the degree-2 pair.
    degrees = [len(out.adjacency()[n.id]) for n in out.nodes]
    assert [n.concept for n in out.nodes] == ["Body", "Wheel", "Wheel", "Wheel"]
    assert degrees == [3, 1, 2, 2]


SUBDIVISIONS = [
    "Base", "Body", "Torso", "Head", "Neck", "Arm", "Leg",
    "Hand", "Gripper", "Tool", "Eye", "Wheel",
]


@st.composite
def tree_robots(draw):
    size = draw(st.integers(min_value=1, max_value=8))
    concepts = [draw(st.sampled_from(SUBDIVISIONS)) for _ in range(size)]
    nodes = [node(f"v{i}", concepts[i]) for i in range(size)]
    edges = []
    for i in range(1, size):
        parent = draw(st.integers(min_value=0, max_value=i - 1))
        edges.append((f"v{i}", f"v{parent}"))
    return robot(nodes, edges)


class TestCanonicalProperties:
    @given(m=tree_robots())
    def test_idempotent(self, m):
        once = canonicalize(m)
        assert canonicalize(once) == once

    @given(m=tree_robots())
    def test_structure_preserved(self, m):
        out = canonicalize(m)
        assert concept_counts(out) == concept_counts(m)
        assert len(out.edges) == len(m.edges)
        assert feature_set(out) == feature_set(m)
        assert sorted(len(v) for v in out.adjacency().values()) == sorted(
            len(v) for v in m.adjacency().values()
        )

    @given(perm=st.permutations(["a", "b", "c", "d", "e"]))
    def test_relabelling_invariance_with_distinct_keys(self, perm):
        ids = ["a", "b", "c", "d", "e"]
        concepts = ["Base", "Neck", "Head", "Eye", "Wheel"]
        edges = [("a", "b"), ("b", "c"), ("c", "d"), ("a", "e")]
        original = robot(
            [node(i, c) for i, c in zip(ids, concepts)], edges
        )
        mapping = dict(zip(ids, perm))
        renamed = RobotMorphology(
            nodes=tuple(replace(n, id=mapping[n.id]) for n in original.nodes),
            edges=tuple((mapping[x], mapping[y]) for x, y in original.edges),
            covering=original.covering,
            silhouette=original.silhouette,
        )
        assert canonicalize(renamed) == canonicalize(original)
