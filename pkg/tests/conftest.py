"""Shared fixtures: a compact taxonomy exercising every reasoning rule,
plus robot-graph builders used across the distance tests."""

from __future__ import annotations

import json
import random

import pytest

from metamorph.morphology import (
    CoveringSpec,
    MorphNode,
    RobotMorphology,
    SilhouetteSpec,
)
from metamorph.taxonomy import Taxonomy, load_taxonomy


def concept_dict(cid, parents=(), kind="Subdivision", label=None):
    return {
        "id": cid,
        "label": label or cid,
        "definition": "",
        "kind": kind,
        "parents": list(parents),
    }


def mini_taxonomy_doc() -> dict:
    """A small but structurally complete taxonomy used across these tests."""
    concepts = [
        concept_dict("MorphologicalSubdivision"),
        concept_dict("CoreSubdivision", ["MorphologicalSubdivision"]),
        concept_dict("Base", ["CoreSubdivision"]),
        concept_dict("Body", ["CoreSubdivision"]),
        concept_dict("Torso", ["Body"]),
        concept_dict("ConnectingSubdivision", ["MorphologicalSubdivision"]),
        concept_dict("Head", ["ConnectingSubdivision"]),
        concept_dict("Neck", ["ConnectingSubdivision"]),
        concept_dict("Limb", ["ConnectingSubdivision"]),
        concept_dict("Arm", ["Limb"]),
        concept_dict("Leg", ["Limb"]),
        concept_dict("TerminalSubdivision", ["MorphologicalSubdivision"]),
        concept_dict("Manipulator", ["TerminalSubdivision"]),
        concept_dict("Hand", ["Manipulator"]),
        concept_dict("PrecisionHand", ["Hand"]),
        concept_dict("Gripper", ["Manipulator"]),
        concept_dict("Tool", ["Manipulator"]),
        concept_dict("HeadSegment", ["TerminalSubdivision"]),
        concept_dict("Eye", ["HeadSegment"]),
        concept_dict("Appendage", ["TerminalSubdivision"]),
        concept_dict("Wheel", ["TerminalSubdivision"]),
        # Two parents with different depths: longest path wins.
        concept_dict("Display", ["HeadSegment", "Tool"]),
        # Equal-depth common ancestors for the LCA tie-break.
        concept_dict("AlphaGroup", ["TerminalSubdivision"]),
        concept_dict("BetaGroup", ["TerminalSubdivision"]),
        concept_dict("XThing", ["AlphaGroup", "BetaGroup"]),
        concept_dict("YThing", ["AlphaGroup", "BetaGroup"]),
        concept_dict("MorphologicalDescriptor", kind="Descriptor"),
        concept_dict("Morphism", ["MorphologicalDescriptor"], kind="Descriptor"),
        concept_dict("DegreeOfRealism", ["MorphologicalDescriptor"], kind="Descriptor"),
        concept_dict("Shape", ["MorphologicalDescriptor"], kind="Descriptor"),
        concept_dict("Sphere", ["Shape"], kind="Descriptor"),
        concept_dict("Box", ["Shape"], kind="Descriptor"),
        concept_dict("HandOrGripperConfiguration", ["MorphologicalDescriptor"], kind="Descriptor"),
        concept_dict("FingerCount", ["MorphologicalDescriptor"], kind="Descriptor"),
        concept_dict("Covering", kind="Covering"),
        concept_dict("FullyCovered", ["Covering"], kind="Covering"),
        concept_dict("PartiallyCovered", ["Covering"], kind="Covering"),
        concept_dict("FullyVisible", ["Covering"], kind="Covering"),
        concept_dict("MorphologicalSilhouette", kind="Silhouette"),
        concept_dict("Anthropomorphic", ["MorphologicalSilhouette"], kind="Silhouette"),
        concept_dict("Zoomorphic", ["MorphologicalSilhouette"], kind="Silhouette"),
        concept_dict("Technomorphic", ["MorphologicalSilhouette"], kind="Silhouette"),
        concept_dict("Geometric", ["MorphologicalSilhouette"], kind="Silhouette"),
        concept_dict("Hybrid", ["MorphologicalSilhouette"], kind="Silhouette"),
    ]
    rules = [
        {
            "descriptor": "Morphism",
            "general": True,
            "applicable_to": [],
            "values": ["Anthropomorphic", "Zoomorphic", "Technical"],
        },
        {
            "descriptor": "DegreeOfRealism",
            "general": True,
            "applicable_to": [],
            "values": ["Hyperrealistic", "Realistic", "Abstract", "Symbolic"],
        },
        {"descriptor": "Shape", "general": True, "applicable_to": [], "values": []},
        {
            "descriptor": "HandOrGripperConfiguration",
            "general": False,
            "applicable_to": ["Hand", "Gripper"],
            "values": ["Mitten", "TwoFinger", "FiveFinger"],
        },
        {
            "descriptor": "FingerCount",
            "general": False,
            "applicable_to": ["Hand"],
            "values": [],
            "numeric": True,
        },
    ]
    return {"version": "test-1", "concepts": concepts, "rules": rules}


@pytest.fixture()
def mini() -> Taxonomy:
    return load_taxonomy(json.dumps(mini_taxonomy_doc()))


def build_node(nid, concept, mult=1, desc=()):
    return MorphNode(id=nid, concept=concept, multiplicity=mult, descriptors=tuple(desc))


def build_robot(
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


GRAPH_CONCEPTS = [
    "Base", "Body", "Torso", "Head", "Neck", "Arm", "Leg",
    "Hand", "Gripper", "Tool", "Eye", "Wheel",
]


def random_connected_robot(
    rng: random.Random,
    max_nodes: int,
    concepts=tuple(GRAPH_CONCEPTS),
    extra_edges: int = 2,
) -> RobotMorphology:
    """Random connected graph: a tree plus up to a few chords."""
    size = rng.randint(1, max_nodes)
    nodes = [build_node(f"v{i}", rng.choice(concepts)) for i in range(size)]
    edges = {(f"v{rng.randrange(i)}", f"v{i}") for i in range(1, size)}
    for _ in range(rng.randint(0, extra_edges)):
        if size < 2:
            break
        u, v = rng.sample(range(size), 2)
        pair = (f"v{min(u, v)}", f"v{max(u, v)}")
        if pair not in edges and tuple(reversed(pair)) not in edges:
            edges.add(pair)
    return build_robot(nodes, sorted(edges))
