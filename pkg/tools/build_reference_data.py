#!/usr/bin/env python3
"""Regenerate the packaged reference taxonomy and robot dataset.

Deterministic: running this twice produces byte-identical files.  Nothing is
written until every target the package promises has been recomputed and
checked here: template-split feature statistics, the three pairwise Jaccard
values, the three exact edit distances, and full-dataset validation.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from metamorph.dataset import Dataset, RobotRecord, frequency_stats, ingest
from metamorph.distance import jaccard_index
from metamorph.ged import CostModel, LABEL_CONCEPT_DESCRIPTORS, SearchBudget, ged_exact
from metamorph.interchange import dumps
from metamorph.morphology import (
    CoveringSpec,
    DescriptorValue,
    MorphNode,
    RobotMorphology,
    SilhouetteSpec,
    expand_multiplicities,
    feature_set,
    validate,
)
from metamorph.taxonomy import Taxonomy, load_taxonomy

DATA_DIR = ROOT / "src" / "metamorph" / "data"
TAXONOMY_VERSION = "metamorph-1.0"

# --- taxonomy ----------------------------------------------------------------

TOP_FEATURES = [
    ("Body", 91), ("Head", 74), ("Arm", 60), ("Leg", 44),
    ("Neck", 42), ("Eye", 39), ("Camera", 38),
]

MIDDLE_FEATURES = [
    ("Wheel", 36), ("Gripper", 36), ("Hand", 36), ("Foot", 35),
    ("Speaker", 23), ("Antenna", 23),
    ("Base", 20), ("Shoulder", 20), ("Elbow", 20), ("Knee", 20), ("Hip", 20),
    ("Ear", 20), ("Mouth", 20), ("Nose", 20), ("Display", 20), ("Button", 20),
    ("Light", 20), ("Handle", 20), ("Sensor", 20), ("Microphone", 20),
    ("Battery", 20), ("Tail", 20),
    ("Fin", 11),
]

SINGLETON_FEATURES = [
    "Flag", "Propeller", "Rotor", "Turbine", "Thruster", "Sail", "Mast",
    "Crane", "Hook", "Magnet", "Drill", "Saw", "Blade", "Plow", "Bucket",
    "Scoop", "Shovel", "Rake", "Brush", "Nozzle", "Sprayer", "Pump", "Valve",
    "Hose", "Tank", "Radiator", "Fan", "Vent", "Duct", "Periscope",
    "Telescope", "Radar", "Sonar", "Lidar", "Compass", "Gyroscope", "Beacon",
    "Strobe", "Siren", "Horn", "Bell", "Whistle", "Gauge", "Dial", "Lever",
    "Pedal", "Crank", "Winch", "Pulley", "Gear", "Sprocket", "Belt", "Track",
    "Ski", "Skate", "Paddle", "Oar", "Rudder", "Keel", "Anchor", "Harpoon",
    "Net", "Cage", "Basket", "Tray", "Shelf", "Drawer", "Hatch", "Door",
    "Window", "Shield", "Bumper", "Fender", "Spoiler", "Wing", "Flap",
    "Canard", "Parachute", "Balloon", "Float", "Pontoon", "Buoy", "Snorkel",
    "Probe", "Syringe", "Clamp", "Vise", "Hammer", "Wrench", "Screwdriver",
    "Pliers", "Chisel", "Torch", "Welder", "Laser", "Projector", "Lens",
    "Mirror", "Prism", "Lantern", "Visor", "Whisker", "Snout",
]

CONNECTING_FEATURES = {
    "Head", "Neck", "Arm", "Leg", "Shoulder", "Elbow", "Knee", "Hip", "Tail",
}

DEFINITIONS = {
    "MorphologicalSubdivision": "A visually distinguishable physical part of a robot.",
    "CoreSubdivision": "The central structural part everything else attaches to.",
    "ConnectingSubdivision": "A part linking two or more other subdivisions.",
    "TerminalSubdivision": "A part attached to exactly one other subdivision.",
    "Body": "Primary torso-like mass of a robot.",
    "Base": "Ground-level chassis or platform.",
    "Torso": "Humanoid upper-body core.",
    "Manipulator": "End effector used to grasp or operate on objects.",
    "Limb": "Articulated appendage connecting the core to extremities.",
    "Head": "Upper sensory cluster, usually atop a neck.",
    "Camera": "Imaging sensor housing.",
    "Covering": "How much of the mechanics is hidden by shells or skins.",
    "MorphologicalDescriptor": "An attribute refining how a subdivision looks.",
    "MorphologicalSilhouette": "The overall outline class of a robot.",
    "Morphism": "Whether a part reads as human-like, animal-like, or technical.",
    "DegreeOfRealism": "How literal the depiction of a feature is.",
    "Shape": "Dominant geometric primitive of a part.",
}


def _label(concept_id: str) -> str:
    out = []
    for i, ch in enumerate(concept_id):
        if ch.isupper() and i > 0 and not concept_id[i - 1].isupper():
            out.append(" ")
        out.append(ch)
    return "".join(out)


def build_taxonomy_doc() -> dict:
    concepts = []

    def add(cid, parents=(), kind="Subdivision"):
        concepts.append({
            "id": cid,
            "label": _label(cid),
            "definition": DEFINITIONS.get(cid, ""),
            "kind": kind,
            "parents": list(parents),
        })

    add("MorphologicalSubdivision")
    add("CoreSubdivision", ["MorphologicalSubdivision"])
    add("ConnectingSubdivision", ["MorphologicalSubdivision"])
    add("TerminalSubdivision", ["MorphologicalSubdivision"])
    add("Body", ["CoreSubdivision"])
    add("Base", ["CoreSubdivision"])
    add("Torso", ["Body"])
    add("Limb", ["ConnectingSubdivision"])
    add("Manipulator", ["TerminalSubdivision"])

    placed = {"Body", "Base"}
    for name, _count in TOP_FEATURES + MIDDLE_FEATURES:
        if name in placed:
            continue
        placed.add(name)
        if name in ("Arm", "Leg"):
            add(name, ["Limb"])
        elif name in ("Hand", "Gripper"):
            add(name, ["Manipulator"])
        elif name in CONNECTING_FEATURES:
            add(name, ["ConnectingSubdivision"])
        else:
            add(name, ["TerminalSubdivision"])
    for name in SINGLETON_FEATURES:
        add(name, ["TerminalSubdivision"])

    add("MorphologicalDescriptor", kind="Descriptor")
    for name in ("Morphism", "DegreeOfRealism", "Shape",
                 "HandOrGripperConfiguration", "FingerCount"):
        add(name, ["MorphologicalDescriptor"], kind="Descriptor")
    for name in ("Sphere", "Box", "Cylinder", "Cone", "Capsule"):
        add(name, ["Shape"], kind="Descriptor")

    add("Covering", kind="Covering")
    for name in ("FullyCovered", "PartiallyCovered", "FullyVisible"):
        add(name, ["Covering"], kind="Covering")

    add("MorphologicalSilhouette", kind="Silhouette")
    for name in ("Anthropomorphic", "Zoomorphic", "Technomorphic", "Geometric", "Hybrid"):
        add(name, ["MorphologicalSilhouette"], kind="Silhouette")

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
            "values": ["Mitten", "TwoFinger", "ThreeFinger", "FiveFinger"],
        },
        {
            "descriptor": "FingerCount",
            "general": False,
            "applicable_to": ["Hand", "Gripper"],
            "values": [],
            "numeric": True,
        },
    ]
    return {"version": TAXONOMY_VERSION, "concepts": concepts, "rules": rules}


def taxonomy_to_turtle(doc: dict) -> str:
    """Turtle mirror of the subdivision/descriptor/covering/silhouette tree."""
    lines = [
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .",
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .",
        "@prefix : <https://metamorph.example/taxonomy#> .",
        "",
    ]
    for concept in doc["concepts"]:
        cid = concept["id"]
        parts = []
        if not concept["parents"]:
            parts.append("a owl:Class")
        for parent in concept["parents"]:
            parts.append(f"rdfs:subClassOf :{parent}")
        parts.append(f'rdfs:label {json.dumps(concept["label"])}')
        if concept["definition"]:
            parts.append(f'rdfs:comment {json.dumps(concept["definition"])}')
        lines.append(f":{cid} " + " ;\n    ".join(parts) + " .")
    return "\n".join(lines) + "\n"


# --- the three reference robots ------------------------------------------------


def starship_robot() -> RobotMorphology:
    return RobotMorphology(
        nodes=(
            MorphNode("base", "Base", descriptors=(DescriptorValue("Shape", "Box"),)),
            MorphNode("wheel", "Wheel", multiplicity=4),
            MorphNode("antenna", "Antenna"),
            MorphNode("flag", "Flag"),
        ),
        edges=(("base", "wheel"), ("base", "antenna"), ("antenna", "flag")),
        covering=CoveringSpec("FullyCovered", frozenset({"plastic"})),
        silhouette=SilhouetteSpec("Geometric"),
    )


def spot_robot() -> RobotMorphology:
    return RobotMorphology(
        nodes=(
            MorphNode("base", "Base"),
            MorphNode("leg_upper", "Leg", multiplicity=4,
                      descriptors=(DescriptorValue("Morphism", "Zoomorphic"),)),
            MorphNode("leg_lower", "Leg"),
            MorphNode("handle", "Handle"),
            MorphNode("camera_main", "Camera"),
            MorphNode("camera_aux", "Camera", multiplicity=2),
            MorphNode("light", "Light"),
        ),
        edges=(
            ("base", "leg_upper"),
            ("leg_upper", "leg_lower"),
            ("base", "handle"),
            ("handle", "camera_main"),
            ("camera_main", "camera_aux"),
            ("camera_main", "light"),
        ),
        covering=CoveringSpec("FullyCovered", frozenset({"metal", "plastic"})),
        silhouette=SilhouetteSpec("Zoomorphic"),
    )


def nao_robot() -> RobotMorphology:
    return RobotMorphology(
        nodes=(
            MorphNode("body", "Body", descriptors=(
                DescriptorValue("Morphism", "Anthropomorphic"),
                DescriptorValue("DegreeOfRealism", "Abstract"),
            )),
            MorphNode("neck", "Neck"),
            MorphNode("head", "Head", descriptors=(DescriptorValue("Shape", "Sphere"),)),
            MorphNode("eye", "Eye", multiplicity=2),
            MorphNode("speaker", "Speaker", multiplicity=2),
            MorphNode("button", "Button"),
            MorphNode("arm_upper", "Arm", multiplicity=2),
            MorphNode("arm_lower", "Arm"),
            MorphNode("hand", "Hand", descriptors=(
                DescriptorValue("FingerCount", "3"),
                DescriptorValue("HandOrGripperConfiguration", "Mitten"),
            )),
            MorphNode("leg", "Leg", multiplicity=2),
            MorphNode("foot", "Foot"),
        ),
        edges=(
            ("body", "neck"),
            ("neck", "head"),
            ("head", "eye"),
            ("head", "speaker"),
            ("head", "button"),
            ("body", "arm_upper"),
            ("arm_upper", "arm_lower"),
            ("arm_lower", "hand"),
            ("body", "leg"),
            ("leg", "foot"),
        ),
        covering=CoveringSpec("FullyCovered", frozenset({"plastic"})),
        silhouette=SilhouetteSpec("Anthropomorphic"),
    )


FIXTURES = {"Nao": nao_robot, "Spot": spot_robot, "Starship": starship_robot}

# Template-split layout: indices 0..90 carry a Body core, 91..110 a Base core.
NAO_INDEX, SPOT_INDEX, STARSHIP_INDEX = 0, 91, 92
FIXTURE_INDICES = {NAO_INDEX: "Nao", SPOT_INDEX: "Spot", STARSHIP_INDEX: "Starship"}


def ts_feature_members() -> dict[str, set[int]]:
    """Which template-split robot indices carry each feature.

    The three reference robots sit at fixed indices with frozen graphs, so
    every range below was chosen to include them exactly where their graphs
    already contain the feature.
    """
    members: dict[str, set[int]] = {}

    def assign(feature: str, indices) -> None:
        members[feature] = set(indices)

    assign("Body", range(0, 91))
    assign("Base", range(91, 111))
    assign("Head", range(0, 74))
    assign("Arm", range(0, 60))
    assign("Leg", list(range(0, 43)) + [SPOT_INDEX])
    assign("Neck", range(0, 42))
    assign("Eye", range(0, 39))
    assign("Camera", list(range(1, 38)) + [SPOT_INDEX])
    assign("Wheel", list(range(44, 79)) + [STARSHIP_INDEX])
    assign("Gripper", range(24, 60))
    assign("Hand", range(0, 36))
    assign("Foot", range(0, 35))
    assign("Speaker", range(0, 23))
    assign("Antenna", list(range(44, 66)) + [STARSHIP_INDEX])
    assign("Shoulder", range(1, 21))
    assign("Elbow", range(21, 41))
    assign("Knee", range(2, 22))
    assign("Hip", range(22, 42))
    assign("Ear", range(1, 21))
    assign("Mouth", range(11, 31))
    assign("Nose", range(16, 36))
    assign("Display", range(40, 60))
    assign("Button", [0] + list(range(55, 74)))
    assign("Light", [SPOT_INDEX] + list(range(44, 63)))
    assign("Handle", [SPOT_INDEX, 43] + list(range(93, 111)))
    assign("Sensor", range(60, 80))
    assign("Microphone", range(3, 23))
    assign("Battery", range(70, 90))
    assign("Tail", range(23, 43))
    assign("Fin", range(79, 90))

    non_fixture = [i for i in range(111) if i not in FIXTURE_INDICES]
    assign("Flag", [STARSHIP_INDEX])
    rest = [name for name in SINGLETON_FEATURES if name != "Flag"]
    for offset, name in enumerate(rest):
        assign(name, [non_fixture[offset % len(non_fixture)]])

    return members


# --- graph assembly ----------------------------------------------------------------

# Where a feature's node prefers to hang, first present parent wins; the core
# node is the fallback.  Order of keys is also the node build order.
ATTACH_PREFERENCES = {
    "Neck": (),
    "Head": ("Neck",),
    "Shoulder": (),
    "Arm": ("Shoulder",),
    "Elbow": ("Arm",),
    "Hand": ("Elbow", "Arm"),
    "Gripper": ("Elbow", "Arm"),
    "Hip": (),
    "Leg": ("Hip",),
    "Knee": ("Leg",),
    "Foot": ("Knee", "Leg"),
    "Eye": ("Head",),
    "Ear": ("Head",),
    "Mouth": ("Head",),
    "Nose": ("Head",),
    "Display": ("Head", "Neck"),
    "Speaker": ("Head",),
    "Microphone": ("Head",),
}

MULTIPLICITY_RULES = {"Eye": 2, "Ear": 2, "Speaker": 2, "Wheel": 4, "Fin": 2}
PAIRED_WHEN_EVEN = {"Arm", "Leg", "Hand", "Gripper", "Foot", "Shoulder",
                    "Elbow", "Knee", "Hip"}

COVERING_CYCLE = [
    ("FullyCovered", ("plastic",)),
    ("PartiallyCovered", ("metal", "plastic")),
    ("FullyVisible", ()),
    ("FullyCovered", ("metal",)),
    ("PartiallyCovered", ("rubber", "metal")),
    ("FullyVisible", ()),
    ("FullyCovered", ("fabric", "plastic")),
]

BODY_SILHOUETTES = ["Anthropomorphic", "Zoomorphic", "Technomorphic",
                    "Hybrid", "Anthropomorphic", "Technomorphic"]
BASE_SILHOUETTES = ["Technomorphic", "Geometric", "Zoomorphic", "Geometric"]


def assemble_robot(core: str, features: list[str], seed: int) -> RobotMorphology:
    """Deterministic tree for a feature list: core hub, preferences first."""
    ordered = [f for f in ATTACH_PREFERENCES if f in features]
    ordered += sorted(f for f in features if f not in ATTACH_PREFERENCES)

    nodes = [MorphNode(core.lower(), core)]
    placed = {core: core.lower()}
    edges = []
    for feature in ordered:
        parent = core.lower()
        for preference in ATTACH_PREFERENCES.get(feature, ()):
            if preference in placed:
                parent = placed[preference]
                break
        mult = MULTIPLICITY_RULES.get(feature, 1)
        if feature in PAIRED_WHEN_EVEN and seed % 2 == 0:
            mult = 2
        node_id = feature.lower()
        nodes.append(MorphNode(node_id, feature, multiplicity=mult))
        placed[feature] = node_id
        edges.append((parent, node_id))

    descriptors = [DescriptorValue("Morphism",
                                   ["Technical", "Anthropomorphic", "Zoomorphic"][seed % 3])]
    if seed % 4 == 0:
        descriptors.append(DescriptorValue("DegreeOfRealism",
                                           ["Realistic", "Abstract", "Symbolic",
                                            "Hyperrealistic"][(seed // 4) % 4]))
    nodes[0] = MorphNode(nodes[0].id, core, descriptors=tuple(sorted(descriptors)))

    coverage, materials = COVERING_CYCLE[seed % len(COVERING_CYCLE)]
    if core == "Base":
        primary = BASE_SILHOUETTES[seed % len(BASE_SILHOUETTES)]
    else:
        primary = BODY_SILHOUETTES[seed % len(BODY_SILHOUETTES)]
    hybrid = ("Anthropomorphic", "Technomorphic") if primary == "Hybrid" else None
    return RobotMorphology(
        nodes=tuple(nodes),
        edges=tuple(edges),
        covering=CoveringSpec(coverage, frozenset(materials)),
        silhouette=SilhouetteSpec(primary, hybrid),
    )


NAME_ROOTS = [
    "Aegis", "Altair", "Apex", "Argon", "Astra", "Aurora", "Borealis",
    "Caldera", "Cinder", "Cobalt", "Comet", "Corsair", "Crater", "Cypress",
    "Dynamo", "Ember", "Falcon", "Fathom", "Flint", "Gale", "Garnet",
    "Glacier", "Granite", "Halcyon", "Harbor", "Helix", "Horizon", "Ion",
    "Jasper", "Juniper", "Kestrel", "Krypton", "Lagoon", "Lumen", "Magma",
    "Marble", "Meridian", "Mistral", "Nebula", "Nimbus", "Obsidian", "Onyx",
    "Opal", "Orbit", "Osprey", "Pike", "Pumice", "Quartz", "Quasar",
    "Rapids", "Raven", "Ridge", "Sable", "Sequoia", "Sierra", "Slate",
    "Summit", "Tempest", "Thistle", "Tundra", "Umber", "Vertex", "Vortex",
    "Willow", "Zenith", "Zephyr",
]


def robot_names(count: int, skip: int = 0) -> list[str]:
    names = []
    for suffix in ("", " II", " III", " IV", " V"):
        for root in NAME_ROOTS:
            names.append(root + suffix)
    assert len(names) >= skip + count
    return names[skip:skip + count]


def build_ts_records() -> list[RobotRecord]:
    members = ts_feature_members()

    expected = dict(TOP_FEATURES + MIDDLE_FEATURES)
    expected.update({name: 1 for name in SINGLETON_FEATURES})
    for feature, indices in members.items():
        assert len(indices) == expected[feature], (
            f"{feature}: {len(indices)} != {expected[feature]}"
        )
    for index, fixture in FIXTURE_INDICES.items():
        actual = feature_set(FIXTURES[fixture]())
        designed = {f for f, idxs in members.items() if index in idxs}
        assert actual == designed, (fixture, actual ^ designed)

    by_robot: dict[int, list[str]] = {i: [] for i in range(111)}
    for feature, indices in sorted(members.items()):
        for index in indices:
            by_robot[index].append(feature)

    synthetic = robot_names(108)
    records = []
    position = 0
    for index in range(111):
        if index in FIXTURE_INDICES:
            name = FIXTURE_INDICES[index]
            morphology = FIXTURES[name]()
        else:
            name = synthetic[position]
            position += 1
            core = "Body" if index < 91 else "Base"
            features = [f for f in by_robot[index] if f != core]
            morphology = assemble_robot(core, features, seed=index)
        records.append(RobotRecord(name=name, morphology=morphology, split="TS"))
    return records


VS_POOL = (
    [(name, 10) for name, _ in TOP_FEATURES]
    + [(name, 5) for name, _ in MIDDLE_FEATURES]
    + [(name, 1) for name in SINGLETON_FEATURES]
)


def build_vs_records() -> list[RobotRecord]:
    rng = random.Random(20250815)
    names = robot_names(107, skip=108)
    features_list = [name for name, _ in VS_POOL]
    weights = [weight for _, weight in VS_POOL]

    records = []
    for i, name in enumerate(names):
        core = rng.choice(["Body", "Body", "Torso", "Base"])
        wanted = rng.randint(3, 12)
        chosen: list[str] = []
        while len(chosen) < wanted:
            pick = rng.choices(features_list, weights=weights, k=1)[0]
            if pick not in chosen and pick not in ("Body", "Base"):
                chosen.append(pick)
        morphology = assemble_robot(core, sorted(chosen), seed=rng.randrange(10_000))
        records.append(RobotRecord(name=name, morphology=morphology, split="VS"))

    def variant(name, variant_tag, core, features, seed):
        return RobotRecord(
            name=name,
            morphology=assemble_robot(core, features, seed=seed),
            split="VS",
            transform_variant=variant_tag,
        )

    records.append(variant("Aquanaut (submersible)", "submersible", "Torso",
                           ["Thruster", "Fin", "Camera", "Light"], seed=3))
    records.append(variant("Aquanaut (humanoid)", "humanoid", "Torso",
                           ["Head", "Arm", "Gripper", "Camera", "Light"], seed=8))
    records.append(variant("Volans (flight)", "flight", "Body",
                           ["Wing", "Propeller", "Camera"], seed=5))
    records.append(variant("Volans (ground)", "ground", "Body",
                           ["Wheel", "Camera", "Antenna"], seed=10))
    return records


# --- verification -------------------------------------------------------------------


def verify(taxonomy: Taxonomy, dataset: Dataset) -> list[str]:
    lines = []
    stats = frequency_stats(dataset, split="TS")
    assert stats.robot_count == 111, stats.robot_count
    assert stats.feature_count == 133, stats.feature_count
    assert abs(stats.mean - 7.6) <= 0.1, stats.mean
    assert abs(stats.sd - 14.8) <= 0.2, stats.sd
    top = {f.feature: f.count for f in stats.features if f.z is not None and f.z >= 2}
    assert top == dict(TOP_FEATURES), top
    lines.append(
        f"TS stats: {stats.feature_count} features, mean {stats.mean:.4f}, "
        f"sd {stats.sd:.4f}, z>=2: {sorted(top)}"
    )

    fixtures = {name: build() for name, build in FIXTURES.items()}
    jac = {
        pair: jaccard_index(feature_set(fixtures[pair[0]]), feature_set(fixtures[pair[1]]))
        for pair in (("Starship", "Spot"), ("Starship", "Nao"), ("Spot", "Nao"))
    }
    assert abs(jac[("Starship", "Spot")] - 0.125) < 1e-12, jac
    assert jac[("Starship", "Nao")] == 0.0, jac
    assert abs(jac[("Spot", "Nao")] - 1 / 14) < 1e-12, jac
    lines.append(f"Jaccard: {[round(v, 4) for v in jac.values()]}")

    budget = SearchBudget(max_nodes=20, max_states=5_000_000)
    configurations = {
        "expanded, concept labels": (True, CostModel()),
        "expanded, concept+descriptor labels": (
            True, CostModel(label_equality=LABEL_CONCEPT_DESCRIPTORS)),
        "compressed, concept labels": (False, CostModel()),
        "compressed, concept+descriptor labels": (
            False, CostModel(label_equality=LABEL_CONCEPT_DESCRIPTORS)),
    }
    target = (20.0, 29.0, 20.0)
    for label, (expanded, cost) in configurations.items():
        values = []
        for left, right in (("Starship", "Spot"), ("Starship", "Nao"), ("Spot", "Nao")):
            a, b = fixtures[left], fixtures[right]
            if expanded:
                a = expand_multiplicities(taxonomy, a)
                b = expand_multiplicities(taxonomy, b)
            result = ged_exact(a, b, cost, budget)
            assert result.exact, (label, left, right)
            values.append(result.value)
        lines.append(f"GED [{label}]: {tuple(values)}")
        if label == "expanded, concept labels":
            assert tuple(values) == target, values
        else:
            assert tuple(values) != target, (label, values)

    for record in dataset.records:
        report = validate(taxonomy, record.morphology)
        assert report.ok, (record.name, report.errors)
    lines.append(f"validated {len(dataset.records)} robots, 0 errors")
    return lines


def main() -> None:
    taxonomy_doc = build_taxonomy_doc()
    taxonomy = load_taxonomy(json.dumps(taxonomy_doc))

    singles = set(SINGLETON_FEATURES)
    assert len(singles) == 103, len(singles)
    assert not singles & {name for name, _ in TOP_FEATURES + MIDDLE_FEATURES}

    records = build_ts_records() + build_vs_records()
    dataset = Dataset(records=tuple(records), taxonomy_version=TAXONOMY_VERSION)
    assert len(dataset.records) == 222
    assert len(set(dataset.names())) == 222

    # Round-trip through the canonical JSON before verifying: what ships is
    # what gets checked.
    dataset = ingest(taxonomy, dataset.to_json_dict())
    for line in verify(taxonomy, dataset):
        print(line)

    turtle = taxonomy_to_turtle(taxonomy_doc)
    mirrored = load_taxonomy(turtle, format="turtle")
    assert mirrored.concepts == taxonomy.concepts
    assert not mirrored.load_warnings

    DATA_DIR.mkdir(parents=True, exist_ok=True)
    (DATA_DIR / "metamorph.taxonomy.json").write_text(
        dumps(taxonomy.to_json_dict()), encoding="utf-8")
    (DATA_DIR / "metamorph.ttl").write_text(turtle, encoding="utf-8")
    (DATA_DIR / "metamorph.dataset.json").write_text(
        dumps(dataset.to_json_dict()), encoding="utf-8")
    print(f"wrote {DATA_DIR}/metamorph.taxonomy.json, metamorph.ttl, "
          "metamorph.dataset.json")


if __name__ == "__main__":
    main()
