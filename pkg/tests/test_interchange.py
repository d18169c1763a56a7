"""Serialization round-trips and byte-stable text output."""

import random
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import build_node, build_robot, random_connected_robot
from metamorph.errors import DuplicateLinkError, ParseError, UnknownNodeError
from metamorph.interchange import (
    dumps,
    loads,
    matrix_exact_to_csv,
    matrix_to_csv,
    morphology_from_json_dict,
    morphology_to_json_dict,
    robot_from_json_dict,
    robot_to_json_dict,
    to_dot,
    to_urdf_annotation,
)
from metamorph.morphology import DescriptorValue, canonicalize


@pytest.fixture()
def humanoid():
    return build_robot(
        nodes=[
            build_node("body", "Body", desc=[DescriptorValue("Morphism", "Anthropomorphic")]),
            build_node("arm", "Arm", mult=2),
            build_node("hand", "Hand"),
        ],
        edges=[("body", "arm"), ("arm", "hand")],
        coverage="FullyCovered",
        materials=["plastic", "metal"],
    )


class TestMorphologyJson:
    def test_dict_shape(self, humanoid):
        doc = morphology_to_json_dict(humanoid)
        assert list(doc) == ["covering", "silhouette", "nodes", "edges"]
        assert doc["covering"] == {"coverage": "FullyCovered",
                                   "materials": ["metal", "plastic"]}
        assert doc["silhouette"] == {"primary": "Anthropomorphic", "hybrid": []}
        # canonical ids replace the authoring ids
        assert [n["id"] for n in doc["nodes"]] == ["n001", "n002", "n003"]
        assert [n["concept"] for n in doc["nodes"]] == ["Arm", "Body", "Hand"]

    def test_non_canonical_keeps_ids(self, humanoid):
        doc = morphology_to_json_dict(humanoid, canonical=False)
        assert [n["id"] for n in doc["nodes"]] == ["body", "arm", "hand"]

    def test_round_trip_equals_canonical_form(self, humanoid):
        doc = morphology_to_json_dict(humanoid)
        assert morphology_from_json_dict(doc) == canonicalize(humanoid)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_round_trip_property(self, seed):
        robot = random_connected_robot(random.Random(seed), max_nodes=9)
        doc = morphology_to_json_dict(robot)
        back = morphology_from_json_dict(doc)
        assert back == canonicalize(robot)
        # serializing the parsed form changes nothing
        assert morphology_to_json_dict(back) == doc

    def test_hybrid_and_descriptor_round_trip(self):
        robot = build_robot(
            nodes=[build_node("b", "Body", desc=[
                DescriptorValue("Shape", "Sphere"),
                DescriptorValue("Morphism", "Technical"),
            ])],
            edges=[],
            silhouette="Hybrid",
            hybrid=("Technomorphic", "Anthropomorphic"),
        )
        back = morphology_from_json_dict(morphology_to_json_dict(robot))
        assert back.silhouette.hybrid_components == ("Anthropomorphic", "Technomorphic")
        assert list(back.nodes[0].descriptor_tokens()) == ["Morphism=Technical", "Shape=Sphere"]

    def test_malformed_document_raises(self):
        with pytest.raises(ParseError):
            morphology_from_json_dict({"covering": {"coverage": "FullyVisible"}})
        with pytest.raises(ParseError):
            morphology_from_json_dict({
                "covering": {"coverage": "FullyVisible", "materials": []},
                "silhouette": {"primary": "Geometric"},
                "nodes": [{"id": "a"}],
                "edges": [],
            })
        with pytest.raises(ParseError):
            morphology_from_json_dict({
                "covering": {"coverage": "FullyVisible", "materials": []},
                "silhouette": {"primary": "Geometric"},
                "nodes": [],
                "edges": [["a", "b", "c"]],
            })


class TestRobotJson:
    def test_meta_block(self, humanoid):
        doc = robot_to_json_dict("Nao", humanoid, split="TS", source="https://example.org")
        assert list(doc)[:2] == ["name", "meta"]
        assert doc["meta"] == {"source": "https://example.org", "split": "TS",
                               "transform_variant": None}
        name, meta, morphology = robot_from_json_dict(doc)
        assert name == "Nao"
        assert meta["split"] == "TS"
        assert morphology == canonicalize(humanoid)

    def test_meta_defaults_when_absent(self, humanoid):
        doc = morphology_to_json_dict(humanoid)
        doc["name"] = "Bare"
        name, meta, _ = robot_from_json_dict(doc)
        assert name == "Bare"
        assert meta == {"source": None, "split": None, "transform_variant": None}

    def test_nameless_document_rejected(self, humanoid):
        with pytest.raises(ParseError, match="name"):
            robot_from_json_dict(morphology_to_json_dict(humanoid))


class TestJsonText:
    def test_dumps_style(self):
        assert dumps({"a": 1}) == '{\n  "a": 1\n}\n'

    def test_loads_reports_position(self):
        with pytest.raises(ParseError) as excinfo:
            loads('{\n  "a": ,\n}')
        assert excinfo.value.line == 2
        assert excinfo.value.column is not None


class TestDot:
    def test_golden(self, humanoid):
        assert to_dot(humanoid) == (
            "graph {\n"
            '  n001 [label="Arm\\n×2"];\n'
            '  n002 [label="Body\\nMorphism=Anthropomorphic"];\n'
            '  n003 [label="Hand"];\n'
            "\n"
            "  n001 -- n002;\n"
            "  n001 -- n003;\n"
            "}\n"
        )

    def test_insensitive_to_authoring_order(self, humanoid):
        shuffled = build_robot(
            nodes=[humanoid.nodes[2], humanoid.nodes[0], humanoid.nodes[1]],
            edges=[("arm", "hand"), ("body", "arm")],
            coverage="FullyCovered",
            materials=["metal", "plastic"],
        )
        assert to_dot(shuffled) == to_dot(humanoid)

    def test_escapes_quotes(self):
        robot = build_robot(
            nodes=[build_node("b", "Body", desc=[DescriptorValue("Shape", 'Sp"here')])],
            edges=[],
        )
        assert '\\"' in to_dot(robot)

    def test_single_node_no_blank_line(self):
        robot = build_robot(nodes=[build_node("b", "Body")], edges=[])
        assert to_dot(robot) == 'graph {\n  n001 [label="Body"];\n}\n'


class TestUrdfAnnotation:
    @pytest.fixture()
    def rover(self):
        return build_robot(
            nodes=[
                build_node("base", "Base", desc=[DescriptorValue("DegreeOfRealism", "Abstract")]),
                build_node("wheel", "Wheel", mult=4),
                build_node("antenna", "Tool"),
            ],
            edges=[("base", "wheel"), ("base", "antenna")],
            silhouette="Geometric",
        )

    def test_golden(self, rover):
        text = to_urdf_annotation(
            rover, {"base": "base_link", "wheel": "wheel_link"}, taxonomy_version="test-1",
        )
        assert text == (
            '<metamorph_annotation taxonomy="test-1">\n'
            '  <link name="base_link">\n'
            "    <metamorph>\n"
            '      <concept id="Base" DegreeOfRealism="Abstract" />\n'
            "    </metamorph>\n"
            "  </link>\n"
            '  <link name="wheel_link">\n'
            "    <metamorph>\n"
            '      <concept id="Wheel" multiplicity="4" />\n'
            "    </metamorph>\n"
            "  </link>\n"
            "  <!-- unmapped nodes: antenna (Tool) -->\n"
            "</metamorph_annotation>\n"
        )

    def test_parses_as_xml(self, rover):
        text = to_urdf_annotation(rover, {"base": "b", "wheel": "w", "antenna": "a"})
        root = ET.fromstring(text)
        assert root.tag == "metamorph_annotation"
        assert "taxonomy" not in root.attrib
        concepts = [el.attrib["id"] for el in root.iter("concept")]
        assert sorted(concepts) == ["Base", "Tool", "Wheel"]
        assert "unmapped" not in text

    def test_links_sorted_by_link_name(self, rover):
        text = to_urdf_annotation(rover, {"wheel": "z_link", "base": "a_link"})
        assert text.index('name="a_link"') < text.index('name="z_link"')

    def test_unknown_node_rejected(self, rover):
        with pytest.raises(UnknownNodeError):
            to_urdf_annotation(rover, {"chassis": "base_link"})

    def test_duplicate_link_rejected(self, rover):
        with pytest.raises(DuplicateLinkError):
            to_urdf_annotation(rover, {"base": "link", "wheel": "link"})


class TestMatrixCsv:
    def test_values(self):
        text = matrix_to_csv(["a", "b"], [[0.0, 1.5], [1.5, 0.0]])
        assert text == "name,a,b\na,0,1.5\nb,1.5,0\n"

    def test_nan_and_precision(self):
        text = matrix_to_csv(["x"], [[1 / 3]])
        assert text == "name,x\nx,0.333333\n"
        assert matrix_to_csv(["x"], [[float("nan")]]) == "name,x\nx,nan\n"

    def test_name_with_comma_is_quoted(self):
        text = matrix_to_csv(["Nao, mini"], [[0.0]])
        assert text == 'name,"Nao, mini"\n"Nao, mini",0\n'

    def test_exact_sidecar(self):
        text = matrix_exact_to_csv(["a", "b"], [[True, False], [False, True]])
        assert text == "name,a,b\na,true,false\nb,false,true\n"
