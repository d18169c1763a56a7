"""Serialization: canonical JSON, DOT rendering, URDF annotations, matrix CSV.

Writers canonicalize morphologies first, so emitted files are byte-stable:
the same robot always serializes to the same text regardless of how its
nodes were ordered or named in memory.  JSON key order is fixed by
construction; all writers avoid floats in model files.
"""

from __future__ import annotations

import csv
import json
import xml.etree.ElementTree as ET
from io import StringIO
from typing import Mapping

from .errors import DuplicateLinkError, ParseError, UnknownNodeError
from .morphology import (
    CoveringSpec,
    DescriptorValue,
    MorphNode,
    RobotMorphology,
    SilhouetteSpec,
    canonicalize,
)


# --- morphology <-> JSON ---------------------------------------------------------


def morphology_to_json_dict(m: RobotMorphology, canonical: bool = True) -> dict:
    if canonical:
        m = canonicalize(m)
    return {
        "covering": {
            "coverage": m.covering.coverage,
            "materials": sorted(m.covering.materials),
        },
        "silhouette": {
            "primary": m.silhouette.primary,
            "hybrid": list(m.silhouette.hybrid_components or ()),
        },
        "nodes": [
            {
                "id": n.id,
                "concept": n.concept,
                "multiplicity": n.multiplicity,
                "descriptors": [
                    {"descriptor": d.descriptor, "value": d.value}
                    for d in sorted(n.descriptors)
                ],
            }
            for n in m.nodes
        ],
        "edges": [[a, b] for a, b in m.edges],
    }


def morphology_from_json_dict(doc: dict) -> RobotMorphology:
    try:
        covering = CoveringSpec(
            coverage=doc["covering"]["coverage"],
            materials=frozenset(doc["covering"].get("materials", ())),
        )
        hybrid = doc["silhouette"].get("hybrid") or None
        silhouette = SilhouetteSpec(
            primary=doc["silhouette"]["primary"],
            hybrid_components=tuple(hybrid) if hybrid else None,
        )
        nodes = tuple(
            MorphNode(
                id=n["id"],
                concept=n["concept"],
                multiplicity=int(n.get("multiplicity", 1)),
                descriptors=tuple(
                    DescriptorValue(d["descriptor"], d.get("value"))
                    for d in n.get("descriptors", ())
                ),
            )
            for n in doc.get("nodes", ())
        )
        edges = tuple((a, b) for a, b in doc.get("edges", ()))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed robot document: {exc}") from exc
    return RobotMorphology(nodes=nodes, edges=edges, covering=covering,
                           silhouette=silhouette)


def robot_to_json_dict(
    name: str,
    m: RobotMorphology,
    split: str | None = None,
    source: str | None = None,
    transform_variant: str | None = None,
    canonical: bool = True,
) -> dict:
    doc = {
        "name": name,
        "meta": {
            "source": source,
            "split": split,
            "transform_variant": transform_variant,
        },
    }
    doc.update(morphology_to_json_dict(m, canonical=canonical))
    return doc


def robot_from_json_dict(doc: dict) -> tuple[str, dict, RobotMorphology]:
    """Returns (name, meta, morphology); meta keys default to None."""
    if not isinstance(doc, dict) or "name" not in doc:
        raise ParseError("robot document needs a 'name' field")
    meta = doc.get("meta") or {}
    return (
        doc["name"],
        {
            "source": meta.get("source"),
            "split": meta.get("split"),
            "transform_variant": meta.get("transform_variant"),
        },
        morphology_from_json_dict(doc),
    )


def dumps(doc) -> str:
    """Project-wide JSON formatting: two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc


# --- DOT ------------------------------------------------------------------------


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(m: RobotMorphology) -> str:
    """Graphviz text for a morphology, canonical order, stable bytes.

    Node labels stack the concept, the descriptor tokens, and a multiplicity
    line when above one.
    """
    m = canonicalize(m)
    lines = ["graph {"]
    for node in m.nodes:
        label_parts = [node.concept]
        if node.descriptors:
            label_parts.append(", ".join(node.descriptor_tokens()))
        if node.multiplicity > 1:
            label_parts.append(f"×{node.multiplicity}")
        label = "\\n".join(_dot_escape(part) for part in label_parts)
        lines.append(f'  {node.id} [label="{label}"];')
    if m.nodes and m.edges:
        lines.append("")
    for a, b in m.edges:
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- URDF annotation --------------------------------------------------------------


def to_urdf_annotation(
    m: RobotMorphology,
    link_map: Mapping[str, str],
    taxonomy_version: str = "",
) -> str:
    """XML fragment annotating URDF links with morphology concepts.

    One <link> wrapper per mapped node, each holding a <metamorph> element
    whose <concept> child carries the concept id, the multiplicity (when
    above one), and one attribute per descriptor.  Nodes without a link end
    up in a trailing comment so nothing silently disappears.
    """
    known = {n.id: n for n in m.nodes}
    for node_id in link_map:
        if node_id not in known:
            raise UnknownNodeError(f"link map references unknown node {node_id!r}")
    links = list(link_map.values())
    if len(set(links)) != len(links):
        raise DuplicateLinkError("link names must be unique")

    root = ET.Element("metamorph_annotation")
    if taxonomy_version:
        root.set("taxonomy", taxonomy_version)
    for node_id, link_name in sorted(link_map.items(), key=lambda kv: kv[1]):
        node = known[node_id]
        link = ET.SubElement(root, "link", {"name": link_name})
        meta = ET.SubElement(link, "metamorph")
        attrs = {"id": node.concept}
        if node.multiplicity > 1:
            attrs["multiplicity"] = str(node.multiplicity)
        for d in sorted(node.descriptors):
            attrs[d.descriptor] = d.value if d.value is not None else ""
        ET.SubElement(meta, "concept", attrs)

    unmapped = [n for n in m.nodes if n.id not in link_map]
    if unmapped:
        listing = ", ".join(f"{n.id} ({n.concept})" for n in unmapped)
        root.append(ET.Comment(f" unmapped nodes: {listing} "))

    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


# --- matrix CSV --------------------------------------------------------------------


def _format_value(value: float) -> str:
    if value != value:  # NaN
        return "nan"
    if value == int(value):
        return str(int(value))
    return format(value, ".6g")


def matrix_to_csv(names, values) -> str:
    """Distance matrix as CSV with a name header row and column."""
    out = StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["name", *names])
    for name, row in zip(names, values):
        writer.writerow([name, *(_format_value(v) for v in row)])
    return out.getvalue()


def matrix_exact_to_csv(names, exact) -> str:
    """Sidecar CSV of per-cell exactness booleans."""
    out = StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["name", *names])
    for name, row in zip(names, exact):
        writer.writerow([name, *("true" if flag else "false" for flag in row)])
    return out.getvalue()
