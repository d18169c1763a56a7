"""Robot morphology graphs.

A robot is an undirected labelled graph: nodes carry a subdivision concept, a
multiplicity, and descriptor values; edges are structural connections.  The
robot as a whole carries a covering and a silhouette.  This module owns
validation against a taxonomy, feature-set extraction, multiplicity
expansion, and a canonical node ordering used by serializers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import NoRootError, NotATreeError, UnknownNodeError
from .taxonomy import ConceptKind, Taxonomy

# Well-known concept ids the model is organised around.  Validation degrades
# gracefully when a (test) taxonomy does not define them.
CORE_SUBDIVISION = "CoreSubdivision"
CONNECTING_SUBDIVISION = "ConnectingSubdivision"
TERMINAL_SUBDIVISION = "TerminalSubdivision"
HYBRID_SILHOUETTE = "Hybrid"
FULLY_VISIBLE = "FullyVisible"

#: Feature-set profiles: bare subdivision concepts, or concepts plus
#: descriptor and robot-level tokens.
PROFILE_CONCEPTS = "concepts"
PROFILE_FULL = "full"


@dataclass(frozen=True, order=True)
class DescriptorValue:
    descriptor: str
    value: str | None = None

    def token(self) -> str:
        return self.descriptor if self.value is None else f"{self.descriptor}={self.value}"


@dataclass(frozen=True)
class MorphNode:
    id: str
    concept: str
    multiplicity: int = 1
    descriptors: tuple[DescriptorValue, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "descriptors", tuple(self.descriptors))

    def descriptor_tokens(self) -> tuple[str, ...]:
        return tuple(sorted(d.token() for d in self.descriptors))


@dataclass(frozen=True)
class CoveringSpec:
    coverage: str
    materials: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "materials", frozenset(self.materials))


@dataclass(frozen=True)
class SilhouetteSpec:
    primary: str
    hybrid_components: tuple[str, str] | None = None

    def __post_init__(self):
        if self.hybrid_components is not None:
            # Unordered pair: store sorted so equal values compare equal.
            object.__setattr__(
                self, "hybrid_components", tuple(sorted(self.hybrid_components))
            )


@dataclass(frozen=True)
class RobotMorphology:
    nodes: tuple[MorphNode, ...]
    edges: tuple[tuple[str, str], ...]
    covering: CoveringSpec
    silhouette: SilhouetteSpec

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple((a, b) for a, b in self.edges))

    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def node(self, node_id: str) -> MorphNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise UnknownNodeError(f"no node with id {node_id!r}")

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for a, b in self.edges:
            if a in adj and b in adj and a != b:
                adj[a].append(b)
                adj[b].append(a)
        return adj

    def degree(self, node_id: str) -> int:
        return len(self.adjacency()[node_id])


# --- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    locus: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[ValidationIssue, ...] = ()
    lints: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


def _subsumed(taxonomy: Taxonomy, concept: str, ancestor: str) -> bool:
    return ancestor in taxonomy and taxonomy.is_subsumed_by(concept, ancestor)


def validate(taxonomy: Taxonomy, m: RobotMorphology) -> ValidationReport:
    """Check a morphology against the taxonomy.

    Errors make the robot invalid: unknown or wrong-kind concepts, descriptor
    misuse, multiplicities below one, broken edges, a disconnected graph, and
    ill-formed covering/silhouette blocks.  Degree expectations (terminal
    nodes having one neighbour, connecting nodes at least two, a core being
    present) are reported as advisory lints only, since the model imposes no
    hard arity restrictions.
    """
    errors: list[ValidationIssue] = []
    lints: list[ValidationIssue] = []

    def error(code: str, locus: str, message: str) -> None:
        errors.append(ValidationIssue(code, locus, message))

    def lint(code: str, locus: str, message: str) -> None:
        lints.append(ValidationIssue(code, locus, message))

    seen_ids: set[str] = set()
    for node in m.nodes:
        if node.id in seen_ids:
            error("duplicate-node-id", node.id, f"node id {node.id!r} used more than once")
        seen_ids.add(node.id)

    for node in m.nodes:
        concept = taxonomy.concepts.get(node.concept)
        if concept is None:
            error("unknown-concept", node.id, f"unknown concept {node.concept!r}")
        elif concept.kind is not ConceptKind.SUBDIVISION:
            error(
                "wrong-kind",
                node.id,
                f"concept {node.concept!r} is a {concept.kind.value}, not a Subdivision",
            )
        if node.multiplicity < 1:
            error("multiplicity", node.id, f"multiplicity must be >= 1, got {node.multiplicity}")

        seen_descriptors: set[DescriptorValue] = set()
        for dv in node.descriptors:
            if dv in seen_descriptors:
                error("duplicate-descriptor", node.id, f"descriptor {dv.token()!r} repeated")
            seen_descriptors.add(dv)
            rule = taxonomy.descriptor_rule(dv.descriptor)
            if rule is None:
                error("unknown-descriptor", node.id, f"no rule for descriptor {dv.descriptor!r}")
                continue
            if concept is not None and concept.kind is ConceptKind.SUBDIVISION:
                if dv.descriptor not in taxonomy.applicable_descriptors(node.concept):
                    error(
                        "descriptor-not-applicable",
                        node.id,
                        f"descriptor {dv.descriptor!r} does not apply to {node.concept!r}",
                    )
            if not taxonomy.is_descriptor_value_allowed(dv.descriptor, dv.value):
                error(
                    "descriptor-value",
                    node.id,
                    f"value {dv.value!r} is outside the domain of {dv.descriptor!r}",
                )

    known_ids = {n.id for n in m.nodes}
    seen_edges: set[tuple[str, str]] = set()
    for a, b in m.edges:
        locus = f"{a}--{b}"
        if a == b:
            error("self-loop", locus, "edge endpoints must be distinct")
            continue
        if a not in known_ids or b not in known_ids:
            error("dangling-edge", locus, "edge endpoint is not a node id")
            continue
        key = (min(a, b), max(a, b))
        if key in seen_edges:
            error("duplicate-edge", locus, "edge listed more than once")
        seen_edges.add(key)

    if m.nodes and not _is_connected(m):
        error("disconnected", "graph", "graph must be connected")

    # Covering.
    coverage = taxonomy.concepts.get(m.covering.coverage)
    if coverage is None or coverage.kind is not ConceptKind.COVERING:
        error("covering", "covering", f"{m.covering.coverage!r} is not a covering concept")
    if m.covering.coverage == FULLY_VISIBLE:
        if m.covering.materials:
            error("covering-materials", "covering", "fully visible robots carry no materials")
    elif coverage is not None and coverage.kind is ConceptKind.COVERING and not m.covering.materials:
        error("covering-materials", "covering", "covered robots must list at least one material")

    # Silhouette.
    primary = taxonomy.concepts.get(m.silhouette.primary)
    if primary is None or primary.kind is not ConceptKind.SILHOUETTE:
        error("silhouette", "silhouette", f"{m.silhouette.primary!r} is not a silhouette concept")
    components = m.silhouette.hybrid_components
    if m.silhouette.primary == HYBRID_SILHOUETTE:
        if not components:
            error("silhouette", "silhouette", "hybrid silhouettes need two component silhouettes")
    elif components:
        error("silhouette", "silhouette", "component pair is only allowed on hybrid silhouettes")
    if components:
        if len(components) != 2 or components[0] == components[1]:
            error("silhouette", "silhouette", "hybrid components must be two distinct concepts")
        for comp in components:
            concept = taxonomy.concepts.get(comp)
            if concept is None or concept.kind is not ConceptKind.SILHOUETTE:
                error("silhouette", "silhouette", f"{comp!r} is not a silhouette concept")
            elif comp == HYBRID_SILHOUETTE or _subsumed(taxonomy, comp, HYBRID_SILHOUETTE):
                error("silhouette", "silhouette", "hybrid components must be non-hybrid")

    # Advisory degree expectations.
    if not errors:
        adj = m.adjacency()
        has_core = False
        for node in m.nodes:
            if _subsumed(taxonomy, node.concept, CORE_SUBDIVISION):
                has_core = True
            degree = len(adj[node.id])
            if _subsumed(taxonomy, node.concept, TERMINAL_SUBDIVISION) and degree != 1:
                lint(
                    "terminal-degree",
                    node.id,
                    f"terminal subdivision {node.concept!r} has degree {degree}, expected 1",
                )
            if _subsumed(taxonomy, node.concept, CONNECTING_SUBDIVISION) and degree < 2:
                lint(
                    "connecting-degree",
                    node.id,
                    f"connecting subdivision {node.concept!r} has degree {degree}, expected >= 2",
                )
        if m.nodes and not has_core and CORE_SUBDIVISION in taxonomy:
            lint("no-core", "graph", "robot has no core subdivision node")

    return ValidationReport(errors=tuple(errors), lints=tuple(lints))


def _is_connected(m: RobotMorphology) -> bool:
    adj = m.adjacency()
    if not adj:
        return True
    start = m.nodes[0].id
    seen = {start}
    stack = [start]
    while stack:
        for neighbour in adj[stack.pop()]:
            if neighbour not in seen:
                seen.add(neighbour)
                stack.append(neighbour)
    return len(seen) == len(adj)


# --- feature sets ---------------------------------------------------------------


def feature_set(m: RobotMorphology, profile: str = PROFILE_CONCEPTS) -> frozenset[str]:
    """Feature tokens of a robot under the given profile.

    ``concepts`` yields the set of subdivision concepts present (multiplicity
    ignored).  ``full`` adds descriptor tokens (``desc:Morphism=Technical``),
    the covering (``covering:FullyCovered``), materials (``material:metal``),
    and silhouette tokens (``silhouette:Zoomorphic``).
    """
    tokens = {node.concept for node in m.nodes}
    if profile == PROFILE_CONCEPTS:
        return frozenset(tokens)
    if profile != PROFILE_FULL:
        raise ValueError(f"unknown feature profile {profile!r}")
    for node in m.nodes:
        for dv in node.descriptors:
            tokens.add(f"desc:{dv.token()}")
    tokens.add(f"covering:{m.covering.coverage}")
    for material in m.covering.materials:
        tokens.add(f"material:{material}")
    tokens.add(f"silhouette:{m.silhouette.primary}")
    for comp in m.silhouette.hybrid_components or ():
        tokens.add(f"silhouette:{comp}")
    return frozenset(tokens)


# --- multiplicity expansion ------------------------------------------------------


def expand_multiplicities(
    taxonomy: Taxonomy, m: RobotMorphology, root: str | None = None
) -> RobotMorphology:
    """Replace every node of multiplicity ``k`` by ``k`` copies of its branch.

    Branches point away from the root, which defaults to the unique core
    subdivision node.  Nested multiplicities multiply: a double arm whose hand
    has multiplicity one still yields two hands, one per arm copy.
    """
    if not m.nodes:
        return m
    if all(n.multiplicity == 1 for n in m.nodes):
        return m

    if root is None:
        cores = [
            n.id for n in m.nodes
            if n.concept in taxonomy and _subsumed(taxonomy, n.concept, CORE_SUBDIVISION)
        ]
        if len(cores) != 1:
            raise NoRootError(
                f"expansion needs a unique core subdivision, found {len(cores)}; "
                "pass an explicit root"
            )
        root = cores[0]
    elif root not in {n.id for n in m.nodes}:
        raise UnknownNodeError(f"expansion root {root!r} is not a node id")

    adj = m.adjacency()
    if len(m.edges) != len(m.nodes) - 1 or not _is_connected(m):
        raise NotATreeError("multiplicity expansion is only defined for tree-shaped graphs")

    by_id = {n.id: n for n in m.nodes}
    new_nodes: list[MorphNode] = []
    index_edges: list[tuple[int, int]] = []

    def build(node_id: str, parent_id: str | None, parent_index: int | None, suffix: str) -> None:
        node = by_id[node_id]
        copies = node.multiplicity
        for index in range(1, copies + 1):
            tail = suffix + (f"#{index}" if copies > 1 else "")
            own_index = len(new_nodes)
            new_nodes.append(replace(node, id=node.id + tail, multiplicity=1))
            if parent_index is not None:
                index_edges.append((parent_index, own_index))
            for child in adj[node_id]:
                if child != parent_id:
                    build(child, node_id, own_index, tail)

    build(root, None, None, "")

    ids = [n.id for n in new_nodes]
    if len(set(ids)) != len(ids):
        # Expansion suffixes collided with existing ids: renumber instead.
        new_nodes = [replace(n, id=f"x{i + 1}") for i, n in enumerate(new_nodes)]

    return RobotMorphology(
        nodes=tuple(new_nodes),
        edges=tuple((new_nodes[i].id, new_nodes[j].id) for i, j in index_edges),
        covering=m.covering,
        silhouette=m.silhouette,
    )


# --- canonical form ---------------------------------------------------------------


def canonicalize(m: RobotMorphology) -> RobotMorphology:
    """Deterministically reorder and renumber a morphology.

    Nodes sort by (concept, descriptor tokens, degree, original id) and are
    renamed ``n001``, ``n002``, ...; edges are normalised to sorted pairs in
    sorted order.  The transform is idempotent and stable under node
    relabelling, which makes serialized output diffable.
    """
    adj = m.adjacency()
    ordered = sorted(
        m.nodes,
        key=lambda n: (n.concept, n.descriptor_tokens(), len(adj[n.id]), n.id),
    )
    width = max(3, len(str(len(ordered))))
    remap = {node.id: f"n{str(i + 1).zfill(width)}" for i, node in enumerate(ordered)}
    nodes = tuple(
        replace(node, id=remap[node.id], descriptors=tuple(sorted(node.descriptors)))
        for node in ordered
    )
    edges = tuple(
        sorted(tuple(sorted((remap[a], remap[b]))) for a, b in m.edges if a in remap and b in remap)
    )
    return RobotMorphology(nodes=nodes, edges=edges, covering=m.covering, silhouette=m.silhouette)
