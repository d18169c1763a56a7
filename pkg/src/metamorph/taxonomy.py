"""Concept taxonomy: a rooted DAG of concepts plus descriptor applicability rules.

The taxonomy holds four families of concepts (subdivisions, descriptors,
coverings, silhouettes), each hanging under a single kind root.  Reasoning is
deliberately small: subsumption, deepest common ancestor, Wu-Palmer style
similarity, and descriptor applicability lookups.  Two input formats are
supported: a canonical JSON document (source of truth) and a small Turtle
subset for published ontology files.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    CycleError,
    DanglingParentError,
    DifferentKindError,
    DuplicateIdError,
    ParseError,
    UnknownConceptError,
    WrongKindError,
)

_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")


class ConceptKind(str, enum.Enum):
    SUBDIVISION = "Subdivision"
    DESCRIPTOR = "Descriptor"
    COVERING = "Covering"
    SILHOUETTE = "Silhouette"


#: Default mapping from kind-root concept id to the kind it anchors.  Turtle
#: files carry no kind column, so kinds are derived from these roots.
DEFAULT_KIND_ROOTS: Mapping[str, ConceptKind] = {
    "MorphologicalSubdivision": ConceptKind.SUBDIVISION,
    "MorphologicalDescriptor": ConceptKind.DESCRIPTOR,
    "Covering": ConceptKind.COVERING,
    "MorphologicalSilhouette": ConceptKind.SILHOUETTE,
}


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    definition: str
    kind: ConceptKind
    parents: tuple[str, ...]


@dataclass(frozen=True)
class ApplicabilityRule:
    """Declares where a descriptor may be used and which values it accepts.

    ``general`` rules apply to every subdivision; otherwise the descriptor is
    usable on the listed subdivisions and all their descendants.  The value
    domain is either an explicit token list, "numeric" (decimal digits), or,
    when neither is declared, the strict descendants of the descriptor concept
    itself (how shape values work).
    """

    descriptor: str
    general: bool
    applicable_to: tuple[str, ...] = ()
    values: tuple[str, ...] = ()
    numeric: bool = False


class Taxonomy:
    """Immutable concept store with precomputed reasoning tables."""

    def __init__(
        self,
        version: str,
        concepts: Iterable[Concept],
        rules: Iterable[ApplicabilityRule] = (),
        load_warnings: Iterable[str] = (),
    ):
        self.version = version
        self.concepts: dict[str, Concept] = {}
        for concept in concepts:
            if concept.id in self.concepts:
                raise DuplicateIdError(f"duplicate concept id {concept.id!r}")
            self.concepts[concept.id] = concept
        self.rules: tuple[ApplicabilityRule, ...] = tuple(rules)
        self.load_warnings: tuple[str, ...] = tuple(load_warnings)
        self._check_structure()
        self._children: dict[str, tuple[str, ...]] = self._build_children()
        self._ancestors: dict[str, frozenset[str]] = self._build_ancestors()
        self._depth: dict[str, int] = self._build_depths()
        self._kind_root: dict[str, str] = {
            cid: next(a for a in self._ancestors[cid] if not self.concepts[a].parents)
            for cid in self.concepts
        }
        self._rules_by_descriptor: dict[str, ApplicabilityRule] = {}
        for rule in self.rules:
            if rule.descriptor in self._rules_by_descriptor:
                raise DuplicateIdError(f"duplicate rule for descriptor {rule.descriptor!r}")
            self._rules_by_descriptor[rule.descriptor] = rule
        self._check_rules()

    # --- construction checks -------------------------------------------

    def _check_structure(self) -> None:
        for concept in self.concepts.values():
            if not _ID_RE.match(concept.id):
                raise ParseError(f"concept id {concept.id!r} is not a valid identifier")
            for parent in concept.parents:
                if parent not in self.concepts:
                    raise DanglingParentError(
                        f"concept {concept.id!r} names missing parent {parent!r}"
                    )
                if self.concepts[parent].kind is not concept.kind:
                    raise ParseError(
                        f"concept {concept.id!r} ({concept.kind.value}) has parent "
                        f"{parent!r} of kind {self.concepts[parent].kind.value}"
                    )

        roots = [c for c in self.concepts.values() if not c.parents]
        kinds_seen = {c.kind for c in roots}
        if len(roots) != len(kinds_seen):
            raise ParseError("each kind must have exactly one root concept")
        present_kinds = {c.kind for c in self.concepts.values()}
        if kinds_seen != present_kinds:
            missing = sorted(k.value for k in present_kinds - kinds_seen)
            raise ParseError(f"no root concept for kind(s): {', '.join(missing)}")

        # Cycle check: iterative colouring over the parent relation.
        WHITE, GRAY, BLACK = 0, 1, 2
        colour = {cid: WHITE for cid in self.concepts}
        for start in self.concepts:
            if colour[start] != WHITE:
                continue
            stack: list[tuple[str, int]] = [(start, 0)]
            colour[start] = GRAY
            while stack:
                cid, idx = stack[-1]
                parents = self.concepts[cid].parents
                if idx < len(parents):
                    stack[-1] = (cid, idx + 1)
                    parent = parents[idx]
                    if colour[parent] == GRAY:
                        raise CycleError(f"cycle through concept {parent!r}")
                    if colour[parent] == WHITE:
                        colour[parent] = GRAY
                        stack.append((parent, 0))
                else:
                    colour[cid] = BLACK
                    stack.pop()

    def _check_rules(self) -> None:
        for rule in self.rules:
            descriptor = self.concepts.get(rule.descriptor)
            if descriptor is None:
                raise UnknownConceptError(f"rule for unknown descriptor {rule.descriptor!r}")
            if descriptor.kind is not ConceptKind.DESCRIPTOR:
                raise WrongKindError(
                    f"rule descriptor {rule.descriptor!r} has kind {descriptor.kind.value}"
                )
            for target in rule.applicable_to:
                concept = self.concepts.get(target)
                if concept is None:
                    raise UnknownConceptError(
                        f"rule for {rule.descriptor!r} targets unknown concept {target!r}"
                    )
                if concept.kind is not ConceptKind.SUBDIVISION:
                    raise WrongKindError(
                        f"rule for {rule.descriptor!r} targets non-subdivision {target!r}"
                    )

    def _build_children(self) -> dict[str, tuple[str, ...]]:
        children: dict[str, list[str]] = {cid: [] for cid in self.concepts}
        for concept in self.concepts.values():
            for parent in concept.parents:
                children[parent].append(concept.id)
        return {cid: tuple(sorted(kids)) for cid, kids in children.items()}

    def _build_ancestors(self) -> dict[str, frozenset[str]]:
        ancestors: dict[str, frozenset[str]] = {}

        def resolve(cid: str) -> frozenset[str]:
            cached = ancestors.get(cid)
            if cached is not None:
                return cached
            acc: set[str] = {cid}
            for parent in self.concepts[cid].parents:
                acc |= resolve(parent)
            result = frozenset(acc)
            ancestors[cid] = result
            return result

        for cid in self.concepts:
            resolve(cid)
        return ancestors

    def _build_depths(self) -> dict[str, int]:
        # Depth is the longest path from the kind root; roots sit at depth 1.
        depth: dict[str, int] = {}

        def resolve(cid: str) -> int:
            cached = depth.get(cid)
            if cached is not None:
                return cached
            parents = self.concepts[cid].parents
            value = 1 if not parents else 1 + max(resolve(p) for p in parents)
            depth[cid] = value
            return value

        for cid in self.concepts:
            resolve(cid)
        return depth

    # --- basic lookups ---------------------------------------------------

    def __contains__(self, concept_id: str) -> bool:
        return concept_id in self.concepts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Taxonomy):
            return NotImplemented
        return (
            self.version == other.version
            and self.concepts == other.concepts
            and self.rules == other.rules
        )

    def concept(self, concept_id: str) -> Concept:
        try:
            return self.concepts[concept_id]
        except KeyError:
            raise UnknownConceptError(f"unknown concept {concept_id!r}") from None

    def children(self, concept_id: str) -> tuple[str, ...]:
        self.concept(concept_id)
        return self._children[concept_id]

    def ancestors(self, concept_id: str) -> frozenset[str]:
        """All concepts subsuming ``concept_id``, itself included."""
        self.concept(concept_id)
        return self._ancestors[concept_id]

    def depth(self, concept_id: str) -> int:
        self.concept(concept_id)
        return self._depth[concept_id]

    def kind_root(self, concept_id: str) -> str:
        self.concept(concept_id)
        return self._kind_root[concept_id]

    def roots(self) -> tuple[str, ...]:
        return tuple(sorted(cid for cid, c in self.concepts.items() if not c.parents))

    # --- reasoning ---------------------------------------------------------

    def is_subsumed_by(self, a: str, b: str) -> bool:
        """True when ``a`` is ``b`` or a (transitive) descendant of ``b``."""
        self.concept(b)
        return b in self.ancestors(a)

    def lowest_common_ancestor(self, a: str, b: str) -> str:
        """Deepest concept subsuming both; depth ties break on lexicographic id."""
        if self.kind_root(a) != self.kind_root(b):
            raise DifferentKindError(
                f"{a!r} and {b!r} belong to different kinds and share no ancestor"
            )
        common = self.ancestors(a) & self.ancestors(b)
        return min(common, key=lambda cid: (-self._depth[cid], cid))

    def concept_similarity(self, a: str, b: str) -> float:
        """Depth-weighted similarity in (0, 1]; 1.0 exactly when ``a == b``."""
        lca = self.lowest_common_ancestor(a, b)
        return 2.0 * self._depth[lca] / (self._depth[a] + self._depth[b])

    def applicable_descriptors(self, subdivision: str) -> tuple[str, ...]:
        """Descriptor ids usable on ``subdivision``, sorted.

        A rule applies when it is general or when it targets the subdivision
        or any of its ancestors, so applicability is closed under subsumption.
        """
        concept = self.concept(subdivision)
        if concept.kind is not ConceptKind.SUBDIVISION:
            raise WrongKindError(f"{subdivision!r} is a {concept.kind.value}, not a Subdivision")
        lineage = self.ancestors(subdivision)
        out = [
            rule.descriptor
            for rule in self.rules
            if rule.general or lineage.intersection(rule.applicable_to)
        ]
        return tuple(sorted(out))

    def descriptor_rule(self, descriptor: str) -> ApplicabilityRule | None:
        return self._rules_by_descriptor.get(descriptor)

    def is_descriptor_value_allowed(self, descriptor: str, value: str | None) -> bool:
        """Check a descriptor value token against the descriptor's domain."""
        rule = self._rules_by_descriptor.get(descriptor)
        if rule is None:
            return False
        if rule.values:
            return value in rule.values
        if rule.numeric:
            return value is not None and value.isdigit()
        if value is None:
            return True
        # No declared domain: fall back to concepts under the descriptor.
        return value in self.concepts and value != descriptor and self.is_subsumed_by(value, descriptor)

    def to_json_dict(self) -> dict:
        """Canonical JSON document for this taxonomy (stable ordering)."""
        return {
            "version": self.version,
            "concepts": [
                {
                    "id": c.id,
                    "label": c.label,
                    "definition": c.definition,
                    "kind": c.kind.value,
                    "parents": list(c.parents),
                }
                for c in self.concepts.values()
            ],
            "rules": [
                {
                    "descriptor": r.descriptor,
                    "general": r.general,
                    "applicable_to": list(r.applicable_to),
                    "values": list(r.values),
                    "numeric": r.numeric,
                }
                for r in self.rules
            ],
        }


# --- canonical JSON loading --------------------------------------------------


def _rule_from_dict(raw: dict) -> ApplicabilityRule:
    try:
        return ApplicabilityRule(
            descriptor=raw["descriptor"],
            general=bool(raw["general"]),
            applicable_to=tuple(raw.get("applicable_to", ())),
            values=tuple(raw.get("values", ())),
            numeric=bool(raw.get("numeric", False)),
        )
    except KeyError as exc:
        raise ParseError(f"rule entry missing key {exc.args[0]!r}") from None


def _taxonomy_from_json_dict(doc: dict, rules_override=None) -> Taxonomy:
    if not isinstance(doc, dict):
        raise ParseError("taxonomy document must be a JSON object")
    try:
        version = doc["version"]
        raw_concepts = doc["concepts"]
    except KeyError as exc:
        raise ParseError(f"taxonomy document missing key {exc.args[0]!r}") from None
    concepts = []
    for raw in raw_concepts:
        try:
            kind = ConceptKind(raw["kind"])
        except ValueError:
            raise ParseError(f"concept {raw.get('id')!r} has unknown kind {raw.get('kind')!r}") from None
        except KeyError as exc:
            raise ParseError(f"concept entry missing key {exc.args[0]!r}") from None
        try:
            concepts.append(
                Concept(
                    id=raw["id"],
                    label=raw["label"],
                    definition=raw.get("definition", ""),
                    kind=kind,
                    parents=tuple(raw.get("parents", ())),
                )
            )
        except KeyError as exc:
            raise ParseError(f"concept entry missing key {exc.args[0]!r}") from None
    if rules_override is not None:
        rules = [_rule_from_dict(r) for r in rules_override]
    else:
        rules = [_rule_from_dict(r) for r in doc.get("rules", ())]
    return Taxonomy(version=version, concepts=concepts, rules=rules)


# --- Turtle subset loading ----------------------------------------------------
#
# Supported: @prefix declarations, named classes with rdfs:subClassOf /
# rdfs:label / rdfs:comment triples, "a"/rdf:type statements, ';' predicate
# lists and ',' object lists.  Any other construct (blank nodes, other
# predicates, datatyped literals we do not understand) is skipped and counted
# as a warning rather than failing the load.


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<iri><[^<>\s]*>)
  | (?P<punct>[.;,\[\]()])
  | (?P<atprefix>@prefix\b)
  | (?P<name>[^\s.;,\[\]()"<>]+)
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize_turtle(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}", line=line, column=pos - line_start + 1
            )
        kind = match.lastgroup or ""
        chunk = match.group(0)
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, match.start() - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = match.start() + chunk.rfind("\n") + 1
        pos = match.end()
    return tokens


def _local_name(iri: str) -> str:
    body = iri[1:-1] if iri.startswith("<") else iri
    if "#" in body:
        return body.rsplit("#", 1)[1]
    return body.rstrip("/").rsplit("/", 1)[-1]


class _TurtleReader:
    """Statement-at-a-time reader producing (subject, predicate, object) rows."""

    _KNOWN_PREDICATES = {
        "subClassOf": "subClassOf",
        "label": "label",
        "comment": "comment",
        "type": "type",
    }

    def __init__(self, text: str):
        self.tokens = _tokenize_turtle(text)
        self.pos = 0
        self.prefixes: dict[str, str] = {}
        self.warnings: list[str] = []

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> _Token:
        token = self._peek()
        if token is None:
            last = self.tokens[-1] if self.tokens else None
            raise ParseError(
                "unexpected end of input",
                line=last.line if last else 1,
                column=last.column if last else 1,
            )
        self.pos += 1
        return token

    def _expect_punct(self, text: str) -> None:
        token = self._next()
        if token.kind != "punct" or token.text != text:
            raise ParseError(f"expected {text!r}, found {token.text!r}", token.line, token.column)

    def _warn(self, message: str, token: _Token) -> None:
        self.warnings.append(f"line {token.line}: {message}")

    def _skip_blank_node(self, opener: _Token) -> None:
        depth = 1
        while depth:
            token = self._next()
            if token.kind == "punct" and token.text == "[":
                depth += 1
            elif token.kind == "punct" and token.text == "]":
                depth -= 1

    def _skip_statement(self) -> None:
        while True:
            token = self._peek()
            if token is None:
                return
            self.pos += 1
            if token.kind == "punct" and token.text == "[":
                self._skip_blank_node(token)
            elif token.kind == "punct" and token.text == ".":
                return

    def _resolve_name(self, token: _Token) -> str | None:
        """Return a local concept name for an IRI or prefixed-name token."""
        if token.kind == "iri":
            return _local_name(token.text)
        if token.kind == "name" and ":" in token.text:
            prefix, local = token.text.split(":", 1)
            if prefix + ":" not in self.prefixes and prefix not in self.prefixes:
                self._warn(f"undeclared prefix {prefix!r}", token)
            return local
        return None

    def _read_prefix(self) -> None:
        name = self._next()
        iri = self._next()
        if name.kind != "name" or not name.text.endswith(":") or iri.kind != "iri":
            raise ParseError("malformed @prefix declaration", name.line, name.column)
        self.prefixes[name.text.rstrip(":")] = iri.text[1:-1]
        self._expect_punct(".")

    def read_triples(self) -> list[tuple[str, str, str]]:
        triples: list[tuple[str, str, str]] = []
        while True:
            token = self._peek()
            if token is None:
                return triples
            if token.kind == "atprefix":
                self.pos += 1
                self._read_prefix()
                continue
            if token.kind == "punct" and token.text == "[":
                self._warn("blank node subject skipped", token)
                self.pos += 1
                self._skip_blank_node(token)
                self._skip_statement()
                continue
            subject_token = self._next()
            subject = self._resolve_name(subject_token)
            if subject is None:
                self._warn(f"unsupported subject {subject_token.text!r}; statement skipped", subject_token)
                self._skip_statement()
                continue
            self._read_predicate_object_list(subject, triples)

    def _read_predicate_object_list(self, subject: str, out: list[tuple[str, str, str]]) -> None:
        while True:
            pred_token = self._next()
            if pred_token.kind == "name" and pred_token.text == "a":
                predicate = "type"
            else:
                local = self._resolve_name(pred_token)
                predicate = self._KNOWN_PREDICATES.get(local or "")
                if predicate is None:
                    self._warn(f"predicate {pred_token.text!r} skipped", pred_token)
            terminator = self._read_object_list(subject, predicate, out)
            if terminator == ".":
                return
            # ';' keeps reading predicates for the same subject.

    def _read_object_list(
        self, subject: str, predicate: str | None, out: list[tuple[str, str, str]]
    ) -> str:
        while True:
            obj_token = self._next()
            if obj_token.kind == "punct" and obj_token.text == "[":
                self._warn("blank node object skipped", obj_token)
                self._skip_blank_node(obj_token)
            elif obj_token.kind == "string":
                self._swallow_literal_suffix()
                if predicate is not None:
                    try:
                        value = json.loads(obj_token.text.replace("\\'", "'"))
                    except json.JSONDecodeError:
                        raise ParseError(
                            "malformed string literal", obj_token.line, obj_token.column
                        ) from None
                    out.append((subject, predicate, value))
            elif predicate is not None:
                obj = self._resolve_name(obj_token)
                if obj is None:
                    self._warn(f"unsupported object {obj_token.text!r} skipped", obj_token)
                else:
                    out.append((subject, predicate, obj))
            sep = self._next()
            if sep.kind != "punct" or sep.text not in ".;,":
                raise ParseError(f"expected '.', ';' or ',', found {sep.text!r}", sep.line, sep.column)
            if sep.text != ",":
                return sep.text

    def _swallow_literal_suffix(self) -> None:
        """Consume an optional @lang or ^^datatype tail after a string."""
        nxt = self._peek()
        if nxt is None or nxt.kind != "name":
            return
        if nxt.text.startswith("@"):
            self.pos += 1
        elif nxt.text.startswith("^^"):
            self.pos += 1
            if nxt.text == "^^":  # datatype written as a separate <iri> token
                self._next()


def _taxonomy_from_turtle(
    text: str,
    kind_roots: Mapping[str, ConceptKind],
    rules_override=None,
    version: str = "turtle",
) -> Taxonomy:
    reader = _TurtleReader(text)
    parents: dict[str, set[str]] = {}
    labels: dict[str, str] = {}
    comments: dict[str, str] = {}
    mentioned: set[str] = set()

    for subject, predicate, obj in reader.read_triples():
        mentioned.add(subject)
        if predicate == "subClassOf":
            parents.setdefault(subject, set()).add(obj)
            mentioned.add(obj)
        elif predicate == "label":
            labels[subject] = obj
        elif predicate == "comment":
            comments[subject] = obj
        elif predicate == "type":
            if obj not in ("Class",):
                reader.warnings.append(f"type {obj!r} on {subject!r} ignored")

    # Derive each concept's kind by climbing to a known kind root.
    kind_cache: dict[str, ConceptKind] = {}

    def kind_of(cid: str, trail: tuple[str, ...] = ()) -> ConceptKind:
        if cid in kind_cache:
            return kind_cache[cid]
        if cid in trail:
            raise CycleError(f"cycle through concept {cid!r}")
        if cid in kind_roots:
            kind_cache[cid] = kind_roots[cid]
            return kind_cache[cid]
        ups = parents.get(cid)
        if not ups:
            raise DanglingParentError(
                f"concept {cid!r} is not reachable from any kind root"
            )
        kind = kind_of(sorted(ups)[0], trail + (cid,))
        kind_cache[cid] = kind
        return kind

    concepts = []
    for cid in sorted(mentioned):
        concepts.append(
            Concept(
                id=cid,
                label=labels.get(cid, cid),
                definition=comments.get(cid, ""),
                kind=kind_of(cid),
                parents=tuple(sorted(parents.get(cid, ()))),
            )
        )
    rules = [_rule_from_dict(r) for r in rules_override] if rules_override is not None else []
    return Taxonomy(version=version, concepts=concepts, rules=rules, load_warnings=reader.warnings)


# --- entry point --------------------------------------------------------------


def load_taxonomy(
    source: str | Path,
    format: str | None = None,
    rules_source: str | Path | None = None,
    kind_roots: Mapping[str, ConceptKind] = DEFAULT_KIND_ROOTS,
) -> Taxonomy:
    """Load a taxonomy from canonical JSON or the supported Turtle subset.

    ``source`` is a filesystem path or a document string.  ``format`` is
    ``"json"`` or ``"turtle"``; when omitted it is inferred from the file
    extension (``.ttl`` means Turtle).  ``rules_source`` optionally points at
    a JSON sidecar carrying applicability rules, which Turtle cannot express;
    it overrides any rules embedded in a JSON document.
    """
    path: Path | None = None
    if isinstance(source, Path):
        path = source
    elif isinstance(source, str) and "\n" not in source and (
        source.endswith(".json") or source.endswith(".ttl")
    ):
        path = Path(source)

    if path is not None:
        if format is None:
            format = "turtle" if path.suffix == ".ttl" else "json"
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read taxonomy file: {exc}") from None
    else:
        text = str(source)
        if format is None:
            format = "turtle" if text.lstrip().startswith("@prefix") else "json"

    rules_override = None
    if rules_source is not None:
        try:
            raw = Path(rules_source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read rules sidecar: {exc}") from None
        try:
            sidecar = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"rules sidecar is not valid JSON: {exc.msg}", exc.lineno, exc.colno) from None
        rules_override = sidecar["rules"] if isinstance(sidecar, dict) else sidecar

    if format == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
        return _taxonomy_from_json_dict(doc, rules_override=rules_override)
    if format == "turtle":
        return _taxonomy_from_turtle(text, kind_roots=kind_roots, rules_override=rules_override)
    raise ParseError(f"unknown taxonomy format {format!r}")
