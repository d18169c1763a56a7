"""Robot dataset: ingestion, frequency statistics, feature queries.

A dataset is an ordered list of named robot records split into template (TS)
and validation (VS) halves.  Ingestion refuses structurally broken data up
front, so everything downstream can assume valid morphologies.
"""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    DuplicateNameError,
    EmptySelectionError,
    ParseError,
    PredicateParseError,
    UnknownFeatureError,
    ValidationFailedError,
)
from .interchange import loads, morphology_to_json_dict, robot_from_json_dict
from .morphology import (
    PROFILE_CONCEPTS,
    PROFILE_FULL,
    MorphNode,
    RobotMorphology,
    CoveringSpec,
    SilhouetteSpec,
    feature_set,
    validate,
)
from .taxonomy import Taxonomy

SPLIT_TEMPLATE = "TS"
SPLIT_VALIDATION = "VS"
SPLITS = (SPLIT_TEMPLATE, SPLIT_VALIDATION)

# Graph-only import formats cannot express these; documented fallbacks.
CSV_DEFAULT_COVERAGE = "FullyVisible"
CSV_DEFAULT_SILHOUETTE = "Geometric"


@dataclass(frozen=True)
class RobotRecord:
    name: str
    morphology: RobotMorphology
    split: str
    source: str | None = None
    transform_variant: str | None = None


@dataclass(frozen=True)
class Dataset:
    records: tuple[RobotRecord, ...]
    taxonomy_version: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.records)

    def record(self, name: str) -> RobotRecord:
        for record in self.records:
            if record.name == name:
                return record
        raise KeyError(name)

    def subset(self, split: str | None) -> tuple[RobotRecord, ...]:
        if split is None:
            return self.records
        return tuple(r for r in self.records if r.split == split)

    def items(self, split: str | None = None) -> list[tuple[str, RobotMorphology]]:
        return [(r.name, r.morphology) for r in self.subset(split)]

    def to_json_dict(self) -> dict:
        return {
            "taxonomy_version": self.taxonomy_version,
            "robots": [
                {
                    "name": r.name,
                    "meta": {
                        "source": r.source,
                        "split": r.split,
                        "transform_variant": r.transform_variant,
                    },
                    **morphology_to_json_dict(r.morphology),
                }
                for r in self.records
            ],
        }


def _validate_records(taxonomy: Taxonomy, records: list[RobotRecord]) -> None:
    seen: set[str] = set()
    failures: list[str] = []
    reports = {}
    for record in records:
        if record.name in seen:
            raise DuplicateNameError(f"duplicate robot name {record.name!r}")
        seen.add(record.name)
        if record.split not in SPLITS:
            raise ParseError(
                f"robot {record.name!r} has split {record.split!r}, expected TS or VS"
            )
        report = validate(taxonomy, record.morphology)
        if not report.ok:
            reports[record.name] = report
            first = report.errors[0]
            failures.append(f"{record.name}: {first.code} at {first.locus}")
    if failures:
        raise ValidationFailedError(
            "dataset has invalid robots: " + "; ".join(failures), reports=reports
        )


def ingest(taxonomy: Taxonomy, source) -> Dataset:
    """Load a dataset from canonical JSON (text, path, or parsed document).

    Record order is preserved.  Every morphology must validate cleanly;
    otherwise the whole ingest fails with a report naming each offender.
    """
    if isinstance(source, (Path, str)):
        text = source if isinstance(source, str) else None
        if text is None or ("\n" not in text and text.endswith(".json")):
            try:
                text = Path(source).read_text(encoding="utf-8")
            except OSError as exc:
                raise ParseError(f"cannot read dataset file: {exc}") from None
        doc = loads(text)
    else:
        doc = source

    if isinstance(doc, list):
        version, raw_records = "", doc
    elif isinstance(doc, dict):
        version = doc.get("taxonomy_version", "")
        raw_records = doc.get("robots")
        if raw_records is None:
            raise ParseError("dataset document lacks a 'robots' array")
    else:
        raise ParseError("dataset document must be an object or an array")

    records = []
    for raw in raw_records:
        name, meta, morphology = robot_from_json_dict(raw)
        records.append(RobotRecord(
            name=name,
            morphology=morphology,
            split=meta["split"] or "",
            source=meta["source"],
            transform_variant=meta["transform_variant"],
        ))
    _validate_records(taxonomy, records)
    return Dataset(records=tuple(records), taxonomy_version=version)


def ingest_csv(taxonomy: Taxonomy, source) -> Dataset:
    """One-way CSV adapter: one node or edge per row.

    Columns: name, split, feature, multiplicity, neighbor.  A row with an
    empty neighbor declares a node; a non-empty neighbor also adds the edge
    (declaring the neighbor node implicitly).  Node ids are the feature
    tokens, so this format cannot express two same-concept nodes, coverings,
    or silhouettes; covering and silhouette take documented defaults.
    """
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and source.endswith(".csv")
    ):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read CSV file: {exc}") from None
    else:
        text = source

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV document") from None
    expected = ["name", "split", "feature", "multiplicity", "neighbor"]
    if [h.strip() for h in header] != expected:
        raise ParseError(f"CSV header must be {','.join(expected)}")

    order: list[str] = []
    splits: dict[str, str] = {}
    nodes: dict[str, dict[str, int]] = {}
    explicit: dict[str, dict[str, int]] = {}
    edges: dict[str, set[tuple[str, str]]] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 5:
            raise ParseError("expected 5 columns", line=line_no)
        name, split, feature, multiplicity, neighbor = (cell.strip() for cell in row)
        if not name or not feature:
            raise ParseError("name and feature are required", line=line_no)
        if name not in splits:
            order.append(name)
            splits[name] = split
            nodes[name] = {}
            explicit[name] = {}
            edges[name] = set()
        elif splits[name] != split:
            raise ParseError(f"robot {name!r} appears with two splits", line=line_no)
        mult = 1
        if multiplicity:
            try:
                mult = int(multiplicity)
            except ValueError:
                raise ParseError(f"bad multiplicity {multiplicity!r}", line=line_no) from None
            declared = explicit[name].get(feature)
            if declared is not None and declared != mult:
                raise ParseError(
                    f"feature {feature!r} redeclared with a different multiplicity",
                    line=line_no,
                )
            explicit[name][feature] = mult
        nodes[name][feature] = max(nodes[name].get(feature, 1), mult)
        if neighbor:
            nodes[name].setdefault(neighbor, 1)
            edge = (min(feature, neighbor), max(feature, neighbor))
            edges[name].add(edge)

    records = []
    for name in order:
        morphology = RobotMorphology(
            nodes=tuple(
                MorphNode(id=f, concept=f, multiplicity=m)
                for f, m in nodes[name].items()
            ),
            edges=tuple(sorted(edges[name])),
            covering=CoveringSpec(CSV_DEFAULT_COVERAGE),
            silhouette=SilhouetteSpec(CSV_DEFAULT_SILHOUETTE),
        )
        records.append(RobotRecord(name=name, morphology=morphology, split=splits[name]))
    _validate_records(taxonomy, records)
    return Dataset(records=tuple(records))


# --- frequency statistics ---------------------------------------------------------


@dataclass(frozen=True)
class FeatureFrequency:
    feature: str
    count: int
    z: float | None  # None when the count vector has zero spread


@dataclass(frozen=True)
class FrequencyStats:
    split: str | None
    profile: str
    robot_count: int
    features: tuple[FeatureFrequency, ...]
    mean: float
    sd: float

    @property
    def feature_count(self) -> int:
        return len(self.features)

    def feature(self, name: str) -> FeatureFrequency:
        for f in self.features:
            if f.feature == name:
                return f
        raise KeyError(name)


def frequency_stats(
    dataset: Dataset,
    split: str | None = None,
    profile: str = PROFILE_CONCEPTS,
) -> FrequencyStats:
    """How many robots carry each feature, with z-scores over the counts.

    The mean and standard deviation are taken over the per-feature count
    vector (population formula).  With zero spread every z-score is reported
    as not applicable rather than dividing by zero.
    """
    records = dataset.subset(split)
    if not records:
        raise EmptySelectionError(
            f"no records in split {split!r}" if split else "dataset is empty"
        )
    counts: dict[str, int] = {}
    for record in records:
        for token in feature_set(record.morphology, profile):
            counts[token] = counts.get(token, 0) + 1
    if not counts:
        raise EmptySelectionError("selected robots have no features")

    vector = list(counts.values())
    mean = sum(vector) / len(vector)
    sd = statistics.pstdev(vector)
    features = tuple(
        FeatureFrequency(
            feature=name,
            count=count,
            z=None if sd == 0 else (count - mean) / sd,
        )
        for name, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    )
    return FrequencyStats(
        split=split,
        profile=profile,
        robot_count=len(records),
        features=features,
        mean=mean,
        sd=sd,
    )


# --- feature queries ---------------------------------------------------------------


class _PredicateParser:
    """Recursive-descent parser for has()/and/or/not expressions."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens_seen: set[str] = set()

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek_word(self) -> str | None:
        self._skip_ws()
        start = self.pos
        end = start
        while end < len(self.text) and (self.text[end].isalnum() or self.text[end] in "_:"):
            end += 1
        return self.text[start:end] if end > start else None

    def _take(self, literal: str) -> bool:
        self._skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def _fail(self, message: str):
        raise PredicateParseError(f"{message} (at offset {self.pos})")

    def parse(self):
        self._skip_ws()
        if self.pos == len(self.text):
            return lambda features: True
        expr = self._or()
        self._skip_ws()
        if self.pos != len(self.text):
            self._fail(f"unexpected trailing input {self.text[self.pos:]!r}")
        return expr

    def _or(self):
        left = self._and()
        while True:
            word = self._peek_word()
            if word != "or":
                return left
            self.pos += len(word)
            right = self._and()
            left = (lambda lhs, rhs: lambda fs: lhs(fs) or rhs(fs))(left, right)

    def _and(self):
        left = self._factor()
        while True:
            word = self._peek_word()
            if word != "and":
                return left
            self.pos += len(word)
            right = self._factor()
            left = (lambda lhs, rhs: lambda fs: lhs(fs) and rhs(fs))(left, right)

    def _factor(self):
        word = self._peek_word()
        if word == "not":
            self.pos += len(word)
            inner = self._factor()
            return lambda fs: not inner(fs)
        if word == "has":
            self.pos += len(word)
            if not self._take("("):
                self._fail("expected '(' after has")
            self._skip_ws()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos] not in "()":
                self.pos += 1
            token = self.text[start:self.pos].strip()
            if not token:
                self._fail("has() needs a feature token")
            if not self._take(")"):
                self._fail("unclosed has(")
            self.tokens_seen.add(token)
            return (lambda t: lambda fs: t in fs)(token)
        if self._take("("):
            inner = self._or()
            if not self._take(")"):
                self._fail("unclosed group")
            return inner
        self._fail("expected has(...), not, or a group")


def parse_predicate(text: str):
    """Compile a predicate; returns (matcher, referenced tokens)."""
    parser = _PredicateParser(text)
    matcher = parser.parse()
    return matcher, frozenset(parser.tokens_seen)


def query(dataset: Dataset, predicate: str, profile: str = PROFILE_FULL):
    """Records whose feature set satisfies the predicate, in dataset order.

    Feature tokens are checked against the dataset's vocabulary so a typo
    fails loudly instead of silently matching nothing.
    """
    matcher, referenced = parse_predicate(predicate)
    feature_sets = [feature_set(r.morphology, profile) for r in dataset.records]
    vocabulary = frozenset().union(*feature_sets) if feature_sets else frozenset()
    unknown = sorted(referenced - vocabulary)
    if unknown:
        raise UnknownFeatureError(
            "unknown feature token(s): " + ", ".join(unknown)
        )
    return [
        record
        for record, features in zip(dataset.records, feature_sets)
        if matcher(features)
    ]
