"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..morphology import RobotMorphology
from ..interchange import morphology_from_json_dict, morphology_to_json_dict


class DescriptorModel(BaseModel):
    descriptor: str
    value: str | None = None


class NodeModel(BaseModel):
    id: str
    concept: str
    multiplicity: int = 1
    descriptors: list[DescriptorModel] = Field(default_factory=list)


class CoveringModel(BaseModel):
    coverage: str
    materials: list[str] = Field(default_factory=list)


class SilhouetteModel(BaseModel):
    primary: str
    hybrid: list[str] = Field(default_factory=list)


class MorphologyModel(BaseModel):
    covering: CoveringModel
    silhouette: SilhouetteModel
    nodes: list[NodeModel] = Field(default_factory=list)
    edges: list[tuple[str, str]] = Field(default_factory=list)

    def to_morphology(self) -> RobotMorphology:
        return morphology_from_json_dict(self.model_dump())

    @classmethod
    def from_morphology(cls, m: RobotMorphology, canonical: bool = True) -> "MorphologyModel":
        return cls.model_validate(morphology_to_json_dict(m, canonical=canonical))


class RobotMetaModel(BaseModel):
    source: str | None = None
    split: str | None = None
    transform_variant: str | None = None


class RobotModel(MorphologyModel):
    name: str
    meta: RobotMetaModel = Field(default_factory=RobotMetaModel)


class ValidationIssueModel(BaseModel):
    code: str
    locus: str
    message: str


class ValidationReportModel(BaseModel):
    ok: bool
    errors: list[ValidationIssueModel] = Field(default_factory=list)
    lints: list[ValidationIssueModel] = Field(default_factory=list)


class DatasetValidationModel(BaseModel):
    ok: bool
    robot_count: int
    reports: dict[str, ValidationReportModel] = Field(default_factory=dict)


class FeatureFrequencyModel(BaseModel):
    feature: str
    count: int
    z: float | None = None


class StatsModel(BaseModel):
    split: str | None = None
    profile: str
    robot_count: int
    feature_count: int
    mean: float
    sd: float
    features: list[FeatureFrequencyModel]


class CostOptions(BaseModel):
    """Edit-cost knobs shared by the distance endpoints."""

    label_equality: str = "concept-only"
    taxonomy_weighted: bool = False
    descriptor_penalty: float = 0.0
    node_insert: float = 1.0
    node_delete: float = 1.0
    edge_insert: float = 1.0
    edge_delete: float = 1.0


class BudgetOptions(BaseModel):
    max_nodes: int = 12
    max_states: int = 5_000_000


class DistanceRequest(BaseModel):
    """Operands are robot names from the dataset or inline morphologies."""

    a: str | MorphologyModel
    b: str | MorphologyModel
    metric: str = "jaccard"
    profile: str = "concepts"
    expand: bool = True
    cost: CostOptions = Field(default_factory=CostOptions)
    budget: BudgetOptions = Field(default_factory=BudgetOptions)


class DistanceResponse(BaseModel):
    metric: str
    value: float
    exact: bool
    budget_exceeded: bool = False


class MatrixRequest(BaseModel):
    names: list[str] | None = None
    split: str | None = None
    metric: str = "jaccard"
    profile: str = "concepts"
    expand: bool = True
    cost: CostOptions = Field(default_factory=CostOptions)
    budget: BudgetOptions = Field(default_factory=BudgetOptions)


class MatrixResponse(BaseModel):
    metric: str
    names: list[str]
    values: list[list[float | None]]  # None encodes a failed cell
    exact: list[list[bool]]
    diagnostics: list[str] = Field(default_factory=list)


class KnnRequest(BaseModel):
    probe: str | MorphologyModel
    k: int = 5
    split: str | None = None
    metric: str = "jaccard"
    profile: str = "concepts"
    expand: bool = True
    cost: CostOptions = Field(default_factory=CostOptions)
    budget: BudgetOptions = Field(default_factory=BudgetOptions)


class NeighborModel(BaseModel):
    name: str
    value: float
    exact: bool


class KnnResponse(BaseModel):
    metric: str
    neighbors: list[NeighborModel]


class QueryRequest(BaseModel):
    predicate: str
    profile: str = "full"


class QueryResponse(BaseModel):
    predicate: str
    names: list[str]


class ExportRequest(BaseModel):
    name: str
    format: str = "dot"  # dot | json | urdf
    link_map: dict[str, str] = Field(default_factory=dict)


class ExportResponse(BaseModel):
    name: str
    format: str
    content: str


class ConceptModel(BaseModel):
    id: str
    label: str
    definition: str
    kind: str
    parents: list[str]
    children: list[str]
    depth: int
    applicable_descriptors: list[str] = Field(default_factory=list)


class LcaModel(BaseModel):
    a: str
    b: str
    lca: str
    depth: int
    similarity: float


class RobotSummaryModel(BaseModel):
    name: str
    split: str | None
    transform_variant: str | None
    node_count: int
    edge_count: int


class HealthModel(BaseModel):
    status: str
    taxonomy_version: str
    robot_count: int
