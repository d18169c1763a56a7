"""HTTP service exposing the toolkit over JSON.

The app factory wires a taxonomy and a dataset into route handlers; callers
may pass loaded objects, point the METAMORPH_TAXONOMY / METAMORPH_DATASET
environment variables at files, or fall back to the packaged reference data.
"""

from __future__ import annotations

import math
import os

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from ..dataset import Dataset, frequency_stats, ingest, query as query_records
from ..distance import (
    METRICS,
    distance_matrix,
    nearest_neighbors,
    robot_distance,
)
from ..errors import (
    DifferentKindError,
    EmptyDatasetError,
    EmptySelectionError,
    KTooLargeError,
    MetamorphError,
    ParseError,
    UnknownConceptError,
    UnknownFeatureError,
    ValidationFailedError,
)
from ..ged import CostModel, SearchBudget
from ..interchange import dumps, robot_to_json_dict, to_dot, to_urdf_annotation
from ..morphology import RobotMorphology, validate
from ..resources import default_dataset, default_taxonomy
from ..taxonomy import ConceptKind, Taxonomy, load_taxonomy
from . import schemas

_BAD_REQUEST = (
    ParseError,
    DifferentKindError,
    EmptyDatasetError,
    EmptySelectionError,
    KTooLargeError,
    ValidationFailedError,
)
_NOT_FOUND = (UnknownConceptError, UnknownFeatureError)


def _load_from_env() -> tuple[Taxonomy, Dataset]:
    taxonomy_path = os.environ.get("METAMORPH_TAXONOMY")
    rules_path = os.environ.get("METAMORPH_RULES")
    dataset_path = os.environ.get("METAMORPH_DATASET")
    taxonomy = (
        load_taxonomy(taxonomy_path, rules_source=rules_path)
        if taxonomy_path
        else default_taxonomy()
    )
    dataset = ingest(taxonomy, dataset_path) if dataset_path else default_dataset(taxonomy)
    return taxonomy, dataset


def _report_model(report) -> schemas.ValidationReportModel:
    return schemas.ValidationReportModel(
        ok=report.ok,
        errors=[schemas.ValidationIssueModel(**vars(issue)) for issue in report.errors],
        lints=[schemas.ValidationIssueModel(**vars(issue)) for issue in report.lints],
    )


def create_app(taxonomy: Taxonomy | None = None, dataset: Dataset | None = None) -> FastAPI:
    if taxonomy is None:
        taxonomy, env_dataset = _load_from_env()
        dataset = dataset if dataset is not None else env_dataset
    elif dataset is None:
        dataset = default_dataset(taxonomy)

    app = FastAPI(title="metamorph", version="0.1.0")
    app.state.taxonomy = taxonomy
    app.state.dataset = dataset

    @app.exception_handler(MetamorphError)
    async def metamorph_error(_request: Request, exc: MetamorphError) -> JSONResponse:
        status = 400 if isinstance(exc, _BAD_REQUEST) else (
            404 if isinstance(exc, _NOT_FOUND) else 422
        )
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def value_error(_request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def resolve(operand: str | schemas.MorphologyModel) -> RobotMorphology:
        if isinstance(operand, str):
            try:
                return dataset.record(operand).morphology
            except KeyError:
                raise HTTPException(status_code=404,
                                    detail=f"unknown robot {operand!r}") from None
        return operand.to_morphology()

    def items_for(names: list[str] | None, split: str | None):
        if names is not None:
            out = []
            for name in names:
                try:
                    out.append((name, dataset.record(name).morphology))
                except KeyError:
                    raise HTTPException(status_code=404,
                                        detail=f"unknown robot {name!r}") from None
            return out
        return dataset.items(split)

    def cost_from(options: schemas.CostOptions) -> CostModel:
        return CostModel(
            node_insert=options.node_insert,
            node_delete=options.node_delete,
            edge_insert=options.edge_insert,
            edge_delete=options.edge_delete,
            label_equality=options.label_equality,
            taxonomy=taxonomy if options.taxonomy_weighted else None,
            descriptor_penalty=options.descriptor_penalty,
        )

    def budget_from(options: schemas.BudgetOptions) -> SearchBudget:
        return SearchBudget(max_nodes=options.max_nodes, max_states=options.max_states)

    @app.get("/health", response_model=schemas.HealthModel)
    def health() -> schemas.HealthModel:
        return schemas.HealthModel(
            status="ok",
            taxonomy_version=taxonomy.version,
            robot_count=len(dataset),
        )

    @app.get("/taxonomy")
    def taxonomy_document() -> dict:
        return taxonomy.to_json_dict()

    @app.get("/taxonomy/concepts/{concept_id}", response_model=schemas.ConceptModel)
    def concept_detail(concept_id: str) -> schemas.ConceptModel:
        concept = taxonomy.concept(concept_id)
        applicable = (
            list(taxonomy.applicable_descriptors(concept_id))
            if concept.kind is ConceptKind.SUBDIVISION
            else []
        )
        return schemas.ConceptModel(
            id=concept.id,
            label=concept.label,
            definition=concept.definition,
            kind=concept.kind.value,
            parents=list(concept.parents),
            children=list(taxonomy.children(concept_id)),
            depth=taxonomy.depth(concept_id),
            applicable_descriptors=applicable,
        )

    @app.get("/taxonomy/lca", response_model=schemas.LcaModel)
    def lowest_common_ancestor(a: str, b: str) -> schemas.LcaModel:
        lca = taxonomy.lowest_common_ancestor(a, b)
        return schemas.LcaModel(
            a=a, b=b, lca=lca,
            depth=taxonomy.depth(lca),
            similarity=taxonomy.concept_similarity(a, b),
        )

    @app.get("/robots", response_model=list[schemas.RobotSummaryModel])
    def robots(split: str | None = None) -> list[schemas.RobotSummaryModel]:
        return [
            schemas.RobotSummaryModel(
                name=record.name,
                split=record.split,
                transform_variant=record.transform_variant,
                node_count=len(record.morphology.nodes),
                edge_count=len(record.morphology.edges),
            )
            for record in dataset.subset(split)
        ]

    @app.get("/robots/{name}", response_model=schemas.RobotModel)
    def robot_detail(name: str) -> schemas.RobotModel:
        try:
            record = dataset.record(name)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown robot {name!r}") from None
        return schemas.RobotModel.model_validate(robot_to_json_dict(
            record.name, record.morphology, split=record.split,
            source=record.source, transform_variant=record.transform_variant,
        ))

    @app.post("/validate/robot", response_model=schemas.ValidationReportModel)
    def validate_robot(body: schemas.RobotModel | schemas.MorphologyModel):
        return _report_model(validate(taxonomy, body.to_morphology()))

    @app.post("/validate/dataset", response_model=schemas.DatasetValidationModel)
    async def validate_dataset(request: Request) -> schemas.DatasetValidationModel:
        body = await request.json()
        if not isinstance(body, (dict, list)):
            raise HTTPException(status_code=400,
                                detail="dataset body must be an object or an array")
        robot_count = len(body if isinstance(body, list) else body.get("robots") or ())
        try:
            loaded = ingest(taxonomy, body)
        except ValidationFailedError as exc:
            return schemas.DatasetValidationModel(
                ok=False,
                robot_count=robot_count,
                reports={name: _report_model(report)
                         for name, report in sorted((exc.reports or {}).items())},
            )
        return schemas.DatasetValidationModel(ok=True, robot_count=len(loaded))

    @app.get("/stats", response_model=schemas.StatsModel)
    def stats(split: str | None = None, profile: str = "concepts") -> schemas.StatsModel:
        result = frequency_stats(dataset, split=split, profile=profile)
        return schemas.StatsModel(
            split=result.split,
            profile=result.profile,
            robot_count=result.robot_count,
            feature_count=result.feature_count,
            mean=result.mean,
            sd=result.sd,
            features=[schemas.FeatureFrequencyModel(**vars(f)) for f in result.features],
        )

    @app.post("/distance", response_model=schemas.DistanceResponse)
    def distance(body: schemas.DistanceRequest) -> schemas.DistanceResponse:
        if body.metric not in METRICS:
            raise HTTPException(status_code=400, detail=f"unknown metric {body.metric!r}")
        result = robot_distance(
            taxonomy,
            resolve(body.a),
            resolve(body.b),
            metric=body.metric,
            cost=cost_from(body.cost),
            budget=budget_from(body.budget),
            profile=body.profile,
            expand=body.expand,
        )
        return schemas.DistanceResponse(
            metric=body.metric,
            value=result.value,
            exact=result.exact,
            budget_exceeded=result.budget_exceeded,
        )

    @app.post("/matrix", response_model=schemas.MatrixResponse)
    def matrix(body: schemas.MatrixRequest) -> schemas.MatrixResponse:
        result = distance_matrix(
            taxonomy,
            items_for(body.names, body.split),
            metric=body.metric,
            cost=cost_from(body.cost),
            budget=budget_from(body.budget),
            profile=body.profile,
            expand=body.expand,
        )
        values = [
            [None if math.isnan(v) else v for v in row]
            for row in result.values
        ]
        return schemas.MatrixResponse(
            metric=body.metric,
            names=list(result.names),
            values=values,
            exact=[list(row) for row in result.exact],
            diagnostics=list(result.diagnostics),
        )

    @app.post("/knn", response_model=schemas.KnnResponse)
    def knn(body: schemas.KnnRequest) -> schemas.KnnResponse:
        probe = resolve(body.probe)
        items = dataset.items(body.split)
        if isinstance(body.probe, str):
            items = [(name, m) for name, m in items if name != body.probe]
        neighbors = nearest_neighbors(
            taxonomy, items, probe, body.k,
            metric=body.metric,
            cost=cost_from(body.cost),
            budget=budget_from(body.budget),
            profile=body.profile,
            expand=body.expand,
        )
        return schemas.KnnResponse(
            metric=body.metric,
            neighbors=[schemas.NeighborModel(**vars(n)) for n in neighbors],
        )

    @app.post("/query", response_model=schemas.QueryResponse)
    def feature_query(body: schemas.QueryRequest) -> schemas.QueryResponse:
        matched = query_records(dataset, body.predicate, profile=body.profile)
        return schemas.QueryResponse(
            predicate=body.predicate,
            names=[record.name for record in matched],
        )

    @app.post("/export", response_model=schemas.ExportResponse)
    def export(body: schemas.ExportRequest) -> schemas.ExportResponse:
        try:
            record = dataset.record(body.name)
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"unknown robot {body.name!r}") from None
        if body.format == "dot":
            content = to_dot(record.morphology)
        elif body.format == "json":
            content = dumps(robot_to_json_dict(
                record.name, record.morphology, split=record.split,
                source=record.source, transform_variant=record.transform_variant,
            ))
        elif body.format == "urdf":
            content = to_urdf_annotation(
                record.morphology, body.link_map,
                taxonomy_version=taxonomy.version,
            )
        else:
            raise HTTPException(status_code=400,
                                detail=f"unknown export format {body.format!r}")
        return schemas.ExportResponse(name=body.name, format=body.format, content=content)

    return app
