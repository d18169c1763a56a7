"""Command line interface.

Every command is a thin client over the HTTP service: by default the app is
instantiated in-process and driven through an in-memory transport, and with
``--server`` the same requests go to a remote instance instead.  Results go
to stdout (byte-stable across runs); notes and errors go to stderr.

Exit codes: 0 success, 1 validation findings, 2 parse/IO/usage errors,
3 search budget exceeded (the approximate result is still printed).
"""

from __future__ import annotations

import json
import math
import warnings

import click
import httpx

from .errors import MetamorphError
from .interchange import matrix_exact_to_csv, matrix_to_csv

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _number(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return format(value, ".6g")


class _ServiceClient:
    """Uniform .request() over a remote server or an in-process app."""

    def __init__(self, server: str | None, taxonomy: str | None,
                 rules: str | None, dataset: str | None):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=120.0)
        else:
            # fastapi.testclient warns about the httpx backing at import
            # time; that is internal plumbing, keep it off the CLI's stderr.
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .dataset import ingest
            from .resources import default_dataset, default_taxonomy
            from .service import create_app
            from .taxonomy import load_taxonomy

            tax = (
                load_taxonomy(taxonomy, rules_source=rules)
                if taxonomy
                else default_taxonomy()
            )
            data = ingest(tax, dataset) if dataset else default_dataset(tax)
            self._client = TestClient(create_app(taxonomy=tax, dataset=data))

    def call(self, ctx: click.Context, method: str, path: str, **kwargs) -> dict | list:
        try:
            response = self._client.request(method, path, **kwargs)
        except httpx.HTTPError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_USAGE)
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail")
            except ValueError:
                detail = response.text
            if not isinstance(detail, str):
                detail = json.dumps(detail)
            click.echo(f"error: {detail}", err=True)
            ctx.exit(EXIT_USAGE)
        return response.json()


def _service(ctx: click.Context) -> _ServiceClient:
    options = ctx.obj
    if options.get("client") is None:
        try:
            options["client"] = _ServiceClient(
                options["server"], options["taxonomy"],
                options["rules"], options["dataset"],
            )
        except MetamorphError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_USAGE)
    return options["client"]


def _read_json(ctx: click.Context, path: str) -> dict | list:
    try:
        with click.open_file(path, encoding="utf-8") as handle:
            text = handle.read()
        return json.loads(text)
    except (OSError, ValueError) as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        ctx.exit(EXIT_USAGE)


def _operand(ctx: click.Context, token: str) -> str | dict:
    """A robot operand: a dataset name, or @file.json with an inline robot."""
    if token.startswith("@"):
        return _read_json(ctx, token[1:])
    return token


def _cost_options(label_equality, weighted, descriptor_penalty,
                  node_insert, node_delete, edge_insert, edge_delete) -> dict:
    return {
        "label_equality": label_equality,
        "taxonomy_weighted": weighted,
        "descriptor_penalty": descriptor_penalty,
        "node_insert": node_insert,
        "node_delete": node_delete,
        "edge_insert": edge_insert,
        "edge_delete": edge_delete,
    }


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


_cost_decorators = [
    click.option("--label-equality", default="concept-only",
                 show_default=True,
                 type=click.Choice(["concept-only", "concept+descriptors",
                                    "concept+descriptors+multiplicity"]),
                 help="What makes two node labels equal."),
    click.option("--weighted", is_flag=True,
                 help="Derive substitution costs from taxonomy similarity."),
    click.option("--descriptor-penalty", default=0.0, show_default=True,
                 help="Extra cost per differing descriptor token (weighted mode)."),
    click.option("--node-insert", default=1.0, show_default=True),
    click.option("--node-delete", default=1.0, show_default=True),
    click.option("--edge-insert", default=1.0, show_default=True),
    click.option("--edge-delete", default=1.0, show_default=True),
    click.option("--max-nodes", default=12, show_default=True,
                 help="Exact-search node budget; larger pairs fall back to a bound."),
    click.option("--max-states", default=5_000_000, show_default=True),
    click.option("--no-expand", is_flag=True,
                 help="Compare compressed graphs without multiplicity expansion."),
]


def _with_cost_options(command):
    for decorator in reversed(_cost_decorators):
        command = decorator(command)
    return command


@click.group()
@click.option("--taxonomy", envvar="METAMORPH_TAXONOMY", metavar="PATH",
              help="Taxonomy file (JSON or Turtle); packaged data when omitted.")
@click.option("--rules", envvar="METAMORPH_RULES", metavar="PATH",
              help="Descriptor rules sidecar (JSON), mainly for Turtle taxonomies.")
@click.option("--dataset", envvar="METAMORPH_DATASET", metavar="PATH",
              help="Robot dataset file; packaged data when omitted.")
@click.option("--server", envvar="METAMORPH_SERVER", metavar="URL",
              help="Use a running service instead of in-process data.")
@click.version_option(package_name="metamorph")
@click.pass_context
def main(ctx, taxonomy, rules, dataset, server):
    """Robot morphology toolkit: validation, statistics, distances, export."""
    ctx.obj = {
        "taxonomy": taxonomy,
        "rules": rules,
        "dataset": dataset,
        "server": server,
        "client": None,
    }


@main.command()
@click.argument("robot_file", required=False)
@click.option("--dataset-file", metavar="PATH",
              help="Validate every robot in a dataset document instead.")
@click.pass_context
def validate(ctx, robot_file, dataset_file):
    """Validate a robot JSON file, or a whole dataset with --dataset-file."""
    if bool(robot_file) == bool(dataset_file):
        click.echo("error: pass exactly one of ROBOT_FILE or --dataset-file", err=True)
        ctx.exit(EXIT_USAGE)
    service = _service(ctx)
    if robot_file:
        doc = _read_json(ctx, robot_file)
        report = service.call(ctx, "POST", "/validate/robot", json=doc)
        for issue in report["errors"]:
            click.echo(f"error {issue['code']} at {issue['locus']}: {issue['message']}")
        for issue in report["lints"]:
            click.echo(f"lint {issue['code']} at {issue['locus']}: {issue['message']}")
        if report["ok"]:
            click.echo("ok")
            ctx.exit(EXIT_OK)
        ctx.exit(EXIT_FINDINGS)
    doc = _read_json(ctx, dataset_file)
    result = service.call(ctx, "POST", "/validate/dataset", json=doc)
    if result["ok"]:
        click.echo(f"ok: {result['robot_count']} robots")
        ctx.exit(EXIT_OK)
    for name, report in result["reports"].items():
        for issue in report["errors"]:
            click.echo(f"{name}: error {issue['code']} at {issue['locus']}: {issue['message']}")
    ctx.exit(EXIT_FINDINGS)


@main.command()
@click.option("--split", type=click.Choice(["TS", "VS"]), default=None,
              help="Restrict to one dataset split.")
@click.option("--profile", default="concepts", show_default=True,
              type=click.Choice(["concepts", "full"]))
@click.option("--top", default=0, show_default=True,
              help="Print only the N most frequent features (0 = all).")
@click.pass_context
def stats(ctx, split, profile, top):
    """Feature frequency statistics over the dataset."""
    params = {"profile": profile}
    if split:
        params["split"] = split
    body = _service(ctx).call(ctx, "GET", "/stats", params=params)
    click.echo(f"robots: {body['robot_count']}")
    click.echo(f"features: {body['feature_count']}")
    click.echo(f"mean: {_number(body['mean'])}")
    click.echo(f"sd: {_number(body['sd'])}")
    click.echo("feature,count,z")
    features = body["features"][:top] if top else body["features"]
    for entry in features:
        z = "" if entry["z"] is None else _number(entry["z"])
        click.echo(f"{entry['feature']},{entry['count']},{z}")


@main.command()
@click.argument("a")
@click.argument("b")
@click.option("--metric", default="jaccard", show_default=True,
              type=click.Choice(["jaccard", "ged", "ged-upper"]))
@click.option("--profile", default="concepts", show_default=True,
              type=click.Choice(["concepts", "full"]),
              help="Feature profile for the jaccard metric.")
@_with_cost_options
@click.pass_context
def distance(ctx, a, b, metric, profile, label_equality, weighted,
             descriptor_penalty, node_insert, node_delete, edge_insert,
             edge_delete, max_nodes, max_states, no_expand):
    """Distance between two robots (dataset names or @robot.json files)."""
    request = {
        "a": _operand(ctx, a),
        "b": _operand(ctx, b),
        "metric": metric,
        "profile": profile,
        "expand": not no_expand,
        "cost": _cost_options(label_equality, weighted, descriptor_penalty,
                              node_insert, node_delete, edge_insert, edge_delete),
        "budget": {"max_nodes": max_nodes, "max_states": max_states},
    }
    body = _service(ctx).call(ctx, "POST", "/distance", json=request)
    click.echo(_number(body["value"]))
    if body["budget_exceeded"]:
        click.echo("note: exact search budget exceeded; value is an upper bound",
                   err=True)
        ctx.exit(EXIT_BUDGET)
    if not body["exact"]:
        click.echo("note: value is an upper bound", err=True)


@main.command()
@click.option("--split", type=click.Choice(["TS", "VS"]), default=None)
@click.option("--names", default=None,
              help="Comma-separated robot names instead of a whole split.")
@click.option("--metric", default="jaccard", show_default=True,
              type=click.Choice(["jaccard", "ged", "ged-upper"]))
@click.option("--profile", default="concepts", show_default=True,
              type=click.Choice(["concepts", "full"]))
@click.option("-o", "--out", metavar="PATH", help="Write the CSV here instead of stdout.")
@click.option("--exact-out", metavar="PATH",
              help="Also write a per-cell exactness CSV here.")
@_with_cost_options
@click.pass_context
def matrix(ctx, split, names, metric, profile, out, exact_out, label_equality,
           weighted, descriptor_penalty, node_insert, node_delete, edge_insert,
           edge_delete, max_nodes, max_states, no_expand):
    """Pairwise distance matrix as CSV."""
    request = {
        "split": split,
        "names": [n.strip() for n in names.split(",")] if names else None,
        "metric": metric,
        "profile": profile,
        "expand": not no_expand,
        "cost": _cost_options(label_equality, weighted, descriptor_penalty,
                              node_insert, node_delete, edge_insert, edge_delete),
        "budget": {"max_nodes": max_nodes, "max_states": max_states},
    }
    body = _service(ctx).call(ctx, "POST", "/matrix", json=request)
    values = [
        [math.nan if cell is None else cell for cell in row]
        for row in body["values"]
    ]
    _write_output(matrix_to_csv(body["names"], values), out)
    if exact_out:
        _write_output(matrix_exact_to_csv(body["names"], body["exact"]), exact_out)
    for line in body["diagnostics"]:
        click.echo(f"failed cell: {line}", err=True)


@main.command()
@click.argument("probe")
@click.option("-k", default=5, show_default=True)
@click.option("--split", type=click.Choice(["TS", "VS"]), default=None)
@click.option("--metric", default="jaccard", show_default=True,
              type=click.Choice(["jaccard", "ged", "ged-upper"]))
@click.option("--profile", default="concepts", show_default=True,
              type=click.Choice(["concepts", "full"]))
@_with_cost_options
@click.pass_context
def knn(ctx, probe, k, split, metric, profile, label_equality, weighted,
        descriptor_penalty, node_insert, node_delete, edge_insert, edge_delete,
        max_nodes, max_states, no_expand):
    """Nearest neighbours of a robot (dataset name or @robot.json)."""
    request = {
        "probe": _operand(ctx, probe),
        "k": k,
        "split": split,
        "metric": metric,
        "profile": profile,
        "expand": not no_expand,
        "cost": _cost_options(label_equality, weighted, descriptor_penalty,
                              node_insert, node_delete, edge_insert, edge_delete),
        "budget": {"max_nodes": max_nodes, "max_states": max_states},
    }
    body = _service(ctx).call(ctx, "POST", "/knn", json=request)
    click.echo("name,value,exact")
    for neighbor in body["neighbors"]:
        exact = "true" if neighbor["exact"] else "false"
        click.echo(f"{neighbor['name']},{_number(neighbor['value'])},{exact}")


@main.command()
@click.argument("predicate")
@click.option("--profile", default="full", show_default=True,
              type=click.Choice(["concepts", "full"]))
@click.pass_context
def query(ctx, predicate, profile):
    """Names of robots matching a has()/and/or/not feature predicate."""
    body = _service(ctx).call(ctx, "POST", "/query",
                              json={"predicate": predicate, "profile": profile})
    for name in body["names"]:
        click.echo(name)


@main.command()
@click.argument("format_", metavar="FORMAT",
                type=click.Choice(["dot", "json", "urdf"]))
@click.argument("name")
@click.option("--link-map", metavar="PATH",
              help="JSON object mapping node ids to URDF link names.")
@click.option("-o", "--out", metavar="PATH", help="Write here instead of stdout.")
@click.pass_context
def export(ctx, format_, name, link_map, out):
    """Render one robot as dot, canonical JSON, or a URDF annotation."""
    request = {"name": name, "format": format_}
    if link_map:
        mapping = _read_json(ctx, link_map)
        if not isinstance(mapping, dict):
            click.echo("error: link map must be a JSON object", err=True)
            ctx.exit(EXIT_USAGE)
        request["link_map"] = mapping
    elif format_ == "urdf":
        click.echo("error: urdf export needs --link-map", err=True)
        ctx.exit(EXIT_USAGE)
    body = _service(ctx).call(ctx, "POST", "/export", json=request)
    _write_output(body["content"], out)


@main.command()
@click.option("--split", type=click.Choice(["TS", "VS"]), default=None)
@click.pass_context
def robots(ctx, split):
    """List dataset robots as CSV."""
    params = {"split": split} if split else {}
    body = _service(ctx).call(ctx, "GET", "/robots", params=params)
    click.echo("name,split,transform_variant,nodes,edges")
    for row in body:
        variant = row["transform_variant"] or ""
        click.echo(f"{row['name']},{row['split']},{variant},"
                   f"{row['node_count']},{row['edge_count']}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8472, show_default=True)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP service (needs uvicorn installed)."""
    try:
        import uvicorn
    except ImportError:
        click.echo("error: uvicorn is not installed (pip install metamorph[dev])",
                   err=True)
        ctx.exit(EXIT_USAGE)
    options = ctx.obj
    from .dataset import ingest
    from .resources import default_dataset, default_taxonomy
    from .service import create_app
    from .taxonomy import load_taxonomy

    try:
        tax = (
            load_taxonomy(options["taxonomy"], rules_source=options["rules"])
            if options["taxonomy"]
            else default_taxonomy()
        )
        data = ingest(tax, options["dataset"]) if options["dataset"] else default_dataset(tax)
    except MetamorphError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_USAGE)
    uvicorn.run(create_app(taxonomy=tax, dataset=data), host=host, port=port)


if __name__ == "__main__":
    main(prog_name="metamorph")
