"""Access to the reference taxonomy and dataset shipped inside the package."""

from __future__ import annotations

from importlib import resources

from .dataset import Dataset, ingest
from .taxonomy import Taxonomy, load_taxonomy


def _data_text(filename: str) -> str:
    return resources.files("metamorph").joinpath("data", filename).read_text(
        encoding="utf-8"
    )


def default_taxonomy() -> Taxonomy:
    return load_taxonomy(_data_text("metamorph.taxonomy.json"))


def default_dataset(taxonomy: Taxonomy | None = None) -> Dataset:
    if taxonomy is None:
        taxonomy = default_taxonomy()
    return ingest(taxonomy, _data_text("metamorph.dataset.json"))
