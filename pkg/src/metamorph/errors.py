"""Exception types shared across the package.

Every error raised by metamorph derives from :class:`MetamorphError`, so
callers can install a single safety net around library calls.  Parse-type
errors carry enough position information to point a user at the offending
line of an input file.
"""

from __future__ import annotations


class MetamorphError(Exception):
    """Base class for all errors raised by this package."""


# --- input parsing ----------------------------------------------------------


class ParseError(MetamorphError):
    """Malformed input document (JSON, Turtle, CSV, predicate string)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{message}{where}")


class PredicateParseError(ParseError):
    """Query predicate string could not be parsed."""


# --- taxonomy ---------------------------------------------------------------


class CycleError(MetamorphError):
    """The parent relation contains a cycle."""


class DanglingParentError(MetamorphError):
    """A concept names a parent id that does not exist."""


class DuplicateIdError(MetamorphError):
    """Two concepts share the same id."""


class UnknownConceptError(MetamorphError):
    """A concept id is not present in the taxonomy."""


class DifferentKindError(MetamorphError):
    """Two concepts do not share a kind root, so they cannot be compared."""


class WrongKindError(MetamorphError):
    """A concept of the wrong kind was supplied (e.g. a descriptor where a
    subdivision is required)."""


# --- morphology -------------------------------------------------------------


class InvalidMorphologyError(MetamorphError):
    """A structurally broken morphology object (duplicate node ids, dangling
    edge endpoints) that cannot even be validated meaningfully."""


class NoRootError(MetamorphError):
    """Multiplicity expansion could not determine a unique branch root."""


class NotATreeError(MetamorphError):
    """Multiplicity expansion needs a tree-shaped graph; replicating a branch
    that participates in a cycle is not well defined."""


class UnknownNodeError(MetamorphError):
    """A node id referenced by a link map or edge does not exist."""


# --- dataset ----------------------------------------------------------------


class ValidationFailedError(MetamorphError):
    """Dataset ingestion refused records with validation errors."""

    def __init__(self, message: str, reports=None):
        self.reports = reports or {}
        super().__init__(message)


class DuplicateNameError(MetamorphError):
    """Two dataset records share a name."""


class EmptyDatasetError(MetamorphError):
    """An operation that needs records was given an empty dataset."""


class EmptySelectionError(MetamorphError):
    """A split/filter selected no records."""


class UnknownFeatureError(MetamorphError):
    """A query predicate references a feature token that is neither a
    taxonomy concept nor present in the dataset vocabulary."""


class KTooLargeError(MetamorphError):
    """Nearest-neighbour query asked for more neighbours than records exist."""


class DuplicateLinkError(MetamorphError):
    """A link map assigns two morphology nodes to the same robot link."""
