"""Exception types raised by tuplematch.

Every error the package raises deliberately derives from :class:`TupleMatchError`
so callers (and the CLI) can catch one base class and still tell failure modes
apart by type.
"""

__all__ = [
    "TupleMatchError",
    "SchemaMismatch",
    "EmptyTable",
    "TooFewTables",
    "RemoteUnavailable",
    "DimensionMismatch",
    "TupleTooSmall",
    "TruthOverlap",
    "InvalidParams",
]


class TupleMatchError(Exception):
    """Base class for all tuplematch errors."""


class SchemaMismatch(TupleMatchError):
    """Input tables do not share a single attribute set, or a row is malformed."""


class EmptyTable(TupleMatchError):
    """An input table has a header but no data rows."""


class TooFewTables(TupleMatchError):
    """Matching needs at least two tables."""


class RemoteUnavailable(TupleMatchError):
    """The remote embedding endpoint could not be reached or answered badly."""


class DimensionMismatch(TupleMatchError):
    """An embedding or query vector has the wrong dimensionality."""


class TupleTooSmall(TupleMatchError):
    """A candidate tuple with fewer than two members reached a stage that forbids it."""


class TruthOverlap(TupleMatchError):
    """A ground-truth file lists the same entity in two different tuples."""


class InvalidParams(TupleMatchError):
    """A configuration value is outside its documented range."""
