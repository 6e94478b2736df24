"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ThreatGraphError(Exception):
    """Base class for all errors raised by this package."""


# graph construction / lookup

class InvalidNodeError(ThreatGraphError):
    """Node violates a structural invariant (empty id, bad id pattern, ...)."""


class DuplicateIdError(ThreatGraphError):
    """A node id was re-added with a conflicting kind, name, or properties."""


class UnknownNodeError(ThreatGraphError):
    """Referenced node id is not present in the graph."""


class UnknownEndpointError(ThreatGraphError):
    """An edge endpoint is not present in the graph."""


class IllegalLayerPairError(ThreatGraphError):
    """Edge connects two layers that are not adjacent in the schema."""


class SelfEdgeError(ThreatGraphError):
    """Edge source and destination are the same node."""


class SealedGraphError(ThreatGraphError):
    """Mutation attempted after the graph was sealed."""


# CPE parsing

class CpeError(ThreatGraphError):
    """Base class for CPE 2.3 parsing errors."""


class MalformedCpeError(CpeError):
    """Not a CPE 2.3 formatted string (wrong prefix or field count)."""


class BadEscapeError(CpeError):
    """Dangling backslash at the end of a field."""


class EmptyFieldError(CpeError):
    """A CPE field is empty."""


class WildcardVendorProductError(CpeError):
    """Vendor or product is a wildcard; no concrete pair to extract."""


# source ingestion

class ParseError(ThreatGraphError):
    """Source document could not be parsed.

    ``offset`` is a byte/character offset where available, ``line`` a
    1-based line number for line-oriented formats.
    """

    def __init__(self, message: str, offset: int | None = None,
                 line: int | None = None):
        super().__init__(message)
        self.offset = offset
        self.line = line

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.offset is not None:
            where.append(f"offset {self.offset}")
        base = super().__str__()
        return f"{base} ({', '.join(where)})" if where else base


class SchemaError(ThreatGraphError):
    """Document parsed but a required field is missing or ill-typed."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ConflictingRecordError(ThreatGraphError):
    """Two source records share an id but disagree on payload."""


# queries

class LimitZeroError(ThreatGraphError):
    """A path enumeration was requested with a limit of zero."""


class NoEntriesError(ThreatGraphError):
    """A statistic was requested over a kind with no connected entries."""


class UnknownProductError(ThreatGraphError):
    """No configuration in the graph matches the vendor/product."""


# service

class BindFailureError(ThreatGraphError):
    """The HTTP service could not bind its address."""
