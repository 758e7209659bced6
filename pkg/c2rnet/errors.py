#!/usr/bin/env python3

"""Exception types raised by c2rnet.

Anything deriving from ValidationError is a problem with the caller's data or
configuration; the command line reports those with exit status 1.  Everything
else is a runtime failure (exit status 2).
"""

__all__ = [
    "C2RNetError",
    "ValidationError",
    "TreeSyntaxError",
    "MissingChild",
    "LeafCountMismatch",
    "NonAdjacentChildren",
    "UnknownRelation",
    "UnknownLabel",
    "CountMismatch",
    "MalformedRecord",
    "InvariantViolation",
    "DimensionMismatch",
    "EmptyDocument",
    "EmptySegment",
    "ShapeMismatch",
    "DocSetMismatch",
    "ConfigurationError",
    "MissingEmbedding",
]


class C2RNetError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(C2RNetError, ValueError):
    pass


class TreeSyntaxError(ValidationError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class MissingChild(TreeSyntaxError):
    pass


class LeafCountMismatch(ValidationError):
    pass


class NonAdjacentChildren(ValidationError):
    pass


class UnknownRelation(ValidationError):
    pass


class UnknownLabel(ValidationError):
    pass


class CountMismatch(ValidationError):
    pass


class MalformedRecord(ValidationError):
    def __init__(self, doc_id: str, field: str, reason: str):
        super().__init__(f"malformed record {doc_id!r}: field {field!r}: {reason}")
        self.doc_id = doc_id
        self.field = field


class InvariantViolation(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class EmptyDocument(ValidationError):
    pass


class EmptySegment(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class DocSetMismatch(ValidationError):
    pass


class ConfigurationError(ValidationError):
    pass


class MissingEmbedding(C2RNetError, KeyError):
    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""
