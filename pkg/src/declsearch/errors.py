"""Exception types shared across the package."""

from __future__ import annotations


class DeclSearchError(Exception):
    """Base class for all package-specific errors."""


class FormatError(DeclSearchError):
    """A corpus or index file is malformed or missing required fields."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc += f" [{path}"
            if line is not None:
                loc += f":{line}"
            loc += "]"
        super().__init__(message + loc)
        self.path = path
        self.line = line


class VersionError(FormatError):
    """A file declares a format version this code does not support."""


class UnknownId(DeclSearchError, KeyError):
    """A group id is not present in the corpus or graph."""

    def __init__(self, group_id: int):
        super().__init__(f"unknown group id: {group_id}")
        self.group_id = group_id


class EmptyQuery(DeclSearchError, ValueError):
    """A search query is empty or whitespace-only."""


class EmptyIndex(DeclSearchError):
    """A vector index contains no entries."""


class EmptyGraph(DeclSearchError):
    """PageRank requested over a graph with no nodes."""


class TooFewEntries(DeclSearchError, ValueError):
    """An ivf index was requested with more cells than entries."""


class IndexMismatch(DeclSearchError):
    """Loaded index artifacts do not agree on the corpus they were built from."""


class GenerationError(DeclSearchError):
    """A text-generation client failed at the transport or protocol level."""


class ParseError(DeclSearchError, ValueError):
    """A ranking line does not conform to the expected grammar."""


class WrongArity(DeclSearchError, ValueError):
    """An engine list has the wrong length for the requested operation."""


class MismatchedEngines(DeclSearchError, ValueError):
    """Per-run statistics do not cover the same engine set."""


class EmptyInput(DeclSearchError, ValueError):
    """A statistics operation received no rankings."""
