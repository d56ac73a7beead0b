"""Engine error hierarchy.

Every error carries a stable machine ``code`` so the HTTP layer and the CLI
can map failures without string matching.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine-level failures."""

    code = "EngineError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class MalformedRow(EngineError):
    code = "MalformedRow"

    def __init__(self, line: int, message: str = ""):
        super().__init__(f"line {line}: {message or 'malformed row'}")
        self.line = line


class UnknownCategory(EngineError):
    code = "UnknownCategory"

    def __init__(self, value: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}unknown event category {value!r}")
        self.value = value
        self.line = line


class NegativeDuration(EngineError):
    code = "NegativeDuration"

    def __init__(self, line: int):
        super().__init__(f"line {line}: event ends before it starts")
        self.line = line


class RoleTurnMismatch(EngineError):
    code = "RoleTurnMismatch"


class EmptyCollection(EngineError):
    code = "EmptyCollection"


class EmptyMatrix(EngineError):
    code = "EmptyMatrix"


class EmptyCluster(EngineError):
    code = "EmptyCluster"


class NoPatterns(EngineError):
    code = "NoPatterns"


class KOutOfRange(EngineError):
    code = "KOutOfRange"


class AuthorSetMismatch(EngineError):
    code = "AuthorSetMismatch"


class NTooSmall(EngineError):
    code = "NTooSmall"


class UnknownAuthor(EngineError):
    code = "UnknownAuthor"


class UnknownCluster(EngineError):
    code = "UnknownCluster"


class UnknownDataset(EngineError):
    code = "UnknownDataset"


class UnknownSession(EngineError):
    code = "UnknownSession"


class SchemaVersionMismatch(EngineError):
    code = "SchemaVersionMismatch"


class CorruptFile(EngineError):
    code = "CorruptFile"


class BadConfig(EngineError):
    code = "BadConfig"


class BadEdit(EngineError):
    code = "BadEdit"


class PortInUse(EngineError):
    code = "PortInUse"
