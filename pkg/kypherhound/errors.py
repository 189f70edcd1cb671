"""Exception hierarchy for Kypher Hound.

Every error raised on purpose derives from KypherError and carries the exit
code the CLI reports for it:

    0 success, 1 usage, 2 parse/semantic, 3 I/O, 4 cache corruption
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SEMANTIC = 2
EXIT_IO = 3
EXIT_CORRUPTION = 4


class KypherError(Exception):
    exit_code: int = EXIT_SEMANTIC


class UsageError(KypherError):
    exit_code = EXIT_USAGE


# Data model


class ValueParseError(KypherError):
    """A cell could not be classified as a KGTK value."""

    def __init__(self, message: str, text: str):
        super().__init__(f"{message}: {text!r}")
        self.text = text


class SchemaError(KypherError):
    pass


class EdgeFormatError(KypherError):
    """A row of an edge file is malformed."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = f"{source or '<stream>'}:{line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
        self.source = source


class KgtkIOError(KypherError):
    exit_code = EXIT_IO


# Query language


class KypherSyntaxError(KypherError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class KypherSemanticError(KypherError):
    pass


class UnboundVariableError(KypherSemanticError):
    def __init__(self, variable: str, where: str):
        super().__init__(f"variable '{variable}' used in {where} is not bound by any match or opt clause")
        self.variable = variable


# Planning / execution


class UnknownGraphError(KypherSemanticError):
    def __init__(self, name: str, available: list[str]):
        listing = ", ".join(sorted(available)) or "none"
        super().__init__(f"unknown graph '{name}' (available: {listing})")
        self.name = name
        self.available = sorted(available)


class PlanError(KypherError):
    pass


class ExecutionError(KypherError):
    pass


# Graph cache


class ImportFailedError(KypherError):
    exit_code = EXIT_IO


class StaleSourceError(KypherError):
    exit_code = EXIT_IO

    def __init__(self, name: str, path: str):
        super().__init__(f"source file of graph '{name}' no longer exists: {path}")
        self.name = name
        self.path = path


class GraphNameCollisionError(KypherError):
    exit_code = EXIT_IO


class CacheCorruptionError(KypherError):
    exit_code = EXIT_CORRUPTION


# Harness


class CycleError(KypherError):
    def __init__(self, member: str):
        super().__init__(f"P279 hierarchy contains a cycle through {member}")
        self.member = member


class ResultMismatchError(KypherError):
    """Engine and oracle disagree on a query's result."""

    def __init__(self, query: str, detail: str):
        super().__init__(f"{query}: engine result differs from oracle: {detail}")
        self.query = query
        self.detail = detail
