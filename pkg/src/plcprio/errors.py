"""Exception hierarchy shared by all stages of the toolkit."""

from __future__ import annotations


class PlcPrioError(Exception):
    """Base class for every error raised by this package."""


# -- frontend -----------------------------------------------------------------

class StSyntaxError(PlcPrioError):
    def __init__(self, message: str, file: str | None = None,
                 line: int | None = None, col: int | None = None):
        self.message = message
        self.file = file
        self.line = line
        self.col = col
        where = ""
        if file is not None:
            where = f"{file}:"
        if line is not None:
            where += f"{line}:{col}:"
        super().__init__(f"{where} {message}" if where else message)


class MissingTasksConfig(PlcPrioError):
    pass


class UnknownType(PlcPrioError):
    pass


# -- semantic analysis / dependency model -------------------------------------

class SemanticError(PlcPrioError):
    pass


class UnresolvedReference(SemanticError):
    pass


class DuplicateName(SemanticError):
    pass


class TypeMismatch(SemanticError):
    pass


# -- instrumentation / runtime ------------------------------------------------

class ModelProjectMismatch(PlcPrioError):
    pass


class RuntimeFault(PlcPrioError):
    pass


class SaveWithoutReset(PlcPrioError):
    pass


class StepError(PlcPrioError):
    pass


class TraceIOError(PlcPrioError):
    pass


# -- change analysis / prioritization -----------------------------------------

class VersionMismatch(PlcPrioError):
    pass


class TraceDbMismatch(PlcPrioError):
    pass


class ZeroDuration(PlcPrioError):
    pass
