"""Exceptions raised by defilab. Every DefilabError maps to CLI exit code 1."""
from typing import Optional


class DefilabError(Exception):
    """Base class for domain errors"""


class FormulaSyntaxError(DefilabError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class NonlinearTermError(FormulaSyntaxError):
    pass


class InvalidModulusError(FormulaSyntaxError):
    pass


class ResourceLimitExceeded(DefilabError):
    def __init__(self, message: str, subformula: Optional[str] = None):
        detail = f"{message} (while eliminating: {subformula})" if subformula else message
        super().__init__(detail)
        self.subformula = subformula


class DimensionMismatchError(DefilabError):
    pass


class WindowError(DefilabError):
    pass


class GridFormatError(DefilabError):
    pass


class GeometryError(DefilabError):
    pass


class PreconditionError(DefilabError):
    pass


class InvalidCertificateError(DefilabError):
    pass


class InsufficientDataError(DefilabError):
    pass


class SymbolicUnavailableError(DefilabError):
    pass


class UnknownExampleError(DefilabError):
    pass
