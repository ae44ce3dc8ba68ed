"""
Exception hierarchy shared by every stage.

UserError subclasses map to exit code 1 in the CLI, InternalError subclasses to
exit code 2.
"""

from __future__ import annotations

from typing import Optional


class EsgError(Exception):
    """Base class for all errors raised by the pipeline."""


class UserError(EsgError):
    exit_code = 1


class InternalError(EsgError):
    exit_code = 2


class ConfigurationError(UserError):
    pass


class EsgFormatError(UserError):
    """A malformed ESG export file."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")


class UnknownEntityError(UserError, LookupError):
    """The term is not part of any equivalence set."""


class UnknownTermError(UserError, LookupError):
    """The term was never interned."""


class UnissuedTermIdError(InternalError, LookupError):
    """A term id that the dictionary never handed out."""


class FixpointError(InternalError):
    pass


class MergeError(InternalError):
    pass
