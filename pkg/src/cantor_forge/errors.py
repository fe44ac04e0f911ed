"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class CantorForgeError(Exception):
    exit_code = 1


class InvalidParameter(CantorForgeError, ValueError):
    exit_code = 2


class SpecParseError(CantorForgeError, ValueError):
    exit_code = 2


class DepthExhausted(CantorForgeError):
    """A refinement or search budget ran out before the result was certified."""

    exit_code = 3

    def __init__(self, message: str, *, required_depth: int | None = None, achieved=None):
        super().__init__(message)
        self.required_depth = required_depth
        self.achieved = achieved


class ConditionViolation(CantorForgeError):
    """A thickness condition (Newhouse or HKY) required by an operation fails."""

    exit_code = 4

    def __init__(self, message: str, *, failing: str | None = None):
        super().__init__(message)
        self.failing = failing


class CertificateInvalid(CantorForgeError):
    exit_code = 5

    def __init__(self, message: str, *, level: int | None = None):
        super().__init__(message)
        self.level = level
