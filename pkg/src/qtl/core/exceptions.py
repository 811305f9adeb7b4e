"""
Custom exceptions for qtl.
Provides a clear hierarchy of errors for the simulation and experiment layers.
"""

from typing import Any, Optional


class QtlError(Exception):
    """Base exception for all qtl errors."""

    def __init__(
        self,
        message: str,
        details: Optional[dict[str, Any]] = None,
        cause: Optional[Exception] = None,
    ):
        super().__init__(message)
        self.message = message
        self.details = details or {}
        self.cause = cause

    def __str__(self) -> str:
        if self.cause:
            return f"{self.message} (caused by: {self.cause})"
        return self.message


class ValidationError(QtlError):
    """Raised when an input violates an operation's preconditions."""

    pass


class EmptyShellError(ValidationError):
    """Raised when an energy shell is requested that has no (A, B) pairs."""

    def __init__(self, energy: int, **kwargs):
        details = kwargs.pop("details", {})
        details["energy"] = energy
        super().__init__(
            f"No energy shell at E={energy}",
            details=details,
            **kwargs,
        )
        self.energy = energy


class ConfigurationError(QtlError):
    """Raised when a scenario or runtime configuration is invalid."""

    def __init__(
        self,
        message: str,
        field_path: Optional[str] = None,
        **kwargs,
    ):
        details = kwargs.pop("details", {})
        details["field_path"] = field_path
        super().__init__(message, details=details, **kwargs)
        self.field_path = field_path

    def __str__(self) -> str:
        text = super().__str__()
        if self.field_path:
            return f"{self.field_path}: {text}"
        return text


class PhysicsError(QtlError):
    """Raised when a requested quantity is physically undefined."""

    pass


class PropagationError(QtlError):
    """Raised when exact propagation fails (eigensolver, norm drift, size cap)."""

    def __init__(
        self,
        message: str,
        scenario_id: Optional[str] = None,
        **kwargs,
    ):
        details = kwargs.pop("details", {})
        details["scenario_id"] = scenario_id
        super().__init__(message, details=details, **kwargs)
        self.scenario_id = scenario_id

    def __str__(self) -> str:
        text = super().__str__()
        if self.scenario_id:
            return f"[{self.scenario_id}] {text}"
        return text


class StorageError(QtlError):
    """Raised when writing or reading result files fails."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        operation: Optional[str] = None,
        **kwargs,
    ):
        details = kwargs.pop("details", {})
        details.update({
            "path": path,
            "operation": operation,
        })
        super().__init__(message, details=details, **kwargs)
        self.path = path
        self.operation = operation
