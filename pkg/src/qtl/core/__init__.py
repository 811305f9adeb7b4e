"""Core exceptions, random streams and logging setup.

Scenario schemas live in ``qtl.core.schemas`` and are imported from there
directly, since they depend on the physics layer.
"""

from qtl.core.exceptions import (
    QtlError,
    ConfigurationError,
    EmptyShellError,
    PhysicsError,
    PropagationError,
    StorageError,
    ValidationError,
)
from qtl.core.rng import StreamFactory

__all__ = [
    "QtlError",
    "ConfigurationError",
    "EmptyShellError",
    "PhysicsError",
    "PropagationError",
    "StorageError",
    "ValidationError",
    "StreamFactory",
]
