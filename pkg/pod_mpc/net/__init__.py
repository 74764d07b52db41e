"""HTTP plumbing exports"""

from .http import add_exception_handlers, authenticate, raise_for_error
from .mesh import ServiceMesh

__all__ = [
    "add_exception_handlers",
    "authenticate",
    "raise_for_error",
    "ServiceMesh",
]
