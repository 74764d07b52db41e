"""
Registry of deterministic public functions used by PUBLIC_MAP gates.

Every player evaluates the same function on the same opened values, so the
result stays public and identical across parties.
"""

import importlib
import logging
from typing import Any, Callable, Dict, List

from ..errors import InvalidParameters

logger = logging.getLogger(__name__)

PublicMap = Callable[[Any, List[List[int]], Dict[str, Any]], List[int]]

_REGISTRY: Dict[str, PublicMap] = {}

# Modules that register maps on import
BUILTIN_MAP_MODULES = ("pod_mpc.dp.circuit_builder",)


def register_public_map(name: str) -> Callable[[PublicMap], PublicMap]:
    def decorator(fn: PublicMap) -> PublicMap:
        _REGISTRY[name] = fn
        return fn
    return decorator


def get_public_map(name: str) -> PublicMap:
    if name not in _REGISTRY:
        for module in BUILTIN_MAP_MODULES:
            importlib.import_module(module)
    if name not in _REGISTRY:
        raise InvalidParameters(f"Unknown public map {name!r}")
    return _REGISTRY[name]


@register_public_map("identity")
def _identity(circuit, operands: List[List[int]], params: Dict[str, Any]) -> List[int]:
    return [v for operand in operands for v in operand]
