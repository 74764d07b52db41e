"""Circuit templates for the benchmark and demo workloads."""

import logging
from enum import Enum
from typing import Dict, List, Optional, Sequence

from ..core.field import DEFAULT_MODULUS, M127, FixedPointParams
from ..errors import InvalidParameters
from .circuit import Circuit, CircuitBuilder

logger = logging.getLogger(__name__)


class ElementwiseOp(str, Enum):
    ADD = "add"
    MUL = "mul"


def sum_circuit(sources: Sequence[int], width: int = 1, modulus: int = DEFAULT_MODULUS) -> Circuit:
    """Sum of every source's vector, reduced to a scalar."""
    return elementwise_op_sum_circuit(sources, width, ElementwiseOp.ADD, modulus, name="sum")


def product_circuit(sources: Sequence[int], width: int = 1, modulus: int = DEFAULT_MODULUS) -> Circuit:
    """Elementwise product across sources (p-1 sequential multiplications)."""
    if not sources:
        raise InvalidParameters("product circuit needs at least one source")
    b = CircuitBuilder("product", modulus)
    acc = b.input(sources[0], width)
    for src in sources[1:]:
        acc = b.mul(acc, b.input(src, width))
    b.output(acc)
    return b.build()


def elementwise_op_sum_circuit(sources: Sequence[int], width: int,
                               op: ElementwiseOp = ElementwiseOp.MUL,
                               modulus: int = DEFAULT_MODULUS, name: Optional[str] = None) -> Circuit:
    """
    Combine all sources' arrays elementwise, then sum the result.

    For ``mul`` every element goes through p-1 sequential secure
    multiplications, which is the direct-model multiplication benchmark.
    """
    if not sources:
        raise InvalidParameters("circuit needs at least one source")
    op = ElementwiseOp(op)
    b = CircuitBuilder(name or f"elementwise_{op.value}_sum", modulus)
    inputs = [b.input(src, width) for src in sources]
    acc = inputs[0]
    for wire in inputs[1:]:
        acc = b.mul(acc, wire) if op == ElementwiseOp.MUL else b.add(acc, wire)
    b.output(b.sum(acc))
    return b.build()


def pooled_op_sum_circuit(widths: Dict[int, int], op: ElementwiseOp = ElementwiseOp.ADD,
                          modulus: int = DEFAULT_MODULUS) -> Circuit:
    """
    Delegated-model workload: pool every client's slice into one array.

    The player-side part (op on the pooled array, then a sum) depends only on
    the total width, not on how the data is split across clients.
    """
    if not widths:
        raise InvalidParameters("pooled circuit needs at least one client")
    op = ElementwiseOp(op)
    b = CircuitBuilder(f"pooled_{op.value}_sum", modulus)
    inputs = [b.input(src, w) for src, w in sorted(widths.items())]
    pooled = b.concat(*inputs) if len(inputs) > 1 else inputs[0]
    if op == ElementwiseOp.MUL:
        pooled = b.mul(pooled, pooled)
    b.output(b.sum(pooled))
    return b.build()


def split_evenly(total: int, clients: int) -> List[int]:
    """Widths of ``clients`` slices covering ``total`` elements."""
    if clients < 1 or total < clients:
        raise InvalidParameters(f"Cannot split {total} elements across {clients} clients")
    base, extra = divmod(total, clients)
    return [base + (1 if i < extra else 0) for i in range(clients)]


def average_wage_circuit(sources: Sequence[int], modulus: int = DEFAULT_MODULUS) -> Circuit:
    """
    Opens (sum of wages, number of providers).

    Each provider inputs ``[wage, 1]``; the App divides the opened sum by the
    opened count, so the mean is exact in the encoding the wages were given in.
    """
    if not sources:
        raise InvalidParameters("average wage needs at least one provider")
    b = CircuitBuilder("average_wage", modulus)
    acc = b.input(sources[0], 2)
    for src in sources[1:]:
        acc = b.add(acc, b.input(src, 2))
    b.output(acc)
    return b.build()


def average_wage_fixed_point_circuit(sources: Sequence[int],
                                     params: Optional[FixedPointParams] = None) -> Circuit:
    """
    Mean computed inside the circuit: sum times the public 1/n, truncated.

    Wages are fixed-point encoded with ``f`` fractional bits; runs in M127.
    """
    if not sources:
        raise InvalidParameters("average wage needs at least one provider")
    params = params or FixedPointParams()
    b = CircuitBuilder("average_wage_fixed_point", M127, params)
    acc = b.input(sources[0], 1)
    for src in sources[1:]:
        acc = b.add(acc, b.input(src, 1))
    inv_n = round(params.scale / len(sources))
    b.output(b.trunc(b.mul_public(acc, inv_n)))
    return b.build()


def mean_from_aggregate(opened: Sequence[int]) -> float:
    """Average from the opened ``[sum, count]`` pair."""
    total, count = opened[0], opened[1]
    if count == 0:
        raise InvalidParameters("No providers contributed")
    return total / count
