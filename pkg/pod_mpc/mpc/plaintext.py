"""Plaintext reference evaluation of circuits."""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..core.field import to_signed
from ..errors import InvalidParameters
from .circuit import Circuit, GateOp
from .gadgets import public_argmax
from .noise import encode_noise, sample_laplace
from .public_maps import get_public_map

logger = logging.getLogger(__name__)


def evaluate_plaintext(circuit: Circuit, inputs: Dict[int, Sequence[int]],
                       noise: Optional[Sequence[Sequence[int]]] = None,
                       rng: Optional[np.random.Generator] = None) -> List[List[int]]:
    """
    Evaluate ``circuit`` in the clear.

    Args:
        circuit: Circuit to evaluate
        inputs: Full input vector per source id (split across that source's input gates in order)
        noise: Signed fixed-point noise per noise gate; drawn from ``rng`` when omitted
        rng: Generator for Laplace noise when ``noise`` is not given

    Returns:
        Values of each output gate, as field elements

    Trunc gates floor exactly; the secure gadget may round up by one unit.
    """
    P = circuit.modulus
    params = circuit.fixed_point
    rng = rng or np.random.default_rng(0)
    noise_iter = iter(noise) if noise is not None else None
    offsets: Dict[int, int] = {}
    wires: List[List[int]] = []
    outputs: List[List[int]] = []

    for idx, gate in enumerate(circuit.gates):
        ops = [wires[a] for a in gate.args]
        p = gate.params
        op = gate.op
        if op == GateOp.INPUT:
            src, width = int(p["source"]), int(p["width"])
            start = offsets.get(src, 0)
            data = list(inputs[src])[start:start + width]
            if len(data) != width:
                raise InvalidParameters(f"Source {src} provides too few inputs for gate {idx}")
            offsets[src] = start + width
            out = [v % P for v in data]
        elif op == GateOp.CONST:
            out = [v % P for v in p["values"]]
        elif op == GateOp.ADD:
            out = [(a + b) % P for a, b in zip(*ops)]
        elif op == GateOp.SUB:
            out = [(a - b) % P for a, b in zip(*ops)]
        elif op == GateOp.MUL_PUBLIC:
            out = [(a * p["value"]) % P for a in ops[0]]
        elif op == GateOp.MUL:
            out = [(a * b) % P for a, b in zip(*ops)]
        elif op == GateOp.TRUNC:
            out = [(to_signed(a, P) >> params.f) % P for a in ops[0]]
        elif op == GateOp.CMP_GT_ZERO:
            out = [1 if to_signed(a, P) > 0 else 0 for a in ops[0]]
        elif op == GateOp.NOISE_INPUT:
            width = int(p.get("width", 1))
            if noise_iter is not None:
                values = list(next(noise_iter))
            else:
                values = encode_noise(sample_laplace(float(p["scale"]), width, rng), params)
            if len(values) != width:
                raise InvalidParameters(f"Noise for gate {idx} has {len(values)} values, needs {width}")
            out = [v % P for v in values]
        elif op in (GateOp.OPEN, GateOp.OUTPUT):
            out = list(ops[0])
        elif op == GateOp.SUM:
            out = [sum(ops[0]) % P]
        elif op == GateOp.SLICE:
            out = ops[0][int(p["start"]):int(p["stop"])]
        elif op == GateOp.CONCAT:
            out = [v for w in ops for v in w]
        elif op == GateOp.SELECT_PUBLIC:
            vector, index = ops
            out = [vector[to_signed(index[0], P) % len(vector)]]
        elif op == GateOp.MATVEC_PUBLIC:
            out = [sum(m * x for m, x in zip(row, ops[0])) % P for row in p["matrix"]]
        elif op == GateOp.PUBLIC_MAP:
            out = [v % P for v in get_public_map(p["fn"])(circuit, ops, p)]
        elif op == GateOp.ARGMAX:
            out = [public_argmax(ops[0], P)]
        else:
            raise InvalidParameters(f"Unsupported gate {op}")
        wires.append(out)
        if op == GateOp.OUTPUT:
            outputs.append(out)
    return outputs
