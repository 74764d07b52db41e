"""
Gate-list intermediate representation of an MPC computation.

A circuit is an ordered list of vector gates. Every gate names earlier gates
as operands, so the list is topologically ordered by construction. Tasks are
shipped as the canonical JSON encoding of the circuit; its SHA-256 is the
circuit hash that data providers sign.
"""

import hashlib
import json
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from ..core.dealer import PreprocessingDemand
from ..core.field import DEFAULT_MODULUS, FixedPointParams
from ..core.sharing import SharingScheme
from ..errors import InvalidParameters


class GateOp(str, Enum):
    INPUT = "input"                  # params: source, width
    CONST = "const"                  # params: values
    ADD = "add"
    SUB = "sub"
    MUL_PUBLIC = "mul_public"        # params: value
    MUL = "mul"
    TRUNC = "trunc"
    CMP_GT_ZERO = "cmp_gt_zero"      # params: mode (masked_sign | bitwise), bits
    NOISE_INPUT = "noise_input"      # params: dist, scale, width
    OPEN = "open"
    OUTPUT = "output"
    SUM = "sum"
    SLICE = "slice"                  # params: start, stop
    CONCAT = "concat"
    SELECT_PUBLIC = "select_public"  # args: vector, public index (taken modulo width)
    MATVEC_PUBLIC = "matvec_public"  # params: matrix (public, signed integers)
    PUBLIC_MAP = "public_map"        # params: fn, width
    ARGMAX = "argmax"                # public index of the first maximum


class CompareMode(str, Enum):
    MASKED_SIGN = "masked_sign"
    BITWISE = "bitwise"


LINEAR_OPS = {GateOp.ADD, GateOp.SUB, GateOp.MUL_PUBLIC, GateOp.SUM, GateOp.SLICE,
              GateOp.CONCAT, GateOp.SELECT_PUBLIC, GateOp.MATVEC_PUBLIC, GateOp.CONST}


class Gate(BaseModel):
    op: GateOp
    args: List[int] = Field(default_factory=list)
    params: Dict[str, Any] = Field(default_factory=dict)


class CostProfile(BaseModel):
    """Static cost of a circuit, independent of the network."""
    gates: int = 0
    scalar_ops: int = 0
    secure_multiplications: int = 0
    comparisons: int = 0
    opened_elements: int = 0
    noise_elements: int = 0
    input_elements: int = 0

    @property
    def player_side_gates(self) -> int:
        """Interactive primitives the players execute: secure multiplications plus masked opens."""
        return self.secure_multiplications + self.opened_elements


def bitlt_combines(bits: int) -> int:
    """Pairwise combines in a log-depth comparison tree over ``bits`` leaves."""
    return max(bits - 1, 0)


def bitlt_levels(bits: int) -> int:
    """Rounds of the log-depth comparison tree over ``bits`` leaves."""
    return max(bits - 1, 0).bit_length()


class Circuit(BaseModel):
    """Serializable, content-addressed gate list."""
    name: str = Field(default="circuit", description="Human-readable circuit name")
    modulus: int = Field(default=DEFAULT_MODULUS, description="Field modulus the circuit runs in")
    fixed_point: FixedPointParams = Field(default_factory=FixedPointParams)
    gates: List[Gate] = Field(default_factory=list)
    context: Dict[str, Any] = Field(default_factory=dict,
                                    description="Public data referenced by PUBLIC_MAP gates")

    @model_validator(mode="after")
    def _check_structure(self) -> "Circuit":
        self.analyze()
        return self

    # Static analysis

    def analyze(self) -> "CircuitShape":
        """Compute wire widths and publicness; raises InvalidParameters on malformed circuits."""
        widths: List[int] = []
        public: List[bool] = []
        needs_masking = False
        for idx, gate in enumerate(self.gates):
            for a in gate.args:
                if not 0 <= a < idx:
                    raise InvalidParameters(f"Gate {idx} ({gate.op.value}) references operand {a} out of order")
            aw = [widths[a] for a in gate.args]
            ap = [public[a] for a in gate.args]
            op = gate.op
            p = gate.params

            def arity(n: int) -> None:
                if len(gate.args) != n:
                    raise InvalidParameters(f"Gate {idx} ({op.value}) expects {n} operands")

            if op == GateOp.INPUT:
                arity(0)
                w, pub = int(p["width"]), False
            elif op == GateOp.CONST:
                arity(0)
                w, pub = len(p["values"]), True
            elif op in (GateOp.ADD, GateOp.SUB, GateOp.MUL):
                arity(2)
                if aw[0] != aw[1]:
                    raise InvalidParameters(f"Gate {idx} ({op.value}) width mismatch {aw[0]} != {aw[1]}")
                w, pub = aw[0], all(ap)
            elif op == GateOp.MUL_PUBLIC:
                arity(1)
                w, pub = aw[0], ap[0]
            elif op == GateOp.TRUNC:
                arity(1)
                needs_masking = True
                w, pub = aw[0], ap[0]
            elif op == GateOp.CMP_GT_ZERO:
                arity(1)
                mode = CompareMode(p.get("mode", CompareMode.MASKED_SIGN.value))
                if mode == CompareMode.BITWISE:
                    if int(p.get("bits", 0)) < 2:
                        raise InvalidParameters(f"Gate {idx} bitwise compare needs bits >= 2")
                    pub = ap[0]
                else:
                    needs_masking = True
                    pub = True
                w = aw[0]
            elif op == GateOp.NOISE_INPUT:
                arity(0)
                if p.get("dist", "laplace") != "laplace":
                    raise InvalidParameters(f"Gate {idx} unknown noise distribution {p.get('dist')}")
                if float(p["scale"]) <= 0:
                    raise InvalidParameters(f"Gate {idx} noise scale must be positive")
                w, pub = int(p.get("width", 1)), False
            elif op == GateOp.OPEN:
                arity(1)
                w, pub = aw[0], True
            elif op == GateOp.OUTPUT:
                arity(1)
                if self.gates[gate.args[0]].op != GateOp.OPEN:
                    raise InvalidParameters(f"Output gate {idx} must follow an Open on the same wire")
                w, pub = aw[0], True
            elif op == GateOp.SUM:
                arity(1)
                w, pub = 1, ap[0]
            elif op == GateOp.SLICE:
                arity(1)
                start, stop = int(p["start"]), int(p["stop"])
                if not 0 <= start < stop <= aw[0]:
                    raise InvalidParameters(f"Gate {idx} slice [{start}:{stop}) outside width {aw[0]}")
                w, pub = stop - start, ap[0]
            elif op == GateOp.CONCAT:
                if not gate.args:
                    raise InvalidParameters(f"Gate {idx} concat needs operands")
                w, pub = sum(aw), all(ap)
            elif op == GateOp.SELECT_PUBLIC:
                arity(2)
                if not ap[1] or aw[1] != 1:
                    raise InvalidParameters(f"Gate {idx} select index must be a public scalar")
                w, pub = 1, ap[0]
            elif op == GateOp.MATVEC_PUBLIC:
                arity(1)
                matrix = p["matrix"]
                if any(len(row) != aw[0] for row in matrix):
                    raise InvalidParameters(f"Gate {idx} matrix columns do not match width {aw[0]}")
                w, pub = len(matrix), ap[0]
            elif op == GateOp.PUBLIC_MAP:
                if not all(ap):
                    raise InvalidParameters(f"Gate {idx} public map over secret operands")
                w, pub = int(p["width"]), True
            elif op == GateOp.ARGMAX:
                arity(1)
                if not ap[0]:
                    needs_masking = True
                w, pub = 1, True
            else:  # pragma: no cover - enum is closed
                raise InvalidParameters(f"Unknown gate op {op}")
            if w < 1:
                raise InvalidParameters(f"Gate {idx} ({op.value}) has empty width")
            widths.append(w)
            public.append(pub)
        if needs_masking:
            self.fixed_point.validate_for(self.modulus)
        return CircuitShape(widths=widths, public=public)

    @property
    def shape(self) -> "CircuitShape":
        return self.analyze()

    # Encoding

    def canonical_json(self) -> bytes:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True,
                          separators=(",", ":")).encode()

    def circuit_hash(self) -> str:
        return hashlib.sha256(self.canonical_json()).hexdigest()

    @classmethod
    def from_json(cls, data: bytes) -> "Circuit":
        return cls.model_validate_json(data)

    # Queries

    def input_widths(self) -> Dict[int, int]:
        """Total input width per source id."""
        out: Dict[int, int] = {}
        for gate in self.gates:
            if gate.op == GateOp.INPUT:
                src = int(gate.params["source"])
                out[src] = out.get(src, 0) + int(gate.params["width"])
        return out

    def input_gates(self, source: Optional[int] = None) -> List[int]:
        return [i for i, g in enumerate(self.gates)
                if g.op == GateOp.INPUT and (source is None or int(g.params["source"]) == source)]

    def output_gates(self) -> List[int]:
        return [i for i, g in enumerate(self.gates) if g.op == GateOp.OUTPUT]

    def noise_gates(self) -> List[int]:
        return [i for i, g in enumerate(self.gates) if g.op == GateOp.NOISE_INPUT]

    def magnitude_bits(self) -> int:
        return int(self.context.get("magnitude_bits", self.fixed_point.k + self.fixed_point.f))

    def demand(self, scheme: SharingScheme) -> PreprocessingDemand:
        """Correlated randomness each party consumes when running under ``scheme``."""
        shape = self.shape
        triples = trunc = squares = 0
        masks: Dict[int, int] = {}
        additive = not scheme.is_shamir
        for gate in self.gates:
            if gate.args and all(shape.public[a] for a in gate.args):
                continue
            w = shape.widths[gate.args[0]] if gate.args else 0
            if gate.op == GateOp.MUL:
                if not any(shape.public[a] for a in gate.args) and additive:
                    triples += w
            elif gate.op == GateOp.TRUNC:
                trunc += w
            elif gate.op == GateOp.CMP_GT_ZERO:
                mode = CompareMode(gate.params.get("mode", CompareMode.MASKED_SIGN.value))
                if mode == CompareMode.MASKED_SIGN:
                    squares += w
                    if additive:
                        triples += w
                else:
                    m = int(gate.params["bits"]) - 1
                    masks[m] = masks.get(m, 0) + w
                    if additive:
                        triples += 2 * bitlt_combines(m) * w
            elif gate.op == GateOp.ARGMAX and not shape.public[gate.args[0]]:
                squares += w - 1
                if additive:
                    triples += w - 1
        return PreprocessingDemand(triples=triples, trunc_pairs=trunc, squares=squares, bit_masks=masks)

    def cost_profile(self) -> CostProfile:
        shape = self.shape
        profile = CostProfile(gates=len(self.gates))
        for idx, gate in enumerate(self.gates):
            w = shape.widths[idx]
            in_w = shape.widths[gate.args[0]] if gate.args else w
            secret_in = bool(gate.args) and not all(shape.public[a] for a in gate.args)
            if gate.op == GateOp.MATVEC_PUBLIC:
                profile.scalar_ops += w * in_w
            else:
                profile.scalar_ops += max(w, in_w)
            if gate.op == GateOp.INPUT:
                profile.input_elements += w
            elif gate.op == GateOp.NOISE_INPUT:
                profile.noise_elements += w
            elif gate.op == GateOp.MUL and not any(shape.public[a] for a in gate.args):
                profile.secure_multiplications += w
            elif gate.op == GateOp.OPEN and secret_in:
                profile.opened_elements += w
            elif gate.op == GateOp.TRUNC and secret_in:
                profile.opened_elements += w
            elif gate.op == GateOp.CMP_GT_ZERO and secret_in:
                profile.comparisons += w
                mode = CompareMode(gate.params.get("mode", CompareMode.MASKED_SIGN.value))
                if mode == CompareMode.MASKED_SIGN:
                    profile.secure_multiplications += w
                else:
                    profile.secure_multiplications += 2 * bitlt_combines(int(gate.params["bits"]) - 1) * w
                profile.opened_elements += w
            elif gate.op == GateOp.ARGMAX and secret_in:
                profile.comparisons += in_w - 1
                profile.secure_multiplications += in_w - 1
                profile.opened_elements += in_w - 1
        return profile

    @staticmethod
    def _gate_rounds(gate: Gate, shape: "CircuitShape", include_inputs: bool) -> int:
        """Exchange rounds a gate's gadget takes once its arguments are ready."""
        if gate.op == GateOp.NOISE_INPUT:
            return 1
        if gate.op == GateOp.INPUT:
            return 1 if include_inputs else 0
        if not gate.args or all(shape.public[a] for a in gate.args):
            return 0
        if gate.op == GateOp.MUL:
            return 0 if any(shape.public[a] for a in gate.args) else 1
        if gate.op in (GateOp.OPEN, GateOp.TRUNC):
            return 1
        if gate.op == GateOp.CMP_GT_ZERO:
            mode = CompareMode(gate.params.get("mode", CompareMode.MASKED_SIGN.value))
            if mode == CompareMode.MASKED_SIGN:
                return 2
            return 1 + bitlt_levels(int(gate.params["bits"]) - 1)
        if gate.op == GateOp.ARGMAX:
            return 2 * bitlt_levels(shape.widths[gate.args[0]])
        return 0

    def multiplicative_depth(self, include_inputs: bool = False) -> int:
        """
        Player-to-player rounds along the longest chain of interactive gates.

        Matches the rounds a delegated run counts. Direct runs also spend one
        round sharing inputs, which ``include_inputs`` adds.
        """
        shape = self.shape
        depth: List[int] = []
        for gate in self.gates:
            base = max((depth[a] for a in gate.args), default=0)
            depth.append(base + self._gate_rounds(gate, shape, include_inputs))
        return max(depth, default=0)


class CircuitShape(BaseModel):
    widths: List[int]
    public: List[bool]


class CircuitBuilder:
    """Fluent helper that appends gates and returns wire indices."""

    def __init__(self, name: str = "circuit", modulus: int = DEFAULT_MODULUS,
                 fixed_point: Optional[FixedPointParams] = None):
        self.name = name
        self.modulus = modulus
        self.fixed_point = fixed_point or FixedPointParams()
        self.gates: List[Gate] = []
        self.context: Dict[str, Any] = {}

    def _add(self, op: GateOp, args: List[int] = None, **params) -> int:
        self.gates.append(Gate(op=op, args=list(args or []), params=params))
        return len(self.gates) - 1

    def input(self, source: int, width: int = 1) -> int:
        return self._add(GateOp.INPUT, source=source, width=width)

    def const(self, values: List[int]) -> int:
        return self._add(GateOp.CONST, values=[v % self.modulus for v in values])

    def add(self, a: int, b: int) -> int:
        return self._add(GateOp.ADD, [a, b])

    def sub(self, a: int, b: int) -> int:
        return self._add(GateOp.SUB, [a, b])

    def mul(self, a: int, b: int) -> int:
        return self._add(GateOp.MUL, [a, b])

    def mul_public(self, a: int, value: int) -> int:
        return self._add(GateOp.MUL_PUBLIC, [a], value=value % self.modulus)

    def trunc(self, a: int) -> int:
        return self._add(GateOp.TRUNC, [a])

    def compare_gt_zero(self, a: int, mode: CompareMode = CompareMode.MASKED_SIGN,
                        bits: Optional[int] = None) -> int:
        params: Dict[str, Any] = {"mode": mode.value}
        if bits is not None:
            params["bits"] = bits
        return self._add(GateOp.CMP_GT_ZERO, [a], **params)

    def noise(self, scale: float, width: int = 1) -> int:
        return self._add(GateOp.NOISE_INPUT, dist="laplace", scale=float(scale), width=width)

    def open(self, a: int) -> int:
        return self._add(GateOp.OPEN, [a])

    def output(self, a: int) -> int:
        if self.gates[a].op != GateOp.OPEN:
            a = self.open(a)
        return self._add(GateOp.OUTPUT, [a])

    def sum(self, a: int) -> int:
        return self._add(GateOp.SUM, [a])

    def slice(self, a: int, start: int, stop: int) -> int:
        return self._add(GateOp.SLICE, [a], start=start, stop=stop)

    def concat(self, *wires: int) -> int:
        return self._add(GateOp.CONCAT, list(wires))

    def select_public(self, vector: int, index: int) -> int:
        return self._add(GateOp.SELECT_PUBLIC, [vector, index])

    def matvec_public(self, a: int, matrix: List[List[int]]) -> int:
        return self._add(GateOp.MATVEC_PUBLIC, [a], matrix=matrix)

    def public_map(self, fn: str, args: List[int], width: int, **params) -> int:
        return self._add(GateOp.PUBLIC_MAP, args, fn=fn, width=width, **params)

    def argmax(self, a: int) -> int:
        return self._add(GateOp.ARGMAX, [a])

    def build(self) -> Circuit:
        return Circuit(name=self.name, modulus=self.modulus, fixed_point=self.fixed_point,
                       gates=self.gates, context=self.context)
