"""
Player-side evaluation of a circuit.

A ``PlayerSession`` is one party's execution of one job. Gates start in index
order as soon as their operands are ready and run until they need the
network; all outstanding exchanges then travel as a single frame per peer.
"""

import asyncio
import heapq
import logging
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Generator, List, Optional, Tuple

from pydantic import BaseModel, Field

from ..core.dealer import PartyMaterial
from ..core.field import FieldElement, to_signed
from ..core.sharing import SharingScheme
from ..errors import (CircuitHashMismatch, ClientTimeout, InvalidParameters, PeerDisconnected,
                      PodMpcError, SessionAborted)
from . import gadgets
from .circuit import Circuit, CompareMode, GateOp
from .gadgets import Exchange, ExchangeKind, GadgetContext
from .metrics import PartyMetrics
from .noise import NoiseSampler, derive_seed
from .protocols import ProtocolClass
from .public_maps import get_public_map
from .transport import SessionChannel
from .wire import FRAME_HEADER, Frame, MessageType, SenderRole, decode_shares, encode_control, encode_shares

logger = logging.getLogger(__name__)


class SessionMode(str, Enum):
    DIRECT = "direct"
    DELEGATED = "delegated"


@dataclass
class Wire:
    values: List[int]
    public: bool


class ClientHandshake(BaseModel):
    """Metadata a client announces before injecting shares."""
    client_id: int
    circuit_hash: str
    provider: Optional[str] = None
    public_key: Optional[str] = None
    allowed_protocols: List[str] = Field(default_factory=list)


def noise_seed(seed: int, job_id: str, party_id: int) -> int:
    return derive_seed(seed, job_id, party_id, "noise")


def share_seed(seed: int, job_id: str, party_id: int) -> int:
    return derive_seed(seed, job_id, party_id, "shares")


def frame_size(frame: Frame) -> int:
    return FRAME_HEADER.size + len(frame.payload)


class PlayerSession:
    """
    One party's run of one job.

    Args:
        job_id: Job identifier shared by every party and client
        party_id: This player's index in [0, p)
        circuit: Circuit to evaluate
        scheme: Sharing scheme of the job
        channel: Data-plane channel for this (job, party)
        protocol: Negotiated protocol class; placeholders are rejected
        material: This party's correlated randomness
        seed: Job seed; share and noise randomness derive from it
        inputs: Direct mode only, this party's input vector per source id
        clients: Delegated mode only, the source ids expected to inject shares
        client_timeout: Seconds to wait for every client's shares
        round_timeout: Seconds to wait for any single peer frame
    """

    def __init__(self, job_id: str, party_id: int, circuit: Circuit, scheme: SharingScheme,
                 channel: SessionChannel, protocol: Optional[ProtocolClass] = None,
                 material: Optional[PartyMaterial] = None, seed: int = 0,
                 inputs: Optional[Dict[int, List[int]]] = None,
                 clients: Optional[List[int]] = None,
                 client_timeout: float = 30.0, round_timeout: Optional[float] = 60.0):
        if not 0 <= party_id < scheme.parties:
            raise InvalidParameters(f"Party {party_id} outside a {scheme.parties}-party scheme")
        self.job_id = job_id
        self.party_id = party_id
        self.circuit = circuit
        self.scheme = scheme
        self.channel = channel
        self.protocol = protocol
        self.seed = seed
        self.mode = SessionMode.DELEGATED if clients is not None else SessionMode.DIRECT
        self.inputs = {int(k): list(v) for k, v in (inputs or {}).items()}
        self.clients = sorted(clients) if clients is not None else []
        self.client_timeout = client_timeout
        self.round_timeout = round_timeout
        self.peers = [q for q in range(scheme.parties) if q != party_id]
        self.circuit_hash = circuit.circuit_hash()
        self.ctx = GadgetContext(
            party_id=party_id,
            scheme=scheme,
            modulus=circuit.modulus,
            params=circuit.fixed_point,
            material=material,
            share_rng=random.Random(share_seed(seed, job_id, party_id)),
            noise_sampler=NoiseSampler(noise_seed(seed, job_id, party_id), scheme.parties),
        )
        self.client_handshakes: Dict[int, ClientHandshake] = {}
        self._client_inputs: Dict[int, List[int]] = {}
        self._client_frames: Dict[int, Frame] = {}
        self._input_offsets = self._compute_input_offsets()
        self.outputs_by_gate: Dict[int, List[int]] = {}
        self.metrics = PartyMetrics(party_id=party_id)
        self._seq = 0
        self._t_start: Optional[float] = None
        self._t_comp: Optional[float] = None
        self._prepared = False

    @property
    def modulus(self) -> int:
        return self.circuit.modulus

    @property
    def noise_contributions(self) -> List[List[int]]:
        """Signed fixed-point noise this party contributed, per noise gate."""
        return self.ctx.noise_log

    def _compute_input_offsets(self) -> Dict[int, int]:
        offsets: Dict[int, int] = {}
        cursor: Dict[int, int] = {}
        for idx in self.circuit.input_gates():
            gate = self.circuit.gates[idx]
            src = int(gate.params["source"])
            offsets[idx] = cursor.get(src, 0)
            cursor[src] = offsets[idx] + int(gate.params["width"])
        return offsets

    # Lifecycle

    async def evaluate(self) -> Tuple[List[FieldElement], PartyMetrics]:
        """
        Run the whole session: handshakes, client collection, gates.

        Returns:
            The opened outputs (concatenated in output-gate order) and this
            party's metrics

        Raises:
            ProtocolNotExecutable: Placeholder protocol class
            CircuitHashMismatch: A peer or client holds a different circuit
            PoolExhausted: Correlated randomness ran out
            PeerDisconnected: A peer went away or stopped answering
            ClientTimeout: Delegated mode, a client never injected
            SessionAborted: A peer aborted
        """
        await self.prepare()
        outputs = await self.run()
        return [FieldElement(v, self.modulus) for out in outputs for v in out], self.metrics

    async def prepare(self) -> None:
        """Connect to peers and, in delegated mode, collect every client's shares."""
        self._t_start = time.perf_counter()
        try:
            if self.protocol is not None:
                self.protocol.scheme(self.scheme.parties)
            self._validate_direct_inputs()
            await self._handshake_peers()
            if self.mode == SessionMode.DELEGATED:
                await self._collect_clients()
        except PodMpcError as e:
            await self._abort(e)
            raise
        self._prepared = True

    async def run(self) -> List[List[int]]:
        """Evaluate every gate; returns the opened values of each output gate."""
        if not self._prepared:
            raise InvalidParameters("Session must be prepared before it runs")
        self._t_comp = time.perf_counter()
        try:
            self._decode_client_inputs()
            await self._run_gates()
        except PodMpcError as e:
            await self._abort(e)
            raise
        end = time.perf_counter()
        self.metrics.full_time = end - self._t_start
        self.metrics.comp_time = end - self._t_comp
        logger.info(
            f"Job {self.job_id} party {self.party_id}: {self.metrics.rounds} rounds, "
            f"{self.metrics.bytes_sent} bytes sent, comp {self.metrics.comp_time:.3f}s"
        )
        return [self.outputs_by_gate[i] for i in self.circuit.output_gates()]

    async def abort(self, error: PodMpcError) -> None:
        """Tell every peer this session failed."""
        await self._abort(error)

    async def _abort(self, error: PodMpcError) -> None:
        if isinstance(error, SessionAborted):
            return
        logger.error(f"Job {self.job_id} party {self.party_id} aborting: {error}")
        frame = encode_control(MessageType.ABORT, {
            "job_id": self.job_id, "role": "party", "party": self.party_id,
            "code": error.code, "message": error.message,
        })
        for q in self.peers:
            await self.channel.abort(q, frame)

    def _validate_direct_inputs(self) -> None:
        if self.mode != SessionMode.DIRECT:
            return
        widths = self.circuit.input_widths()
        for src, width in widths.items():
            if not 0 <= src < self.scheme.parties:
                raise InvalidParameters(f"Direct mode input source {src} is not a player")
            if src == self.party_id and len(self.inputs.get(src, [])) != width:
                raise InvalidParameters(
                    f"Party {self.party_id} holds {len(self.inputs.get(src, []))} inputs, circuit needs {width}"
                )

    async def _handshake_peers(self) -> None:
        hello = encode_control(MessageType.HELLO, {
            "job_id": self.job_id, "role": "party", "party": self.party_id,
            "circuit_hash": self.circuit_hash, "scheme": self.scheme.to_dict(),
        })
        for q in self.peers:
            await self.channel.send(q, hello)
            self.metrics.bytes_sent += len(hello)
        for q in self.peers:
            frame = await self.channel.receive(SenderRole.PARTY, q, self.round_timeout)
            if frame.type != MessageType.HELLO:
                raise PeerDisconnected(f"Expected HELLO from party {q}, got {frame.type.name}")
            data = frame.json()
            if data.get("circuit_hash") != self.circuit_hash:
                raise CircuitHashMismatch(
                    f"Party {q} announced circuit {str(data.get('circuit_hash'))[:12]}, "
                    f"local is {self.circuit_hash[:12]}"
                )
        logger.debug(f"Job {self.job_id} party {self.party_id}: handshakes complete")

    async def _collect_clients(self) -> None:
        pending = set(self.clients)

        async def collect(client: int) -> None:
            hello = await self.channel.receive(SenderRole.CLIENT, client)
            if hello.type != MessageType.HELLO:
                raise PeerDisconnected(f"Expected HELLO from client {client}, got {hello.type.name}")
            handshake = ClientHandshake.model_validate(
                {k: v for k, v in hello.json().items() if k in ClientHandshake.model_fields}
                | {"client_id": client}
            )
            if handshake.circuit_hash != self.circuit_hash:
                raise CircuitHashMismatch(f"Client {client} injected for a different circuit")
            shares = await self.channel.receive(SenderRole.CLIENT, client)
            if shares.type != MessageType.SHARES:
                raise PeerDisconnected(f"Expected SHARES from client {client}, got {shares.type.name}")
            self.client_handshakes[client] = handshake
            self._client_frames[client] = shares
            self.metrics.client_bytes_received += frame_size(hello) + frame_size(shares)
            pending.discard(client)

        try:
            await asyncio.wait_for(asyncio.gather(*(collect(c) for c in self.clients)),
                                   self.client_timeout)
        except asyncio.TimeoutError:
            raise ClientTimeout(
                f"Job {self.job_id}: clients {sorted(pending)} did not inject within {self.client_timeout}s"
            )
        logger.debug(f"Job {self.job_id} party {self.party_id}: collected {len(self.clients)} clients")

    def _decode_client_inputs(self) -> None:
        widths = self.circuit.input_widths()
        for client, frame in self._client_frames.items():
            payload = decode_shares(frame.payload, self.modulus)
            if len(payload.elements) != widths.get(client, 0):
                raise InvalidParameters(
                    f"Client {client} injected {len(payload.elements)} shares, circuit expects {widths.get(client, 0)}"
                )
            self._client_inputs[client] = payload.elements
        missing = set(widths) - set(self._client_inputs)
        if self.mode == SessionMode.DELEGATED and missing:
            raise InvalidParameters(f"No client registered for input sources {sorted(missing)}")

    # Scheduling

    async def _run_gates(self) -> None:
        gates = self.circuit.gates
        wires: List[Optional[Wire]] = [None] * len(gates)
        waiting = [len(set(g.args)) for g in gates]
        dependents: Dict[int, List[int]] = {}
        for idx, gate in enumerate(gates):
            for a in set(gate.args):
                dependents.setdefault(a, []).append(idx)
        ready = [i for i, n in enumerate(waiting) if n == 0]
        heapq.heapify(ready)
        active: Dict[int, Tuple[Generator, List[Exchange]]] = {}

        def finish(idx: int, wire: Wire) -> None:
            wires[idx] = wire
            if gates[idx].op == GateOp.OUTPUT:
                self.outputs_by_gate[idx] = list(wire.values)
            for d in dependents.get(idx, []):
                waiting[d] -= 1
                if waiting[d] == 0:
                    heapq.heappush(ready, d)

        def advance(idx: int, program: Generator, value: Any) -> None:
            try:
                request = program.send(value)
            except StopIteration as stop:
                finish(idx, stop.value)
                return
            active[idx] = (program, request)

        def start_ready() -> None:
            while ready:
                idx = heapq.heappop(ready)
                program = self._gate_program(idx, [wires[a] for a in gates[idx].args])
                advance(idx, program, None)

        start_ready()
        while active:
            batch = sorted(active.items())
            active.clear()
            flat = [ex for _, (_, requests) in batch for ex in requests]
            results = await self._exchange_round(flat)
            pos = 0
            for idx, (program, requests) in batch:
                chunk = results[pos:pos + len(requests)]
                pos += len(requests)
                advance(idx, program, chunk)
            start_ready()

        unfinished = [i for i, w in enumerate(wires) if w is None]
        if unfinished:
            raise InvalidParameters(f"Gates {unfinished[:5]} never became ready")

    async def run_gadget(self, gadget: Generator) -> Any:
        """Drive a single gadget to completion over the network (after ``prepare``)."""
        value = None
        while True:
            try:
                request = gadget.send(value)
            except StopIteration as stop:
                return stop.value
            value = await self._exchange_round(request)

    async def _exchange_round(self, exchanges: List[Exchange]) -> List[Dict[int, List[int]]]:
        self._seq += 1
        kinds = {ex.kind for ex in exchanges}
        if kinds <= {ExchangeKind.OPEN, ExchangeKind.BEAVER}:
            msg_type = MessageType.OPEN
        elif kinds == {ExchangeKind.NOISE}:
            msg_type = MessageType.NOISE
        else:
            msg_type = MessageType.SHARES

        for q in self.peers:
            elements = [v for ex in exchanges for v in ex.sends.get(q, [])]
            frame = encode_shares(msg_type, self.job_id, SenderRole.PARTY, self.party_id,
                                  self._seq, elements, self.modulus)
            await self.channel.send(q, frame)
            self.metrics.bytes_sent += len(frame)

        results: List[Dict[int, List[int]]] = [{} for _ in exchanges]
        for q in self.peers:
            frame = await self.channel.receive(SenderRole.PARTY, q, self.round_timeout)
            if frame.type not in (MessageType.SHARES, MessageType.OPEN, MessageType.NOISE):
                raise PeerDisconnected(f"Unexpected {frame.type.name} from party {q} mid-computation")
            payload = decode_shares(frame.payload, self.modulus)
            if payload.seq != self._seq:
                raise PeerDisconnected(f"Party {q} sent round {payload.seq}, expected {self._seq}")
            counts = [ex.expect.get(q, 0) for ex in exchanges]
            if sum(counts) != len(payload.elements):
                raise PeerDisconnected(
                    f"Party {q} sent {len(payload.elements)} elements in round {self._seq}, expected {sum(counts)}"
                )
            pos = 0
            for i, count in enumerate(counts):
                if count:
                    results[i][q] = payload.elements[pos:pos + count]
                pos += count

        self.metrics.rounds += 1
        if self.peers:
            self.metrics.open_count += sum(len(ex.sends.get(self.peers[0], [])) for ex in exchanges
                                           if ex.kind == ExchangeKind.OPEN)
        logger.debug(f"Job {self.job_id} party {self.party_id}: round {self._seq} "
                     f"{msg_type.name} with {len(exchanges)} exchanges")
        return results

    # Gate semantics

    def _secret(self, wire: Wire) -> List[int]:
        return self.ctx.lift(wire.values) if wire.public else wire.values

    def _gate_program(self, idx: int, ops: List[Wire]) -> Generator:
        ctx = self.ctx
        P = self.modulus
        gate = self.circuit.gates[idx]
        op = gate.op
        params = gate.params

        if op == GateOp.INPUT:
            src, width = int(params["source"]), int(params["width"])
            start = self._input_offsets[idx]
            if self.mode == SessionMode.DELEGATED:
                return Wire(self._client_inputs[src][start:start + width], False)
            values = None
            if src == self.party_id:
                values = self.inputs[src][start:start + width]
            shares = yield from gadgets.share_input(ctx, src, width, values)
            return Wire(shares, False)

        if op == GateOp.CONST:
            return Wire([v % P for v in params["values"]], True)

        if op in (GateOp.ADD, GateOp.SUB):
            a, b = ops
            combine = ctx.add if op == GateOp.ADD else ctx.sub
            if a.public and b.public:
                return Wire(combine(a.values, b.values), True)
            return Wire(combine(self._secret(a), self._secret(b)), False)

        if op == GateOp.MUL_PUBLIC:
            (a,) = ops
            c = params["value"]
            return Wire([(x * c) % P for x in a.values], a.public)

        if op == GateOp.MUL:
            a, b = ops
            if a.public or b.public:
                return Wire([(x * y) % P for x, y in zip(a.values, b.values)], a.public and b.public)
            product = yield from gadgets.secure_multiply(ctx, a.values, b.values)
            return Wire(product, False)

        if op == GateOp.TRUNC:
            (a,) = ops
            if a.public:
                return Wire(gadgets.public_truncate(a.values, ctx.params, P), True)
            return Wire((yield from gadgets.truncate(ctx, a.values)), False)

        if op == GateOp.CMP_GT_ZERO:
            (a,) = ops
            if a.public:
                return Wire([1 if to_signed(v, P) > 0 else 0 for v in a.values], True)
            mode = CompareMode(params.get("mode", CompareMode.MASKED_SIGN.value))
            if mode == CompareMode.MASKED_SIGN:
                return Wire((yield from gadgets.compare_masked_sign(ctx, a.values)), True)
            bits = yield from gadgets.compare_bitwise(ctx, a.values, int(params["bits"]))
            return Wire(bits, False)

        if op == GateOp.NOISE_INPUT:
            noise = yield from gadgets.joint_noise(ctx, float(params["scale"]), int(params.get("width", 1)))
            return Wire(noise, False)

        if op == GateOp.OPEN:
            (a,) = ops
            if a.public:
                return a
            return Wire((yield from gadgets.open_values(ctx, a.values)), True)

        if op == GateOp.OUTPUT:
            return ops[0]

        if op == GateOp.SUM:
            (a,) = ops
            return Wire([sum(a.values) % P], a.public)

        if op == GateOp.SLICE:
            (a,) = ops
            return Wire(a.values[int(params["start"]):int(params["stop"])], a.public)

        if op == GateOp.CONCAT:
            if all(w.public for w in ops):
                return Wire([v for w in ops for v in w.values], True)
            return Wire([v for w in ops for v in self._secret(w)], False)

        if op == GateOp.SELECT_PUBLIC:
            vector, index = ops
            i = to_signed(index.values[0], P) % len(vector.values)
            return Wire([vector.values[i]], vector.public)

        if op == GateOp.MATVEC_PUBLIC:
            (a,) = ops
            return Wire([sum(m * x for m, x in zip(row, a.values)) % P for row in params["matrix"]],
                        a.public)

        if op == GateOp.PUBLIC_MAP:
            fn = get_public_map(params["fn"])
            values = fn(self.circuit, [w.values for w in ops], params)
            if len(values) != int(params["width"]):
                raise InvalidParameters(f"Public map {params['fn']} returned {len(values)} values")
            return Wire([v % P for v in values], True)

        if op == GateOp.ARGMAX:
            (a,) = ops
            if a.public:
                return Wire([gadgets.public_argmax(a.values, P)], True)
            return Wire((yield from gadgets.argmax_tournament(ctx, a.values)), True)

        raise InvalidParameters(f"Unsupported gate {op}")


# Stand-alone primitives over a prepared session

async def secure_mul(x: List[int], y: List[int], session: PlayerSession) -> List[int]:
    """Shares of x*y, elementwise, in one round."""
    return await session.run_gadget(gadgets.secure_multiply(session.ctx, x, y))


async def trunc(x: List[int], session: PlayerSession) -> List[int]:
    """Shares of floor(x / 2^f), possibly one unit too high."""
    return await session.run_gadget(gadgets.truncate(session.ctx, x))


async def compare_gt_zero(x: List[int], session: PlayerSession,
                          mode: CompareMode = CompareMode.MASKED_SIGN,
                          bits: Optional[int] = None) -> List[int]:
    """
    Shares of [x > 0].

    ``masked_sign`` reveals the sign to the players and returns shares of the
    public bit; ``bitwise`` keeps it secret and needs ``bits`` with |x| < 2^(bits-1).
    """
    if mode == CompareMode.MASKED_SIGN:
        public_bits = await session.run_gadget(gadgets.compare_masked_sign(session.ctx, x))
        return session.ctx.lift(public_bits)
    return await session.run_gadget(gadgets.compare_bitwise(session.ctx, x, bits))


async def joint_noise_input(scale: float, session: PlayerSession, width: int = 1) -> List[int]:
    """Shares of Laplace(scale) noise, fixed-point encoded."""
    return await session.run_gadget(gadgets.joint_noise(session.ctx, scale, width))


async def open_shares(x: List[int], session: PlayerSession) -> List[int]:
    return await session.run_gadget(gadgets.open_values(session.ctx, x))
