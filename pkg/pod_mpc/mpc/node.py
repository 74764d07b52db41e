"""
TCP player node and client-side share injection.

A node listens on one port and hosts any number of concurrent sessions,
routing inbound frames to per-job mailboxes. Outbound peer links are
persistent and shared across jobs; each accepted connection gets its own
reader task.
"""

import asyncio
import logging
import random
from collections import OrderedDict
from typing import Awaitable, Callable, Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, Field

from ..core.dealer import PartyMaterial
from ..core.sharing import SharingScheme, share_values
from ..errors import PeerDisconnected, PodMpcError, error_from_dict
from .circuit import Circuit
from .metrics import PartyMetrics
from .protocols import ProtocolClass
from .reconnect import ReconnectionHandler
from .session import PlayerSession
from .transport import ClientLink, Mailbox, SessionChannel
from .wire import (Frame, MessageType, SenderRole, encode_control, encode_shares, frame_job_id,
                   frame_sender, read_frame)

logger = logging.getLogger(__name__)

Address = Tuple[str, int]

# Job ids remembered after their session closed, so late frames are dropped
FORGOTTEN_JOBS = 1024


def parse_address(value: str) -> Address:
    host, _, port = value.rpartition(":")
    return host or "127.0.0.1", int(port)


def format_address(address: Address) -> str:
    return f"{address[0]}:{address[1]}"


class JobSpec(BaseModel):
    """Everything a player needs to run its part of a job."""
    job_id: str
    party_id: int
    scheme: Dict = Field(description="SharingScheme.to_dict()")
    circuit: Circuit
    peers: List[str] = Field(description="host:port of every player, indexed by party id")
    protocol: Optional[ProtocolClass] = None
    seed: int = 0
    inputs: Dict[int, List[int]] = Field(default_factory=dict)
    clients: Optional[List[int]] = None
    material: Optional[PartyMaterial] = None
    client_timeout: float = 30.0
    round_timeout: Optional[float] = 60.0

    @property
    def sharing_scheme(self) -> SharingScheme:
        return SharingScheme.from_dict(self.scheme)


class JobOutcome(BaseModel):
    job_id: str
    party_id: int
    outputs: List[List[int]]
    metrics: PartyMetrics
    noise: List[List[int]] = Field(default_factory=list)


class NodeChannel(SessionChannel):
    """Channel of one session hosted by a PlayerNode."""

    def __init__(self, node: "PlayerNode", job_id: str, peers: List[Address]):
        self.node = node
        self.job_id = job_id
        self.peers = peers

    async def send(self, peer: int, data: bytes) -> None:
        await self.node.send_to(self.peers[peer], data)

    async def receive(self, role: SenderRole, sender: int, timeout: Optional[float] = None) -> Frame:
        return await self.node.mailbox(self.job_id).receive(role, sender, timeout)

    async def close(self) -> None:
        self.node.forget(self.job_id)


class _PeerLink:
    def __init__(self, writer: asyncio.StreamWriter):
        self.writer = writer
        self.lock = asyncio.Lock()


ControlHandler = Callable[[Dict], Awaitable[Dict]]


class PlayerNode:
    """
    Listening player process.

    Args:
        host: Interface to bind
        port: Port to bind (0 picks a free port)
        reconnect: Backoff policy for outbound peer links
        advertise_host: Host peers dial when it differs from the bound interface
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 0,
                 reconnect: Optional[ReconnectionHandler] = None,
                 advertise_host: Optional[str] = None):
        self.host = host
        self.port = port
        self.advertise_host = advertise_host
        self.reconnect = reconnect or ReconnectionHandler()
        self._server: Optional[asyncio.AbstractServer] = None
        self._mailboxes: Dict[str, Mailbox] = {}
        self._links: Dict[Address, _PeerLink] = {}
        self._link_lock = asyncio.Lock()
        self._readers: Set[asyncio.Task] = set()
        self._controls: Set[asyncio.Task] = set()
        self._forgotten: "OrderedDict[str, None]" = OrderedDict()
        self._control_handler: Optional[ControlHandler] = None

    @property
    def address(self) -> Address:
        return self.advertise_host or self.host, self.port

    async def start(self) -> "PlayerNode":
        self._server = await asyncio.start_server(self._accept, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        logger.info(f"Player node listening on {self.host}:{self.port}")
        return self

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
        for link in self._links.values():
            link.writer.close()
        self._links.clear()
        for task in list(self._readers):
            task.cancel()
        await asyncio.gather(*self._readers, return_exceptions=True)
        self._readers.clear()
        if self._server is not None:
            await self._server.wait_closed()
            self._server = None
        logger.info(f"Player node {self.host}:{self.port} stopped")

    async def __aenter__(self) -> "PlayerNode":
        return await self.start()

    async def __aexit__(self, *exc) -> None:
        await self.stop()

    def set_control_handler(self, handler: ControlHandler) -> None:
        """Handler for CIRCUIT control frames; its dict is sent back as RESULT."""
        self._control_handler = handler

    # Inbound

    def mailbox(self, job_id: str) -> Mailbox:
        if job_id not in self._mailboxes:
            self._mailboxes[job_id] = Mailbox(job_id)
        return self._mailboxes[job_id]

    def forget(self, job_id: str) -> None:
        """Drop a finished job's mailbox; frames still in flight for it are ignored."""
        self._mailboxes.pop(job_id, None)
        self._forgotten[job_id] = None
        self._forgotten.move_to_end(job_id)
        while len(self._forgotten) > FORGOTTEN_JOBS:
            self._forgotten.popitem(last=False)

    def hosted_jobs(self) -> List[str]:
        return list(self._mailboxes)

    def _admit(self, frame: Frame, job_id: str) -> bool:
        if job_id not in self._forgotten:
            return True
        # a HELLO opens a new run under a reused job id
        if frame.type == MessageType.HELLO:
            del self._forgotten[job_id]
            return True
        logger.debug(f"Dropping {frame.type.name} for closed job {job_id}")
        return False

    async def _accept(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        task = asyncio.current_task()
        self._readers.add(task)
        party_jobs: Set[str] = set()
        controls: Set[asyncio.Task] = set()
        shutting_down = False
        try:
            while True:
                frame = await read_frame(reader)
                if frame.type == MessageType.CIRCUIT:
                    control = asyncio.create_task(self._serve_control(frame, writer))
                    controls.add(control)
                    self._controls.add(control)
                    control.add_done_callback(controls.discard)
                    control.add_done_callback(self._controls.discard)
                    continue
                job_id = frame_job_id(frame)
                if not self._admit(frame, job_id):
                    continue
                if frame_sender(frame)[0] == SenderRole.PARTY:
                    party_jobs.add(job_id)
                self.mailbox(job_id).deliver(frame)
        except PeerDisconnected:
            for job_id in party_jobs:
                if job_id in self._mailboxes:
                    self._mailboxes[job_id].fail(PeerDisconnected(f"Peer link closed during job {job_id}"))
        except asyncio.CancelledError:
            shutting_down = True
        finally:
            self._readers.discard(task)
            if shutting_down:
                for control in controls:
                    control.cancel()
            await asyncio.gather(*controls, return_exceptions=True)
            writer.close()

    async def _serve_control(self, frame: Frame, writer: asyncio.StreamWriter) -> None:
        data = frame.json()
        try:
            if self._control_handler is None:
                raise PodMpcError("Node accepts no control requests")
            reply = encode_control(MessageType.RESULT, await self._control_handler(data))
        except PodMpcError as e:
            reply = encode_control(MessageType.ABORT, {"job_id": data.get("job_id", ""), **e.to_dict()})
        except Exception as e:
            logger.error(f"Control request failed: {e}")
            reply = encode_control(MessageType.ABORT, {"job_id": data.get("job_id", ""),
                                                       **PodMpcError(str(e)).to_dict()})
        try:
            writer.write(reply)
            await writer.drain()
        except (ConnectionError, OSError) as e:
            logger.warning(f"Could not reply to control request for job {data.get('job_id', '')}: {e}")

    # Outbound

    async def send_to(self, address: Address, data: bytes) -> None:
        link = await self._link(address)
        async with link.lock:
            try:
                link.writer.write(data)
                await link.writer.drain()
            except (ConnectionError, OSError) as e:
                self._links.pop(address, None)
                raise PeerDisconnected(f"Lost link to {format_address(address)}: {e}")

    async def _link(self, address: Address) -> _PeerLink:
        async with self._link_lock:
            if address not in self._links or self._links[address].writer.is_closing():
                _, writer = await self.reconnect.connect(*address)
                self._links[address] = _PeerLink(writer)
            return self._links[address]

    # Jobs

    def open_session(self, spec: JobSpec) -> PlayerSession:
        """Create the session for ``spec`` without starting it."""
        peers = [parse_address(p) for p in spec.peers]
        self._forgotten.pop(spec.job_id, None)
        return PlayerSession(
            job_id=spec.job_id,
            party_id=spec.party_id,
            circuit=spec.circuit,
            scheme=spec.sharing_scheme,
            channel=NodeChannel(self, spec.job_id, peers),
            protocol=spec.protocol,
            material=spec.material,
            seed=spec.seed,
            inputs=spec.inputs,
            clients=spec.clients,
            client_timeout=spec.client_timeout,
            round_timeout=spec.round_timeout,
        )

    async def run_job(self, spec: JobSpec) -> JobOutcome:
        session = self.open_session(spec)
        try:
            await session.prepare()
            outputs = await session.run()
        finally:
            await session.channel.close()
        return JobOutcome(job_id=spec.job_id, party_id=spec.party_id, outputs=outputs,
                          metrics=session.metrics, noise=session.noise_contributions)


async def serve_job_control(node: PlayerNode, data: Dict) -> Dict:
    """Default control handler: run the job described by a CIRCUIT frame."""
    outcome = await node.run_job(JobSpec.model_validate(data))
    return outcome.model_dump(mode="json")


async def request_job(address: Address, spec: JobSpec,
                      reconnect: Optional[ReconnectionHandler] = None) -> JobOutcome:
    """
    Send a CIRCUIT control frame to a node and wait for its RESULT.

    Raises:
        PodMpcError: Rebuilt from the node's ABORT reply
    """
    reader, writer = await (reconnect or ReconnectionHandler()).connect(*address)
    try:
        writer.write(encode_control(MessageType.CIRCUIT, spec.model_dump(mode="json")))
        await writer.drain()
        frame = await read_frame(reader)
    finally:
        writer.close()
    if frame.type == MessageType.ABORT:
        raise error_from_dict(frame.json())
    return JobOutcome.model_validate(frame.json())


class TcpClientLink(ClientLink):
    """One short-lived connection per player."""

    def __init__(self, players: List[Address], reconnect: Optional[ReconnectionHandler] = None):
        self.players = players
        self.reconnect = reconnect or ReconnectionHandler()
        self._writers: Dict[int, asyncio.StreamWriter] = {}

    async def send(self, player: int, data: bytes) -> None:
        if player not in self._writers:
            _, writer = await self.reconnect.connect(*self.players[player])
            self._writers[player] = writer
        writer = self._writers[player]
        writer.write(data)
        await writer.drain()

    async def close(self) -> None:
        for writer in self._writers.values():
            writer.close()
        self._writers.clear()


class ClientInjector:
    """
    A data source injecting secret shares of its inputs into the players.

    Args:
        job_id: Job the shares belong to
        client_id: Input source id the circuit expects
        circuit_hash: Hash announced in the client HELLO
        scheme: Players' sharing scheme
        modulus: Field the circuit runs in
        link: Delivery to the players
        seed: Randomness for the sharing polynomials
        provider: Identity of the data provider behind this client
        public_key: Key the provider signed the task with
        allowed_protocols: Protocol classes the provider accepts
    """

    def __init__(self, job_id: str, client_id: int, circuit_hash: str, scheme: SharingScheme,
                 modulus: int, link: ClientLink, seed: Optional[int] = None,
                 provider: Optional[str] = None, public_key: Optional[str] = None,
                 allowed_protocols: Optional[List[str]] = None):
        self.job_id = job_id
        self.client_id = client_id
        self.circuit_hash = circuit_hash
        self.scheme = scheme
        self.modulus = modulus
        self.link = link
        self.rng = random.Random(seed) if seed is not None else random.SystemRandom()
        self.provider = provider
        self.public_key = public_key
        self.allowed_protocols = allowed_protocols or []
        self.bytes_sent = 0

    def hello(self) -> bytes:
        return encode_control(MessageType.HELLO, {
            "job_id": self.job_id, "role": "client", "client": self.client_id,
            "circuit_hash": self.circuit_hash, "provider": self.provider,
            "public_key": self.public_key, "allowed_protocols": list(self.allowed_protocols),
        })

    async def inject(self, values: List[int]) -> int:
        """Share ``values`` among the players; returns the bytes sent."""
        per_player = share_values([v % self.modulus for v in values], self.scheme, self.rng, self.modulus)
        hello = self.hello()
        try:
            for player, shares in enumerate(per_player):
                frame = encode_shares(MessageType.SHARES, self.job_id, SenderRole.CLIENT,
                                      self.client_id, 0, shares, self.modulus)
                await self.link.send(player, hello)
                await self.link.send(player, frame)
                self.bytes_sent += len(hello) + len(frame)
        finally:
            await self.link.close()
        logger.debug(f"Client {self.client_id} injected {len(values)} values into job {self.job_id}")
        return self.bytes_sent


__all__ = [
    "PlayerNode", "NodeChannel", "JobSpec", "JobOutcome", "ClientInjector", "TcpClientLink",
    "serve_job_control", "request_job", "parse_address", "format_address",
]
