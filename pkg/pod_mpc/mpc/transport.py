"""
Frame delivery between players and from clients to players.

Sessions talk to an abstract ``SessionChannel``. ``PlayerNode`` provides a
TCP-backed channel; ``MemoryNetwork`` delivers the same encoded frames
through asyncio queues so tests and single-process runs count identical
bytes without sockets.
"""

import asyncio
import logging
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

from ..errors import PeerDisconnected, PodMpcError, SessionAborted
from .wire import Frame, MessageType, SenderRole, decode_frame, frame_job_id, frame_sender

logger = logging.getLogger(__name__)

SenderKey = Tuple[SenderRole, int]


class Mailbox:
    """Per-job inbound frames, one ordered queue per sender."""

    def __init__(self, job_id: str):
        self.job_id = job_id
        self._queues: Dict[SenderKey, asyncio.Queue] = {}
        self.failure: Optional[PodMpcError] = None

    def _queue(self, key: SenderKey) -> asyncio.Queue:
        if key not in self._queues:
            self._queues[key] = asyncio.Queue()
        return self._queues[key]

    def deliver(self, frame: Frame) -> None:
        if frame.type == MessageType.ABORT:
            data = frame.json()
            self.fail(SessionAborted(
                f"Party {data.get('party')} aborted job {self.job_id}: {data.get('message', '')}",
                remote_code=data.get("code"),
            ))
            return
        self._queue(frame_sender(frame)).put_nowait(frame)

    def fail(self, error: PodMpcError) -> None:
        if self.failure is None:
            self.failure = error
        for queue in self._queues.values():
            queue.put_nowait(None)

    async def receive(self, role: SenderRole, sender: int, timeout: Optional[float] = None) -> Frame:
        if self.failure is not None:
            raise self.failure
        try:
            frame = await asyncio.wait_for(self._queue((role, sender)).get(), timeout)
        except asyncio.TimeoutError:
            raise PeerDisconnected(
                f"No frame from {role.name.lower()} {sender} within {timeout}s on job {self.job_id}"
            )
        if frame is None:
            raise self.failure
        return frame


class SessionChannel(ABC):
    """One party's view of a job's data plane."""

    @abstractmethod
    async def send(self, peer: int, data: bytes) -> None:
        """Send one encoded frame to a peer player."""

    @abstractmethod
    async def receive(self, role: SenderRole, sender: int, timeout: Optional[float] = None) -> Frame:
        """Next frame from a peer player or a client."""

    async def abort(self, peer: int, data: bytes) -> None:
        """Best-effort ABORT delivery; never raises."""
        try:
            await self.send(peer, data)
        except Exception as e:
            logger.debug(f"Could not deliver ABORT to party {peer}: {e}")

    async def close(self) -> None:
        """Release per-job resources."""


class ClientLink(ABC):
    """Client-side delivery of HELLO and SHARES frames to the players."""

    @abstractmethod
    async def send(self, player: int, data: bytes) -> None:
        pass

    async def close(self) -> None:
        pass


class MemoryNetwork:
    """In-process delivery of encoded frames keyed by (job_id, party)."""

    def __init__(self):
        self._mailboxes: Dict[Tuple[str, int], Mailbox] = {}

    def mailbox(self, job_id: str, party: int) -> Mailbox:
        key = (job_id, party)
        if key not in self._mailboxes:
            self._mailboxes[key] = Mailbox(job_id)
        return self._mailboxes[key]

    def deliver(self, party: int, data: bytes) -> None:
        frame = decode_frame(data)
        self.mailbox(frame_job_id(frame), party).deliver(frame)

    def channel(self, job_id: str, party: int) -> "MemoryChannel":
        return MemoryChannel(self, job_id, party)

    def client_link(self) -> "MemoryClientLink":
        return MemoryClientLink(self)

    def forget(self, job_id: str) -> None:
        for key in [k for k in self._mailboxes if k[0] == job_id]:
            del self._mailboxes[key]


class MemoryChannel(SessionChannel):

    def __init__(self, network: MemoryNetwork, job_id: str, party: int):
        self.network = network
        self.job_id = job_id
        self.party = party

    async def send(self, peer: int, data: bytes) -> None:
        self.network.deliver(peer, data)
        await asyncio.sleep(0)

    async def receive(self, role: SenderRole, sender: int, timeout: Optional[float] = None) -> Frame:
        return await self.network.mailbox(self.job_id, self.party).receive(role, sender, timeout)


class MemoryClientLink(ClientLink):

    def __init__(self, network: MemoryNetwork):
        self.network = network

    async def send(self, player: int, data: bytes) -> None:
        self.network.deliver(player, data)
        await asyncio.sleep(0)
