"""
Frame codec for the player data plane.

A frame is ``[u32 big-endian payload length][u8 message type][payload]``.
Control payloads are canonical JSON; share payloads carry a small binary
header followed by little-endian field elements.
"""

import asyncio
import json
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Dict, List

from ..core.field import decode_elements, encode_elements
from ..errors import PeerDisconnected

FRAME_HEADER = struct.Struct(">IB")
MAX_FRAME = 1 << 30


class MessageType(IntEnum):
    HELLO = 1
    CIRCUIT = 2
    SHARES = 3
    OPEN = 4
    NOISE = 5
    RESULT = 6
    ABORT = 7


DATA_TYPES = {MessageType.SHARES, MessageType.OPEN, MessageType.NOISE}
CONTROL_TYPES = {MessageType.HELLO, MessageType.CIRCUIT, MessageType.RESULT, MessageType.ABORT}


class SenderRole(IntEnum):
    PARTY = 0
    CLIENT = 1


@dataclass
class Frame:
    type: MessageType
    payload: bytes

    def json(self) -> Dict[str, Any]:
        return json.loads(self.payload)


def canonical_json(data: Dict[str, Any]) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":")).encode()


def encode_frame(msg_type: MessageType, payload: bytes) -> bytes:
    return FRAME_HEADER.pack(len(payload), int(msg_type)) + payload


def encode_control(msg_type: MessageType, data: Dict[str, Any]) -> bytes:
    return encode_frame(msg_type, canonical_json(data))


def decode_frame(data: bytes) -> Frame:
    length, msg_type = FRAME_HEADER.unpack_from(data)
    payload = data[FRAME_HEADER.size:]
    if len(payload) != length:
        raise ValueError(f"Frame announces {length} payload bytes, got {len(payload)}")
    return Frame(MessageType(msg_type), payload)


async def read_frame(reader: asyncio.StreamReader) -> Frame:
    """Read one frame; EOF becomes PeerDisconnected."""
    try:
        header = await reader.readexactly(FRAME_HEADER.size)
        length, msg_type = FRAME_HEADER.unpack(header)
        if length > MAX_FRAME:
            raise PeerDisconnected(f"Refusing {length}-byte frame")
        payload = await reader.readexactly(length)
    except (asyncio.IncompleteReadError, ConnectionResetError) as e:
        raise PeerDisconnected(f"Connection closed while reading frame: {e}")
    return Frame(MessageType(msg_type), payload)


_SHARES_HEAD = struct.Struct(">BHII")


@dataclass
class SharesPayload:
    job_id: str
    role: SenderRole
    sender: int
    seq: int
    elements: List[int]


def encode_shares(msg_type: MessageType, job_id: str, role: SenderRole, sender: int,
                  seq: int, elements: List[int], modulus: int) -> bytes:
    job = job_id.encode()
    head = bytes([len(job)]) + job + _SHARES_HEAD.pack(int(role), sender, seq, len(elements))
    return encode_frame(msg_type, head + encode_elements(elements, modulus))


def peek_shares_header(payload: bytes):
    """Return (job_id, role, sender, seq, count, offset) without touching the elements."""
    job_len = payload[0]
    job_id = payload[1:1 + job_len].decode()
    role, sender, seq, count = _SHARES_HEAD.unpack_from(payload, 1 + job_len)
    return job_id, SenderRole(role), sender, seq, count, 1 + job_len + _SHARES_HEAD.size


def decode_shares(payload: bytes, modulus: int) -> SharesPayload:
    job_id, role, sender, seq, count, offset = peek_shares_header(payload)
    elements = decode_elements(payload[offset:], modulus)
    if len(elements) != count:
        raise ValueError(f"Shares frame announces {count} elements, carries {len(elements)}")
    return SharesPayload(job_id, role, sender, seq, elements)


def frame_job_id(frame: Frame) -> str:
    if frame.type in DATA_TYPES:
        return peek_shares_header(frame.payload)[0]
    return str(frame.json().get("job_id", ""))


def frame_sender(frame: Frame):
    """(role, sender id) of a frame."""
    if frame.type in DATA_TYPES:
        _, role, sender, _, _, _ = peek_shares_header(frame.payload)
        return role, sender
    data = frame.json()
    role = SenderRole.CLIENT if data.get("role") == "client" else SenderRole.PARTY
    return role, int(data.get("client" if role == SenderRole.CLIENT else "party", -1))
