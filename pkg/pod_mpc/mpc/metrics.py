"""Per-party and per-job run metrics."""

import logging
from typing import List

from pydantic import BaseModel, Field, model_validator

logger = logging.getLogger(__name__)


class PartyMetrics(BaseModel):
    """What one player measured for one session."""
    party_id: int
    full_time: float = Field(default=0.0, ge=0, description="Seconds from session start to outputs")
    comp_time: float = Field(default=0.0, ge=0, description="Seconds after every connection was established")
    rounds: int = Field(default=0, ge=0, description="Player-to-player communication rounds")
    bytes_sent: int = Field(default=0, ge=0, description="Bytes sent to other players")
    client_bytes_received: int = Field(default=0, ge=0, description="Bytes received from clients")
    open_count: int = Field(default=0, ge=0, description="Opened field elements")


class RunMetrics(BaseModel):
    """Metrics of one job across all players."""
    full_time: float = Field(ge=0)
    comp_time: float = Field(ge=0)
    rounds: int = Field(ge=0)
    bytes_sent_per_party: List[int] = Field(default_factory=list)
    bytes_global: int = Field(default=0, ge=0)
    client_bytes: int = Field(default=0, ge=0, description="Client-to-player traffic")
    open_count: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_totals(self) -> "RunMetrics":
        if self.comp_time > self.full_time:
            raise ValueError(f"comp_time {self.comp_time} exceeds full_time {self.full_time}")
        if self.bytes_global != sum(self.bytes_sent_per_party):
            raise ValueError("bytes_global must equal the sum of per-party bytes")
        return self

    @classmethod
    def aggregate(cls, parties: List[PartyMetrics], full_time: float = None) -> "RunMetrics":
        """
        Combine the players' own measurements.

        Times are the slowest party's; ``full_time`` may override with a
        wall clock measured by the caller (e.g. including client injection).
        """
        ordered = sorted(parties, key=lambda m: m.party_id)
        comp = max((m.comp_time for m in ordered), default=0.0)
        full = max((m.full_time for m in ordered), default=0.0)
        if full_time is not None:
            full = max(full_time, comp)
        per_party = [m.bytes_sent for m in ordered]
        return cls(
            full_time=full,
            comp_time=comp,
            rounds=max((m.rounds for m in ordered), default=0),
            bytes_sent_per_party=per_party,
            bytes_global=sum(per_party),
            client_bytes=sum(m.client_bytes_received for m in ordered),
            open_count=max((m.open_count for m in ordered), default=0),
        )
