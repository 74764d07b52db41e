"""Ordered per-job event log of an agent"""

import logging
import time
from abc import ABC, abstractmethod
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)


class AgentEvent(BaseModel):
    job_id: str
    name: str
    provider: Optional[str] = None
    detail: str = ""
    timestamp: float = Field(default_factory=time.time)


class EventLogInterface(ABC):
    """Abstract interface for agent event logs"""

    @abstractmethod
    def record(self, job_id: str, name: str, provider: Optional[str] = None, detail: str = "") -> None:
        """Append one event"""

    @abstractmethod
    def events(self, job_id: Optional[str] = None) -> List[AgentEvent]:
        """Events in recording order, optionally for one job"""

    def names(self, job_id: Optional[str] = None) -> List[str]:
        return [e.name for e in self.events(job_id)]


class InMemoryEventLog(EventLogInterface):
    """Bounded in-memory event log"""

    def __init__(self, max_events: int = 10000):
        self._events: List[AgentEvent] = []
        self.max_events = max_events

    def record(self, job_id: str, name: str, provider: Optional[str] = None, detail: str = "") -> None:
        self._events.append(AgentEvent(job_id=job_id, name=name, provider=provider, detail=detail))
        if len(self._events) > self.max_events:
            self._events = self._events[-self.max_events:]
        logger.debug(f"[{job_id[:8]}] {name} {provider or ''} {detail}".rstrip())

    def events(self, job_id: Optional[str] = None) -> List[AgentEvent]:
        return [e for e in self._events if job_id is None or e.job_id == job_id]

    def counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for e in self._events:
            counts[e.name] = counts.get(e.name, 0) + 1
        return counts


class NullEventLog(EventLogInterface):
    """Event log that keeps nothing"""

    def record(self, job_id: str, name: str, provider: Optional[str] = None, detail: str = "") -> None:
        pass

    def events(self, job_id: Optional[str] = None) -> List[AgentEvent]:
        return []


def create_event_log(enabled: bool = True, max_events: int = 10000) -> EventLogInterface:
    return InMemoryEventLog(max_events) if enabled else NullEventLog()
