"""Replay cache of recently accepted dispatches"""

import logging
import time
from collections import OrderedDict
from typing import Callable, Hashable

from ..errors import ReplayDetected

logger = logging.getLogger(__name__)


class ReplayCache:
    """
    Remembers dispatch keys for ``ttl`` seconds, at most ``capacity`` of them.

    Args:
        ttl: Seconds a key stays remembered
        capacity: Oldest keys are evicted beyond this size
        clock: Time source
    """

    def __init__(self, ttl: float = 3600.0, capacity: int = 4096,
                 clock: Callable[[], float] = time.monotonic):
        self.ttl = ttl
        self.capacity = capacity
        self.clock = clock
        self._seen: "OrderedDict[Hashable, float]" = OrderedDict()

    def _expire(self) -> None:
        now = self.clock()
        while self._seen:
            key, seen_at = next(iter(self._seen.items()))
            if now - seen_at <= self.ttl and len(self._seen) <= self.capacity:
                break
            self._seen.popitem(last=False)

    def check_and_remember(self, key: Hashable) -> None:
        """
        Raises:
            ReplayDetected: ``key`` was accepted within the last ``ttl`` seconds
        """
        self._expire()
        if key in self._seen:
            logger.warning(f"Replayed dispatch {key}")
            raise ReplayDetected(f"Dispatch {key} was already accepted")
        self._seen[key] = self.clock()

    def __len__(self) -> int:
        return len(self._seen)
