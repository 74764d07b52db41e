"""Connection establishment with exponential backoff."""

import asyncio
import logging
from typing import Any, Dict, Tuple

from ..errors import PeerDisconnected

logger = logging.getLogger(__name__)


class ReconnectionHandler:
    """Opens TCP connections, retrying with exponential backoff"""

    def __init__(self, reconnect_delay: float = 0.05, max_reconnection_attempts: int = 8,
                 max_delay: float = 5.0, connect_timeout: float = 10.0):
        """
        Initialize reconnection handler

        Args:
            reconnect_delay: Seconds to wait before the first retry
            max_reconnection_attempts: Maximum retries (0 = infinite)
            max_delay: Upper bound of a single backoff delay
            connect_timeout: Seconds allowed for one connection attempt
        """
        self.reconnect_delay = reconnect_delay
        self.max_reconnection_attempts = max_reconnection_attempts
        self.max_delay = max_delay
        self.connect_timeout = connect_timeout
        self.reconnection_count = 0

    def backoff_delay(self, attempt: int) -> float:
        return min(self.reconnect_delay * (2 ** (attempt - 1)), self.max_delay)

    async def connect(self, host: str, port: int) -> Tuple[asyncio.StreamReader, asyncio.StreamWriter]:
        """
        Connect to ``host:port``.

        Raises:
            PeerDisconnected: When every attempt failed
        """
        attempt = 0
        while True:
            try:
                return await asyncio.wait_for(asyncio.open_connection(host, port), self.connect_timeout)
            except (OSError, asyncio.TimeoutError) as e:
                attempt += 1
                self.reconnection_count += 1
                if self.max_reconnection_attempts > 0 and attempt > self.max_reconnection_attempts:
                    logger.error(f"Giving up on {host}:{port} after {attempt - 1} retries: {e}")
                    raise PeerDisconnected(f"Cannot reach {host}:{port}: {e}")
                delay = self.backoff_delay(attempt)
                logger.warning(f"Connection to {host}:{port} failed ({e}), retry {attempt} in {delay:.2f}s")
                await asyncio.sleep(delay)

    def get_reconnection_stats(self) -> Dict[str, Any]:
        return {
            'reconnection_count': self.reconnection_count,
            'max_attempts': self.max_reconnection_attempts,
            'reconnect_delay': self.reconnect_delay
        }
