"""What a single computation agent learns from the shares injected into it."""

import asyncio

import numpy as np
import pytest
from scipy.stats import chi2_contingency

from pod_mpc.core.field import M61
from pod_mpc.mpc.node import ClientInjector
from pod_mpc.mpc.transport import ClientLink
from pod_mpc.mpc.wire import MessageType, decode_frame, decode_shares

RUNS = 10_000
BUCKETS = 20


class RecordingLink(ClientLink):
    """Keeps the share elements addressed to one player."""

    def __init__(self, player: int):
        self.player = player
        self.received = []

    async def send(self, player: int, data: bytes) -> None:
        frame = decode_frame(data)
        if player == self.player and frame.type == MessageType.SHARES:
            self.received.extend(decode_shares(frame.payload, M61).elements)


def received_stream(x: int, scheme, player: int = 0, seed_base: int = 0):
    async def scenario():
        stream = []
        for run in range(RUNS):
            link = RecordingLink(player)
            injector = ClientInjector(f"job-{run}", 0, "hash", scheme, M61, link, seed=seed_base + run)
            await injector.inject([x])
            stream.extend(link.received)
        return stream

    return asyncio.run(scenario())


def histogram(values):
    return np.bincount([v * BUCKETS // M61 for v in values], minlength=BUCKETS)


class TestSingleAgentView:
    @pytest.mark.slow
    def test_shamir_stream_independent_of_input(self, shamir3):
        low = received_stream(3, shamir3)
        high = received_stream(M61 - 5, shamir3, seed_base=RUNS)
        assert len(low) == len(high) == RUNS
        _, p, _, _ = chi2_contingency(np.array([histogram(low), histogram(high)]))
        assert p > 0.01

    @pytest.mark.slow
    def test_additive_stream_independent_of_input(self, additive3):
        low = received_stream(0, additive3, player=2)
        high = received_stream(1 << 40, additive3, player=2, seed_base=RUNS)
        _, p, _, _ = chi2_contingency(np.array([histogram(low), histogram(high)]))
        assert p > 0.01

    def test_any_two_agents_reveal_the_input(self, shamir3):
        async def scenario():
            links = []
            for player in (0, 1):
                link = RecordingLink(player)
                await ClientInjector("job", 0, "hash", shamir3, M61, link, seed=5).inject([42])
                links.append(link)
            return [link.received[0] for link in links]

        y0, y1 = asyncio.run(scenario())
        # f(1) = y0, f(2) = y1 for a degree-one polynomial, so f(0) = 2*y0 - y1
        assert (2 * y0 - y1) % M61 == 42
