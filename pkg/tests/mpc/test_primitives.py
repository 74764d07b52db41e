"""Stand-alone primitives driven over prepared in-memory sessions."""

import asyncio
import random

import pytest

from pod_mpc.core.dealer import PreprocessingDemand, deal_material
from pod_mpc.core.field import M127, FixedPointParams, to_signed
from pod_mpc.core.sharing import share_values
from pod_mpc.dp.secure import encode_scores, noisy_max_select
from pod_mpc.mpc.circuit import CircuitBuilder, CompareMode
from pod_mpc.mpc.session import (
    PlayerSession,
    compare_gt_zero,
    joint_noise_input,
    open_shares,
    secure_mul,
    trunc,
)
from pod_mpc.mpc.transport import MemoryNetwork

FP = FixedPointParams(f=20, k=40, s=40)
DEMAND = PreprocessingDemand(triples=400, trunc_pairs=10, squares=40, bit_masks={7: 10})


def run_parties(scheme, body):
    """Prepare one session per player, then run ``body(session, party)`` on all of them."""
    async def go():
        network = MemoryNetwork()
        b = CircuitBuilder("primitives", M127, FP)
        b.output(b.input(0, 1))
        circuit = b.build()
        material = deal_material(DEMAND, scheme, random.Random(0), M127, FP)
        sessions = [
            PlayerSession("primitives", p, circuit, scheme, network.channel("primitives", p),
                          material=material[p], seed=1, inputs={0: [0]} if p == 0 else {})
            for p in range(scheme.parties)
        ]
        await asyncio.gather(*(s.prepare() for s in sessions))
        return await asyncio.gather(*(body(s, s.party_id) for s in sessions))
    return asyncio.run(go())


def shared(values, scheme):
    return share_values([v % M127 for v in values], scheme, random.Random(7), M127)


class TestPrimitives:
    def test_secure_mul(self, scheme3):
        xs, ys = shared([3, -4, 0], scheme3), shared([5, 6, 7], scheme3)

        async def body(session, p):
            return await open_shares(await secure_mul(xs[p], ys[p], session), session)

        opened = run_parties(scheme3, body)
        assert all(o == opened[0] for o in opened)
        assert [to_signed(v, M127) for v in opened[0]] == [15, -24, 0]

    def test_trunc(self, scheme3):
        values = [5 << 20, (7 << 20) + 12345, -(3 << 20)]
        xs = shared(values, scheme3)

        async def body(session, p):
            return await open_shares(await trunc(xs[p], session), session)

        opened = run_parties(scheme3, body)[0]
        for x, y in zip(values, opened):
            assert abs(to_signed(y, M127) - (x >> 20)) <= 1

    @pytest.mark.parametrize("mode", [CompareMode.MASKED_SIGN, CompareMode.BITWISE])
    def test_compare_gt_zero(self, scheme3, mode):
        values = [5, -3, 0, 60, -60]
        xs = shared(values, scheme3)

        async def body(session, p):
            bits = await compare_gt_zero(xs[p], session, mode, bits=8 if mode == CompareMode.BITWISE else None)
            return await open_shares(bits, session)

        assert run_parties(scheme3, body)[0] == [1, 0, 0, 1, 0]

    def test_joint_noise_is_shared_consistently(self, scheme3):
        async def body(session, p):
            noise = await joint_noise_input(2.0, session, 4)
            return await open_shares(noise, session), session.noise_contributions

        results = run_parties(scheme3, body)
        opened = results[0][0]
        assert all(r[0] == opened for r in results)
        contributions = [r[1][0] for r in results]
        assert [to_signed(v, M127) for v in opened] == [sum(c) for c in zip(*contributions)]

    def test_noisy_max_select(self, scheme3):
        scores = shared(encode_scores([0.5, 3.0, -1.0, 2.0], FP), scheme3)

        async def body(session, p):
            return await noisy_max_select(scores[p], 0.001, session)

        assert run_parties(scheme3, body) == [1, 1, 1]
