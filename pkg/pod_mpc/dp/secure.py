"""Differential-privacy mechanisms evaluated on secret shares."""

import logging
from typing import List, Sequence

from ..core.field import M127, FixedPointParams
from ..errors import InvalidParameters
from ..mpc import gadgets
from ..mpc.circuit import Circuit, CircuitBuilder
from ..mpc.session import PlayerSession, joint_noise_input

logger = logging.getLogger(__name__)


async def noisy_max_select(scores: Sequence[int], scale: float, session: PlayerSession) -> int:
    """
    Report noisy max on shared scores.

    Adds jointly generated Laplace(scale) noise to every score share and runs
    a comparison tournament; only the winning index is opened.

    Args:
        scores: This party's shares of fixed-point scores
        scale: Laplace scale in real units
        session: A prepared player session

    Returns:
        Index of the first maximum of the noisy scores
    """
    if not scores:
        raise InvalidParameters("noisy max needs at least one score")
    if len(scores) == 1:
        return 0
    noise = await joint_noise_input(scale, session, len(scores))
    noisy = session.ctx.add(list(scores), noise)
    [index] = await session.run_gadget(gadgets.argmax_tournament(session.ctx, noisy))
    logger.debug(f"Job {session.job_id} party {session.party_id}: noisy max over {len(scores)} scores")
    return index


def noisy_max_circuit(width: int, scale: float, source: int = 0,
                      params: FixedPointParams = FixedPointParams()) -> Circuit:
    """Circuit form of report noisy max over one source's fixed-point score vector."""
    b = CircuitBuilder("noisy_max", M127, params)
    scores = b.input(source, width)
    b.output(b.argmax(b.add(scores, b.noise(scale, width))))
    return b.build()


def encode_scores(scores: Sequence[float], params: FixedPointParams = FixedPointParams()) -> List[int]:
    return [round(s * params.scale) for s in scores]
