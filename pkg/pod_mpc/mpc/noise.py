"""
Distributed Laplace noise.

Each of p players draws G - G' with G, G' ~ Gamma(1/p, scale); the sum of
all contributions is Laplace(scale). Contributions are encoded with ``f``
fractional bits before sharing, so the reconstructed value is the fixed-point
encoding of the summed noise.
"""

import hashlib
import logging
from typing import Dict, List, Sequence

import numpy as np

from ..core.field import FixedPointParams

logger = logging.getLogger(__name__)


def derive_seed(seed: int, job_id: str, party_id: int, purpose: str) -> int:
    """Stable 64-bit seed for a (job, party, purpose) triple."""
    digest = hashlib.sha256(f"{seed}:{job_id}:{party_id}:{purpose}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class NoiseSampler:
    """One player's stream of Gamma-difference noise contributions."""

    def __init__(self, seed: int, parties: int):
        if parties < 1:
            raise ValueError("NoiseSampler needs at least one party")
        self.parties = parties
        self.rng = np.random.default_rng(seed)

    def contribution(self, scale: float, width: int) -> np.ndarray:
        """Real-valued contribution of ``width`` elements."""
        shape = 1.0 / self.parties
        return self.rng.gamma(shape, scale, width) - self.rng.gamma(shape, scale, width)

    def encoded_contribution(self, scale: float, width: int, params: FixedPointParams) -> List[int]:
        """Contribution rounded to signed integers with ``f`` fractional bits."""
        return encode_noise(self.contribution(scale, width), params)


def encode_noise(values: Sequence[float], params: FixedPointParams) -> List[int]:
    return [int(v) for v in np.rint(np.asarray(values, dtype=float) * params.scale)]


def sample_laplace(scale: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Direct Laplace sampler; the single-player reduction of the joint sampler."""
    return rng.laplace(0.0, scale, size)


def joint_noise_stream(noise_specs: Sequence[Dict], parties: int,
                       seeds: Sequence[int], params: FixedPointParams) -> List[List[int]]:
    """
    Re-derive the summed noise a run injected, per noise gate.

    Args:
        noise_specs: ``{"scale": float, "width": int}`` per noise gate, in gate order
        parties: Number of players that contributed
        seeds: Noise seed of each player
        params: Fixed-point layout the contributions were encoded with

    Returns:
        Signed fixed-point integers of the joint noise, one list per gate
    """
    samplers = [NoiseSampler(s, parties) for s in seeds]
    stream = []
    for spec in noise_specs:
        total = [0] * int(spec["width"])
        for sampler in samplers:
            part = sampler.encoded_contribution(float(spec["scale"]), int(spec["width"]), params)
            total = [a + b for a, b in zip(total, part)]
        stream.append(total)
    return stream
