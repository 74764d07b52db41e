"""Plaintext differential-privacy mechanisms."""

import logging
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from ..errors import InvalidParameters

logger = logging.getLogger(__name__)


def laplace_mechanism(value: float, sensitivity: float, epsilon: float,
                      rng: np.random.Generator) -> float:
    """value + Laplace(sensitivity / epsilon)."""
    if epsilon <= 0:
        raise InvalidParameters(f"epsilon must be positive, got {epsilon}")
    return float(value + rng.laplace(0.0, sensitivity / epsilon))


def exponential_mechanism(scores: Sequence[float], epsilon: float, rng: np.random.Generator,
                          sensitivity: float = 1.0) -> int:
    """Index sampled with probability proportional to exp(epsilon * score / (2 * sensitivity))."""
    if epsilon <= 0:
        raise InvalidParameters(f"epsilon must be positive, got {epsilon}")
    logits = epsilon * np.asarray(scores, dtype=float) / (2.0 * sensitivity)
    probs = np.exp(logits - logsumexp(logits))
    return int(rng.choice(len(probs), p=probs / probs.sum()))


def report_noisy_max(scores: Sequence[float], scale: float, rng: np.random.Generator) -> int:
    """Index of the first maximum of scores plus independent Laplace(scale) noise."""
    noisy = np.asarray(scores, dtype=float) + rng.laplace(0.0, scale, len(scores))
    return int(np.argmax(noisy))
