"""Probability that every randomly chosen computation agent is corrupted."""

import logging
from typing import Optional

import numpy as np

from .models import RiskEstimate, RiskParams

logger = logging.getLogger(__name__)


def risk_probability(params: RiskParams) -> RiskEstimate:
    """
    Exact probability that m agents drawn without replacement from n are all
    among the k corrupted ones, and the (k/n)^m bound.
    """
    n, k, m = params.n, params.k, params.m
    exact = 1.0
    for i in range(m):
        exact *= max(k - i, 0) / (n - i)
    return RiskEstimate(exact=exact, bound=(k / n) ** m)


def monte_carlo_risk(params: RiskParams, trials: int = 1_000_000,
                     rng: Optional[np.random.Generator] = None, chunk: int = 100_000) -> float:
    """Fraction of uniform m-subsets of n agents lying entirely inside the first k."""
    rng = rng or np.random.default_rng(0)
    hits = 0
    remaining = trials
    while remaining > 0:
        size = min(chunk, remaining)
        draws = np.argsort(rng.random((size, params.n)), axis=1)[:, :params.m]
        hits += int(np.count_nonzero(np.all(draws < params.k, axis=1)))
        remaining -= size
    return hits / trials
