"""
Multiplicative weights with exponential-mechanism selection.

The plaintext reference runs T rounds of: select a badly answered query,
measure it with Laplace noise, and reweight the synthetic distribution A.
The ``noisy_max`` oracle mirrors the secure circuit step for step in
fixed-point integers, so both produce the same released stream given the
same noise.
"""

import logging
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..core.field import FixedPointParams
from ..errors import DimensionMismatch, InvalidParameters
from .histogram import Histogram
from .mechanisms import exponential_mechanism
from .queries import LinearQuery, eval_query

logger = logging.getLogger(__name__)


class MwemMode(str, Enum):
    EXPONENTIAL = "exponential"
    NOISY_MAX = "noisy_max"


class MwemConfig(BaseModel):
    queries: List[LinearQuery]
    iterations: int = Field(default=30, ge=1, description="T")
    epsilon: float = Field(default=1.0, gt=0)
    n: int = Field(ge=0, description="Number of data points |D|")
    bins: int = Field(default=10, ge=1)
    mode: MwemMode = MwemMode.NOISY_MAX
    average_output: bool = Field(default=False, description="Return the mean of A_1..A_T instead of A_T")

    @model_validator(mode="after")
    def _check_queries(self) -> "MwemConfig":
        if not self.queries:
            raise InvalidParameters("MWEM needs at least one query")
        for q in self.queries:
            if len(q.weights) != self.bins:
                raise DimensionMismatch(f"Query has {len(q.weights)} weights for {self.bins} bins")
        return self

    @property
    def selection_scale(self) -> float:
        """Laplace scale of report-noisy-max selection (budget eps/2T)."""
        return 4.0 * self.iterations / self.epsilon

    @property
    def measurement_scale(self) -> float:
        """Laplace scale of the measurement (budget eps/2T)."""
        return 2.0 * self.iterations / self.epsilon

    @property
    def selection_epsilon(self) -> float:
        return self.epsilon / (2.0 * self.iterations)


class MwemStep(BaseModel):
    query: int
    measurement: float
    total: float = Field(description="Sum of A after the update")


class SyntheticDistribution(BaseModel):
    """A is n times a distribution over the bins."""
    A: List[float]
    n: int
    steps: List[MwemStep] = Field(default_factory=list)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.A, dtype=float)

    def max_error(self, queries: Sequence[LinearQuery], data: Histogram) -> float:
        return max(abs(eval_query(q, self.A) - eval_query(q, data)) for q in queries)


def uniform_distribution(n: int, bins: int) -> np.ndarray:
    return np.full(bins, n / bins, dtype=float)


def mw_update(A: np.ndarray, weights: Sequence[float], measurement: float, n: int) -> np.ndarray:
    """A(x) * exp(q(x) (m - q(A)) / 2n), renormalized to total n."""
    q = np.asarray(weights, dtype=float)
    estimate = float(np.dot(q, A))
    updated = A * np.exp(q * (measurement - estimate) / (2.0 * max(n, 1)))
    total = updated.sum()
    return updated * (n / total) if total > 0 else uniform_distribution(n, len(A))


def replay_mwem(stream: Sequence[Tuple[int, float]], queries: Sequence[LinearQuery], n: int,
                bins: int, average_output: bool = False) -> SyntheticDistribution:
    """
    Rebuild A_T from released (query index, measurement) pairs.

    Query indices are taken modulo the number of queries.
    """
    A = uniform_distribution(n, bins)
    running = np.zeros(bins)
    steps = []
    for idx, measurement in stream:
        q = queries[idx % len(queries)]
        A = mw_update(A, q.weights, measurement, n)
        running += A
        steps.append(MwemStep(query=idx % len(queries), measurement=measurement, total=float(A.sum())))
    out = running / len(stream) if average_output and stream else A
    return SyntheticDistribution(A=[float(v) for v in out], n=n, steps=steps)


def quantized_answers(A: np.ndarray, quantized: Sequence[Sequence[int]], params: FixedPointParams) -> List[int]:
    """Fixed-point answers round(q(A) * 2^f) from integer-quantized query weights."""
    W = np.asarray(quantized, dtype=float)
    return [int(v) for v in np.rint(W @ A)]


def mwem_plaintext(D: Histogram, cfg: MwemConfig, rng: np.random.Generator) -> SyntheticDistribution:
    """
    Run MWEM in the clear.

    EXPONENTIAL mode samples each query with the exponential mechanism on
    |q(A) - q(D)|; NOISY_MAX mode reports the noisy maximum over the
    candidates +/-(q(A) - q(D)). Both spend eps/2T on selection and eps/2T on
    measurement per iteration.
    """
    if D.bins != cfg.bins:
        raise DimensionMismatch(f"Histogram has {D.bins} bins, config {cfg.bins}")
    n = cfg.n
    A = uniform_distribution(n, cfg.bins)
    true_answers = np.array([eval_query(q, D) for q in cfg.queries])
    weights = np.array([q.weights for q in cfg.queries], dtype=float)
    Q = len(cfg.queries)
    running = np.zeros(cfg.bins)
    steps: List[MwemStep] = []

    for _ in range(cfg.iterations):
        diffs = weights @ A - true_answers
        if cfg.mode == MwemMode.EXPONENTIAL:
            idx = exponential_mechanism(np.abs(diffs), cfg.selection_epsilon, rng)
        else:
            candidates = np.concatenate([diffs, -diffs])
            noisy = candidates + rng.laplace(0.0, cfg.selection_scale, 2 * Q)
            idx = int(np.argmax(noisy)) % Q
        measurement = float(true_answers[idx] + rng.laplace(0.0, cfg.measurement_scale))
        A = mw_update(A, cfg.queries[idx].weights, measurement, n)
        running += A
        steps.append(MwemStep(query=idx, measurement=measurement, total=float(A.sum())))

    out = running / cfg.iterations if cfg.average_output else A
    return SyntheticDistribution(A=[float(v) for v in out], n=n, steps=steps)


class NoisyMaxRelease(BaseModel):
    """One iteration's released values in fixed point."""
    index: int = Field(description="Winning candidate in [0, 2Q)")
    measurement: int = Field(description="Signed fixed-point measurement")


def mwem_noisy_max_oracle(D: Histogram, cfg: MwemConfig, params: FixedPointParams,
                          noise: Sequence[Sequence[int]]) -> Tuple[List[NoisyMaxRelease], SyntheticDistribution]:
    """
    Integer replica of the secure MWEM circuit.

    Args:
        D: True histogram
        cfg: Configuration (queries must lie on the 2^-f grid)
        params: Fixed-point layout of the circuit
        noise: Signed fixed-point noise per noise gate, in circuit order:
            selection noise (2Q values) then measurement noise (1 value) per iteration

    Returns:
        The released stream and the replayed A_T
    """
    if len(noise) != 2 * cfg.iterations:
        raise InvalidParameters(f"Need {2 * cfg.iterations} noise vectors, got {len(noise)}")
    Q = len(cfg.queries)
    quantized = [q.quantized(params) for q in cfg.queries]
    secret_answers = [int(sum(w * c for w, c in zip(row, D.counts))) for row in quantized]
    releases: List[NoisyMaxRelease] = []
    for i in range(cfg.iterations):
        stream = [(r.index, r.measurement / params.scale) for r in releases]
        A = replay_mwem(stream, cfg.queries, cfg.n, cfg.bins).as_array()
        public_answers = quantized_answers(A, quantized, params)
        diffs = [a - d for a, d in zip(public_answers, secret_answers)]
        candidates = diffs + [-d for d in diffs]
        noisy = [c + z for c, z in zip(candidates, noise[2 * i])]
        index = noisy.index(max(noisy))
        measurement = secret_answers[index % Q] + noise[2 * i + 1][0]
        releases.append(NoisyMaxRelease(index=index, measurement=measurement))
    stream = [(r.index, r.measurement / params.scale) for r in releases]
    return releases, replay_mwem(stream, cfg.queries, cfg.n, cfg.bins, cfg.average_output)


def sample_synthetic(dist: SyntheticDistribution, size: Optional[int], rng: np.random.Generator,
                     domain: Tuple[float, float] = None) -> List[int]:
    """
    Draw a synthetic dataset from A.

    Returns bin indices, or integer points uniformly placed inside their bin
    when ``domain`` is given.
    """
    A = dist.as_array()
    size = dist.n if size is None else size
    probs = A / A.sum() if A.sum() > 0 else np.full(len(A), 1.0 / len(A))
    counts = rng.multinomial(size, probs)
    bins = np.repeat(np.arange(len(A)), counts)
    if domain is None:
        return [int(b) for b in bins]
    lo, hi = domain
    width = (hi - lo) / len(A)
    points = lo + (bins + rng.random(len(bins))) * width
    return [int(np.floor(p)) for p in points]
