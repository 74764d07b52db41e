"""Linear queries over histograms."""

import json
import logging
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
from pydantic import BaseModel, field_validator

from ..core.field import FixedPointParams
from ..errors import DimensionMismatch, InvalidParameters
from .histogram import Histogram

logger = logging.getLogger(__name__)


class LinearQuery(BaseModel):
    """Per-bin weights in [-1, 1]."""
    weights: List[float]

    @field_validator("weights")
    @classmethod
    def _bounded(cls, weights: List[float]) -> List[float]:
        if any(not -1.0 <= w <= 1.0 for w in weights):
            raise ValueError("Query weights must lie in [-1, 1]")
        return weights

    def quantized(self, params: FixedPointParams) -> List[int]:
        """Weights as integers with ``f`` fractional bits; exact on the dyadic grid."""
        return [round(w * params.scale) for w in self.weights]


def eval_query(q: LinearQuery, h: Union[Histogram, "np.ndarray", Sequence[float]]) -> float:
    """
    Sum of weight times mass over bins.

    Raises:
        DimensionMismatch: If the query and histogram lengths differ
    """
    values = h.counts if isinstance(h, Histogram) else getattr(h, "A", h)
    values = np.asarray(values, dtype=float)
    if len(q.weights) != len(values):
        raise DimensionMismatch(f"Query has {len(q.weights)} weights, histogram {len(values)} bins")
    return float(np.dot(np.asarray(q.weights, dtype=float), values))


def random_queries(count: int, bins: int, rng: np.random.Generator, frac_bits: int = 8) -> List[LinearQuery]:
    """Random queries with weights on the 2^-frac_bits grid of [-1, 1]."""
    if count < 1:
        raise InvalidParameters("Need at least one query")
    scale = 1 << frac_bits
    raw = rng.integers(-scale, scale + 1, size=(count, bins))
    return [LinearQuery(weights=[int(v) / scale for v in row]) for row in raw]


def save_queries(queries: Sequence[LinearQuery], path: Path) -> None:
    Path(path).write_text(json.dumps([q.weights for q in queries]))


def load_queries(path: Path) -> List[LinearQuery]:
    return [LinearQuery(weights=w) for w in json.loads(Path(path).read_text())]
