"""One-dimensional histograms over a half-open integer domain."""

import logging
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..errors import InvalidParameters, OutOfDomain

logger = logging.getLogger(__name__)


class Histogram(BaseModel):
    counts: List[int]
    domain: Tuple[float, float] = Field(description="Half-open [lo, hi)")

    @model_validator(mode="after")
    def _check(self) -> "Histogram":
        lo, hi = self.domain
        if not hi > lo:
            raise InvalidParameters(f"Empty domain [{lo}, {hi})")
        if any(c < 0 for c in self.counts):
            raise InvalidParameters("Histogram counts must be non-negative")
        return self

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def width(self) -> float:
        lo, hi = self.domain
        return (hi - lo) / self.bins

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float)

    def __add__(self, other: "Histogram") -> "Histogram":
        if self.domain != other.domain or self.bins != other.bins:
            raise InvalidParameters("Histograms over different bins cannot be added")
        return Histogram(counts=[a + b for a, b in zip(self.counts, other.counts)], domain=self.domain)


def bin_data(data: Sequence[int], bins: int, domain: Tuple[float, float]) -> Histogram:
    """
    Count points per equal-width bin.

    Raises:
        OutOfDomain: If a point falls outside [lo, hi)
    """
    lo, hi = domain
    if bins < 1:
        raise InvalidParameters(f"Need at least one bin, got {bins}")
    width = (hi - lo) / bins
    counts = [0] * bins
    for x in data:
        if not lo <= x < hi:
            raise OutOfDomain(f"Point {x} outside [{lo}, {hi})")
        j = min(int((x - lo) // width), bins - 1)
        counts[j] += 1
    return Histogram(counts=counts, domain=(lo, hi))


def bin_edges(bins: int, domain: Tuple[float, float]) -> List[float]:
    """Lower edge of every bin."""
    lo, hi = domain
    width = (hi - lo) / bins
    return [lo + j * width for j in range(bins)]
