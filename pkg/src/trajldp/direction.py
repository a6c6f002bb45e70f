"""Discrete direction sectors and direction-granularity selection.

Sector ``d`` of a frame with reference bearing ``psi`` and granularity ``g``
covers bearings ``[psi + (2d-1)pi/g, psi + (2d+1)pi/g]``, so the bearing that
defined ``psi`` always falls in sector 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidParameterError, UndefinedBearingError
from .geo import PointSet
from .ldp import krr_probabilities

DEFAULT_CANDIDATES = (2, 4, 6, 12)


@dataclass(frozen=True)
class SectorFrame:
    """Origin point id, reference bearing (radians) and number of sectors."""

    origin: int
    reference_bearing: float
    granularity: int

    def __post_init__(self):
        if self.granularity < 2:
            raise InvalidParameterError(f"granularity must be >= 2, got {self.granularity}")

    @classmethod
    def towards(cls, ps: PointSet, origin: int, target: int, g: int) -> "SectorFrame":
        """Frame at ``origin`` whose sector 0 is centred on the bearing to ``target``."""
        return cls(origin, ps.bearing(origin, target), g)


def sector_index(frame: SectorFrame, ps: PointSet, point_id: int) -> int:
    b = ps.bearing_row(frame.origin)[point_id : point_id + 1]
    d = int(kernels.sector_of(np.ascontiguousarray(b), frame.reference_bearing, frame.granularity)[0])
    if d < 0:
        raise UndefinedBearingError()
    return d


def get_point_set(frame: SectorFrame, d_hat: int, domain, ps: PointSet) -> np.ndarray:
    """Members of ``domain`` whose bearing from the frame origin lies in sector ``d_hat``.

    Points coincident with the origin have no bearing and are never returned.
    """
    if not 0 <= d_hat < frame.granularity:
        raise InvalidParameterError(f"sector {d_hat} invalid for granularity {frame.granularity}")
    dom = np.asarray(domain, dtype=np.int64)
    if dom.shape[0] == 0:
        return dom
    b = np.ascontiguousarray(ps.bearing_row(frame.origin)[dom])
    sec = kernels.sector_of(b, frame.reference_bearing, frame.granularity)
    return dom[sec == d_hat]


# -- granularity selection ----------------------------------------------------

def sector_query_overlap(d: int, g: int, theta: float) -> float:
    """Fraction of sector ``d`` (width 2pi/g) that falls inside the arc [-theta, theta]."""
    lo = (2 * d - 1) * math.pi / g
    hi = (2 * d + 1) * math.pi / g
    total = 0.0
    for shift in (-2 * math.pi, 0.0, 2 * math.pi):
        total += max(0.0, min(hi + shift, theta) - max(lo + shift, -theta))
    return total / (2 * math.pi / g)


def direction_success_probability(g: int, epsilon_k: float, thetas: Sequence[float]) -> float:
    """Average probability that k-RR keeps the reported sector inside each query arc."""
    if not thetas:
        raise InvalidParameterError("need at least one query range")
    p_true, p_other = krr_probabilities(g, epsilon_k)
    acc = 0.0
    for theta in thetas:
        for d in range(g):
            acc += sector_query_overlap(d, g, theta) * (p_true if d == 0 else p_other)
    return acc / len(thetas)


@dataclass(frozen=True)
class GranularityConfig:
    epsilon_k: float
    candidates: tuple = DEFAULT_CANDIDATES

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(sorted(set(int(g) for g in self.candidates))))
        if not self.candidates or min(self.candidates) < 2:
            raise InvalidParameterError(f"candidate granularities must be >= 2: {self.candidates}")
        if not self.epsilon_k > 0:
            raise InvalidParameterError(f"epsilon_k must be positive, got {self.epsilon_k}")

    @property
    def query_ranges(self) -> tuple:
        return tuple(math.pi / g for g in self.candidates)


@lru_cache(maxsize=256)
def _select(candidates: tuple, epsilon_k: float) -> int:
    thetas = tuple(math.pi / g for g in candidates)
    best_g, best_p = candidates[0], -1.0
    for g in candidates:  # ascending, strict > keeps the smaller g on ties
        p = direction_success_probability(g, epsilon_k, thetas)
        if p > best_p:
            best_g, best_p = g, p
    return best_g


def select_granularity(config: GranularityConfig) -> int:
    return _select(config.candidates, float(config.epsilon_k))


def direction_epsilon(epsilon: float, mechanism: str) -> float:
    """Per-copy direction budget plugged into the granularity rule.

    TP: 0.75 * (eps / 2); ATP: 0.75 * (0.75 * eps / 2).
    """
    if mechanism == "tp":
        return 3.0 * epsilon / 8.0
    if mechanism == "atp":
        return 9.0 * epsilon / 32.0
    raise InvalidParameterError(f"no direction budget for mechanism {mechanism!r}")
