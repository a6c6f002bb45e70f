"""Randomized building blocks under pure epsilon-LDP and the privacy ledger.

All samplers draw from an explicit :class:`RandomSource`; none touch global
random state.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BudgetExceededError, InvalidParameterError

LEDGER_TOLERANCE = 1e-12
_MASK64 = (1 << 64) - 1


def _label_key(label) -> int:
    if isinstance(label, (bool, np.bool_)):
        return int(label)
    if isinstance(label, (int, np.integer)):
        return int(label) & _MASK64
    digest = hashlib.blake2b(repr(label).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RandomSource:
    """Seedable generator that can derive independent child streams.

    A child is determined by the root seed plus the full label path, never by
    how much the parent has been consumed, so ``RandomSource(7).child("tp", 3)``
    always yields the same stream.
    """

    def __init__(self, seed: int = 0, _path: tuple = ()):
        self.seed = int(seed) & _MASK64
        self.path = tuple(_path)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, *labels) -> "RandomSource":
        return RandomSource(self.seed, self.path + tuple(_label_key(x) for x in labels))

    def random(self) -> float:
        return float(self.gen.random())

    def integers(self, low: int, high: int) -> int:
        return int(self.gen.integers(low, high))

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, path={self.path})"


@dataclass
class BudgetLedger:
    """Append-only record of every raw-data access and the epsilon it consumed."""

    total_epsilon: float
    entries: list = field(default_factory=list)

    def __post_init__(self):
        if not self.total_epsilon > 0:
            raise InvalidParameterError(f"total epsilon must be positive, got {self.total_epsilon}")

    @property
    def spent(self) -> float:
        return math.fsum(e for _, e in self.entries)

    @property
    def remaining(self) -> float:
        return self.total_epsilon - self.spent

    def spend(self, label: str, epsilon: float) -> "BudgetLedger":
        if not epsilon > 0:
            raise InvalidParameterError(f"spend for {label!r} must be positive, got {epsilon}")
        spent = self.spent
        if spent + epsilon > self.total_epsilon + LEDGER_TOLERANCE:
            raise BudgetExceededError(label, epsilon, spent, self.total_epsilon)
        self.entries.append((label, float(epsilon)))
        return self


def ledger_spend(ledger: BudgetLedger, label: str, epsilon: float) -> BudgetLedger:
    return ledger.spend(label, epsilon)


# -- k-ary randomized response ------------------------------------------------

def krr_probabilities(g: int, epsilon: float) -> tuple[float, float]:
    """(P[report truth], P[report one specific other value]) for k-RR.

    Accepts epsilon = 0 (uniform); used for analysis as well as sampling.
    """
    if g < 2:
        raise InvalidParameterError(f"k-RR domain size must be >= 2, got {g}")
    if epsilon < 0 or not math.isfinite(epsilon):
        raise InvalidParameterError(f"epsilon must be finite and >= 0, got {epsilon}")
    # divide through by e^eps to stay finite for large epsilon
    inv = math.exp(-epsilon)
    denom = 1.0 + (g - 1) * inv
    return 1.0 / denom, inv / denom


def krr_sample(true_index: int, g: int, epsilon: float, rng: RandomSource) -> int:
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    if not 0 <= true_index < g:
        raise InvalidParameterError(f"true index {true_index} outside [0, {g})")
    p_true, p_other = krr_probabilities(g, epsilon)
    u = rng.random()
    if u < p_true:
        return true_index
    # uniform over the g-1 other values
    k = min(int((u - p_true) / p_other), g - 2)
    return k if k < true_index else k + 1


# -- exponential mechanism ----------------------------------------------------

def _em_scale(candidates: np.ndarray, ps, sensitivity_km: float, epsilon: float) -> float:
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    if sensitivity_km < 0:
        raise InvalidParameterError(f"sensitivity must be >= 0, got {sensitivity_km}")
    if sensitivity_km == 0:
        if candidates.shape[0] > 1 and ps.subset_diameter(candidates) > 0:
            raise InvalidParameterError("zero sensitivity with more than one distinct candidate")
        return 0.0
    return epsilon / (2.0 * sensitivity_km)


def em_probabilities(true_point_id: int, candidate_ids, ps, sensitivity_km: float,
                     epsilon: float) -> np.ndarray:
    """Exact output distribution of :func:`em_sample` over ``candidate_ids``."""
    cand = np.ascontiguousarray(candidate_ids, dtype=np.int64)
    if cand.shape[0] == 0:
        raise InvalidParameterError("exponential mechanism needs at least one candidate")
    scale = _em_scale(cand, ps, sensitivity_km, epsilon)
    d = ps.dist_row(true_point_id)[cand]
    w = np.exp(-scale * (d - d.min()))
    return w / w.sum()


def em_sample(true_point_id: int, candidate_ids, ps, sensitivity_km: float,
              epsilon: float, rng: RandomSource) -> int:
    """Draw a candidate with probability proportional to exp(-eps * dist / (2 * sensitivity)).

    The exponent is shifted by its maximum before exponentiating.
    """
    cand = np.ascontiguousarray(candidate_ids, dtype=np.int64)
    if cand.shape[0] == 0:
        raise InvalidParameterError("exponential mechanism needs at least one candidate")
    scale = _em_scale(cand, ps, sensitivity_km, epsilon)
    if cand.shape[0] == 1:
        return int(cand[0])
    d = np.ascontiguousarray(ps.dist_row(true_point_id)[cand])
    return int(cand[kernels.em_pick(d, scale, rng.random())])


# -- square-wave mechanism ----------------------------------------------------

def sw_b(epsilon: float) -> float:
    """Half-width of the high-probability band of the square-wave mechanism."""
    if not epsilon > 0 or not math.isfinite(epsilon):
        raise InvalidParameterError(f"epsilon must be positive and finite, got {epsilon}")
    if epsilon < 1e-4:
        # series of the closed form around 0
        return 0.5 - epsilon / 3.0 + epsilon * epsilon / 9.0
    num = epsilon + math.expm1(-epsilon)
    if epsilon > 30.0:
        # divided through by e^eps so huge budgets do not overflow
        inv = math.exp(-epsilon)
        return num * inv / (2.0 * (1.0 - inv * (1.0 + epsilon)))
    den = 2.0 * (math.expm1(epsilon) - epsilon)
    return num / den


def sw_band_mass(epsilon: float) -> float:
    """Probability that the output lands within b of the input: 2b e^eps / (2b e^eps + 1)."""
    b = sw_b(epsilon)
    if epsilon > 700:
        return 1.0
    m = 2.0 * b * math.exp(epsilon)
    return m / (m + 1.0)


@dataclass(frozen=True)
class SwParams:
    epsilon: float
    b: float

    @classmethod
    def for_epsilon(cls, epsilon: float) -> "SwParams":
        return cls(epsilon, sw_b(epsilon))


def sw_sample(x: float, epsilon: float, rng: RandomSource) -> float:
    """Perturb ``x`` in [0, 1] to a value in [-b, 1 + b]."""
    if not 0.0 <= x <= 1.0:
        raise InvalidParameterError(f"square-wave input {x} outside [0, 1]")
    b = sw_b(epsilon)
    if rng.random() < sw_band_mass(epsilon):
        return x - b + 2.0 * b * rng.random()
    # complement [-b, x-b) U (x+b, 1+b] has total length 1; split at x
    v = rng.random()
    return v - b if v < x else v + b
