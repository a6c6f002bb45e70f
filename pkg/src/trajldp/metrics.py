"""Utility measures for perturbed trajectory corpora."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError
from .geo import PointSet


def _pairs(orig, pert):
    if len(orig) != len(pert):
        raise InvalidParameterError(f"corpus sizes differ: {len(orig)} vs {len(pert)}")
    for k, (a, b) in enumerate(zip(orig, pert)):
        if len(a) != len(b):
            raise InvalidParameterError(f"trajectory {k} lengths differ: {len(a)} vs {len(b)}")
        yield np.asarray(list(a), dtype=np.int64), np.asarray(list(b), dtype=np.int64)


def _point_errors(ps: PointSet, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if ps.distance_matrix is not None:
        return ps.distance_matrix[a, b]
    return np.array([ps.dist(i, j) for i, j in zip(a, b)])


def mean_normalized_error(orig: Sequence, pert: Sequence, ps: PointSet) -> float:
    """Mean over trajectories of the mean point error, divided by the set diameter."""
    per_traj = [float(_point_errors(ps, a, b).mean()) for a, b in _pairs(orig, pert)]
    if not per_traj:
        return 0.0
    if ps.diameter_km == 0:
        return 0.0
    return math.fsum(per_traj) / len(per_traj) / ps.diameter_km


def preservation_range_query(orig: Sequence, pert: Sequence, ps: PointSet, delta_km: float) -> float:
    """Percentage of points (averaged per trajectory) perturbed no further than ``delta_km``."""
    if delta_km < 0:
        raise InvalidParameterError(f"delta must be >= 0, got {delta_km}")
    per_traj = [float((_point_errors(ps, a, b) <= delta_km).mean()) for a, b in _pairs(orig, pert)]
    if not per_traj:
        return 100.0
    return 100.0 * math.fsum(per_traj) / len(per_traj)


def visit_counts(corpus: Sequence, n: int) -> np.ndarray:
    counts = np.zeros(n, dtype=np.int64)
    for t in corpus:
        np.add.at(counts, np.asarray(list(t), dtype=np.int64), 1)
    return counts


def average_count_difference(orig: Sequence, pert: Sequence, ps: PointSet,
                             top_fraction: float = 0.5) -> float:
    """Mean |count before - count after| over the most visited locations.

    The top ``ceil(top_fraction * |P|)`` locations are ranked by original
    count, ties to the lower id.
    """
    if not 0 < top_fraction <= 1:
        raise InvalidParameterError(f"top fraction must be in (0, 1], got {top_fraction}")
    list(_pairs(orig, pert))
    n = len(ps)
    c0 = visit_counts(orig, n)
    c1 = visit_counts(pert, n)
    k = math.ceil(top_fraction * n)
    top = np.lexsort((np.arange(n), -c0))[:k]
    return float(np.abs(c0[top] - c1[top]).mean())


@dataclass
class EvalReport:
    """Metric summary over one or more perturbation runs of the same corpus."""

    mechanism: str
    epsilon: float
    ne: float
    prq: dict
    acd: dict
    runs: int
    per_run: dict = field(default_factory=dict)

    def rows(self) -> list:
        """(mechanism, epsilon, metric, param, mean, stderr, runs) tuples, sorted."""
        out = []
        for key in sorted(self.per_run, key=lambda k: (k[0], k[1])):
            metric, param = key
            vals = self.per_run[key]
            out.append((self.mechanism, self.epsilon, metric, param, _mean(vals), _stderr(vals), len(vals)))
        return out


def _mean(vals) -> float:
    return math.fsum(vals) / len(vals)


def _stderr(vals) -> float:
    if len(vals) < 2:
        return 0.0
    return float(np.std(np.asarray(vals), ddof=1) / math.sqrt(len(vals)))


def evaluate(orig: Sequence, perturbed_runs: Sequence, ps: PointSet, deltas=(1.0, 2.0, 4.0),
             top_fraction: float = 0.5, mechanism: str = "", epsilon: float = math.nan) -> EvalReport:
    """Score every run in ``perturbed_runs`` against ``orig``."""
    if not perturbed_runs:
        raise InvalidParameterError("need at least one perturbed run")
    per_run: dict = {("ne", 0.0): []}
    for d in deltas:
        per_run[("prq", float(d))] = []
    per_run[("acd", float(top_fraction))] = []
    for pert in perturbed_runs:
        for key, val in run_metrics(orig, pert, ps, deltas, top_fraction).items():
            per_run[key].append(val)
    return EvalReport(
        mechanism,
        epsilon,
        _mean(per_run[("ne", 0.0)]),
        {float(d): _mean(per_run[("prq", float(d))]) for d in deltas},
        {float(top_fraction): _mean(per_run[("acd", float(top_fraction))])},
        len(perturbed_runs),
        per_run,
    )


def run_metrics(orig, pert, ps: PointSet, deltas, top_fraction) -> dict:
    """All metrics for one perturbed corpus, keyed by (metric, param)."""
    out = {("ne", 0.0): mean_normalized_error(orig, pert, ps)}
    for d in deltas:
        out[("prq", float(d))] = preservation_range_query(orig, pert, ps, d)
    out[("acd", float(top_fraction))] = average_count_difference(orig, pert, ps, top_fraction)
    return out
