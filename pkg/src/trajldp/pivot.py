"""Pivot sampling (TP), its building blocks, and the EXP baseline.

Positions are 0-based throughout. A copy with flag ``F`` treats position ``i``
as a pivot when ``(i + 1) % 2 == F``, i.e. the usual 1-based ``i % 2 == F``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .direction import (
    DEFAULT_CANDIDATES,
    GranularityConfig,
    SectorFrame,
    direction_epsilon,
    get_point_set,
    select_granularity,
)
from .errors import InvalidParameterError
from .geo import PointSet
from .ldp import BudgetLedger, RandomSource, em_sample, krr_sample

# Objective values within this many km of the minimum count as ties.
COMBINE_TOL_KM = 1e-9


@dataclass(frozen=True)
class PivotPlan:
    flag: int
    length: int
    pivots: tuple
    nonpivots: tuple


def pivot_plan(length: int, flag: int) -> PivotPlan:
    if flag not in (0, 1):
        raise InvalidParameterError(f"flag must be 0 or 1, got {flag}")
    piv = tuple(i for i in range(length) if (i + 1) % 2 == flag)
    rest = tuple(i for i in range(length) if (i + 1) % 2 != flag)
    return PivotPlan(flag, length, piv, rest)


@dataclass
class PerturbedCopy:
    """One perturbed copy of a trajectory plus what was used to produce it.

    ``directions`` maps (origin position, target position) to the frame and
    the reported sector; ``domains`` holds the candidate ids used for each
    non-pivot; ``entries`` is this copy's slice of the privacy ledger.
    """

    flag: int
    points: list
    domains: dict = field(default_factory=dict)
    directions: dict = field(default_factory=dict)
    entries: list = field(default_factory=list)

    @property
    def spent(self) -> float:
        return sum(e for _, e in self.entries)


def _check_traj(traj: Sequence[int], ps: PointSet) -> list:
    pts = [int(p) for p in traj]
    if not pts:
        raise InvalidParameterError("trajectory must contain at least one point")
    ps.validate_ids(pts)
    return pts


def get_point_domain(i: int, traj: Sequence[int], ps: PointSet, active_domain,
                     directions: Mapping) -> np.ndarray:
    """Candidate ids for non-pivot ``i`` from the reported sectors of its neighbours.

    Interior points use the intersection of both sectors, falling back to the
    whole active domain when it is empty; endpoints use their single sector.
    The true point is always included.
    """
    dom = np.asarray(active_domain, dtype=np.int64)
    sets = []
    for key in ((i - 1, i), (i + 1, i)):
        if key in directions:
            frame, d_hat = directions[key]
            sets.append(get_point_set(frame, d_hat, dom, ps))
    if len(sets) == 2:
        cand = np.intersect1d(sets[0], sets[1])
        if cand.shape[0] == 0:
            cand = dom
    elif len(sets) == 1:
        cand = sets[0]
    else:
        cand = dom
    return np.union1d(cand, np.array([traj[i]], dtype=np.int64))


def pivot_perturb(traj: Sequence[int], active_domain, ps: PointSet, epsilon: float, g: int,
                  flag: int, rng: RandomSource, ledger: Optional[BudgetLedger] = None,
                  tag: str = "") -> PerturbedCopy:
    """Perturb one copy: independent pivots, then directions, then restricted non-pivots."""
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    pts = _check_traj(traj, ps)
    n = len(pts)
    dom = np.unique(np.asarray(active_domain, dtype=np.int64))
    if dom.shape[0] == 0:
        raise InvalidParameterError("active domain is empty")
    copy = PerturbedCopy(flag, [-1] * n)

    def spend(label, eps):
        label = f"{tag}/{label}" if tag else label
        if ledger is not None:
            ledger.spend(label, eps)
        copy.entries.append((label, eps))

    sens = ps.subset_diameter(dom)
    if n == 1:
        # no neighbours, hence no pivots: one EM draw with the whole copy budget
        copy.points[0] = em_sample(pts[0], dom, ps, sens, epsilon, rng)
        spend("point[0]", epsilon)
        return copy

    eps_d = 0.75 * epsilon
    eps_ind = (epsilon - eps_d) / 2
    eps_rest = (epsilon - eps_d) / 2
    eps_dir = eps_d / (2 * (n - 1))
    plan = pivot_plan(n, flag)

    for i in plan.pivots:
        copy.points[i] = em_sample(pts[i], dom, ps, sens, eps_ind / n, rng)
        spend(f"pivot[{i}]", eps_ind / n)

    for i in plan.nonpivots:
        dirs = {}
        for j in (i - 1, i + 1):
            if not 0 <= j < n:
                continue
            origin = copy.points[j]
            if ps.coincident(origin, pts[i]):
                # bearing undefined: index 0 of a north-referenced frame stands in
                frame = SectorFrame(origin, 0.0, g)
            else:
                frame = SectorFrame(origin, ps.bearing(origin, pts[i]), g)
            d_hat = krr_sample(0, g, eps_dir, rng)
            spend(f"direction[{j}->{i}]", eps_dir)
            dirs[(j, i)] = (frame, d_hat)
        copy.directions.update(dirs)
        cand = get_point_domain(i, pts, ps, dom, dirs)
        copy.domains[i] = cand
        copy.points[i] = em_sample(pts[i], cand, ps, ps.subset_diameter(cand), eps_rest / n, rng)
        spend(f"point[{i}]", eps_rest / n)
    return copy


def _as_points(c) -> list:
    return list(c.points) if isinstance(c, PerturbedCopy) else [int(p) for p in c]


def combine_optimal(copy1, copy2, ps: PointSet, domain=None) -> list:
    """Per position, the domain point minimizing the summed distance to both copies.

    The objective is separable, so the per-position argmin is the global one.
    Ties (within ``COMBINE_TOL_KM``) go to the lowest id.
    """
    a, b = _as_points(copy1), _as_points(copy2)
    if len(a) != len(b):
        raise InvalidParameterError(f"copies differ in length: {len(a)} vs {len(b)}")
    dom = ps.ids if domain is None else np.unique(np.asarray(domain, dtype=np.int64))
    return [
        int(kernels.argmin_pair_sum(ps.dist_row(x), ps.dist_row(y), dom, COMBINE_TOL_KM))
        for x, y in zip(a, b)
    ]


@dataclass
class MechanismResult:
    output: list
    granularity: Optional[int]
    ledger: BudgetLedger
    copies: tuple = ()
    regions: tuple = ()


def resolve_granularity(epsilon: float, mechanism: str, granularity: Optional[int],
                        candidates=DEFAULT_CANDIDATES) -> int:
    if granularity is not None:
        if granularity < 2:
            raise InvalidParameterError(f"granularity must be >= 2, got {granularity}")
        return int(granularity)
    return select_granularity(GranularityConfig(direction_epsilon(epsilon, mechanism), candidates))


def tp_perturb_detailed(traj: Sequence[int], ps: PointSet, epsilon: float, rng: RandomSource, *,
                        granularity: Optional[int] = None,
                        ledger: Optional[BudgetLedger] = None) -> MechanismResult:
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    pts = _check_traj(traj, ps)
    g = resolve_granularity(epsilon, "tp", granularity)
    ledger = BudgetLedger(epsilon) if ledger is None else ledger
    star = pivot_perturb(pts, ps.ids, ps, epsilon / 2, g, 1, rng.child("star"), ledger, "star")
    prime = pivot_perturb(pts, ps.ids, ps, epsilon / 2, g, 0, rng.child("prime"), ledger, "prime")
    out = combine_optimal(star, prime, ps, ps.ids)
    return MechanismResult(out, g, ledger, (star, prime))


def tp_perturb(traj: Sequence[int], ps: PointSet, epsilon: float, rng: RandomSource, *,
               granularity: Optional[int] = None, ledger: Optional[BudgetLedger] = None) -> list:
    """Pivot-sampling perturbation of one trajectory under epsilon-LDP."""
    return tp_perturb_detailed(traj, ps, epsilon, rng, granularity=granularity, ledger=ledger).output


def exp_baseline(traj: Sequence[int], ps: PointSet, epsilon: float, rng: RandomSource, *,
                 ledger: Optional[BudgetLedger] = None) -> list:
    """Each point through the exponential mechanism over the whole set with eps/|traj|."""
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    pts = _check_traj(traj, ps)
    per = epsilon / len(pts)
    out = []
    for i, p in enumerate(pts):
        out.append(em_sample(p, ps.ids, ps, ps.diameter_km, per, rng))
        if ledger is not None:
            ledger.spend(f"exp/point[{i}]", per)
    return out
