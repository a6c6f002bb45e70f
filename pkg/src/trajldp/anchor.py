"""Anchor-based pivot sampling (ATP) and the adaptive trajectory region."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameterError
from .geo import GeoPoint, PointSet
from .ldp import (
    BudgetLedger,
    RandomSource,
    em_probabilities,
    em_sample,
    sw_b,
    sw_band_mass,
    sw_sample,
)
from .pivot import MechanismResult, _check_traj, combine_optimal, pivot_perturb, resolve_granularity

TEST_VALUES = tuple(0.1 * k for k in range(11))


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


@dataclass
class CalibrationProbe:
    test_values: tuple
    matched: tuple
    lower: float
    upper: float
    candidates: np.ndarray


@dataclass
class AnchorRegion:
    anchor: GeoPoint
    anchor_point: int
    perturbed_anchor: int
    r_max: float
    delta_r: float
    r_hat_max: float
    eta: float
    xi: float
    beta: float
    radius: float
    restricted_domain: np.ndarray
    probe: Optional[CalibrationProbe] = None
    entries: list = field(default_factory=list)


def compute_anchor(traj: Sequence[int], ps: PointSet) -> tuple:
    """Coordinate mean of the trajectory and the nearest member of ``ps`` (lowest id on ties)."""
    pts = _check_traj(traj, ps)
    lat = float(np.mean(ps.lat[pts]))
    lon = float(np.mean(ps.lon[pts]))
    return GeoPoint(lat, lon), ps.nearest(lat, lon)


def calibration_center(r_hat_max: float, delta_r: float, perturbed_anchor: int, ps: PointSet,
                       epsilon2: float, b: float) -> tuple:
    """Weighted mean distance from the perturbed anchor, favouring the plausible band.

    Returns ``(eta, probe)``.
    """
    t_star = (2 * b + 1) * r_hat_max / delta_r - b
    matched = tuple(v for v in TEST_VALUES if v - b <= t_star <= v + b)
    if not matched:
        matched = (min(TEST_VALUES, key=lambda v: abs(v - t_star)),)
    lo, hi = min(matched), max(matched)
    row = ps.dist_row(perturbed_anchor)
    scaled = (2 * b + 1) * row / delta_r - b
    inside = (scaled >= lo) & (scaled <= hi)
    probe = CalibrationProbe(TEST_VALUES, matched, lo, hi, ps.ids[inside])
    n_in = int(inside.sum())
    if n_in == 0:
        return r_hat_max, probe
    # band probability mass, so both weights stay in [0, 1]
    w = sw_band_mass(epsilon2)
    num = w * float(row[inside].sum()) + (1 - w) * float(row[~inside].sum())
    den = w * n_in + (1 - w) * (len(ps) - n_in)
    return num / den, probe


def calibrated_radius(r_hat_max: float, eta: float, delta_r: float, epsilon2: float) -> tuple:
    """Pull the perturbed radius toward ``eta``. Returns ``(xi, beta, radius)``."""
    if r_hat_max <= eta:
        beta = (eta - r_hat_max) / eta if eta > 0 else 0.0
    else:
        beta = (r_hat_max - eta) / (delta_r - eta) if delta_r > eta else 1.0
    beta = min(max(beta, 0.0), 1.0)
    xi = (eta - r_hat_max) * _sigmoid(beta / 2)
    radius = r_hat_max + xi * math.exp(-epsilon2)
    return xi, beta, min(max(radius, 0.0), delta_r)


def calibrate_radius(r_hat_max: float, delta_r: float, perturbed_anchor: int, ps: PointSet,
                     epsilon2: float, b: float) -> tuple:
    """Returns ``(eta, xi, beta, radius)``."""
    if delta_r <= 0:
        raise InvalidParameterError(f"delta_r must be positive, got {delta_r}")
    eta, _ = calibration_center(r_hat_max, delta_r, perturbed_anchor, ps, epsilon2, b)
    xi, beta, radius = calibrated_radius(r_hat_max, eta, delta_r, epsilon2)
    return eta, xi, beta, radius


def restrict_trajectory_region(traj: Sequence[int], ps: PointSet, epsilon_r: float,
                               rng: RandomSource, ledger: Optional[BudgetLedger] = None,
                               tag: str = "", fixed_radius_km: Optional[float] = None) -> AnchorRegion:
    """Perturbed circular region around the trajectory anchor.

    A quarter of ``epsilon_r`` perturbs the anchor point, the rest perturbs the
    radius. With ``fixed_radius_km`` the radius is not perturbed and its share
    of the budget is left unspent.
    """
    if not epsilon_r > 0:
        raise InvalidParameterError(f"epsilon_r must be positive, got {epsilon_r}")
    pts = _check_traj(traj, ps)
    entries = []

    def spend(label, eps):
        label = f"{tag}/{label}" if tag else label
        if ledger is not None:
            ledger.spend(label, eps)
        entries.append((label, eps))

    eps1 = 0.25 * epsilon_r
    eps2 = epsilon_r - eps1
    alpha, p_alpha = compute_anchor(pts, ps)
    p_hat = em_sample(p_alpha, ps.ids, ps, ps.diameter_km, eps1, rng)
    spend("anchor", eps1)
    row = ps.dist_row(p_hat)
    r_max = float(row[pts].max())
    delta_r = float(row.max())

    if fixed_radius_km is not None:
        if fixed_radius_km < 0:
            raise InvalidParameterError(f"fixed radius must be >= 0, got {fixed_radius_km}")
        radius = float(fixed_radius_km)
        region = AnchorRegion(alpha, p_alpha, p_hat, r_max, delta_r, math.nan, math.nan,
                              math.nan, math.nan, radius, ps.ids[row <= radius], None, entries)
        return region

    x = r_max / delta_r if delta_r > 0 else 0.0
    r_hat = sw_sample(min(x, 1.0), eps2, rng)
    spend("radius", eps2)
    b = sw_b(eps2)
    r_hat_max = (r_hat + b) * delta_r / (2 * b + 1)
    if delta_r > 0:
        eta, probe = calibration_center(r_hat_max, delta_r, p_hat, ps, eps2, b)
        xi, beta, radius = calibrated_radius(r_hat_max, eta, delta_r, eps2)
    else:
        eta, xi, beta, radius, probe = 0.0, 0.0, 0.0, 0.0, None
    return AnchorRegion(alpha, p_alpha, p_hat, r_max, delta_r, r_hat_max, eta, xi, beta,
                        radius, ps.ids[row <= radius], probe, entries)


def atp_perturb_detailed(traj: Sequence[int], ps: PointSet, epsilon: float, rng: RandomSource, *,
                         granularity: Optional[int] = None, fixed_radius_km: Optional[float] = None,
                         ledger: Optional[BudgetLedger] = None) -> MechanismResult:
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    pts = _check_traj(traj, ps)
    g = resolve_granularity(epsilon, "atp", granularity)
    ledger = BudgetLedger(epsilon) if ledger is None else ledger
    eps_r = 0.25 * epsilon
    eps3 = epsilon - eps_r
    reg_star = restrict_trajectory_region(pts, ps, eps_r / 2, rng.child("star", "region"),
                                          ledger, "star", fixed_radius_km)
    reg_prime = restrict_trajectory_region(pts, ps, eps_r / 2, rng.child("prime", "region"),
                                           ledger, "prime", fixed_radius_km)
    star = pivot_perturb(pts, reg_star.restricted_domain, ps, eps3 / 2, g, 1,
                         rng.child("star", "pivot"), ledger, "star")
    prime = pivot_perturb(pts, reg_prime.restricted_domain, ps, eps3 / 2, g, 0,
                          rng.child("prime", "pivot"), ledger, "prime")
    out = combine_optimal(star, prime, ps, ps.ids)
    return MechanismResult(out, g, ledger, (star, prime), (reg_star, reg_prime))


def atp_perturb(traj: Sequence[int], ps: PointSet, epsilon: float, rng: RandomSource, *,
                granularity: Optional[int] = None, fixed_radius_km: Optional[float] = None,
                ledger: Optional[BudgetLedger] = None) -> list:
    """Anchor-based pivot sampling of one trajectory under epsilon-LDP."""
    return atp_perturb_detailed(traj, ps, epsilon, rng, granularity=granularity,
                                fixed_radius_km=fixed_radius_km, ledger=ledger).output


# -- coverage of the perturbed anchor -----------------------------------------

@dataclass(frozen=True)
class CoverageEstimate:
    radius_km: float
    u_x: float
    inside: int
    outside: int
    exact_miss: float
    empirical_miss: float
    bound: float
    runs: int


def coverage_radius(ps: PointSet, anchor: int, epsilon: float, t: float) -> tuple:
    """Smallest R with R + u_x = 2 t du / eps, u_x being the least score above -R.

    Returns ``(R, u_x)``. With u = -dist, u_x = -(largest distance below R), so
    R must sit exactly ``2 t du / eps`` past some attained distance with no
    other distance in between.
    """
    if not epsilon > 0 or not t > 0:
        raise InvalidParameterError(f"epsilon and t must be positive, got {epsilon}, {t}")
    s = 2.0 * t * ps.diameter_km / epsilon
    dists = np.unique(ps.dist_row(anchor))
    for k, dk in enumerate(dists):
        nxt = dists[k + 1] if k + 1 < dists.shape[0] else math.inf
        if dk + s < nxt:
            radius = float(dk + s)
            break
    if radius <= 0:
        raise InvalidParameterError(f"degenerate coverage radius {radius}")
    return radius, -float(dk)


def exact_miss_probability(ps: PointSet, anchor: int, epsilon: float, radius_km: float) -> float:
    """P[dist(anchor, EM(anchor)) > radius] under the full-set exponential mechanism."""
    probs = em_probabilities(anchor, ps.ids, ps, ps.diameter_km, epsilon)
    return float(probs[ps.dist_row(anchor) > radius_km].sum())


def coverage_bound_estimate(ps: PointSet, anchor: int, epsilon: float, t: float, runs: int,
                            rng: RandomSource) -> CoverageEstimate:
    """Monte-Carlo and exact miss rate of the perturbed anchor versus the closed-form bound."""
    radius, u_x = coverage_radius(ps, anchor, epsilon, t)
    row = ps.dist_row(anchor)
    inside = int((row <= radius).sum())
    outside = len(ps) - inside
    bound = outside / inside * math.exp(-t)
    misses = 0
    for _ in range(runs):
        if row[em_sample(anchor, ps.ids, ps, ps.diameter_km, epsilon, rng)] > radius:
            misses += 1
    exact = exact_miss_probability(ps, anchor, epsilon, radius)
    return CoverageEstimate(radius, u_x, inside, outside, exact, misses / runs if runs else 0.0,
                            bound, runs)
