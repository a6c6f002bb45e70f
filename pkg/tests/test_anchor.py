import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajldp import BudgetLedger, GeoPoint, PointSet, RandomSource, haversine
from trajldp.anchor import (
    TEST_VALUES,
    atp_perturb,
    atp_perturb_detailed,
    calibrate_radius,
    calibrated_radius,
    calibration_center,
    compute_anchor,
    coverage_bound_estimate,
    coverage_radius,
    exact_miss_probability,
    restrict_trajectory_region,
)
from trajldp.errors import InvalidParameterError
from trajldp.ldp import sw_b

from .conftest import random_point_set


def _sigmoid(x):
    return 1 / (1 + math.exp(-x))


# -- anchor ----------------------------------------------------------------------------

def test_anchor_identical_points(ps20):
    alpha, pid = compute_anchor([7, 7, 7], ps20)
    assert pid == 7
    assert (alpha.lat, alpha.lon) == (ps20.lat[7], ps20.lon[7])


def test_anchor_equator_midpoint():
    ps = PointSet([GeoPoint(0, 0), GeoPoint(0, 2), GeoPoint(0, 1), GeoPoint(5, 5)])
    alpha, pid = compute_anchor([0, 1], ps)
    assert (alpha.lat, alpha.lon) == (0.0, 1.0) and pid == 2


@pytest.mark.parametrize("seed", range(5))
def test_anchor_nearest_brute_force(seed):
    ps = random_point_set(30, seed)
    traj = np.random.default_rng(seed).choice(30, 3, replace=False).tolist()
    alpha, pid = compute_anchor(traj, ps)
    assert alpha.lat == pytest.approx(np.mean(ps.lat[traj]))
    dists = [haversine(alpha, p) for p in ps]
    assert pid == int(np.argmin(dists))


# -- calibration ---------------------------------------------------------------------------

def test_calibration_hand_example():
    xi, beta, r = calibrated_radius(1.0, 2.0, 10.0, 1.0)
    assert beta == pytest.approx(0.5)
    assert xi == pytest.approx(_sigmoid(0.25), abs=1e-12)
    assert xi == pytest.approx(0.5622, abs=1e-4)
    assert r == pytest.approx(1.2068, abs=1e-3)


def test_calibration_no_gap():
    xi, beta, r = calibrated_radius(1.5, 1.5, 10.0, 1.0)
    assert xi == 0.0 and beta == 0.0 and r == 1.5


def test_calibration_vanishes_for_large_budget():
    eta, rmax = 4.0, 1.0
    _, _, r = calibrated_radius(rmax, eta, 10.0, 50.0)
    assert abs(r - rmax) < 1e-6 * abs(eta - rmax)


def test_calibration_above_center():
    # R_hat_max above eta: beta measured against the space left up to delta_r
    xi, beta, r = calibrated_radius(6.0, 2.0, 10.0, 1.0)
    assert beta == pytest.approx(0.5)
    assert xi < 0 and 2.0 < r < 6.0


def test_calibration_center_probe(ps50):
    eps2 = 1.0
    b = sw_b(eps2)
    delta_r = float(ps50.dist_row(0).max())
    r_hat_max = 0.4 * delta_r
    eta, probe = calibration_center(r_hat_max, delta_r, 0, ps50, eps2, b)
    assert set(probe.matched) <= set(TEST_VALUES)
    assert probe.lower <= probe.upper
    t = (2 * b + 1) * r_hat_max / delta_r - b
    assert all(v - b <= t <= v + b for v in probe.matched)
    row = ps50.dist_row(0)
    scaled = (2 * b + 1) * row / delta_r - b
    want = np.flatnonzero((scaled >= probe.lower) & (scaled <= probe.upper))
    assert list(probe.candidates) == list(want)
    assert row.min() <= eta <= row.max()
    # oracle: explicit weighted mean with band mass weights
    w = 2 * b * math.exp(eps2) / (2 * b * math.exp(eps2) + 1)
    inside = np.isin(np.arange(50), want)
    oracle = (w * row[inside].sum() + (1 - w) * row[~inside].sum()) / (
        w * inside.sum() + (1 - w) * (~inside).sum())
    assert eta == pytest.approx(oracle)


def test_calibration_center_empty_band_is_noop():
    ps = PointSet([GeoPoint(0, 0), GeoPoint(0, 1)])
    b = sw_b(2.0)
    # only distances 0 and the full width exist; a mid radius matches neither
    eta, probe = calibration_center(0.5 * ps.diameter_km, ps.diameter_km, 0, ps, 2.0, b)
    assert len(probe.candidates) == 0
    assert eta == 0.5 * ps.diameter_km


def test_calibrate_radius_rejects_zero_range(ps20):
    with pytest.raises(InvalidParameterError):
        calibrate_radius(0.0, 0.0, 0, ps20, 1.0, sw_b(1.0))


@settings(max_examples=300, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.01, 1.0), st.floats(0.1, 50.0), st.floats(0.01, 60.0))
def test_calibration_properties(frac_r, frac_eta, delta_r, eps2):
    r_max, eta = frac_r * delta_r, frac_eta * delta_r
    xi, beta, r = calibrated_radius(r_max, eta, delta_r, eps2)
    assert 0.0 <= beta <= 1.0
    assert 0.0 <= r <= delta_r
    assert abs(r - r_max) <= abs(eta - r_max) + 1e-12
    if r != r_max:
        assert math.copysign(1, r - r_max) == math.copysign(1, eta - r_max)


# -- region --------------------------------------------------------------------------------

def test_region_invariants_and_ledger(ps50):
    traj = [2, 9, 14, 30]
    for seed in range(10):
        led = BudgetLedger(1.0)
        reg = restrict_trajectory_region(traj, ps50, 1.0, RandomSource(seed), led, "s")
        row = ps50.dist_row(reg.perturbed_anchor)
        assert reg.delta_r == pytest.approx(row.max())
        assert reg.r_max == pytest.approx(row[traj].max())
        assert list(reg.restricted_domain) == list(np.flatnonzero(row <= reg.radius))
        assert reg.perturbed_anchor in reg.restricted_domain
        assert 0.0 <= reg.beta <= 1.0
        assert 0.0 <= reg.radius <= reg.delta_r
        assert 0.0 <= reg.r_hat_max <= reg.delta_r + 1e-12
        assert dict(led.entries) == {"s/anchor": 0.25, "s/radius": 0.75}


def test_region_huge_budget_concentrates(ps50):
    traj = [2, 9, 14, 30]
    reg = restrict_trajectory_region(traj, ps50, 1e6, RandomSource(0))
    assert reg.perturbed_anchor == reg.anchor_point
    assert reg.radius == pytest.approx(reg.r_max, abs=1e-6)


def test_region_everything_within_radius(ps50):
    reg = restrict_trajectory_region([0, 1], ps50, 1.0, RandomSource(0),
                                     fixed_radius_km=10 * ps50.diameter_km)
    assert list(reg.restricted_domain) == list(range(50))


def test_fixed_radius_leaves_radius_budget_unspent(ps50):
    led = BudgetLedger(1.0)
    reg = restrict_trajectory_region([0, 1], ps50, 1.0, RandomSource(0), led, fixed_radius_km=0.5)
    assert dict(led.entries) == {"anchor": 0.25}
    assert reg.radius == 0.5
    with pytest.raises(InvalidParameterError):
        restrict_trajectory_region([0, 1], ps50, 1.0, RandomSource(0), fixed_radius_km=-1)


@pytest.mark.parametrize("eps", [0.5, 1.0, 3.0])
def test_denormalization_endpoints(eps):
    b, delta_r = sw_b(eps), 7.0
    lo = (-b + b) * delta_r / (2 * b + 1)
    hi = (1 + b + b) * delta_r / (2 * b + 1)
    assert lo == 0.0 and hi == pytest.approx(delta_r)


# -- ATP -------------------------------------------------------------------------------------

def test_atp_budget_decomposition(ps50):
    eps, traj = 4.0, [0, 7, 14, 21, 28]
    res = atp_perturb_detailed(traj, ps50, eps, RandomSource(2))
    ent = dict(res.ledger.entries)
    for tag in ("star", "prime"):
        assert ent[f"{tag}/anchor"] + ent[f"{tag}/radius"] == pytest.approx(eps / 8)
        assert ent[f"{tag}/anchor"] == pytest.approx(eps / 32)
        dirs = [v for k, v in ent.items() if k.startswith(f"{tag}/direction")]
        assert dirs and all(v == pytest.approx(9 * eps / 32 / (2 * (len(traj) - 1))) for v in dirs)
    assert res.ledger.spent <= eps + 1e-12
    assert res.granularity == 4


def test_atp_single_point_region(ps50):
    traj = [3, 12, 40]
    res = atp_perturb_detailed(traj, ps50, 2.0, RandomSource(1), fixed_radius_km=0.0)
    for reg, copy in zip(res.regions, res.copies):
        assert list(reg.restricted_domain) == [reg.perturbed_anchor]
        for i, dom in copy.domains.items():
            assert set(dom) <= {traj[i], reg.perturbed_anchor}


def test_atp_deterministic_and_valid(ps50):
    traj = [5, 6, 7, 8]
    a = atp_perturb(traj, ps50, 5.0, RandomSource(77))
    assert a == atp_perturb(traj, ps50, 5.0, RandomSource(77))
    assert len(a) == 4 and all(0 <= p < 50 for p in a)
    with pytest.raises(InvalidParameterError):
        atp_perturb(traj, ps50, 0.0, RandomSource(0))


def test_atp_single_point_trajectory(ps50):
    res = atp_perturb_detailed([9], ps50, 2.0, RandomSource(0))
    assert len(res.output) == 1 and res.ledger.spent <= 2.0 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.sampled_from([1.0, 4.0, 10.0]), st.integers(0, 2**32 - 1))
def test_atp_never_overspends(n, eps, seed):
    ps = random_point_set(15, seed=seed % 7)
    traj = np.random.default_rng(seed).integers(0, 15, n).tolist()
    led = BudgetLedger(eps)
    atp_perturb(traj, ps, eps, RandomSource(seed), ledger=led)
    assert led.spent <= eps + 1e-12


# -- coverage bound ----------------------------------------------------------------------------

def test_coverage_radius_fixed_point(ps50):
    for eps, t in [(1, 1), (4, 2), (20, 1), (50, 3)]:
        r, u_x = coverage_radius(ps50, 0, eps, t)
        s = 2 * t * ps50.diameter_km / eps
        assert r + u_x == pytest.approx(s)
        row = ps50.dist_row(0)
        # u_x is the least utility strictly above -R
        assert -u_x == pytest.approx(row[row < r].max())


def test_coverage_large_t_trivial(ps50):
    est = coverage_bound_estimate(ps50, 0, 2.0, 5.0, 200, RandomSource(0))
    assert est.radius_km >= ps50.diameter_km
    assert est.empirical_miss == 0.0 and est.exact_miss == 0.0 and est.bound >= 0.0


def test_coverage_toy_within_bound(ps50):
    est = coverage_bound_estimate(ps50, 0, 2.0, 2.0, 10_000, RandomSource(1))
    assert est.empirical_miss <= est.bound
    assert est.exact_miss <= est.bound


def test_coverage_nontrivial_radius_exact_vs_monte_carlo():
    # tight cluster plus far outliers so the ball excludes something
    g = np.random.default_rng(0)
    lat = np.concatenate([g.normal(0, 0.001, 40), g.uniform(0.05, 0.06, 10)])
    lon = np.concatenate([g.normal(0, 0.001, 40), g.uniform(0.05, 0.06, 10)])
    ps = PointSet(lat=lat, lon=lon)
    est = coverage_bound_estimate(ps, 0, 40.0, 2.0, 10_000, RandomSource(3))
    assert est.outside > 0 and est.radius_km < ps.diameter_km
    assert est.exact_miss <= est.bound
    sigma = math.sqrt(max(est.exact_miss * (1 - est.exact_miss), 1e-12) / est.runs)
    assert abs(est.empirical_miss - est.exact_miss) <= 3 * sigma + 1e-4
    assert exact_miss_probability(ps, 0, 40.0, est.radius_km) == est.exact_miss


def test_coverage_rejects_bad_parameters(ps20):
    with pytest.raises(InvalidParameterError):
        coverage_radius(ps20, 0, 0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        coverage_radius(ps20, 0, 1.0, -1.0)
