import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajldp import GeoPoint, PointSet, Trajectory, ang_diff, haversine, initial_bearing
from trajldp.errors import InvalidParameterError, UndefinedBearingError
from trajldp.geo import EARTH_RADIUS_KM, point_set_diameter

from .conftest import random_point_set

lat_st = st.floats(-89.0, 89.0)
lon_st = st.floats(-179.0, 179.0)
angle_st = st.floats(-math.pi, math.pi)


def test_haversine_quarter_meridian():
    d = haversine(GeoPoint(0, 0), GeoPoint(90, 0))
    assert d == pytest.approx(EARTH_RADIUS_KM * math.pi / 2, abs=1e-9)


def test_haversine_one_degree_on_equator():
    d = haversine(GeoPoint(0, 0), GeoPoint(0, 1))
    assert d == pytest.approx(2 * math.pi * EARTH_RADIUS_KM / 360, abs=1e-9)


def test_haversine_same_point_zero():
    p = GeoPoint(49.26, -123.25)
    assert haversine(p, p) == 0.0


def test_bearings_cardinal():
    o = GeoPoint(0, 0)
    assert initial_bearing(o, GeoPoint(1, 0)) == pytest.approx(0.0, abs=1e-12)
    assert initial_bearing(o, GeoPoint(0, 1)) == pytest.approx(math.pi / 2, abs=1e-12)
    assert initial_bearing(o, GeoPoint(0, -1)) == pytest.approx(-math.pi / 2, abs=1e-12)
    assert initial_bearing(o, GeoPoint(-1, 0)) == pytest.approx(-math.pi, abs=1e-12)


def test_bearing_coincident_raises():
    with pytest.raises(UndefinedBearingError):
        initial_bearing(GeoPoint(1, 2), GeoPoint(1, 2))


def test_geopoint_validation():
    for bad in [(91, 0), (-91, 0), (0, 180), (0, -181), (math.nan, 0), (0, math.inf)]:
        with pytest.raises(InvalidParameterError):
            GeoPoint(*bad)


def test_ang_diff_examples():
    assert ang_diff(0.1, 0.0) == pytest.approx(0.1)
    assert ang_diff(-math.pi + 0.1, math.pi - 0.1) == pytest.approx(0.2, abs=1e-12)
    assert abs(ang_diff(math.pi, 0.0)) == pytest.approx(math.pi)


def test_trajectory_requires_points():
    with pytest.raises(InvalidParameterError):
        Trajectory(())
    t = Trajectory((1, 2, 3))
    assert len(t) == 3 and list(t) == [1, 2, 3] and t[1] == 2


def test_diameter_singleton_and_pair():
    assert point_set_diameter(PointSet([GeoPoint(3, 4)])) == 0.0
    ps = PointSet([GeoPoint(0, 0), GeoPoint(0, 1)])
    assert point_set_diameter(ps) == pytest.approx(haversine(GeoPoint(0, 0), GeoPoint(0, 1)))


def test_empty_point_set_rejected():
    with pytest.raises(InvalidParameterError):
        PointSet([])


@pytest.mark.parametrize("n,seed", [(4, 0), (7, 1), (30, 2), (50, 3)])
def test_diameter_matches_brute_force(n, seed):
    ps = random_point_set(n, seed, spread_deg=1.0)
    pts = ps.points
    brute = max(haversine(a, b) for a, b in itertools.combinations(pts, 2))
    assert point_set_diameter(ps) == pytest.approx(brute, abs=1e-9)


def test_matrix_matches_scalar_and_is_symmetric(ps20):
    m = ps20.distance_matrix
    assert np.array_equal(m, m.T)
    assert np.all(np.diag(m) == 0)
    for i, j in [(0, 1), (5, 17), (19, 2)]:
        assert m[i, j] == pytest.approx(haversine(ps20[i], ps20[j]), abs=1e-9)
        assert ps20.bearing(i, j) == pytest.approx(initial_bearing(ps20[i], ps20[j]), abs=1e-12)


def test_bearing_row_nan_for_coincident():
    ps = PointSet([GeoPoint(1, 1), GeoPoint(1, 1), GeoPoint(2, 1)])
    row = ps.bearing_row(0)
    assert math.isnan(row[0]) and math.isnan(row[1]) and not math.isnan(row[2])
    with pytest.raises(UndefinedBearingError):
        ps.bearing(0, 1)
    assert ps.coincident(0, 1)


def test_nearest_ties_to_lowest_id():
    ps = PointSet([GeoPoint(0, 1), GeoPoint(0, -1), GeoPoint(0, 1)])
    assert ps.nearest(0.0, 0.0) == 0
    assert ps.nearest(0.0, 0.9) == 0


def test_subset_diameter(ps20):
    idx = [1, 4, 9, 13]
    brute = max(ps20.dist(a, b) for a, b in itertools.combinations(idx, 2))
    assert ps20.subset_diameter(idx) == pytest.approx(brute)
    assert ps20.subset_diameter([3]) == 0.0


def test_validate_ids(ps20):
    ps20.validate_ids([0, 19])
    with pytest.raises(InvalidParameterError):
        ps20.validate_ids([20])


def test_uncached_point_set_agrees(monkeypatch, ps20):
    import trajldp.geo as geo

    monkeypatch.setattr(geo, "MATRIX_CACHE_LIMIT", 5)
    big = PointSet(lat=ps20.lat, lon=ps20.lon)
    assert big.distance_matrix is None
    assert big.diameter_km == pytest.approx(ps20.diameter_km, abs=1e-9)
    assert np.allclose(big.dist_row(3), ps20.dist_row(3), atol=1e-9)
    assert np.allclose(big.bearing_row(3), ps20.bearing_row(3), equal_nan=True)
    assert big.subset_diameter([1, 2, 3]) == pytest.approx(ps20.subset_diameter([1, 2, 3]))


@settings(max_examples=200, deadline=None)
@given(lat_st, lon_st, lat_st, lon_st, lat_st, lon_st)
def test_triangle_inequality(a1, o1, a2, o2, a3, o3):
    a, b, c = GeoPoint(a1, o1), GeoPoint(a2, o2), GeoPoint(a3, o3)
    assert haversine(a, c) <= haversine(a, b) + haversine(b, c) + 1e-9


@settings(max_examples=200, deadline=None)
@given(lat_st, lon_st, lat_st, lon_st)
def test_haversine_symmetric_and_bounded(a1, o1, a2, o2):
    a, b = GeoPoint(a1, o1), GeoPoint(a2, o2)
    d = haversine(a, b)
    assert d == pytest.approx(haversine(b, a), abs=1e-9)
    assert 0 <= d <= math.pi * EARTH_RADIUS_KM + 1e-9


@settings(max_examples=300, deadline=None)
@given(angle_st, angle_st)
def test_ang_diff_antisymmetric(a, b):
    d = ang_diff(a, b)
    assert -math.pi <= d < math.pi
    if abs(d) < math.pi - 1e-9:
        assert d + ang_diff(b, a) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(lat_st, lon_st, lat_st, lon_st)
def test_bearing_range(a1, o1, a2, o2):
    a, b = GeoPoint(a1, o1), GeoPoint(a2, o2)
    if a == b:
        return
    assert -math.pi <= initial_bearing(a, b) < math.pi


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 50), st.integers(0, 10_000))
def test_diameter_brute_force_property(n, seed):
    ps = random_point_set(n, seed, spread_deg=0.5)
    brute = max(ps.dist(i, j) for i in range(n) for j in range(i + 1, n))
    assert ps.diameter_km == brute
