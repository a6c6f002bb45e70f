import math

import numpy as np
import pytest

from trajldp import PointSet, RandomSource
from trajldp.data_io import synthetic_point_set

# Filled by test_acceptance; printed at the end of the run.
ACCEPTANCE_LINES: dict = {}


def random_point_set(n, seed=0, center=(40.75, -73.98), spread_deg=0.02):
    g = np.random.default_rng(seed)
    lat = center[0] + g.uniform(-spread_deg, spread_deg, n)
    lon = center[1] + g.uniform(-spread_deg, spread_deg, n)
    return PointSet(lat=lat, lon=lon)


@pytest.fixture
def ps20():
    return random_point_set(20, seed=3)


@pytest.fixture
def ps50():
    return random_point_set(50, seed=11)


@pytest.fixture(scope="session")
def campus():
    return synthetic_point_set(262, RandomSource(5).child("points"))


def km_offset(lat0, lon0, north_km, east_km):
    """Small-offset helper: point ``north_km`` / ``east_km`` away from (lat0, lon0)."""
    dlat = north_km / 111.19492664455873
    dlon = east_km / (111.19492664455873 * math.cos(math.radians(lat0)))
    return lat0 + dlat, lon0 + dlon


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


def destination(lat0, lon0, bearing, dist_km, radius=6371.0):
    """Point reached from (lat0, lon0) along a great circle with the given initial bearing."""
    p1, l1 = math.radians(lat0), math.radians(lon0)
    d = dist_km / radius
    p2 = math.asin(math.sin(p1) * math.cos(d) + math.cos(p1) * math.sin(d) * math.cos(bearing))
    l2 = l1 + math.atan2(math.sin(bearing) * math.sin(d) * math.cos(p1),
                         math.cos(d) - math.sin(p1) * math.sin(p2))
    return math.degrees(p2), (math.degrees(l2) + 180.0) % 360.0 - 180.0
