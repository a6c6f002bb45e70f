"""Geodesic primitives and the public point universe."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import kernels
from .errors import InvalidParameterError, UndefinedBearingError

EARTH_RADIUS_KM = 6371.0
# Above this size the distance matrix is not cached; rows are computed on demand.
MATRIX_CACHE_LIMIT = 4096


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise InvalidParameterError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidParameterError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon < 180.0:
            raise InvalidParameterError(f"longitude {self.lon} outside [-180, 180)")


def haversine(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of radius ``EARTH_RADIUS_KM``."""
    p1, p2 = math.radians(a.lat), math.radians(b.lat)
    dphi = p2 - p1
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlam / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(h, 1.0)))


def initial_bearing(origin: GeoPoint, target: GeoPoint) -> float:
    """Initial great-circle bearing in [-pi, pi), clockwise from true north.

    Raises UndefinedBearingError when the two points have identical coordinates.
    """
    if origin.lat == target.lat and origin.lon == target.lon:
        raise UndefinedBearingError()
    p1, p2 = math.radians(origin.lat), math.radians(target.lat)
    dlam = math.radians(target.lon - origin.lon)
    y = math.sin(dlam) * math.cos(p2)
    x = math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dlam)
    b = math.atan2(y, x)
    return b - 2 * math.pi if b >= math.pi else b


def ang_diff(a: float, b: float) -> float:
    """Signed smallest rotation from ``b`` to ``a``, in [-pi, pi)."""
    return (a - b + math.pi) % (2 * math.pi) - math.pi


@dataclass(frozen=True)
class Trajectory:
    """Ordered point ids into a PointSet, with optional epoch-second timestamps."""

    point_ids: tuple
    timestamps: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "point_ids", tuple(int(p) for p in self.point_ids))
        if len(self.point_ids) < 1:
            raise InvalidParameterError("trajectory must contain at least one point")
        if self.timestamps is not None:
            object.__setattr__(self, "timestamps", tuple(float(t) for t in self.timestamps))
            if len(self.timestamps) != len(self.point_ids):
                raise InvalidParameterError("timestamps and point ids differ in length")

    def __len__(self) -> int:
        return len(self.point_ids)

    def __iter__(self) -> Iterator[int]:
        return iter(self.point_ids)

    def __getitem__(self, i):
        return self.point_ids[i]


class PointSet:
    """Immutable, ordered set of locations with ids ``0..n-1``.

    The pairwise Haversine matrix is computed at construction for sets up to
    ``MATRIX_CACHE_LIMIT`` points; the bearing matrix is built lazily on first
    use. Both are read-only afterwards, so instances can be shared freely
    between threads.
    """

    def __init__(self, points: Iterable[GeoPoint] | None = None, *, lat=None, lon=None):
        if points is not None:
            pts = list(points)
            lat = np.array([p.lat for p in pts], dtype=np.float64)
            lon = np.array([p.lon for p in pts], dtype=np.float64)
        else:
            lat = np.asarray(lat, dtype=np.float64).copy()
            lon = np.asarray(lon, dtype=np.float64).copy()
            for a, b in zip(lat, lon):
                GeoPoint(float(a), float(b))
        if lat.shape[0] == 0:
            raise InvalidParameterError("point set must be non-empty")
        if lat.shape != lon.shape or lat.ndim != 1:
            raise InvalidParameterError("lat/lon must be 1-d arrays of equal length")
        self.lat = lat
        self.lon = lon
        self.lat_rad = np.ascontiguousarray(np.radians(lat))
        self.lon_rad = np.ascontiguousarray(np.radians(lon))
        for arr in (self.lat, self.lon, self.lat_rad, self.lon_rad):
            arr.flags.writeable = False
        self._dist: Optional[np.ndarray] = None
        self._bear: Optional[np.ndarray] = None
        self._lock = threading.Lock()
        if len(self) <= MATRIX_CACHE_LIMIT:
            self._dist = kernels.haversine_matrix(self.lat_rad, self.lon_rad, EARTH_RADIUS_KM)
            self._dist.flags.writeable = False
            self.diameter_km = float(self._dist.max())
        else:
            self.diameter_km = max(float(self.dist_row(i).max()) for i in range(len(self)))
        self.ids = np.arange(len(self), dtype=np.int64)
        self.ids.flags.writeable = False

    def __len__(self) -> int:
        return self.lat.shape[0]

    def __getitem__(self, i: int) -> GeoPoint:
        return GeoPoint(float(self.lat[i]), float(self.lon[i]))

    def __iter__(self) -> Iterator[GeoPoint]:
        return (self[i] for i in range(len(self)))

    def __repr__(self) -> str:
        return f"PointSet(n={len(self)}, diameter_km={self.diameter_km:.3f})"

    @property
    def points(self) -> list:
        return list(self)

    @property
    def distance_matrix(self) -> Optional[np.ndarray]:
        return self._dist

    def dist(self, i: int, j: int) -> float:
        if self._dist is not None:
            return float(self._dist[i, j])
        return haversine(self[i], self[j])

    def dist_row(self, i: int) -> np.ndarray:
        if self._dist is not None:
            return self._dist[i]
        return kernels.haversine_row(self.lat_rad, self.lon_rad, int(i), EARTH_RADIUS_KM)

    def bearing_row(self, i: int) -> np.ndarray:
        """Bearings from point ``i`` to all points; NaN for coincident coordinates."""
        if len(self) > MATRIX_CACHE_LIMIT:
            return kernels.bearing_row(self.lat_rad, self.lon_rad, int(i))
        if self._bear is None:
            with self._lock:
                if self._bear is None:
                    bear = kernels.bearing_matrix(self.lat_rad, self.lon_rad)
                    bear.flags.writeable = False
                    self._bear = bear
        return self._bear[i]

    def bearing(self, i: int, j: int) -> float:
        """Initial bearing from ``i`` to ``j``; raises UndefinedBearingError if coincident."""
        b = float(self.bearing_row(i)[j])
        if math.isnan(b):
            raise UndefinedBearingError()
        return b

    def coincident(self, i: int, j: int) -> bool:
        return bool(self.lat[i] == self.lat[j] and self.lon[i] == self.lon[j])

    def subset_diameter(self, ids: Sequence[int] | np.ndarray) -> float:
        idx = np.ascontiguousarray(ids, dtype=np.int64)
        if idx.shape[0] < 2:
            return 0.0
        if idx.shape[0] == len(self):
            return self.diameter_km
        if self._dist is not None:
            return float(kernels.subset_max(self._dist, idx))
        return max(float(self.dist_row(i)[idx].max()) for i in idx)

    def nearest(self, lat: float, lon: float) -> int:
        """Id of the member closest to (lat, lon); ties go to the lowest id."""
        p1 = math.radians(lat)
        h = (
            np.sin((self.lat_rad - p1) * 0.5) ** 2
            + math.cos(p1) * np.cos(self.lat_rad) * np.sin((self.lon_rad - math.radians(lon)) * 0.5) ** 2
        )
        d = 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(h, 1.0)))
        return int(np.argmin(d))

    def validate_ids(self, ids: Iterable[int]) -> None:
        n = len(self)
        for p in ids:
            if not 0 <= int(p) < n:
                raise InvalidParameterError(f"point id {p} not in PointSet of size {n}")


def point_set_diameter(ps: PointSet) -> float:
    """Maximum pairwise Haversine distance in km (0 for a singleton)."""
    return ps.diameter_km
