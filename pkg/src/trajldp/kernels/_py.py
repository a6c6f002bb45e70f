"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors every signature.
Angles are radians, distances are in the unit of ``radius``.
"""
import math

import numpy as np

TWO_PI = 2.0 * math.pi


def haversine_row(lat, lon, i, radius):
    dphi = lat - lat[i]
    dlam = lon - lon[i]
    a = np.sin(dphi * 0.5) ** 2 + math.cos(lat[i]) * np.cos(lat) * np.sin(dlam * 0.5) ** 2
    out = 2.0 * radius * np.arcsin(np.sqrt(np.minimum(a, 1.0)))
    out[i] = 0.0
    return out


def haversine_matrix(lat, lon, radius):
    n = lat.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        out[i] = haversine_row(lat, lon, i, radius)
    # exact symmetry: keep the upper triangle and mirror it
    iu = np.triu_indices(n, 1)
    out.T[iu] = out[iu]
    return out


def bearing_row(lat, lon, i):
    """Initial great-circle bearing from point ``i`` to every point; NaN where coincident."""
    dlam = lon - lon[i]
    y = np.sin(dlam) * np.cos(lat)
    x = math.cos(lat[i]) * np.sin(lat) - math.sin(lat[i]) * np.cos(lat) * np.cos(dlam)
    out = np.arctan2(y, x)
    out[out >= math.pi] -= TWO_PI
    out[(lat == lat[i]) & (lon == lon[i])] = np.nan
    return out


def bearing_matrix(lat, lon):
    n = lat.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        out[i] = bearing_row(lat, lon, i)
    return out


def sector_of(bearings, ref, g):
    """Sector index of each bearing relative to ``ref``; -1 for NaN bearings.

    Sector d spans [(2d-1)pi/g, (2d+1)pi/g] around ``ref``; a bearing exactly on
    a boundary goes to the lower index of the two adjacent sectors.
    """
    width = TWO_PI / g
    diff = np.mod(bearings - ref + math.pi, TWO_PI) - math.pi
    x = diff + math.pi / g
    x = np.where(x < 0.0, x + TWO_PI, x)
    x = np.where(x >= TWO_PI, x - TWO_PI, x)
    d = np.ceil(x / width) - 1.0
    d = np.where(x == 0.0, 0.0, d)
    d = np.clip(d, 0, g - 1)
    out = np.where(np.isnan(bearings), -1, d).astype(np.int64)
    return out


def em_pick(dists, scale, u):
    """Inverse-CDF draw with weights exp(-scale * d), shifted by the minimum distance."""
    w = np.exp(-scale * (dists - dists.min()))
    cdf = np.cumsum(w)
    k = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(k, dists.shape[0] - 1)


def argmin_pair_sum(row_a, row_b, domain, tol):
    """Lowest-id domain member minimizing row_a + row_b, within ``tol`` of the minimum.

    ``domain`` must be sorted ascending.
    """
    s = row_a[domain] + row_b[domain]
    best = s.min()
    return int(domain[np.flatnonzero(s <= best + tol)[0]])


def subset_max(dmat, idx):
    if idx.shape[0] < 2:
        return 0.0
    return float(dmat[np.ix_(idx, idx)].max())
