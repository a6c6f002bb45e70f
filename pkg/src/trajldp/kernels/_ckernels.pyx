# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels. Signatures match ``_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, asin, sqrt, atan2, ceil, exp, fmod, isnan, NAN, M_PI

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI


cdef inline double _hav(double la1, double lo1, double cl1, double la2, double lo2, double cl2,
                        double radius) nogil:
    cdef double s1 = sin((la2 - la1) * 0.5)
    cdef double s2 = sin((lo2 - lo1) * 0.5)
    cdef double a = s1 * s1 + cl1 * cl2 * s2 * s2
    if a > 1.0:
        a = 1.0
    return 2.0 * radius * asin(sqrt(a))


def haversine_row(const double[::1] lat, const double[::1] lon, Py_ssize_t i, double radius):
    cdef Py_ssize_t n = lat.shape[0], j
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double cli = cos(lat[i])
    with nogil:
        for j in range(n):
            o[j] = _hav(lat[i], lon[i], cli, lat[j], lon[j], cos(lat[j]), radius)
        o[i] = 0.0
    return out


def haversine_matrix(const double[::1] lat, const double[::1] lon, double radius):
    cdef Py_ssize_t n = lat.shape[0], i, j
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[::1] cl = np.cos(np.asarray(lat))
    cdef double d
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d = _hav(lat[i], lon[i], cl[i], lat[j], lon[j], cl[j], radius)
                o[i, j] = d
                o[j, i] = d
    return out


cdef inline double _bearing(double sl1, double cl1, double lo1, double sl2, double cl2, double lo2) nogil:
    cdef double dl = lo2 - lo1
    cdef double b = atan2(sin(dl) * cl2, cl1 * sl2 - sl1 * cl2 * cos(dl))
    if b >= M_PI:
        b -= TWO_PI
    return b


def bearing_row(const double[::1] lat, const double[::1] lon, Py_ssize_t i):
    cdef Py_ssize_t n = lat.shape[0], j
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] sl = np.sin(lat), cl = np.cos(lat)
    with nogil:
        for j in range(n):
            if lat[j] == lat[i] and lon[j] == lon[i]:
                o[j] = NAN
            else:
                o[j] = _bearing(sl[i], cl[i], lon[i], sl[j], cl[j], lon[j])
    return out


def bearing_matrix(const double[::1] lat, const double[::1] lon):
    cdef Py_ssize_t n = lat.shape[0], i, j
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[::1] sl = np.sin(lat), cl = np.cos(lat)
    with nogil:
        for i in range(n):
            for j in range(n):
                if lat[j] == lat[i] and lon[j] == lon[i]:
                    o[i, j] = NAN
                else:
                    o[i, j] = _bearing(sl[i], cl[i], lon[i], sl[j], cl[j], lon[j])
    return out


def sector_of(const double[::1] bearings, double ref, long g):
    cdef Py_ssize_t m = bearings.shape[0], k
    out = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef double width = TWO_PI / g, half = M_PI / g, diff, x, d
    with nogil:
        for k in range(m):
            if isnan(bearings[k]):
                o[k] = -1
                continue
            diff = fmod(bearings[k] - ref + M_PI, TWO_PI)
            if diff < 0.0:
                diff += TWO_PI
            diff -= M_PI
            x = diff + half
            if x < 0.0:
                x += TWO_PI
            if x >= TWO_PI:
                x -= TWO_PI
            if x == 0.0:
                d = 0.0
            else:
                d = ceil(x / width) - 1.0
            if d < 0.0:
                d = 0.0
            if d > g - 1:
                d = g - 1
            o[k] = <cnp.int64_t>d
    return out


def em_pick(const double[::1] dists, double scale, double u):
    cdef Py_ssize_t m = dists.shape[0], k
    cdef Py_ssize_t pick = m - 1
    cdef double dmin = dists[0], total = 0.0, target, acc = 0.0
    cdef double[::1] w = np.empty(m, dtype=np.float64)
    with nogil:
        for k in range(1, m):
            if dists[k] < dmin:
                dmin = dists[k]
        for k in range(m):
            w[k] = exp(-scale * (dists[k] - dmin))
            total += w[k]
        target = u * total
        for k in range(m):
            acc += w[k]
            if acc > target:
                pick = k
                break
    return pick


def argmin_pair_sum(const double[::1] row_a, const double[::1] row_b,
                    const cnp.int64_t[::1] domain, double tol):
    cdef Py_ssize_t m = domain.shape[0], k
    cdef double best = 1e300, s
    cdef cnp.int64_t r, pick = domain[m - 1]
    with nogil:
        for k in range(m):
            r = domain[k]
            s = row_a[r] + row_b[r]
            if s < best:
                best = s
        for k in range(m):
            r = domain[k]
            if row_a[r] + row_b[r] <= best + tol:
                pick = r
                break
    return int(pick)


def subset_max(const double[:, ::1] dmat, const cnp.int64_t[::1] idx):
    cdef Py_ssize_t m = idx.shape[0], a, b
    cdef double best = 0.0, d
    with nogil:
        for a in range(m):
            for b in range(a + 1, m):
                d = dmat[idx[a], idx[b]]
                if d > best:
                    best = d
    return best
