"""Dataset files, check-in preprocessing and synthetic corpora.

File formats (CSV, header required):

* points:        ``id,lat,lon`` with ids ``0..n-1``
* trajectories:  ``traj_id,seq,point_id[,timestamp]`` sorted by (traj_id, seq)
* check-ins:     ``user_id,lat,lon,timestamp`` (epoch seconds)
"""
from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, SchemaError
from .geo import EARTH_RADIUS_KM, GeoPoint, PointSet, Trajectory
from .ldp import RandomSource

POINT_HEADER = ["id", "lat", "lon"]
TRAJ_HEADER = ["traj_id", "seq", "point_id"]
CHECKIN_HEADER = ["user_id", "lat", "lon", "timestamp"]

THIN_WINDOW_S = 600.0
SPLIT_GAP_S = 3 * 3600.0


@dataclass(frozen=True)
class RawCheckin:
    user_id: str
    lat: float
    lon: float
    timestamp: float

    def __post_init__(self):
        GeoPoint(self.lat, self.lon)
        if not math.isfinite(self.timestamp):
            raise InvalidParameterError(f"non-finite timestamp {self.timestamp}")


@dataclass(frozen=True)
class SynthConfig:
    n_trajectories: int
    length: int
    reach_bound_km: float = math.inf

    def __post_init__(self):
        if self.n_trajectories < 0:
            raise InvalidParameterError("n_trajectories must be >= 0")
        if self.length < 1:
            raise InvalidParameterError("trajectory length must be >= 1")
        if not self.reach_bound_km > 0:
            raise InvalidParameterError("reach bound must be positive")


# -- csv helpers ----------------------------------------------------------------

def _rows(path, expected: list, optional: Sequence[str] = ()):
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(path, 1, "missing header")
        header = [h.strip() for h in header]
        allowed = [expected + list(optional[:k]) for k in range(len(optional) + 1)]
        if header not in allowed:
            raise SchemaError(path, 1, f"expected header {','.join(expected)}, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
            yield lineno, header, [c.strip() for c in row]


def _num(path, lineno, text, kind=float):
    try:
        v = kind(text)
    except ValueError:
        raise SchemaError(path, lineno, f"cannot parse {text!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(v):
        raise SchemaError(path, lineno, f"non-finite value {text!r}")
    return v


def _fmt(x: float) -> str:
    return repr(float(x))


# -- point sets -------------------------------------------------------------------

def check_meridian(lons) -> None:
    lons = np.asarray(lons)
    if lons.size and lons.min() < -90.0 and lons.max() > 90.0:
        raise InvalidParameterError("point set appears to straddle the +/-180 meridian; not supported")


def load_point_set(path, bbox: Optional[tuple] = None) -> PointSet:
    """Read ``id,lat,lon`` rows. ``bbox`` = (min_lat, min_lon, max_lat, max_lon) rejects outliers."""
    by_id = {}
    for lineno, _, (pid, lat, lon) in _rows(path, POINT_HEADER):
        i = _num(path, lineno, pid, int)
        la, lo = _num(path, lineno, lat), _num(path, lineno, lon)
        try:
            GeoPoint(la, lo)
        except InvalidParameterError as exc:
            raise SchemaError(path, lineno, str(exc)) from None
        if bbox is not None and not (bbox[0] <= la <= bbox[2] and bbox[1] <= lo <= bbox[3]):
            raise SchemaError(path, lineno, f"point ({la}, {lo}) outside bounding box {bbox}")
        if i in by_id:
            raise SchemaError(path, lineno, f"duplicate id {i}")
        by_id[i] = (la, lo, lineno)
    if not by_id:
        raise SchemaError(path, None, "point file has no rows")
    n = len(by_id)
    if set(by_id) != set(range(n)):
        missing = min(set(range(n)) - set(by_id))
        raise SchemaError(path, None, f"ids must be contiguous 0..{n - 1}; {missing} missing")
    lat = np.array([by_id[i][0] for i in range(n)])
    lon = np.array([by_id[i][1] for i in range(n)])
    try:
        check_meridian(lon)
    except InvalidParameterError as exc:
        raise SchemaError(path, None, str(exc)) from None
    return PointSet(lat=lat, lon=lon)


def save_point_set(path, ps: PointSet) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POINT_HEADER)
        for i in range(len(ps)):
            w.writerow([i, _fmt(ps.lat[i]), _fmt(ps.lon[i])])


# -- trajectories -----------------------------------------------------------------

def load_trajectories(path, ps: PointSet) -> list:
    corpus = []
    cur_id, ids, stamps, last_seq = None, [], [], None
    order_seen = set()
    has_ts = False

    def flush():
        if cur_id is not None:
            corpus.append(Trajectory(tuple(ids), tuple(stamps) if has_ts else None))

    for lineno, header, row in _rows(path, TRAJ_HEADER, ("timestamp",)):
        has_ts = len(header) == 4
        tid = _num(path, lineno, row[0], int)
        seq = _num(path, lineno, row[1], int)
        pid = _num(path, lineno, row[2], int)
        if not 0 <= pid < len(ps):
            raise SchemaError(path, lineno, f"point id {pid} not in point set of size {len(ps)}")
        if tid != cur_id:
            if tid in order_seen or (cur_id is not None and tid < cur_id):
                raise SchemaError(path, lineno, f"rows not sorted by traj_id at {tid}")
            flush()
            order_seen.add(tid)
            cur_id, ids, stamps, last_seq = tid, [], [], None
        if last_seq is not None and seq <= last_seq:
            raise SchemaError(path, lineno, f"rows not sorted by seq within trajectory {tid}")
        last_seq = seq
        ids.append(pid)
        if has_ts:
            stamps.append(_num(path, lineno, row[3]))
    flush()
    return corpus


def save_trajectories(path, corpus: Iterable, timestamps: bool = False, traj_ids=None) -> None:
    corpus = list(corpus)
    ids = range(len(corpus)) if traj_ids is None else traj_ids
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJ_HEADER + (["timestamp"] if timestamps else []))
        for tid, t in zip(ids, corpus):
            stamps = getattr(t, "timestamps", None) if timestamps else None
            for seq, pid in enumerate(t):
                row = [tid, seq, int(pid)]
                if timestamps:
                    if stamps is None:
                        raise InvalidParameterError(f"trajectory {tid} has no timestamps")
                    row.append(_fmt(stamps[seq]))
                w.writerow(row)


# -- check-ins ------------------------------------------------------------------

def load_checkins(path) -> list:
    out = []
    for lineno, _, (uid, lat, lon, ts) in _rows(path, CHECKIN_HEADER):
        try:
            out.append(RawCheckin(uid, _num(path, lineno, lat), _num(path, lineno, lon),
                                  _num(path, lineno, ts)))
        except InvalidParameterError as exc:
            raise SchemaError(path, lineno, str(exc)) from None
    return out


def save_checkins(path, raw: Iterable[RawCheckin]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CHECKIN_HEADER)
        for c in raw:
            w.writerow([c.user_id, _fmt(c.lat), _fmt(c.lon), _fmt(c.timestamp)])


def top_k_locations(raw: Sequence[RawCheckin], k: int) -> PointSet:
    """The ``k`` most visited coordinates as a PointSet, most popular first.

    Ties are broken by first appearance in ``raw``.
    """
    counts = Counter((c.lat, c.lon) for c in raw)
    if not 1 <= k <= len(counts):
        raise InvalidParameterError(f"k={k} must be in 1..{len(counts)} distinct locations")
    first = {}
    for c in raw:
        first.setdefault((c.lat, c.lon), len(first))
    ranked = sorted(counts, key=lambda loc: (-counts[loc], first[loc]))[:k]
    return PointSet([GeoPoint(la, lo) for la, lo in ranked])


def top_k_points(corpus: Sequence, ps: PointSet, k: int) -> tuple:
    """The ``k`` most visited members of ``ps`` (ties to lower id), re-indexed by rank.

    Returns ``(PointSet, mapping)`` where ``mapping[old_id]`` is the new id or -1.
    """
    if not 1 <= k <= len(ps):
        raise InvalidParameterError(f"k={k} must be in 1..{len(ps)}")
    counts = np.zeros(len(ps), dtype=np.int64)
    for t in corpus:
        np.add.at(counts, np.asarray(list(t), dtype=np.int64), 1)
    keep = np.lexsort((np.arange(len(ps)), -counts))[:k]
    mapping = np.full(len(ps), -1, dtype=np.int64)
    mapping[keep] = np.arange(k)
    return PointSet(lat=ps.lat[keep], lon=ps.lon[keep]), mapping


def restrict_corpus(corpus: Sequence, mapping: np.ndarray) -> list:
    """Re-index trajectories through ``mapping``, dropping unmapped points and empty results."""
    out = []
    for t in corpus:
        stamps = getattr(t, "timestamps", None)
        kept = [(int(mapping[p]), None if stamps is None else stamps[i])
                for i, p in enumerate(t) if mapping[p] >= 0]
        if kept:
            out.append(Trajectory(tuple(p for p, _ in kept),
                                  None if stamps is None else tuple(s for _, s in kept)))
    return out


def thin_and_split(points: Sequence[int], stamps: Sequence[float], rng: RandomSource,
                   window_s: float = THIN_WINDOW_S, gap_s: float = SPLIT_GAP_S) -> list:
    """Thin check-ins closer than ``window_s`` to one survivor, then split on gaps > ``gap_s``.

    Input must be in time order. Scanning forward, whenever the next check-in is
    within the window of the last retained one, one of the two is deleted at
    random; a single pass leaves no close pair behind.
    """
    kept: list = []
    for p, ts in zip(points, stamps):
        if kept and ts - kept[-1][1] < window_s:
            if rng.random() < 0.5:
                kept[-1] = (p, ts)
            continue
        kept.append((p, ts))
    out, cur = [], []
    for p, ts in kept:
        if cur and ts - cur[-1][1] > gap_s:
            out.append(cur)
            cur = []
        cur.append((p, ts))
    if cur:
        out.append(cur)
    return [Trajectory(tuple(p for p, _ in seg), tuple(s for _, s in seg)) for seg in out]


def preprocess(raw: Sequence[RawCheckin], ps: PointSet, rng: RandomSource) -> list:
    """Turn raw check-ins into trajectories over ``ps``.

    Check-ins whose coordinates are not members of ``ps`` are dropped. Users are
    processed in sorted order, each with its own derived random stream.
    """
    index = {}
    for i in range(len(ps)):
        index.setdefault((float(ps.lat[i]), float(ps.lon[i])), i)
    per_user = defaultdict(list)
    for c in raw:
        pid = index.get((c.lat, c.lon))
        if pid is not None:
            per_user[c.user_id].append((c.timestamp, pid))
    corpus = []
    for uid in sorted(per_user):
        seq = sorted(per_user[uid], key=lambda x: x[0])
        corpus.extend(thin_and_split([p for _, p in seq], [t for t, _ in seq], rng.child("user", uid)))
    return corpus


# -- synthetic corpora ---------------------------------------------------------------

KM_PER_DEG = EARTH_RADIUS_KM * math.pi / 180.0


def synthetic_point_set(n: int, rng: RandomSource, center: tuple = (49.2606, -123.2460),
                        width_km: float = 3.0, height_km: float = 2.5) -> PointSet:
    """Jittered-grid point set covering a ``width_km`` x ``height_km`` box.

    The default box sits on a university campus, mimicking a building map.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    cols = max(1, math.ceil(math.sqrt(n * width_km / height_km)))
    rows = math.ceil(n / cols)
    cells = rng.gen.permutation(rows * cols)[:n]
    cw, ch = width_km / cols, height_km / rows
    r, c = np.divmod(np.sort(cells), cols)
    jitter = rng.gen.uniform(-0.4, 0.4, size=(n, 2))
    x = (c + 0.5 + jitter[:, 0]) * cw - width_km / 2
    y = (r + 0.5 + jitter[:, 1]) * ch - height_km / 2
    lat = center[0] + y / KM_PER_DEG
    lon = center[1] + x / (KM_PER_DEG * math.cos(math.radians(center[0])))
    return PointSet(lat=lat, lon=lon)


def generate_synthetic(ps: PointSet, cfg: SynthConfig, rng: RandomSource,
                       max_start_tries: int = 1000) -> list:
    """Random walks of exactly ``cfg.length`` points whose steps respect the reach bound.

    Each step moves to a different point chosen uniformly among those within
    ``cfg.reach_bound_km`` of the current one.
    """
    n = len(ps)
    ids = np.arange(n)
    neighbors = []
    for i in range(n):
        row = ps.dist_row(i)
        neighbors.append(ids[(row <= cfg.reach_bound_km) & (ids != i)])
    if cfg.length > 1 and not any(len(nb) for nb in neighbors):
        raise InvalidParameterError(
            f"no point has a neighbour within {cfg.reach_bound_km} km; cannot generate")
    corpus = []
    for t in range(cfg.n_trajectories):
        r = rng.child("traj", t)
        for _ in range(max_start_tries):
            cur = r.integers(0, n)
            if cfg.length == 1 or len(neighbors[cur]):
                break
        else:
            raise InvalidParameterError("could not find a start point with an in-bound successor")
        path = [cur]
        for _ in range(cfg.length - 1):
            nb = neighbors[cur]
            cur = int(nb[r.integers(0, len(nb))])
            path.append(cur)
        corpus.append(Trajectory(tuple(path)))
    return corpus
