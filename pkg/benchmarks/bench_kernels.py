"""Time the Cython kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--points 1000] [--repeat 5]

Prints one line per kernel with the best-of-``repeat`` time for each backend
and the speedup, then an end-to-end TP and ATP corpus perturbation under each
backend.
"""
from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from trajldp import kernels
from trajldp.data_io import SynthConfig, generate_synthetic, synthetic_point_set
from trajldp.experiment import perturb_corpus
from trajldp.geo import EARTH_RADIUS_KM, PointSet
from trajldp.ldp import RandomSource


def best(fn, number: int, repeat: int) -> float:
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def kernel_cases(ps: PointSet, rng: np.random.Generator):
    lat, lon = ps.lat_rad, ps.lon_rad
    n = lat.shape[0]
    dist = kernels.get("haversine_matrix", "python")(lat, lon, EARTH_RADIUS_KM)
    bear = kernels.get("bearing_row", "python")(lat, lon, 0)
    bear[0] = 0.0
    row_a, row_b = dist[1].copy(), dist[2].copy()
    domain = np.sort(rng.choice(n, size=n // 4, replace=False)).astype(np.int64)
    subset = np.sort(rng.choice(n, size=min(n, 200), replace=False)).astype(np.int64)
    return [
        ("haversine_row", lambda k: k(lat, lon, 0, EARTH_RADIUS_KM), 200),
        ("haversine_matrix", lambda k: k(lat, lon, EARTH_RADIUS_KM), 1),
        ("bearing_row", lambda k: k(lat, lon, 0), 200),
        ("bearing_matrix", lambda k: k(lat, lon), 1),
        ("sector_of", lambda k: k(bear, 0.3, 6), 500),
        ("em_pick", lambda k: k(row_a, 1.7, 0.42), 500),
        ("argmin_pair_sum", lambda k: k(row_a, row_b, domain, 1e-9), 500),
        ("subset_max", lambda k: k(dist, subset), 50),
    ]


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=1000)
    ap.add_argument("--trajectories", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("Cython kernels are not built; only the numpy fallback is timed.")
    src = RandomSource(args.seed)
    ps = synthetic_point_set(args.points, src.child("points"))
    rng = np.random.default_rng(args.seed)

    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, call, number in kernel_cases(ps, rng):
        times = [best(lambda: call(kernels.get(name, b)), number, args.repeat) for b in backends]
        speed = f"{times[-1] / times[0]:>9.1f}x" if len(times) == 2 else ""
        print(f"{name:<18}" + "".join(f"{t * 1e6:>10.1f}us" for t in times) + speed)

    corpus = generate_synthetic(ps, SynthConfig(args.trajectories, 5, 1.0), src.child("trajectories"))
    original = kernels.BACKEND
    for mech in ("tp", "atp"):
        times = []
        for b in backends:
            kernels.use_backend(b)
            # a fresh point set so cached matrices are rebuilt with this backend
            fresh = PointSet(lat=np.degrees(ps.lat_rad), lon=np.degrees(ps.lon_rad))
            times.append(best(lambda: perturb_corpus(corpus, fresh, mech, 5.0, args.seed), 1, args.repeat))
        speed = f"{times[-1] / times[0]:>9.1f}x" if len(times) == 2 else ""
        label = f"{mech} x{len(corpus)}"
        print(f"{label:<18}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times) + speed)
    kernels.use_backend(original)


if __name__ == "__main__":
    main()
