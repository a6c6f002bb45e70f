"""Batch perturbation and epsilon sweeps over a corpus."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from .anchor import atp_perturb
from .errors import InvalidParameterError
from .geo import PointSet
from .ldp import BudgetLedger, RandomSource
from .metrics import evaluate
from .pivot import exp_baseline, resolve_granularity, tp_perturb

MECHANISMS = ("exp", "tp", "atp")
DEFAULT_EPSILONS = tuple(float(e) for e in range(1, 11))
DEFAULT_DELTAS = (1.0, 2.0, 4.0)
DEFAULT_ACD_FRACTION = 0.5


def trajectory_rng(seed: int, mechanism: str, epsilon: float, run: int, index: int) -> RandomSource:
    """Stream for one trajectory of one run; independent of every other (run, index)."""
    return RandomSource(seed).child(mechanism, float(epsilon), int(run), int(index))


def perturb_trajectory(mechanism: str, traj, ps: PointSet, epsilon: float, rng: RandomSource, *,
                       granularity: Optional[int] = None, fixed_radius_km: Optional[float] = None,
                       ledger: Optional[BudgetLedger] = None) -> list:
    if mechanism == "exp":
        return exp_baseline(traj, ps, epsilon, rng, ledger=ledger)
    if mechanism == "tp":
        return tp_perturb(traj, ps, epsilon, rng, granularity=granularity, ledger=ledger)
    if mechanism == "atp":
        return atp_perturb(traj, ps, epsilon, rng, granularity=granularity,
                           fixed_radius_km=fixed_radius_km, ledger=ledger)
    raise InvalidParameterError(f"unknown mechanism {mechanism!r}; choose from {MECHANISMS}")


def perturb_corpus(corpus: Sequence, ps: PointSet, mechanism: str, epsilon: float, seed: int,
                   run: int = 0, *, threads: int = 1, granularity: Optional[int] = None,
                   fixed_radius_km: Optional[float] = None) -> list:
    """Perturb every trajectory; output order and content do not depend on ``threads``."""
    if mechanism not in MECHANISMS:
        raise InvalidParameterError(f"unknown mechanism {mechanism!r}; choose from {MECHANISMS}")
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    if mechanism != "exp":
        granularity = resolve_granularity(epsilon, mechanism, granularity)

    def one(item):
        k, traj = item
        rng = trajectory_rng(seed, mechanism, epsilon, run, k)
        ledger = BudgetLedger(epsilon)
        return perturb_trajectory(mechanism, traj, ps, epsilon, rng, granularity=granularity,
                                  fixed_radius_km=fixed_radius_km, ledger=ledger)

    items = list(enumerate(corpus))
    if threads <= 1:
        return [one(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, items))


SWEEP_HEADER = ["mechanism", "epsilon", "run", "metric", "param", "value"]
SUMMARY_HEADER = ["mechanism", "epsilon", "metric", "param", "mean", "stderr", "runs"]


def sweep(corpus: Sequence, ps: PointSet, mechanisms=MECHANISMS, epsilons=DEFAULT_EPSILONS,
          runs: int = 5, seed: int = 0, deltas=DEFAULT_DELTAS, top_fraction=DEFAULT_ACD_FRACTION,
          *, threads: int = 1, granularity: Optional[int] = None,
          fixed_radius_km: Optional[float] = None) -> tuple:
    """Run every (mechanism, epsilon, run) and score it.

    Returns ``(per_run_rows, summary_rows)`` in the column orders of
    ``SWEEP_HEADER`` and ``SUMMARY_HEADER``.
    """
    if runs < 1:
        raise InvalidParameterError("runs must be >= 1")
    per_run_rows, summary_rows = [], []
    for mech in mechanisms:
        for eps in sorted(float(e) for e in epsilons):
            perts = [
                perturb_corpus(corpus, ps, mech, eps, seed, r, threads=threads,
                               granularity=granularity, fixed_radius_km=fixed_radius_km)
                for r in range(runs)
            ]
            report = evaluate(corpus, perts, ps, deltas, top_fraction, mech, eps)
            for (metric, param), vals in sorted(report.per_run.items()):
                for r, v in enumerate(vals):
                    per_run_rows.append((mech, eps, r, metric, param, v))
            summary_rows.extend(report.rows())
    return per_run_rows, summary_rows
