"""Trajectory perturbation under pure epsilon-local differential privacy.

Mechanisms: ``tp_perturb`` (pivot sampling), ``atp_perturb`` (anchor-based
pivot sampling) and the ``exp_baseline``; see the submodules for the
primitives they are built from.
"""
from .anchor import atp_perturb, atp_perturb_detailed, coverage_bound_estimate, restrict_trajectory_region
from .errors import (
    BudgetExceededError,
    InvalidParameterError,
    SchemaError,
    TrajLDPError,
    UndefinedBearingError,
)
from .geo import GeoPoint, PointSet, Trajectory, ang_diff, haversine, initial_bearing
from .kernels import BACKEND as KERNEL_BACKEND
from .ldp import BudgetLedger, RandomSource, em_sample, krr_sample, sw_b, sw_sample
from .pivot import combine_optimal, exp_baseline, tp_perturb, tp_perturb_detailed

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError", "BudgetLedger", "GeoPoint", "InvalidParameterError", "KERNEL_BACKEND",
    "PointSet", "RandomSource", "SchemaError", "Trajectory", "TrajLDPError", "UndefinedBearingError",
    "ang_diff", "atp_perturb", "atp_perturb_detailed", "combine_optimal", "coverage_bound_estimate",
    "em_sample", "exp_baseline", "haversine", "initial_bearing", "krr_sample",
    "restrict_trajectory_region", "sw_b", "sw_sample", "tp_perturb", "tp_perturb_detailed",
]
