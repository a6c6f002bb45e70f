"""Command-line driver: ``trajldp <subcommand> ...``.

Every subcommand is deterministic given its inputs, flags and ``--seed``.
Exit codes: 0 success, 2 bad parameter, 3 I/O error, 4 schema error,
5 privacy-ledger violation.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from . import data_io
from .direction import (
    DEFAULT_CANDIDATES,
    GranularityConfig,
    direction_epsilon,
    direction_success_probability,
    select_granularity,
)
from .errors import BudgetExceededError, InvalidParameterError, SchemaError
from .experiment import (
    DEFAULT_ACD_FRACTION,
    DEFAULT_DELTAS,
    DEFAULT_EPSILONS,
    MECHANISMS,
    SUMMARY_HEADER,
    SWEEP_HEADER,
    perturb_corpus,
    sweep,
)
from .ldp import RandomSource
from .metrics import evaluate

TABLE_EPSILONS = (0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 10.0)


def _cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_rows(path, header, rows) -> None:
    if path in (None, "-"):
        fh, close = sys.stdout, False
    else:
        fh, close = open(path, "w", newline=""), True
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(c) for c in row])
    finally:
        if close:
            fh.close()


def _granularity(text: str):
    if text == "auto":
        return None
    try:
        g = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"granularity must be 'auto' or an integer, got {text!r}")
    if g < 2:
        raise argparse.ArgumentTypeError("granularity must be >= 2")
    return g


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _reach(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity", "none") else _positive(text)


def _bbox(text: str) -> tuple:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("bbox is min_lat,min_lon,max_lat,max_lon")
    return tuple(parts)


def _candidates(text: str) -> tuple:
    return tuple(int(x) for x in text.split(","))


def _run_path(out: str, run: int, runs: int) -> Path:
    p = Path(out)
    return p if runs == 1 else p.with_name(f"{p.stem}.run{run}{p.suffix}")


# -- subcommands -----------------------------------------------------------------

def cmd_preprocess(args) -> None:
    raw = data_io.load_checkins(args.checkins)
    if args.points:
        ps = data_io.load_point_set(args.points, args.bbox)
    else:
        if args.bbox is not None:
            b = args.bbox
            raw = [c for c in raw if b[0] <= c.lat <= b[2] and b[1] <= c.lon <= b[3]]
        distinct = len({(c.lat, c.lon) for c in raw})
        ps = data_io.top_k_locations(raw, min(args.top_k, distinct))
    corpus = data_io.preprocess(raw, ps, RandomSource(args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data_io.save_point_set(out / "points.csv", ps)
    data_io.save_trajectories(out / "trajectories.csv", corpus, timestamps=True)


def cmd_generate(args) -> None:
    rng = RandomSource(args.seed)
    if args.n_points is not None:
        ps = data_io.synthetic_point_set(args.n_points, rng.child("points"),
                                         width_km=args.width_km, height_km=args.height_km)
        data_io.save_point_set(args.points, ps)
    else:
        ps = data_io.load_point_set(args.points)
    cfg = data_io.SynthConfig(args.n_trajectories, args.length, args.reach_bound)
    corpus = data_io.generate_synthetic(ps, cfg, rng.child("trajectories"))
    data_io.save_trajectories(args.out, corpus)


def cmd_perturb(args) -> None:
    ps = data_io.load_point_set(args.points)
    corpus = data_io.load_trajectories(args.trajectories, ps)
    for run in range(args.runs):
        pert = perturb_corpus(corpus, ps, args.mechanism, args.epsilon, args.seed, run,
                              threads=args.threads, granularity=args.granularity,
                              fixed_radius_km=args.fixed_radius)
        data_io.save_trajectories(_run_path(args.out, run, args.runs), pert)


def cmd_evaluate(args) -> None:
    ps = data_io.load_point_set(args.points)
    orig = data_io.load_trajectories(args.trajectories, ps)
    perts = [data_io.load_trajectories(p, ps) for p in args.perturbed]
    deltas = tuple(args.delta) if args.delta else DEFAULT_DELTAS
    report = evaluate(orig, perts, ps, deltas, args.acd_fraction, args.mechanism, args.epsilon)
    _write_rows(args.out, SUMMARY_HEADER, report.rows())


def cmd_sweep(args) -> None:
    ps = data_io.load_point_set(args.points)
    corpus = data_io.load_trajectories(args.trajectories, ps)
    mechs = tuple(args.mechanism) if args.mechanism else MECHANISMS
    eps = tuple(args.epsilon) if args.epsilon else DEFAULT_EPSILONS
    deltas = tuple(args.delta) if args.delta else DEFAULT_DELTAS
    per_run, summary = sweep(corpus, ps, mechs, eps, args.runs, args.seed, deltas, args.acd_fraction,
                             threads=args.threads, granularity=args.granularity,
                             fixed_radius_km=args.fixed_radius)
    _write_rows(args.out, SWEEP_HEADER, per_run)
    summary_path = args.summary
    if summary_path is None and args.out not in (None, "-"):
        p = Path(args.out)
        summary_path = str(p.with_name(f"{p.stem}.summary{p.suffix or '.csv'}"))
    if summary_path is not None:
        _write_rows(summary_path, SUMMARY_HEADER, summary)


def granularity_rows(epsilons, candidates, mechanism: str) -> list:
    rows = []
    for eps in epsilons:
        eps_k = direction_epsilon(eps, mechanism)
        cfg = GranularityConfig(eps_k, candidates)
        chosen = select_granularity(cfg)
        for g in cfg.candidates:
            p = direction_success_probability(g, eps_k, cfg.query_ranges)
            rows.append((float(eps), g, eps_k, p, int(g == chosen)))
    return rows


def cmd_granularity_table(args) -> None:
    eps = tuple(args.epsilon) if args.epsilon else TABLE_EPSILONS
    rows = granularity_rows(eps, args.candidates, args.mechanism)
    _write_rows(args.out, ["epsilon", "granularity", "epsilon_k", "success_probability", "selected"], rows)


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trajldp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common_run(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--runs", type=int, default=1)
        sp.add_argument("--granularity", type=_granularity, default=None,
                        help="'auto' (default) or a fixed number of direction sectors")
        sp.add_argument("--fixed-radius", type=float, default=None, metavar="KM",
                        help="ATP only: use this region radius instead of the perturbed one")
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("preprocess", help="check-ins -> points.csv + trajectories.csv")
    sp.add_argument("--checkins", required=True)
    sp.add_argument("--points", help="existing point set; default: top-k visited locations")
    sp.add_argument("--top-k", type=int, default=1000)
    sp.add_argument("--bbox", type=_bbox, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_preprocess)

    sp = sub.add_parser("generate", help="synthetic reach-bounded random-walk corpus")
    sp.add_argument("--points", required=True, help="point set to read, or to write with --n-points")
    sp.add_argument("--n-points", type=int, default=None)
    sp.add_argument("--width-km", type=float, default=3.0)
    sp.add_argument("--height-km", type=float, default=2.5)
    sp.add_argument("--n-trajectories", type=int, default=4000)
    sp.add_argument("--length", type=int, default=5)
    sp.add_argument("--reach-bound", type=_reach, default=math.inf, metavar="KM|inf")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("perturb", help="perturb every trajectory of a corpus")
    sp.add_argument("--points", required=True)
    sp.add_argument("--trajectories", required=True)
    sp.add_argument("--mechanism", choices=MECHANISMS, required=True)
    sp.add_argument("--epsilon", type=_positive, required=True)
    common_run(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_perturb)

    sp = sub.add_parser("evaluate", help="NE / PRQ / ACD of perturbed corpora")
    sp.add_argument("--points", required=True)
    sp.add_argument("--trajectories", required=True)
    sp.add_argument("--perturbed", action="append", required=True)
    sp.add_argument("--delta", type=float, action="append")
    sp.add_argument("--acd-fraction", type=float, default=DEFAULT_ACD_FRACTION)
    sp.add_argument("--mechanism", default="")
    sp.add_argument("--epsilon", type=float, default=math.nan)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("sweep", help="mechanisms x epsilon grid x runs, scored")
    sp.add_argument("--points", required=True)
    sp.add_argument("--trajectories", required=True)
    sp.add_argument("--mechanism", choices=MECHANISMS, action="append")
    sp.add_argument("--epsilon", type=_positive, action="append")
    sp.add_argument("--delta", type=float, action="append")
    sp.add_argument("--acd-fraction", type=float, default=DEFAULT_ACD_FRACTION)
    common_run(sp)
    sp.set_defaults(runs=5)
    sp.add_argument("--out", required=True)
    sp.add_argument("--summary", default=None, help="aggregate CSV (default: <out>.summary.csv)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("granularity-table", help="direction success probability per (epsilon, g)")
    sp.add_argument("--epsilon", type=_positive, action="append")
    sp.add_argument("--candidates", type=_candidates, default=DEFAULT_CANDIDATES)
    sp.add_argument("--mechanism", choices=("tp", "atp"), default="atp")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_granularity_table)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except BudgetExceededError as exc:
        print(f"trajldp: budget error: {exc}", file=sys.stderr)
        return 5
    except SchemaError as exc:
        print(f"trajldp: schema error: {exc}", file=sys.stderr)
        return 4
    except InvalidParameterError as exc:
        print(f"trajldp: parameter error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"trajldp: I/O error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
