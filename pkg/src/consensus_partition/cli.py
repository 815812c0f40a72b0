"""Command-line front end.

Every command writes its outputs plus a ``*.manifest.json`` recording the
exact argument vector, so ``replay`` can reproduce the outputs.

Exit codes: 0 success, 1 internal error or oracle violation, 2 usage error,
3 validation error, 4 capacity error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from ._seeding import derive_seed, thread_count
from .alignment import delta
from .consensus import SolverConfig, check_stationarity, mean_partition
from .ensemble import (
    EnsembleSpec,
    gen_gaussian_grid,
    gen_uniform,
    generate_ensemble,
    read_dataset_csv,
    write_dataset_csv,
)
from .errors import PartitionError, ValidationError
from .oracles import SUITES
from .partition import dumps, load_ensemble, load_json, partition_from_dict, save_ensemble
from .profile import motif_report, motifs_of, profile_of, write_motif_csv
from .stability import average_reports, stability_sweep, write_report_csv

DEFAULT_SIGMA = 0.12
DEFAULT_POINTS_PER = 100


class UsageError(Exception):
    pass


def _positive_float(text):
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _write_manifest(args, argv, inputs, outputs, started):
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    manifest = {
        "command": args.command,
        "argv": argv,
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "inputs": inputs,
        "outputs": outputs,
        "tool_version": __version__,
        "threads": thread_count(),
        "duration_s": round(time.perf_counter() - started, 6),
    }
    base = outputs[0] if args.command != "stability" else args.out_prefix
    _write(f"{base}.manifest.json", dumps(manifest))


# -- commands -----------------------------------------------------------------

def cmd_gen_data(args):
    if args.kind == "gaussian-grid":
        if args.m is not None or args.d is not None:
            raise UsageError("--m/--d apply to --kind uniform only")
        if args.rows is None or args.cols is None:
            raise UsageError("--kind gaussian-grid needs --rows and --cols")
        ds = gen_gaussian_grid(
            args.rows,
            args.cols,
            args.sigma if args.sigma is not None else DEFAULT_SIGMA,
            args.points_per if args.points_per is not None else DEFAULT_POINTS_PER,
            args.seed,
        )
    else:
        if any(v is not None for v in (args.rows, args.cols, args.sigma, args.points_per)):
            raise UsageError("--rows/--cols/--sigma/--points-per apply to --kind gaussian-grid only")
        if args.m is None:
            raise UsageError("--kind uniform needs --m")
        ds = gen_uniform(args.m, args.d if args.d is not None else 2, args.seed)
    write_dataset_csv(args.out, ds)
    print(f"wrote {ds.m} points to {args.out}")
    return [], [args.out]


def cmd_ensemble(args):
    ds = read_dataset_csv(args.data)
    spec = EnsembleSpec(n=args.n, k=args.k, seed=args.seed, max_iters=args.max_iters, n_init=args.n_init)
    if spec.k > ds.m:
        raise ValidationError(f"k={spec.k} exceeds the number of points m={ds.m}")
    save_ensemble(args.out, generate_ensemble(ds, spec))
    print(f"wrote {spec.n} partitions (k={spec.k}) to {args.out}")
    return [args.data], [args.out]


def _solver_config(args):
    return SolverConfig(restarts=args.restarts, max_iters=args.max_iters, tol=args.tol, seed=args.seed)


def cmd_mean(args):
    sample = load_ensemble(args.ensemble)
    result = mean_partition(sample, _solver_config(args))
    out = result.to_dict()
    out["stationary"] = check_stationarity(result)
    out["solver"] = _solver_config(args).to_dict()
    _write(args.out, dumps(out))
    print(f"F = {result.frechet_value:.10g} after {result.iterations} iterations (stationary: {out['stationary']})")
    return [args.ensemble], [args.out]


def cmd_motifs(args):
    sample = load_ensemble(args.ensemble)
    if not 0.5 < args.tau < 1:
        raise ValidationError(f"tau must lie strictly between 0.5 and 1, got {args.tau}")
    result = mean_partition(sample, _solver_config(args))
    motifs = motifs_of(profile_of(result.alignment, alignment_ref=args.ensemble), args.tau)
    m = sample[0].m
    ds = read_dataset_csv(args.data) if args.data else None
    if ds is not None and ds.m != m:
        raise ValidationError(f"dataset has {ds.m} points, ensemble has {m}")
    truth = ds.ground_truth if ds is not None else None
    _write(args.out, dumps(motif_report(motifs, m, truth)))
    csv_path = os.path.splitext(args.out)[0] + ".csv"
    points = ds.points if ds is not None else np.empty((m, 0))
    write_motif_csv(csv_path, motifs, points)
    print(f"{len(motifs.covered)}/{m} points covered by {sum(1 for c in motifs.motifs if c)} motifs")
    inputs = [args.ensemble] + ([args.data] if args.data else [])
    return inputs, [args.out, csv_path]


def cmd_stability(args):
    if args.kmin > args.kmax:
        raise UsageError(f"--kmin {args.kmin} exceeds --kmax {args.kmax}")
    if (args.data is None) == (args.kind is None):
        raise UsageError("give exactly one of --data or --kind")
    solver = SolverConfig(restarts=args.restarts, max_iters=args.max_iters, tol=args.tol, seed=args.seed)
    reports, outputs = [], []
    for t in range(args.trials):
        if args.data is not None:
            ds = read_dataset_csv(args.data)
        elif args.kind == "gaussian-grid":
            ds = gen_gaussian_grid(args.rows, args.cols, args.sigma, args.points_per, derive_seed(args.seed, "dataset", t))
        else:
            ds = gen_uniform(args.m, args.d, derive_seed(args.seed, "dataset", t))
        report = stability_sweep(
            ds,
            args.kmin,
            args.kmax,
            args.n,
            {"n_init": args.n_init},
            solver,
            seed=derive_seed(args.seed, "trial", t),
        )
        path = f"{args.out_prefix}.trial{t}.csv"
        write_report_csv(path, report)
        reports.append(report)
        outputs.append(path)
    avg = average_reports(reports)
    avg_path = f"{args.out_prefix}.avg.csv"
    write_report_csv(avg_path, avg)
    summary = {
        "selected_k": {"average": avg.selected_k, "trials": [r.selected_k for r in reports]},
        "average": avg.to_dict(),
        "trials": [r.to_dict() for r in reports],
    }
    summary_path = f"{args.out_prefix}.summary.json"
    _write(summary_path, dumps(summary))
    print(f"selected k (trial average): {avg.selected_k}")
    return ([args.data] if args.data else []), outputs + [avg_path, summary_path]


def cmd_oracle(args):
    report = SUITES[args.suite](args.cases, args.seed)
    for line in report.lines:
        print(line)
    print(f"{args.suite}: {report.cases - report.failures}/{report.cases} passed; {json.dumps(report.stats, sort_keys=True)}")
    outputs = []
    if args.out:
        _write(args.out, dumps(report.to_dict()))
        outputs.append(args.out)
    if not report.ok:
        args.exit_code = 1
    return [], outputs


def cmd_dist(args):
    X = partition_from_dict(load_json(args.a), where=args.a)
    Y = partition_from_dict(load_json(args.b), where=args.b)
    res = delta(X, Y)
    out = {"distance": res.distance, "inner_value": res.inner_value, "permutation": list(res.permutation.mapping)}
    text = dumps(out)
    if args.out:
        _write(args.out, text)
        return [args.a, args.b], [args.out]
    sys.stdout.write(text)
    return [args.a, args.b], []


def cmd_replay(args):
    manifest = load_json(args.manifest)
    argv = list(manifest["argv"])
    if args.out_dir:
        for flag in ("--out", "--out-prefix"):
            if flag in argv:
                i = argv.index(flag) + 1
                argv[i] = os.path.join(args.out_dir, os.path.basename(argv[i]))
    return run(build_parser().parse_args(argv), argv)


# -- parser -------------------------------------------------------------------

def _add_solver_flags(p):
    p.add_argument("--restarts", type=_positive_int, default=5)
    p.add_argument("--max-iters", type=_positive_int, default=200)
    p.add_argument("--tol", type=_positive_float, default=1e-10)


def build_parser():
    parser = argparse.ArgumentParser(prog="consensus-partition", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", choices=["gaussian-grid", "uniform"], required=True)
    p.add_argument("--rows", type=_positive_int)
    p.add_argument("--cols", type=_positive_int)
    p.add_argument("--sigma", type=_positive_float)
    p.add_argument("--points-per", type=_positive_int)
    p.add_argument("--m", type=_positive_int)
    p.add_argument("--d", type=_positive_int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("ensemble", help="k-means ensemble of a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--n-init", type=_positive_int, default=3)
    p.add_argument("--max-iters", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("mean", help="approximate mean partition of an ensemble")
    p.add_argument("--ensemble", required=True)
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("motifs", help="profile motifs of an ensemble")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--data", help="dataset CSV for coordinates and purity")
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_motifs)

    p = sub.add_parser("stability", help="instability scores over a range of k")
    p.add_argument("--data")
    p.add_argument("--kind", choices=["gaussian-grid", "uniform"], help="draw a fresh dataset per trial")
    p.add_argument("--rows", type=_positive_int, default=2)
    p.add_argument("--cols", type=_positive_int, default=2)
    p.add_argument("--sigma", type=_positive_float, default=DEFAULT_SIGMA)
    p.add_argument("--points-per", type=_positive_int, default=50)
    p.add_argument("--m", type=_positive_int, default=200)
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--kmin", type=_positive_int, required=True)
    p.add_argument("--kmax", type=_positive_int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=_positive_int, default=1)
    p.add_argument("--n-init", type=_positive_int, default=3)
    _add_solver_flags(p)
    p.set_defaults(restarts=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("oracle", help="randomized checks against brute-force oracles")
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.add_argument("--cases", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("dist", help="distance between two partition files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir", help="write outputs here instead of the recorded paths")
    p.set_defaults(func=cmd_replay)
    return parser


def run(args, argv):
    started = time.perf_counter()
    args.exit_code = 0
    inputs, outputs = args.func(args)
    code = args.exit_code
    del args.exit_code
    if outputs:
        _write_manifest(args, argv, inputs, outputs, started)
    return code


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            return cmd_replay(args)
        return run(args, argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except PartitionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
