"""Command-line entry point: ``dgfftrap <subcommand> ...``."""

import argparse
import json
import sys

import numpy as np

from . import experiments, io
from .errors import DgffTrapError, InvalidParameterError
from .field import sample_fields, scales
from .kprocess import ZSpec, sample_chi, simulate_pre_k, simulate_spatial_k
from .lattice import green_ball, green_box
from .traps import deep_traps
from .walk import (excursions, hitting_experiment, local_time_experiment,
                   run_walk)


def _add_green(sub):
    p = sub.add_parser("green", help="exact Green function tables")
    p.add_argument("--domain", choices=["box", "ball"], required=True)
    p.add_argument("--size", type=int, help="box side N")
    p.add_argument("--radius", type=float, help="ball radius R")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["bin", "csv"], default="bin")
    p.add_argument("--override-size-guard", action="store_true")


def _run_green(args):
    if args.domain == "box":
        if args.size is None:
            raise InvalidParameterError("--size required for box domains")
        table = green_box(args.size, override=args.override_size_guard)
    else:
        if args.radius is None:
            raise InvalidParameterError("--radius required for ball domains")
        table = green_ball(args.radius, override=args.override_size_guard)
    if args.format == "bin":
        io.save_green(table, args.out)
    else:
        io.save_green_csv(table, args.out)


def _add_sample_field(sub):
    p = sub.add_parser("sample-field", help="draw Gaussian free field samples")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--format", choices=["bin", "csv"], default="bin")
    p.add_argument("--method", choices=["dst", "cholesky"], default="dst")


def _run_sample_field(args):
    flds = sample_fields(args.n, args.seed, args.count, method=args.method)
    for i, fld in enumerate(flds):
        out = args.out if args.count == 1 else "%s.%d" % (args.out, i)
        if args.format == "bin":
            io.save_field(fld, out)
        else:
            io.save_field_csv(fld, out)


def _add_find_traps(sub):
    p = sub.add_parser("find-traps", help="extract the deep-trap landscape")
    p.add_argument("--field", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--out", required=True)


def _run_find_traps(args):
    fld = io.load_field(args.field)
    ls = deep_traps(fld, args.r, args.m, args.beta)
    io.save_landscape_json(ls, args.out)


def _add_run_walk(sub):
    p = sub.add_parser("run-walk", help="simulate the walk in a field")
    p.add_argument("--field", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--start", default="0,0")
    p.add_argument("--max-steps", type=int, default=100_000_000)
    p.add_argument("--out", required=True)


def _parse_point(text):
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise InvalidParameterError("expected 'x,y', got %r" % text)
    return x, y


def _run_run_walk(args):
    fld = io.load_field(args.field)
    path, _ = run_walk(fld, args.beta, args.horizon, args.seed,
                       start=_parse_point(args.start),
                       max_steps=args.max_steps)
    io.save_path_csv(path, args.out)


def _add_excursions(sub):
    p = sub.add_parser("excursions", help="excursion decomposition of a walk")
    p.add_argument("--field", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--start", default="0,0")
    p.add_argument("--out", required=True)


def _run_excursions(args):
    fld = io.load_field(args.field)
    ls = deep_traps(fld, args.r, args.m, args.beta)
    # embedded chain trajectory, then the scan
    rng = np.random.default_rng(args.seed)
    n = fld.n
    moves = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])
    steps = moves[rng.integers(0, 4, size=args.steps)]
    xy = (np.cumsum(np.vstack([[_parse_point(args.start)], steps]), axis=0)
          % n)
    recs = excursions(xy, ls, n, args.seed + 1)
    io.save_excursions_jsonl(recs, args.out)


def _add_local_time(sub):
    p = sub.add_parser("local-time", help="ball local-time experiment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--start", default="0,0")
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)


def _run_local_time(args):
    visits, normalized, offs = local_time_experiment(
        args.n, args.r, _parse_point(args.start), args.replicas, args.seed)
    with open(args.out, "w") as fh:
        fh.write(",".join("L_%d_%d" % (dy, dx) for dx, dy in offs) + "\n")
        for row in normalized:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _add_hitting(sub):
    p = sub.add_parser("hitting", help="uniform-hitting experiment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--centers", required=True,
                   help="file with one 'x,y' center per line")
    p.add_argument("--start", required=True)
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)


def _run_hitting(args):
    with open(args.centers) as fh:
        centers = [_parse_point(line.strip()) for line in fh if line.strip()]
    counts = hitting_experiment(args.n, args.r, centers,
                                _parse_point(args.start), args.replicas,
                                args.seed)
    with open(args.out, "w") as fh:
        json.dump({"counts": counts.tolist()}, fh)


def _add_sample_chi(sub):
    p = sub.add_parser("sample-chi", help="draw the Poisson trap landscape")
    p.add_argument("--z", default="uniform",
                   help="pointmass:x,y | uniform | file:<atoms.csv>")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--taumin", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)


def _parse_zspec(text, mass):
    if text == "uniform":
        return ZSpec(kind="uniform", total_mass=mass)
    if text.startswith("pointmass:"):
        x, y = (float(v) for v in text.split(":", 1)[1].split(","))
        return ZSpec(kind="pointmass", total_mass=mass, location=(x, y))
    if text.startswith("file:"):
        atoms = io.load_atoms_csv(text.split(":", 1)[1])
        return ZSpec(kind="discrete", total_mass=mass, atoms=atoms.locations,
                     weights=atoms.depths)
    raise InvalidParameterError("unknown Z spec %r" % text)


def _run_sample_chi(args):
    z = _parse_zspec(args.z, args.mass)
    atoms = sample_chi(z, args.beta, args.kappa, args.taumin, args.seed)
    io.save_atoms_csv(atoms, args.out)


def _add_run_kprocess(sub):
    p = sub.add_parser("run-kprocess", help="simulate a spatial (pre-)K-process")
    p.add_argument("--atoms", required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--tail-tol", type=float)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)


def _run_run_kprocess(args):
    atoms = io.load_atoms_csv(args.atoms)
    if (args.m is None) == (args.tail_tol is None):
        raise InvalidParameterError("pass exactly one of --m / --tail-tol")
    if args.m is not None:
        path, _, _ = simulate_pre_k(atoms, args.m, args.horizon, args.seed)
    else:
        path, _ = simulate_spatial_k(atoms, args.horizon, args.tail_tol,
                                     args.seed)
    io.save_path_csv(path, args.out)


def _add_experiment(sub):
    p = sub.add_parser("experiment", help="run or list verification experiments")
    ex = p.add_subparsers(dest="experiment_cmd", required=True)
    runp = ex.add_parser("run")
    runp.add_argument("--config", required=True)
    runp.add_argument("--name", required=True,
                      choices=sorted(experiments.EXPERIMENTS))
    runp.add_argument("--out", required=True)
    runp.add_argument("--csv")
    ex.add_parser("list")


def _run_experiment(args):
    if args.experiment_cmd == "list":
        for name in sorted(experiments.EXPERIMENTS):
            print(name)
        return
    with open(args.config) as fh:
        raw = json.load(fh)
    known = experiments.ExperimentConfig.__dataclass_fields__
    unknown = set(raw) - set(known)
    if unknown:
        raise InvalidParameterError("unknown config keys: %s"
                                    % ", ".join(sorted(unknown)))
    config = experiments.ExperimentConfig(**raw).validate()
    report = experiments.EXPERIMENTS[args.name](config)
    io.save_report(report, args.out, args.csv)
    print("%s: %s" % (report.name, "PASS" if report.passed else "FAIL"))


def build_parser():
    parser = argparse.ArgumentParser(prog="dgfftrap")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for add in (_add_green, _add_sample_field, _add_find_traps, _add_run_walk,
                _add_excursions, _add_local_time, _add_hitting,
                _add_sample_chi, _add_run_kprocess, _add_experiment):
        add(sub)
    return parser


_RUNNERS = {
    "green": _run_green,
    "sample-field": _run_sample_field,
    "find-traps": _run_find_traps,
    "run-walk": _run_run_walk,
    "excursions": _run_excursions,
    "local-time": _run_local_time,
    "hitting": _run_hitting,
    "sample-chi": _run_sample_chi,
    "run-kprocess": _run_run_kprocess,
    "experiment": _run_experiment,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _RUNNERS[args.cmd](args)
    except DgffTrapError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
