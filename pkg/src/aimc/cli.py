"""
Command-line interface.

    aimc run   --data manifest.json --k 10 --d 40 --out result.json
    aimc run   --data manifest.json --d-sweep --out sweep.json
    aimc gen   --n 2000 --m 3 --k 10 --d 15 --view-dims 100,80,60 --out data/planted
    aimc bench --out bench.csv
    aimc eval  pred.txt truth.txt

Failures exit with status 1 and a single JSON line on stderr:
``{"error": "<ExceptionType>", "message": "..."}``.
"""

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bench
from ._kernels import backend as active_backend
from .io import SyntheticSpec, gen_synthetic, load_dataset, load_labels, save_dataset, write_result
from .metrics import evaluate
from .model import INIT_MODES, NORMALIZATIONS, ConfigError, SolverConfig, normalize_dataset
from .nonmf import nonmf_solve
from .solver import solve

logger = logging.getLogger("aimc")

SWEEP_MAX_D = 300
SWEEP_STEP = 5


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="aimc", description="Multiview clustering with AIMC and NONMF.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="cluster a dataset described by a manifest")
    run.add_argument("--data", required=True, type=Path, help="dataset manifest (JSON)")
    run.add_argument("--method", choices=("aimc", "nonmf"), default="aimc")
    run.add_argument("--k", type=int, default=None, help="cluster count (default: manifest k)")
    run.add_argument("--d", type=int, default=None, help="latent dimension (default: k)")
    run.add_argument("--d-sweep", nargs="*", type=int, default=None, metavar="D",
                     help="sweep d over the given values, or k, k+5, ..., 300 when none are given")
    run.add_argument("--max-iters", type=int, default=100)
    run.add_argument("--tol", type=float, default=1e-6)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--init", choices=INIT_MODES, default="kmeans-concat")
    run.add_argument("--normalize", choices=NORMALIZATIONS, default="none")
    run.add_argument("--no-repair", action="store_true", help="leave empty clusters empty")
    run.add_argument("--repeats", type=int, default=1, help="runs per setting with derived seeds")
    run.add_argument("--jobs", type=int, default=1, help="worker threads for sweep entries")
    run.add_argument("--out", type=Path, default=Path("result.json"))

    gen = sub.add_parser("gen", help="write a planted-model synthetic dataset")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--view-dims", type=_int_list, required=True, help="comma-separated, one per view")
    gen.add_argument("--noise-sigma", type=float, default=0.01)
    gen.add_argument("--cluster-weights", type=_float_list, default=None)
    gen.add_argument("--bad-view-sigma", type=_float_list, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--format", choices=("csv", "mvm1"), default="csv")
    gen.add_argument("--out", type=Path, required=True, help="output directory")

    b = sub.add_parser("bench", help="per-iteration time versus n on planted data")
    b.add_argument("--ns", type=_int_list, default=list(bench.DEFAULT_NS))
    b.add_argument("--iters", type=int, default=10)
    b.add_argument("--m", type=int, default=3)
    b.add_argument("--k", type=int, default=10)
    b.add_argument("--d", type=int, default=15)
    b.add_argument("--dims", type=_int_list, default=[100, 80, 60])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--method", choices=("aimc", "nonmf"), default="aimc")
    b.add_argument("--backend", choices=("numba", "numpy", "both"), default=None,
                   help="kernel backend (default: the active one)")
    b.add_argument("--out", type=Path, default=Path("bench.csv"))

    ev = sub.add_parser("eval", help="compare two label files")
    ev.add_argument("pred", type=Path)
    ev.add_argument("truth", type=Path)
    return parser


def _solve(method, ds, cfg):
    return solve(ds, cfg) if method == "aimc" else nonmf_solve(ds, cfg)


def _sweep_values(args, k):
    if args.d_sweep is None:
        return [args.d if args.d is not None else k]
    if args.d_sweep:
        return list(args.d_sweep)
    return list(range(k, SWEEP_MAX_D + 1, SWEEP_STEP))


def cmd_run(args):
    ds = load_dataset(args.data)
    k = args.k if args.k is not None else ds.declared_k
    if k is None:
        raise ConfigError("--k is required when the manifest does not declare k")
    work = normalize_dataset(ds, args.normalize)
    d_values = _sweep_values(args, k)
    repeats = max(1, args.repeats)

    def config(i, r, d):
        return SolverConfig(d=d, k=k, max_iters=args.max_iters, tol=args.tol,
                            seed=args.seed + i + r * len(d_values), init_mode=args.init,
                            normalization=args.normalize, repair_empty_clusters=not args.no_repair)

    jobs = [(i, r, d) for i, d in enumerate(d_values) for r in range(repeats)]
    for i, r, d in jobs:
        config(i, r, d).validate(work)

    def one(job):
        i, r, d = job
        cfg = config(i, r, d)
        res = _solve(args.method, work, cfg)
        met = evaluate(res.labels, ds.labels) if ds.labels is not None else None
        return job, cfg, res, met

    t0 = time.perf_counter()
    if args.jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(one, jobs))
    else:
        outcomes = [one(j) for j in jobs]
    elapsed = time.perf_counter() - t0

    labeled = ds.labels is not None
    per_d = []
    for i, d in enumerate(d_values):
        runs = [o for o in outcomes if o[0][0] == i]
        entry = {"d": d, "seeds": [o[1].seed for o in runs],
                 "final_objective": [o[2].final_objective for o in runs],
                 "iters_run": [o[2].iters_run for o in runs]}
        if labeled:
            for key in ("ACC", "NMI", "Purity", "Fscore"):
                vals = [o[3].as_dict()[key] for o in runs]
                entry[key] = {"mean": float(np.mean(vals)), "std": float(np.std(vals)), "values": vals}
        per_d.append(entry)

    if labeled:
        selection = "ACC"
        best_i = max(range(len(d_values)), key=lambda i: (per_d[i]["ACC"]["mean"], -i))
    else:
        selection = "objective"
        best_i = min(range(len(d_values)), key=lambda i: (float(np.mean(per_d[i]["final_objective"])), i))
    _, cfg, res, met = next(o for o in outcomes if o[0] == (best_i, 0, d_values[best_i]))

    extra = {"data": str(args.data), "dataset": {"name": ds.name, "n": ds.n, "dims": list(ds.dims)},
             "kernel_backend": active_backend()}
    if args.d_sweep is not None or repeats > 1:
        extra["sweep"] = {"selection": selection, "best_d": d_values[best_i], "entries": per_d}
    write_result(res, met, args.out, config=cfg.to_dict(), extra=extra)

    parts = []
    if met is not None:
        parts.append(met.summary())
    else:
        parts.append(f"objective={res.final_objective:.6g}")
    parts += [f"d={d_values[best_i]}", f"iters={res.iters_run}", f"seconds={elapsed:.2f}"]
    print(" ".join(parts))
    return 0


def cmd_gen(args):
    spec = SyntheticSpec(n=args.n, m=args.m, k=args.k, d=args.d, view_dims=args.view_dims,
                         noise_sigma=args.noise_sigma, cluster_weights=args.cluster_weights,
                         bad_view_sigma=args.bad_view_sigma, seed=args.seed)
    ds, _ = gen_synthetic(spec)
    path = save_dataset(ds, args.out, args.format)
    print(path)
    return 0


def cmd_bench(args):
    backends = ["numba", "numpy"] if args.backend == "both" else [args.backend]
    rows = []
    for name in backends:
        rows += bench.run_scaling(ns=args.ns, iters=args.iters, m=args.m, k=args.k, d=args.d,
                                  dims=args.dims, seed=args.seed, backend=name, method=args.method)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["backend", "n", "iter", "seconds"])
        writer.writeheader()
        writer.writerows(rows)
    summary = bench.summarize(rows)
    args.out.with_suffix(".json").write_text(json.dumps(summary, indent=2) + "\n")
    for name, s in summary.items():
        times = " ".join(f"{n}:{t * 1e3:.2f}ms" for n, t in zip(s["n"], s["median_iter_seconds"]))
        print(f"{name} slope={s['loglog_slope']:.3f} {times}")
    return 0


def cmd_eval(args):
    pred = load_labels(args.pred)
    truth = load_labels(args.truth)
    print(json.dumps(evaluate(pred, truth).as_dict()))
    return 0


COMMANDS = {"run": cmd_run, "gen": cmd_gen, "bench": cmd_bench, "eval": cmd_eval}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - every failure becomes one parsable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
