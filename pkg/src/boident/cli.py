"""Command-line entry points: gen-data, train, identify, bench, report."""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, fields, replace
from pathlib import Path

import numpy as np
import yaml

from . import harness
from .harness import METHODS, ExperimentConfig, make_benchmark
from .simulators import (
    generate_trajectories,
    make_push_dataset,
    save_trajectories,
    scripted_controls,
)


def _parse_seeds(text: str):
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part and not part.startswith("-"):
            a, b = part.split("-")
            seeds.extend(range(int(a), int(b) + 1))
        elif part:
            seeds.append(int(part))
    return tuple(seeds)


def _load_config_file(path):
    with open(path) as fh:
        return yaml.safe_load(fh) or {}


def _build_config(args) -> ExperimentConfig:
    overrides = {}
    if getattr(args, "config", None):
        overrides.update(_load_config_file(args.config))
    if getattr(args, "sim", None):
        overrides["sim"] = args.sim
    if getattr(args, "method", None):
        overrides["methods"] = (args.method,)
    if getattr(args, "latent_dim", None) is not None:
        overrides["latent_dim"] = args.latent_dim
    if getattr(args, "budget", None) is not None:
        overrides["budget"] = args.budget
    if getattr(args, "seeds", None):
        overrides["seeds"] = _parse_seeds(args.seeds)
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    valid = {f.name for f in fields(ExperimentConfig)}
    unknown = set(overrides) - valid
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**overrides)


def _add_common(parser):
    parser.add_argument("--sim", choices=("push", "structure"))
    parser.add_argument("--latent-dim", type=int, dest="latent_dim")
    parser.add_argument("--budget", type=int)
    parser.add_argument("--seeds", help="comma list and/or ranges, e.g. 0-9 or 0,3,7")
    parser.add_argument("--config", help="YAML/JSON file of ExperimentConfig overrides")
    parser.add_argument("--out", help="output directory")


def cmd_gen_data(args) -> int:
    config = _build_config(args)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = config.seeds[0] if config.seeds else 0
    if config.sim == "push":
        train, test = make_push_dataset(config.push_n_train, config.push_n_test, rng_seed=seed)
        np.savez(out / "push_dataset.npz", train=train, test=test)
        print(f"wrote {out / 'push_dataset.npz'} "
              f"({len(train)} train / {len(test)} test records)")
    else:
        bench = make_benchmark(config)
        count = args.count
        horizon = bench.horizon
        thetas = bench.space.sample_uniform(seed, count)
        scripts = scripted_controls(bench.sim.control_dim, horizon, count, rng_seed=seed + 1)
        records = []
        for k, theta in enumerate(thetas):
            traj, diverged = generate_trajectories(
                bench.sim, theta, scripts[k : k + 1], horizon, 1
            )[0]
            records.append((theta, traj, diverged))
        path = out / "structure_trajectories.jsonl"
        header = {
            "simulator": "structure",
            "theta_names": list(bench.param_names),
            "seed": seed,
            "dt": bench.sim.dt,
            "substeps": bench.sim.substeps,
            "horizon": horizon,
        }
        save_trajectories(path, header, records)
        print(f"wrote {path} ({len(records)} trajectories)")
    return 0


def cmd_train(args) -> int:
    config = _build_config(args)
    bench = make_benchmark(config)
    if args.model == "dynamics":
        model = bench.dynamics()
    elif args.model == "vae":
        model = bench.vae()
    else:
        model = bench.autoencoder()
    dest = Path(config.out_dir) / f"{config.sim}-{args.model}"
    model.save(dest)
    print(f"trained {args.model} for {config.sim}; saved to {dest}")
    return 0


def cmd_identify(args) -> int:
    config = _build_config(args)
    if len(config.methods) != 1:
        raise SystemExit("identify requires exactly one --method")
    run = harness.run_experiment(config)
    method = config.methods[0]
    for seed in config.seeds:
        result = run["results"][(method, seed)]
        print(f"{method} seed {seed}: best_error={result.best_error:.6g} "
              f"best_theta={np.array2string(result.best_theta, precision=5)}")
    print(f"rows: {run['paths'][method]}")
    return 0


def cmd_bench(args) -> int:
    config = _build_config(args)
    run = harness.run_experiment(config)
    print(f"summary: {run['summary']}")
    print(f"curves:  {run['curves']}")
    for method in config.methods:
        finals = [run["results"][(method, s)].best_error for s in config.seeds]
        print(f"{method:10s} median final error {np.median(finals):.6g}")
    return 0


def read_result_rows(path):
    """Parse a per-method result CSV back into row tuples."""
    rows = []
    with open(path) as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        n_params = len(header) - 5
        for rec in reader:
            rows.append((
                rec[0], int(rec[1]), int(rec[2]), float(rec[3]), float(rec[4]),
                np.array([float(v) for v in rec[5:]]),
            ))
    return rows, header[5:]


def cmd_report(args) -> int:
    out = Path(args.out or "results")
    method_files = sorted(p for p in out.glob("*.csv")
                          if p.name not in ("summary.csv", "curves.csv"))
    if not method_files:
        raise SystemExit(f"no result CSVs found in {out}")
    all_rows = []
    param_cols = None
    for path in method_files:
        rows, cols = read_result_rows(path)
        all_rows.extend(rows)
        param_cols = cols
    budget = max(r[2] for r in all_rows) + 1
    names = [c.removeprefix("relerr_pct_") for c in param_cols]

    final_rel = {}
    by_cell = {}
    for row in all_rows:
        by_cell.setdefault((row[0], row[1]), []).append(row)
    for (method, seed), rows in sorted(by_cell.items()):
        final_rel.setdefault(method, []).append(max(rows, key=lambda r: r[2])[5])

    with open(out / "summary.csv", "w", newline="") as fh:
        fh.write(f"# generated: {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        writer = csv.writer(fh)
        writer.writerow(["method", "parameter", "mean_relerr_pct", "std_relerr_pct"])
        for row in harness.param_error_table(final_rel, names):
            writer.writerow([row[0], row[1], repr(row[2]), repr(row[3])])
    with open(out / "curves.csv", "w", newline="") as fh:
        fh.write(f"# generated: {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        writer = csv.writer(fh)
        writer.writerow(["method", "iteration", "median_best_error", "q25", "q75"])
        for method, it, med, q25, q75 in harness.emit_curves(all_rows, budget):
            writer.writerow([method, it, repr(med), repr(q25), repr(q75)])
    print(f"summary: {out / 'summary.csv'}")
    print(f"curves:  {out / 'curves.csv'}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="boident",
                                     description="Black-box parameter identification "
                                                 "benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate simulator datasets")
    _add_common(p)
    p.add_argument("--count", type=int, default=1200,
                   help="trajectories to generate (structure)")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a reduction model")
    p.add_argument("model", choices=("vae", "dynamics", "ae-dyn"))
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("identify", help="run a single identification method")
    _add_common(p)
    p.add_argument("--method", choices=METHODS, required=True)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("bench", help="run the full method comparison")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="recompute tables and curves from result CSVs")
    p.add_argument("--out", help="directory holding per-method result CSVs")
    p.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
