"""Compare identification methods on the pushing benchmark.

Runs random search, full-dimensional Bayesian optimization, and BO
through a 1-D dynamics-coupled autoencoder at a shared budget, then
prints the median final errors and the error-vs-budget curves. The
autoencoder is trained once and cached under the output directory.

Takes a few minutes. Run:  python3 demos/04_method_comparison.py [out_dir]
"""
import sys

import numpy as np

from boident.harness import ExperimentConfig, run_experiment


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "results/push_demo"
    config = ExperimentConfig(
        sim="push",
        methods=("random", "bo-full", "bo-ae-dyn"),
        budget=50,
        seeds=tuple(range(10)),
        out_dir=out_dir,
    )
    print(f"running {len(config.methods)} methods x {len(config.seeds)} seeds "
          f"at budget {config.budget} (writes to {out_dir}) ...\n")
    run = run_experiment(config)

    print("median final trajectory error across seeds:")
    for method in config.methods:
        finals = [run["results"][(method, s)].best_error for s in config.seeds]
        print(f"  {method:10s} {np.median(finals):.4f}   "
              f"(range {min(finals):.4f} .. {max(finals):.4f})")

    print("\nmedian best-error-so-far at checkpoints (from curves.csv):")
    import csv

    with open(run["curves"]) as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        next(reader)
        rows = [(r[0], int(r[1]), float(r[2])) for r in reader]
    checkpoints = (9, 19, 29, 49)
    print(f"  {'iteration':10s} " + " ".join(f"{i + 1:>8d}" for i in checkpoints))
    for method in config.methods:
        series = {it: med for m, it, med in rows if m == method}
        print(f"  {method:10s} " + " ".join(f"{series[i]:8.4f}" for i in checkpoints))

    print(f"\nresult files: {', '.join(str(p) for p in run['paths'].values())}")
    print(f"summary: {run['summary']}\ncurves:  {run['curves']}")


if __name__ == "__main__":
    main()
