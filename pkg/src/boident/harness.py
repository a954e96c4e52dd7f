"""Experiment orchestration: method comparisons, result CSVs, curves, tables.

Compares random search, full-dimensional Bayesian optimization, and the
three latent-space variants (random embedding, VAE decoder, dynamics-
coupled autoencoder decoder) on the built-in simulators, emitting
per-iteration result rows, error-vs-budget curves, and per-parameter
relative-error tables. Ground truth lives only in this layer; the
optimizer sees observed trajectories alone.
"""
from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import BudgetSpec, IdentificationResult, Trajectory, identify, total_error
from .latent import DynCoupledAe, DynamicsNet, VaeModel, train_dyn_coupled_ae, train_dynamics, train_vae
from .nn import TrainConfig
from .rembo import make_embedding
from .simulators import (
    DEFAULT_TRUTH,
    PushSimulator,
    StructureSimulator,
    com_height,
    default_push_space,
    generate_trajectories,
    make_push_dataset,
    scripted_controls,
)
from .simulators.structure import STRUCTURE_PARAM_NAMES
from .spaces import ParameterSpace

METHODS = ("random", "bo-full", "bo-rembo", "bo-vae", "bo-ae-dyn")

PUSH_TRUTH = np.array([1.0, 0.32])
PUSH_OBSERVED_IMPULSES = np.array([0.5, 0.8, 1.0, 1.3, 1.6])


@dataclass(frozen=True)
class ExperimentConfig:
    sim: str = "push"  # "push" | "structure"
    methods: tuple = METHODS
    latent_dim: int | None = None  # default: 1 for push, 5 for structure
    budget: int = 50
    seeds: tuple = tuple(range(10))
    out_dir: str = "results"
    cache_dir: str | None = None  # defaults to <out_dir>/cache
    n_trajectories: int = 5
    horizon: int | None = None  # structure only; default 40
    truth_frac: float = 0.1  # structure identification box half-width
    # training-set sizes
    push_n_train: int = 20000
    push_n_test: int = 2000
    structure_train_trajectories: int = 300
    vae_samples: int = 5000
    # training schedules
    dyn_epochs: int = 60
    vae_epochs: int = 60
    ae_epochs: int = 150

    def __post_init__(self):
        if self.sim not in ("push", "structure"):
            raise ValueError(f"unknown simulator {self.sim!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.budget < 1:
            raise ValueError("budget must be positive")
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def resolved_latent_dim(self) -> int:
        if self.latent_dim is not None:
            return self.latent_dim
        return 1 if self.sim == "push" else 5


def random_search(sim, observed, space: ParameterSpace, budget: BudgetSpec,
                  rng_seed: int = 0, log_writer=None) -> IdentificationResult:
    """Uniform random baseline with the same objective and result shape
    as the Bayesian-optimization loop."""
    thetas = space.sample_uniform(rng_seed, budget.max_evaluations)
    history = []
    best_theta, best_error = None, float("inf")
    for k, theta in enumerate(thetas):
        error = total_error(sim, observed, theta)
        history.append((theta, error, k))
        if error < best_error:
            best_error, best_theta = error, theta
        if log_writer is not None:
            log_writer(k, theta, error, best_error)
    if best_theta is None or not np.isfinite(best_error):
        raise RuntimeError("random search produced no successful simulation")
    from .core import posterior_distribution

    finite = np.array([e for _, e, _ in history if np.isfinite(e)])
    temperature = float(np.median(finite)) or 1.0
    return IdentificationResult(best_theta, best_error, history,
                                posterior_distribution(history, temperature))


# ---------------------------------------------------------------------------
# Benchmark setups
# ---------------------------------------------------------------------------

class PushBenchmark:
    """Identification of (mass, friction) from observed push displacements."""

    name = "push"
    truth = PUSH_TRUTH
    param_names = ("mass", "friction")

    def __init__(self, config: ExperimentConfig, cache: Path):
        self.config = config
        self.cache = cache
        self.sim = PushSimulator()
        self.space = default_push_space()
        self.observed = [self.sim.rollout(self.truth, PUSH_OBSERVED_IMPULSES)]

    def _dataset(self):
        return make_push_dataset(self.config.push_n_train, self.config.push_n_test, rng_seed=0)

    def dynamics(self) -> DynamicsNet:
        key = _cache_key("push-dyn", self.config.push_n_train, self.config.dyn_epochs)
        path = self.cache / key
        if (path / "manifest.json").exists():
            return DynamicsNet.load(path)
        train, _ = self._dataset()
        dyn, _ = train_dynamics(
            theta=train[:, :2],
            x=None,
            u=train[:, 2:3],
            y=train[:, 3],
            space=self.space,
            hidden_dims=(64, 128, 64),
            config=TrainConfig(epochs=self.config.dyn_epochs, rng_seed=0),
            target_transform="log1p",
        )
        dyn.save(path)
        return dyn

    def autoencoder(self) -> DynCoupledAe:
        key = _cache_key("push-ae", self.config.push_n_train, self.config.dyn_epochs,
                         self.config.ae_epochs, self.config.resolved_latent_dim)
        path = self.cache / key
        if (path / "manifest.json").exists():
            return DynCoupledAe.load(path)
        dyn = self.dynamics()
        train, _ = self._dataset()
        ae, _ = train_dyn_coupled_ae(
            theta=train[:, :2],
            x=None,
            u=train[:, 2:3],
            y=train[:, 3],
            dynamics=dyn,
            latent_dim=self.config.resolved_latent_dim,
            hidden=32,
            config=TrainConfig(epochs=self.config.ae_epochs, rng_seed=0),
        )
        ae.save(path)
        return ae

    def vae(self) -> VaeModel:
        key = _cache_key("push-vae", self.config.vae_samples, self.config.vae_epochs,
                         self.config.resolved_latent_dim)
        path = self.cache / key
        if (path / "manifest.json").exists():
            return VaeModel.load(path)
        samples = self.space.sample_uniform(7, self.config.vae_samples)
        model, _ = train_vae(
            self.space.normalize(samples),
            latent_dim=self.config.resolved_latent_dim,
            space=self.space,
            config=TrainConfig(epochs=self.config.vae_epochs, rng_seed=0),
            hidden=400,
        )
        model.save(path)
        return model


class StructureBenchmark:
    """Identification of the 12 structure parameters within a relative box."""

    name = "structure"
    truth = DEFAULT_TRUTH
    param_names = STRUCTURE_PARAM_NAMES

    def __init__(self, config: ExperimentConfig, cache: Path):
        self.config = config
        self.cache = cache
        self.horizon = config.horizon if config.horizon is not None else 40
        self.sim = StructureSimulator()
        # Identification tolerances: geometry (rod_length) is measurable to a
        # tenth of the material/contact tolerance. The box sits asymmetrically
        # around the truth so no method's search-box center coincides with it.
        fracs = np.full(len(STRUCTURE_PARAM_NAMES), config.truth_frac)
        fracs[STRUCTURE_PARAM_NAMES.index("rod_length")] = 0.1 * config.truth_frac
        self.space = ParameterSpace(
            STRUCTURE_PARAM_NAMES,
            self.truth * (1.0 - 0.8 * fracs),
            self.truth * (1.0 + 1.2 * fracs),
        )
        scripts = scripted_controls(self.sim.control_dim, self.horizon,
                                    config.n_trajectories, rng_seed=100)
        self.observed = [
            traj for traj, diverged in generate_trajectories(
                self.sim, self.truth, scripts, self.horizon, config.n_trajectories
            ) if not diverged
        ]

    def _box_key(self):
        """Cache-key component tying trained models to the identification box."""
        return [self.space.lower.tolist(), self.space.upper.tolist()]

    def _training_rows(self):
        """(theta, state, control, delta-com) rows from sampled-parameter rollouts."""
        cfg = self.config
        thetas = self.space.sample_uniform(11, cfg.structure_train_trajectories)
        scripts = scripted_controls(self.sim.control_dim, self.horizon,
                                    cfg.structure_train_trajectories, rng_seed=12)
        rows_t, rows_x, rows_u, rows_y = [], [], [], []
        for k, theta in enumerate(thetas):
            result = generate_trajectories(self.sim, theta, scripts[k : k + 1],
                                           self.horizon, 1)
            traj, diverged = result[0]
            for i in range(traj.horizon):
                rows_t.append(theta)
                rows_x.append(traj.states[i])
                rows_u.append(traj.controls[i])
                rows_y.append(com_height(traj.states[i + 1]) - com_height(traj.states[i]))
        return (np.array(rows_t), np.array(rows_x), np.array(rows_u), np.array(rows_y))

    def dynamics(self) -> DynamicsNet:
        key = _cache_key("structure-dyn", self.config.structure_train_trajectories,
                         self.horizon, self.config.dyn_epochs, self._box_key())
        path = self.cache / key
        if (path / "manifest.json").exists():
            return DynamicsNet.load(path)
        t, x, u, y = self._training_rows()
        dyn, _ = train_dynamics(
            theta=t, x=x, u=u, y=y,
            space=self.space,
            hidden_dims=(128, 64, 32),
            config=TrainConfig(epochs=self.config.dyn_epochs, rng_seed=0),
        )
        dyn.save(path)
        return dyn

    def autoencoder(self) -> DynCoupledAe:
        key = _cache_key("structure-ae", self.config.structure_train_trajectories,
                         self.horizon, self.config.dyn_epochs, self.config.ae_epochs,
                         self.config.resolved_latent_dim, self._box_key())
        path = self.cache / key
        if (path / "manifest.json").exists():
            return DynCoupledAe.load(path)
        dyn = self.dynamics()
        t, x, u, y = self._training_rows()
        ae, _ = train_dyn_coupled_ae(
            theta=t, x=x, u=u, y=y,
            dynamics=dyn,
            latent_dim=self.config.resolved_latent_dim,
            hidden=10,
            config=TrainConfig(epochs=self.config.ae_epochs, rng_seed=0),
        )
        ae.save(path)
        return ae

    def vae(self) -> VaeModel:
        key = _cache_key("structure-vae", self.config.vae_samples, self.config.vae_epochs,
                         self.config.resolved_latent_dim, self._box_key())
        path = self.cache / key
        if (path / "manifest.json").exists():
            return VaeModel.load(path)
        samples = self.space.sample_uniform(7, self.config.vae_samples)
        model, _ = train_vae(
            self.space.normalize(samples),
            latent_dim=self.config.resolved_latent_dim,
            space=self.space,
            config=TrainConfig(epochs=self.config.vae_epochs, rng_seed=0),
            hidden=400,
        )
        model.save(path)
        return model


def _cache_key(*parts) -> str:
    digest = hashlib.sha256(json.dumps(parts, sort_keys=True).encode()).hexdigest()[:16]
    return f"{parts[0]}-{digest}"


def make_benchmark(config: ExperimentConfig):
    cache = Path(config.cache_dir or Path(config.out_dir) / "cache")
    cache.mkdir(parents=True, exist_ok=True)
    cls = PushBenchmark if config.sim == "push" else StructureBenchmark
    return cls(config, cache)


# ---------------------------------------------------------------------------
# Running methods and writing results
# ---------------------------------------------------------------------------

def run_method(bench, method: str, seed: int, config: ExperimentConfig):
    """One (method, seed) cell; returns (IdentificationResult, iteration rows)."""
    budget = BudgetSpec(config.budget)
    rows = []
    truth = bench.truth

    def log(iteration, theta, error, best_error):
        rows.append((iteration, np.array(theta), error, best_error))

    if method == "random":
        result = random_search(bench.sim, bench.observed, bench.space, budget, seed, log)
    elif method == "bo-full":
        result = identify(bench.sim, bench.observed, bench.space, budget,
                          rng_seed=seed, log_writer=log)
    else:
        if method == "bo-rembo":
            latent = make_embedding(bench.space, config.resolved_latent_dim,
                                    rng_seed=1000 + seed)
        elif method == "bo-vae":
            latent = bench.vae()
        else:
            latent = bench.autoencoder()
        result = identify(bench.sim, bench.observed, bench.space, budget,
                          latent_map=latent, rng_seed=seed, log_writer=log)

    # per-iteration relative error (%) of the current best parameters
    out_rows = []
    best_theta = None
    best_error = float("inf")
    for iteration, theta, error, _ in rows:
        if error < best_error:
            best_error, best_theta = error, theta
        rel = np.abs(best_theta - truth) / np.abs(truth) * 100.0
        out_rows.append((method, seed, iteration, error, best_error, rel))
    return result, out_rows


def _write_method_csv(path: Path, rows, param_names, config_echo: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# generated: {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        fh.write(f"# config: {config_echo}\n")
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "seed", "iteration", "error", "best_error"]
            + [f"relerr_pct_{n}" for n in param_names]
        )
        for method, seed, iteration, error, best_error, rel in rows:
            writer.writerow([method, seed, iteration, repr(float(error)),
                             repr(float(best_error))] + [repr(float(r)) for r in rel])


def param_error_table(final_rel_errors: dict, param_names):
    """Per-parameter mean and population std of relative error (%) per method.

    `final_rel_errors` maps method -> list over seeds of per-parameter
    relative-error vectors. Returns rows (method, parameter, mean, std).
    """
    table = []
    for method, vectors in final_rel_errors.items():
        arr = np.array(vectors)
        mean = arr.mean(axis=0)
        std = arr.std(axis=0)  # population convention
        for name, m, s in zip(param_names, mean, std):
            table.append((method, name, float(m), float(s)))
    return table


def emit_curves(all_rows, budget: int):
    """Long-format curve rows (method, iteration, median, q25, q75) of
    best-error-so-far across seeds."""
    by_method = {}
    for method, seed, iteration, _, best_error, _ in all_rows:
        by_method.setdefault(method, {}).setdefault(seed, []).append((iteration, best_error))
    curves = []
    for method in sorted(by_method):
        seeds = by_method[method]
        per_seed = {}
        for seed, pairs in seeds.items():
            pairs.sort()
            # carry forward when a run stopped early
            series = np.full(budget, np.nan)
            last = np.nan
            j = 0
            for it in range(budget):
                while j < len(pairs) and pairs[j][0] == it:
                    last = pairs[j][1]
                    j += 1
                series[it] = last
            per_seed[seed] = series
        mat = np.array([per_seed[s] for s in sorted(per_seed)])
        for it in range(budget):
            col = mat[:, it]
            col = col[np.isfinite(col)]
            if col.size == 0:
                continue
            curves.append((method, it, float(np.median(col)),
                           float(np.percentile(col, 25)), float(np.percentile(col, 75))))
    return curves


def run_experiment(config: ExperimentConfig) -> dict:
    """Run every configured (method, seed) cell and write result files.

    Produces per-method CSVs, a per-parameter error summary (mean +/- std
    across seeds), and error-vs-budget curve data under config.out_dir.
    Returns the paths plus in-memory results keyed by (method, seed).
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bench = make_benchmark(config)
    config_echo = json.dumps(asdict(config), sort_keys=True)
    (out / "config.json").write_text(config_echo + "\n")

    results = {}
    all_rows = []
    final_rel = {m: [] for m in config.methods}
    paths = {}
    for method in config.methods:
        method_rows = []
        for seed in config.seeds:
            result, rows = run_method(bench, method, seed, config)
            results[(method, seed)] = result
            method_rows.extend(rows)
            final_rel[method].append(rows[-1][5])
        path = out / f"{method}.csv"
        _write_method_csv(path, method_rows, bench.param_names, config_echo)
        paths[method] = path
        all_rows.extend(method_rows)

    # Table-style summary of identified-parameter error
    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        fh.write(f"# generated: {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        fh.write(f"# config: {config_echo}\n")
        writer = csv.writer(fh)
        writer.writerow(["method", "parameter", "mean_relerr_pct", "std_relerr_pct"])
        for row in param_error_table(final_rel, bench.param_names):
            writer.writerow([row[0], row[1], repr(row[2]), repr(row[3])])

    curves_path = out / "curves.csv"
    with open(curves_path, "w", newline="") as fh:
        fh.write(f"# generated: {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        fh.write(f"# config: {config_echo}\n")
        writer = csv.writer(fh)
        writer.writerow(["method", "iteration", "median_best_error", "q25", "q75"])
        for method, it, med, q25, q75 in emit_curves(all_rows, config.budget):
            writer.writerow([method, it, repr(med), repr(q25), repr(q75)])

    return {"results": results, "paths": paths, "summary": summary_path,
            "curves": curves_path, "bench": bench}
