"""Trajectory-error objective and the Bayesian-optimization identification loop.

The loop searches either the native parameter box or, through a latent
map (random embedding or learned decoder), a low-dimensional box whose
points are decoded to full parameter vectors before each simulation.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import gp as gp_mod
from .acquisition import AcquisitionConfig, argmax_ei
from .spaces import ParameterSpace


class SimulationDiverged(RuntimeError):
    """Simulator produced a non-finite or unbounded state."""


class IdentificationError(RuntimeError):
    """The identification loop could not produce any successful evaluation."""


@dataclass(frozen=True)
class Trajectory:
    """Observed (state, control) sequence: states x_0..x_T, controls u_0..u_{T-1}."""

    states: np.ndarray
    controls: np.ndarray

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        controls = np.asarray(self.controls, dtype=float)
        if controls.size == 0:
            controls = controls.reshape(0, 0 if controls.ndim < 2 else controls.shape[-1])
        controls = np.atleast_2d(controls) if controls.size else controls
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "controls", controls)
        if len(states) != len(controls) + 1:
            raise ValueError(
                f"need len(states) == len(controls) + 1, got {len(states)} and {len(controls)}"
            )

    @property
    def horizon(self) -> int:
        return len(self.controls)


@dataclass(frozen=True)
class BudgetSpec:
    max_evaluations: int
    wall_clock_limit: float | None = None

    def __post_init__(self):
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be at least 1")


@dataclass
class IdentificationResult:
    best_theta: np.ndarray
    best_error: float
    history: list  # of (theta, error, iteration)
    posterior: tuple  # (thetas (n, D), weights (n,))


def trajectory_error(sim, observed: Trajectory, theta) -> float:
    """Sum over timesteps of the L2 distance between each observed next
    state and the single-step simulation from the observed current state.

    Divergence is reported as +inf, not raised.
    """
    theta = np.asarray(theta, dtype=float)
    total = 0.0
    for i in range(observed.horizon):
        try:
            pred = sim.step(observed.states[i], observed.controls[i], theta)
        except SimulationDiverged:
            return float("inf")
        resid = observed.states[i + 1] - np.asarray(pred, dtype=float)
        total += float(np.linalg.norm(resid))
    if not np.isfinite(total):
        return float("inf")
    return total


def total_error(sim, observed, theta) -> float:
    """trajectory_error summed over one or several observed trajectories.

    Because every step is re-anchored at an observed state, the steps are
    mutually independent; simulators exposing `step_batch` are evaluated
    in one vectorized call.
    """
    trajectories = [observed] if isinstance(observed, Trajectory) else list(observed)
    if hasattr(sim, "step_batch"):
        pairs = [t for t in trajectories if t.horizon > 0]
        if not pairs:
            return 0.0
        xs = np.concatenate([t.states[:-1] for t in pairs])
        us = np.concatenate([t.controls for t in pairs])
        nexts = np.concatenate([t.states[1:] for t in pairs])
        preds, diverged = sim.step_batch(xs, us, np.asarray(theta, dtype=float))
        if np.any(diverged):
            return float("inf")
        total = float(np.sum(np.linalg.norm(nexts - preds, axis=1)))
        return total if np.isfinite(total) else float("inf")
    total = 0.0
    for traj in trajectories:
        total += trajectory_error(sim, traj, theta)
        if not np.isfinite(total):
            return float("inf")
    return total


def posterior_distribution(history, temperature: float) -> tuple:
    """Softmin distribution over evaluated parameters: w ~ exp(-error / T)."""
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    finite = [(theta, err) for theta, err, _ in history if np.isfinite(err)]
    if not finite:
        raise IdentificationError("no finite errors in history")
    thetas = np.array([t for t, _ in finite])
    errors = np.array([e for _, e in finite])
    logits = -(errors - errors.min()) / temperature
    weights = np.exp(logits)
    weights /= weights.sum()
    return thetas, weights


GRID_CANDIDATE_CAP = 10**5
LOCAL_CANDIDATE_SCALES = (0.2, 0.05, 0.01, 0.002)


def _candidate_points(
    dim: int, grid_res: int, config: AcquisitionConfig, rng, incumbent=None
) -> np.ndarray:
    """Unit-cube candidates: the full grid when affordable, else random.

    Low-dimensional searches (1-D/2-D latent boxes in particular) get a
    per-axis resolution raised toward the candidate cap, since grid_res
    alone would leave the acquisition argmax far too coarse there.

    When the grid is unaffordable, half of the random candidates are
    Gaussian perturbations of the incumbent best at a few scales: uniform
    candidates alone almost never land inside a narrowing basin, so the
    acquisition argmax stalls far from local minima.
    """
    res = max(grid_res, int(GRID_CANDIDATE_CAP ** (1.0 / dim)))
    if res**dim <= GRID_CANDIDATE_CAP:
        axes = [np.linspace(0.0, 1.0, res)] * dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)
    pts = rng.random((config.candidate_count, dim))
    if incumbent is not None:
        k = config.candidate_count // (2 * len(LOCAL_CANDIDATE_SCALES))
        local = [
            np.clip(incumbent + s * rng.standard_normal((k, dim)), 0.0, 1.0)
            for s in LOCAL_CANDIDATE_SCALES
        ]
        pts = np.concatenate([pts[: config.candidate_count - len(LOCAL_CANDIDATE_SCALES) * k], *local])
    return pts


def identify(
    sim,
    observed,
    space: ParameterSpace,
    budget: BudgetSpec,
    latent_map=None,
    rng_seed: int = 0,
    acq: AcquisitionConfig = AcquisitionConfig(),
    n_init: int | None = None,
    refit_every: int = 5,
    log_writer=None,
) -> IdentificationResult:
    """Bayesian-optimization identification of simulator parameters.

    Runs in the native box when `latent_map` is None, otherwise in the
    map's latent box, decoding each point to a full parameter vector
    before simulation. Deterministic for a fixed seed. `log_writer`, when
    given, receives one (iteration, theta, error, best_so_far) record per
    evaluation.
    """
    rng = np.random.default_rng(rng_seed)
    start = time.monotonic()

    if latent_map is None:
        search_lower = np.zeros(space.dim)
        search_upper = np.ones(space.dim)

        def decode(point):
            return space.denormalize(point)
    else:
        search_lower = np.asarray(latent_map.latent_lower, dtype=float)
        search_upper = np.asarray(latent_map.latent_upper, dtype=float)

        def decode(point):
            return latent_map.decode(point)

    search_dim = search_lower.size
    width = search_upper - search_lower

    if n_init is None:
        # roughly a fifth of the budget for space-filling initialization
        n_init = max(5, search_dim, budget.max_evaluations // 5)
    n_init = min(n_init, budget.max_evaluations)

    history = []
    finite_points = []  # (unit-cube search coordinate, error)
    best_theta, best_error = None, float("inf")
    best_unit = None
    seen = set()  # evaluated unit points; the objective is deterministic,
    # so re-evaluating a candidate can never improve on its recorded value
    surrogate = None
    kernel = None

    def out_of_time():
        return (
            budget.wall_clock_limit is not None
            and time.monotonic() - start > budget.wall_clock_limit
        )

    def evaluate(unit_point, iteration):
        nonlocal best_theta, best_error, best_unit
        theta = decode(search_lower + unit_point * width)
        seen.add(np.asarray(unit_point, dtype=float).tobytes())
        error = total_error(sim, observed, theta)
        history.append((theta, error, iteration))
        if np.isfinite(error):
            # the surrogate models log1p(error): trajectory errors span
            # orders of magnitude and a GP on the raw scale over-explores
            finite_points.append((unit_point, np.log1p(error)))
            if error < best_error:
                best_error = error
                best_theta = theta
                best_unit = unit_point
        if log_writer is not None:
            log_writer(iteration, theta, error, best_error)

    # center-plus-random initial design: the box center anchors the GP in
    # the interior, which decoder-backed searches (whose boundary regions
    # decode to clipped parameters) otherwise rarely sample
    init_points = np.vstack(
        [np.full((1, search_dim), 0.5), rng.random((n_init - 1, search_dim))]
    )
    for k in range(n_init):
        if out_of_time():
            break
        evaluate(init_points[k], k)

    while len(history) < budget.max_evaluations and not out_of_time():
        k = len(history)
        if not finite_points:
            evaluate(rng.random(search_dim), k)
            continue
        if kernel is None or (len(finite_points) >= 3 and len(history) % refit_every == 0):
            init_kernel = gp_mod.KernelParams.default(
                search_dim,
                signal_var=max(float(np.var([e for _, e in finite_points])), 1e-6),
            )
            if len(finite_points) >= 3:
                kernel = gp_mod.optimize_hyperparams(finite_points, init_kernel, rng_seed=rng_seed)
            else:
                kernel = init_kernel
        surrogate = gp_mod.fit(finite_points, kernel)
        candidates = _candidate_points(search_dim, space.grid_res, acq, rng, best_unit)
        fresh = np.array([c.tobytes() not in seen for c in candidates])
        if fresh.any():
            candidates = candidates[fresh]
        if k % 2 == 1:
            # alternate EI with pure exploitation: EI under a misspecified
            # stationary kernel over-weights posterior variance and can
            # circle a curved valley without ever descending it
            mean, _ = surrogate.predict_batch(candidates)
            evaluate(candidates[int(np.argmin(mean))], k)
        else:
            evaluate(argmax_ei(surrogate, candidates, acq), k)

    if best_theta is None:
        raise IdentificationError("budget exhausted before any successful simulation")

    finite_errors = np.array([e for _, e, _ in history if np.isfinite(e)])
    temperature = float(np.median(finite_errors))
    if temperature <= 0.0:
        temperature = 1.0
    posterior = posterior_distribution(history, temperature)
    return IdentificationResult(best_theta, best_error, history, posterior)
