"""Gaussian-process regression over the trajectory-error function.

Squared-exponential kernel with per-dimension (ARD) length scales; prior
mean equal to the mean of the observed targets; exact Cholesky inference
with jitter escalation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

JITTER_START = 1e-10
JITTER_MAX = 1e-4
DUPLICATE_TOL = 1e-10


class GpFitError(RuntimeError):
    """Kernel matrix not positive definite even at maximum jitter."""


@dataclass(frozen=True)
class KernelParams:
    signal_var: float
    length_scales: np.ndarray
    noise_var: float = 0.0

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        object.__setattr__(self, "length_scales", ls)
        if self.signal_var <= 0.0:
            raise ValueError("signal_var must be positive")
        if np.any(ls <= 0.0):
            raise ValueError("length scales must be positive")
        if self.noise_var < 0.0:
            raise ValueError("noise_var must be non-negative")

    @classmethod
    def default(cls, dim: int, signal_var: float = 1.0) -> "KernelParams":
        return cls(signal_var=signal_var, length_scales=np.full(dim, 0.3), noise_var=1e-8)


def _sq_dists(x1: np.ndarray, x2: np.ndarray, length_scales: np.ndarray) -> np.ndarray:
    a = x1 / length_scales
    b = x2 / length_scales
    return np.sum(a**2, axis=1)[:, None] + np.sum(b**2, axis=1)[None, :] - 2.0 * a @ b.T


def kernel_matrix(kernel: KernelParams, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    d2 = np.maximum(_sq_dists(x1, x2, kernel.length_scales), 0.0)
    return kernel.signal_var * np.exp(-0.5 * d2)


def _merge_duplicates(x: np.ndarray, y: np.ndarray):
    """Average the targets of inputs closer than DUPLICATE_TOL."""
    d2 = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=2)
    close = d2 < DUPLICATE_TOL**2
    if not np.any(close & ~np.eye(len(x), dtype=bool)):
        return x, y
    # group each point with the first point it is close to
    group = np.argmax(close, axis=1)  # first True per row
    kept = np.unique(group)
    merged_y = np.array([float(np.mean(y[group == g])) for g in kept])
    return x[kept], merged_y


class GpSurrogate:
    """Immutable fitted GP; safe for concurrent predict calls."""

    def __init__(self, inputs, targets, kernel: KernelParams, chol, alpha, prior_mean, jitter):
        self.inputs = inputs
        self.targets = targets
        self.kernel = kernel
        self.chol = chol
        self.alpha = alpha
        self.prior_mean = prior_mean
        self.jitter = jitter

    def predict(self, x) -> tuple:
        """Posterior (mean, variance) at a single point."""
        x = np.asarray(x, dtype=float).reshape(1, -1)
        mean, var = self.predict_batch(x)
        return float(mean[0]), float(var[0])

    def predict_batch(self, x: np.ndarray) -> tuple:
        """Posterior means and variances at rows of x, (n, dim)."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.inputs.shape[1]:
            raise ValueError(
                f"expected points of dimension {self.inputs.shape[1]}, got shape {x.shape}"
            )
        k_star = kernel_matrix(self.kernel, x, self.inputs)
        mean = self.prior_mean + k_star @ self.alpha
        v = solve_triangular(self.chol, k_star.T, lower=True)
        var = self.kernel.signal_var - np.sum(v**2, axis=0)
        return mean, np.maximum(var, 0.0)

    def log_marginal_likelihood(self) -> float:
        n = len(self.targets)
        resid = self.targets - self.prior_mean
        return float(
            -0.5 * resid @ self.alpha
            - np.sum(np.log(np.diag(self.chol)))
            - 0.5 * n * np.log(2.0 * np.pi)
        )


def fit(points, kernel: KernelParams, prior_mean: float | None = None) -> GpSurrogate:
    """Fit an exact GP to (vector, value) pairs.

    The prior mean defaults to the mean of the observed targets.
    Near-duplicate inputs (within 1e-10) are merged by averaging their
    targets. Cholesky is attempted without jitter first; on failure the
    diagonal jitter is escalated tenfold up to JITTER_MAX before giving up.
    """
    x = np.array([np.asarray(p, dtype=float) for p, _ in points])
    y = np.array([float(v) for _, v in points])
    if len(x) < 1:
        raise ValueError("need at least one training point")
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
        raise ValueError("training data must be finite")
    x, y = _merge_duplicates(x, y)

    if prior_mean is None:
        prior_mean = float(np.mean(y))
    k = kernel_matrix(kernel, x, x)
    k[np.diag_indices_from(k)] += kernel.noise_var

    jitter = 0.0
    while True:
        try:
            chol = np.linalg.cholesky(k + jitter * np.eye(len(x)))
            break
        except np.linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_MAX:
                raise GpFitError(
                    f"kernel matrix of {len(x)} points is not positive definite "
                    f"even with jitter {JITTER_MAX:g}; kernel={kernel}"
                )
    alpha = cho_solve((chol, True), y - prior_mean)
    return GpSurrogate(x, y, kernel, chol, alpha, prior_mean, jitter)


def log_marginal_likelihood(points, kernel: KernelParams) -> float:
    try:
        return fit(points, kernel).log_marginal_likelihood()
    except GpFitError:
        return -np.inf


def optimize_hyperparams(
    points,
    init: KernelParams,
    restarts: int = 2,
    rng_seed: int = 0,
    noise_floor: float = 1e-10,
    max_sweeps: int = 40,
) -> KernelParams:
    """Multi-start coordinate search over log-hyperparameters.

    Returns parameters whose log marginal likelihood is at least that of
    `init`; falls back to `init` whenever nothing better is found.
    """
    if len(points) < 3:
        return init
    rng = np.random.default_rng(rng_seed)
    dim = init.length_scales.size

    def pack(k: KernelParams) -> np.ndarray:
        return np.log(
            np.concatenate([[k.signal_var], k.length_scales, [max(k.noise_var, noise_floor)]])
        )

    def unpack(p: np.ndarray) -> KernelParams:
        vals = np.exp(np.clip(p, -20.0, 20.0))
        return KernelParams(vals[0], vals[1 : 1 + dim], vals[-1])

    def score(p: np.ndarray) -> float:
        return log_marginal_likelihood(points, unpack(p))

    best_p = pack(init)
    best_lml = score(best_p)

    starts = [pack(init)]
    for _ in range(restarts):
        starts.append(pack(init) + rng.normal(0.0, 1.0, size=dim + 2))

    for start in starts:
        p = start.copy()
        cur = score(p)
        step = 0.8
        sweeps = 0
        while step > 0.04 and sweeps < max_sweeps:
            sweeps += 1
            improved = False
            for i in range(p.size):
                for delta in (step, -step):
                    trial = p.copy()
                    trial[i] += delta
                    s = score(trial)
                    if s > cur:
                        p, cur = trial, s
                        improved = True
            if not improved:
                step *= 0.5
        if cur > best_lml:
            best_lml, best_p = cur, p

    return unpack(best_p)
