"""1-D point-pushing system: impulse in, sliding displacement out.

A block of mass m slides against kinetic friction mu after receiving an
impulse Ft; the gravitational constant is absorbed into mu, so the
displacement is S = (Ft)^2 / (2 m^2 mu). The system is degenerate: only
the product m^2 mu is observable from displacements.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Trajectory
from ..spaces import ParameterSpace

PUSH_PARAM_NAMES = ("mass", "friction")

DEFAULT_MASS_RANGE = (0.5, 1.5)
DEFAULT_FRICTION_RANGE = (0.1, 0.9)
DEFAULT_IMPULSE_FACTOR_RANGE = (0.1, 1.5)  # force and duration sampled independently


@dataclass(frozen=True)
class PushParams:
    m: float
    mu: float

    def __post_init__(self):
        if self.m <= 0.0 or self.mu <= 0.0:
            raise ValueError("mass and friction must be positive")


def push_displacement(m: float, mu: float, ft: float) -> float:
    """Sliding distance after impulse ft: (ft)^2 / (2 m^2 mu)."""
    if m <= 0.0 or mu <= 0.0:
        raise ValueError("mass and friction must be positive")
    if ft < 0.0:
        raise ValueError("impulse must be non-negative")
    return ft**2 / (2.0 * m**2 * mu)


def default_push_space(grid_res: int = 100) -> ParameterSpace:
    return ParameterSpace(
        names=PUSH_PARAM_NAMES,
        lower=[DEFAULT_MASS_RANGE[0], DEFAULT_FRICTION_RANGE[0]],
        upper=[DEFAULT_MASS_RANGE[1], DEFAULT_FRICTION_RANGE[1]],
        grid_res=grid_res,
    )


class PushSimulator:
    """Black-box step function over a scalar position state.

    State: [position]. Control: [impulse]. One step applies one push.
    """

    state_dim = 1
    control_dim = 1

    def __init__(self, param_space: ParameterSpace | None = None):
        self.param_space = param_space if param_space is not None else default_push_space()

    def initial_state(self, theta) -> np.ndarray:
        return np.zeros(1)

    def step(self, x, u, theta) -> np.ndarray:
        m, mu = float(theta[0]), float(theta[1])
        ft = float(np.atleast_1d(u)[0])
        return np.atleast_1d(np.asarray(x, dtype=float)) + push_displacement(m, mu, ft)

    def rollout(self, theta, impulses) -> Trajectory:
        impulses = np.asarray(impulses, dtype=float).reshape(-1, 1)
        states = [self.initial_state(theta)]
        for u in impulses:
            states.append(self.step(states[-1], u, theta))
        return Trajectory(np.array(states), impulses)


def make_push_dataset(
    n_train: int = 20000,
    n_test: int = 2000,
    rng_seed: int = 0,
    mass_range=DEFAULT_MASS_RANGE,
    friction_range=DEFAULT_FRICTION_RANGE,
    impulse_factor_range=DEFAULT_IMPULSE_FACTOR_RANGE,
):
    """Sampled (m, mu, ft, S) records as two (n, 4) arrays (train, test).

    Force and duration are drawn independently and multiplied into the
    impulse; displacements come from push_displacement.
    """
    if n_train < 1 or n_test < 1:
        raise ValueError("dataset sizes must be positive")

    def sample(n, seed):
        rng = np.random.default_rng(seed)
        m = rng.uniform(*mass_range, size=n)
        mu = rng.uniform(*friction_range, size=n)
        force = rng.uniform(*impulse_factor_range, size=n)
        duration = rng.uniform(*impulse_factor_range, size=n)
        ft = force * duration
        s = ft**2 / (2.0 * m**2 * mu)
        return np.stack([m, mu, ft, s], axis=1)

    return sample(n_train, rng_seed), sample(n_test, rng_seed + 1)
