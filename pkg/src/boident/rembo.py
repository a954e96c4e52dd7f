"""Random linear embedding of the parameter box with boundary clipping.

A fixed D x d standard-normal matrix maps a low-dimensional point to a
displacement from the center of the normalized parameter cube; out-of-box
coordinates are clipped to the nearest boundary before denormalization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import ParameterSpace


@dataclass(frozen=True)
class RandomEmbedding:
    matrix: np.ndarray  # (D, d)
    target_space: ParameterSpace
    latent_lower: np.ndarray
    latent_upper: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "latent_lower", np.asarray(self.latent_lower, dtype=float))
        object.__setattr__(self, "latent_upper", np.asarray(self.latent_upper, dtype=float))
        if m.shape[0] != self.target_space.dim:
            raise ValueError("matrix rows must match the target space dimension")
        if m.shape[1] >= m.shape[0]:
            raise ValueError("latent dimension must be strictly below the target dimension")

    @property
    def latent_dim(self) -> int:
        return self.matrix.shape[1]

    def decode_unclipped(self, omega) -> np.ndarray:
        """Normalized-cube image 0.5 + A @ omega, before clipping."""
        omega = np.asarray(omega, dtype=float)
        return 0.5 + self.matrix @ omega

    def decode(self, omega) -> np.ndarray:
        """Full parameter vector in native units; always inside the box."""
        omega = np.asarray(omega, dtype=float)
        if omega.shape != (self.latent_dim,):
            raise ValueError(f"omega must have shape ({self.latent_dim},)")
        if np.any(omega < self.latent_lower) or np.any(omega > self.latent_upper):
            raise ValueError("omega lies outside the latent box")
        unit = np.clip(self.decode_unclipped(omega), 0.0, 1.0)
        return self.target_space.denormalize(unit)

    def save(self, path) -> None:
        np.savez(
            path,
            matrix=self.matrix,
            latent_lower=self.latent_lower,
            latent_upper=self.latent_upper,
            space_lower=self.target_space.lower,
            space_upper=self.target_space.upper,
            space_names=np.array(self.target_space.names),
            grid_res=self.target_space.grid_res,
        )

    @classmethod
    def load(cls, path) -> "RandomEmbedding":
        with np.load(path) as data:
            space = ParameterSpace(
                names=[str(n) for n in data["space_names"]],
                lower=data["space_lower"],
                upper=data["space_upper"],
                grid_res=int(data["grid_res"]),
            )
            return cls(data["matrix"], space, data["latent_lower"], data["latent_upper"])


def make_embedding(space: ParameterSpace, d: int, rng_seed: int = 0) -> RandomEmbedding:
    """Seeded standard-normal embedding with latent box [-sqrt(d), sqrt(d)]^d."""
    if not 1 <= d < space.dim:
        raise ValueError(f"need 1 <= d < D, got d={d}, D={space.dim}")
    rng = np.random.default_rng(rng_seed)
    matrix = rng.standard_normal((space.dim, d))
    half = np.sqrt(d)
    return RandomEmbedding(matrix, space, -half * np.ones(d), half * np.ones(d))
