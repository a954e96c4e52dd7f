"""Box-bounded parameter domains: bounds, normalization, grids, sampling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import yaml

# Refuse full grid enumeration beyond this many points (exponential in dim).
GRID_ENUM_CAP = 10**6

DEFAULT_GRID_RES = 100


class DimensionMismatchError(ValueError):
    """Vector length does not match the space dimension."""


@dataclass(frozen=True)
class ParameterSpace:
    """A D-dimensional axis-aligned box of physical parameters, in native units.

    All optimizer-facing computation happens in normalized [0, 1]^D
    coordinates; native units appear only at simulator boundaries.
    """

    names: tuple
    lower: np.ndarray
    upper: np.ndarray
    grid_res: int = DEFAULT_GRID_RES

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.ndim != 1 or upper.ndim != 1:
            raise ValueError("bounds must be 1-D arrays")
        if len(self.names) != lower.size or lower.size != upper.size:
            raise ValueError("names, lower, and upper must have equal length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("parameter names must be unique")
        if not np.all(lower < upper):
            raise ValueError("lower bound must be strictly below upper bound in every dimension")
        if self.grid_res < 2:
            raise ValueError("grid_res must be at least 2")
        lower.setflags(write=False)
        upper.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def _check_dim(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.dim:
            raise DimensionMismatchError(
                f"expected {self.dim}-dimensional vector, got shape {theta.shape}"
            )
        return theta

    def normalize(self, theta) -> np.ndarray:
        """Affine map of native coordinates onto the unit cube (lower -> 0, upper -> 1)."""
        theta = self._check_dim(theta)
        return (theta - self.lower) / self.width

    def denormalize(self, unit) -> np.ndarray:
        """Inverse of :meth:`normalize`."""
        unit = self._check_dim(unit)
        return self.lower + unit * self.width

    def contains(self, theta, atol: float = 0.0) -> bool:
        theta = self._check_dim(theta)
        return bool(np.all(theta >= self.lower - atol) and np.all(theta <= self.upper + atol))

    def clip(self, theta) -> np.ndarray:
        theta = self._check_dim(theta)
        return np.clip(theta, self.lower, self.upper)

    def sample_uniform(self, rng_seed: int, n: int) -> np.ndarray:
        """n i.i.d. uniform samples over the box, (n, D), deterministic per seed."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(rng_seed)
        u = rng.random((n, self.dim))
        return self.lower + u * self.width

    def grid(self) -> np.ndarray:
        """Full regular-grid enumeration, (grid_res^D, D) in native units.

        Refused when the grid would exceed GRID_ENUM_CAP points.
        """
        n_points = self.grid_res ** self.dim
        if n_points > GRID_ENUM_CAP:
            raise ValueError(
                f"grid of {self.grid_res}^{self.dim} = {n_points} points exceeds "
                f"the enumeration cap of {GRID_ENUM_CAP}"
            )
        axes = [np.linspace(lo, hi, self.grid_res) for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def with_bounds(self, lower, upper) -> "ParameterSpace":
        return ParameterSpace(self.names, lower, upper, self.grid_res)

    @classmethod
    def from_config(cls, path) -> "ParameterSpace":
        """Load a space from a YAML (or JSON) file.

        Expected layout::

            grid_res: 100        # optional
            parameters:
              - {name: mass, lower: 0.5, upper: 1.5}
              - {name: friction, lower: 0.1, upper: 0.9}
        """
        with open(path) as fh:
            doc = yaml.safe_load(fh)
        params = doc["parameters"]
        return cls(
            names=[p["name"] for p in params],
            lower=[float(p["lower"]) for p in params],
            upper=[float(p["upper"]) for p in params],
            grid_res=int(doc.get("grid_res", DEFAULT_GRID_RES)),
        )

    def to_config(self, path) -> None:
        doc = {
            "grid_res": self.grid_res,
            "parameters": [
                {"name": n, "lower": float(lo), "upper": float(hi)}
                for n, lo, hi in zip(self.names, self.lower, self.upper)
            ],
        }
        with open(path, "w") as fh:
            yaml.safe_dump(doc, fh, sort_keys=False)


def ground_truth_box(space: ParameterSpace, truth, frac: float) -> ParameterSpace:
    """Box of relative half-width `frac` around a strictly positive ground truth."""
    truth = np.asarray(truth, dtype=float)
    if truth.shape != (space.dim,):
        raise DimensionMismatchError(f"truth must have shape ({space.dim},)")
    if not 0.0 < frac < 1.0:
        raise ValueError("frac must lie in (0, 1)")
    if np.any(truth <= 0.0):
        raise ValueError("relative box is undefined for non-positive truth coordinates")
    return ParameterSpace(space.names, truth * (1.0 - frac), truth * (1.0 + frac), space.grid_res)
