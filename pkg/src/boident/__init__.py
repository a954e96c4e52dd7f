"""Black-box physical-parameter identification with Bayesian optimization
and learned low-dimensional parameter embeddings."""

from .acquisition import AcquisitionConfig, argmax_ei, expected_improvement
from .core import (
    BudgetSpec,
    IdentificationResult,
    SimulationDiverged,
    Trajectory,
    identify,
    posterior_distribution,
    total_error,
    trajectory_error,
)
from .gp import GpSurrogate, KernelParams, fit, optimize_hyperparams
from .latent import (
    DynCoupledAe,
    DynamicsNet,
    VaeModel,
    kl_gaussian,
    train_dyn_coupled_ae,
    train_dynamics,
    train_vae,
)
from .nn import Mlp, TrainConfig
from .rembo import RandomEmbedding, make_embedding
from .spaces import ParameterSpace, ground_truth_box

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig",
    "argmax_ei",
    "expected_improvement",
    "BudgetSpec",
    "IdentificationResult",
    "SimulationDiverged",
    "Trajectory",
    "identify",
    "posterior_distribution",
    "total_error",
    "trajectory_error",
    "GpSurrogate",
    "KernelParams",
    "fit",
    "optimize_hyperparams",
    "DynCoupledAe",
    "DynamicsNet",
    "VaeModel",
    "kl_gaussian",
    "train_dyn_coupled_ae",
    "train_dynamics",
    "train_vae",
    "Mlp",
    "TrainConfig",
    "RandomEmbedding",
    "make_embedding",
    "ParameterSpace",
    "ground_truth_box",
    "__version__",
]
