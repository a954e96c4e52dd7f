from .push import (
    PushParams,
    PushSimulator,
    default_push_space,
    make_push_dataset,
    push_displacement,
)
from .structure import (
    DEFAULT_TRUTH,
    INERT_PARAM_NAMES,
    STRUCTURE_PARAM_NAMES,
    StructureParams,
    StructureSimulator,
    com_height,
    default_structure_space,
)
from .datasets import (
    generate_trajectories,
    load_trajectories,
    save_trajectories,
    scripted_controls,
)

__all__ = [
    "PushParams",
    "PushSimulator",
    "default_push_space",
    "make_push_dataset",
    "push_displacement",
    "DEFAULT_TRUTH",
    "INERT_PARAM_NAMES",
    "STRUCTURE_PARAM_NAMES",
    "StructureParams",
    "StructureSimulator",
    "com_height",
    "default_structure_space",
    "generate_trajectories",
    "load_trajectories",
    "save_trajectories",
    "scripted_controls",
]
