"""Hyper-parameter spaces and the search baselines."""

from .search import (
    DEFAULT_RESOLUTION,
    DEFAULT_TRIALS,
    TrialResult,
    evaluate_params,
    grid_search,
    random_search,
    trial_rng,
)
from .space import (
    CATEGORICAL,
    CONTINUOUS,
    INTEGER,
    HyperParamAssignment,
    HyperParamSpace,
    ParamDomain,
    default_space,
    default_spaces,
)

__all__ = [
    "CATEGORICAL", "CONTINUOUS", "INTEGER", "DEFAULT_RESOLUTION", "DEFAULT_TRIALS",
    "HyperParamAssignment", "HyperParamSpace", "ParamDomain", "TrialResult",
    "default_space", "default_spaces", "evaluate_params", "grid_search", "random_search",
    "trial_rng",
]
