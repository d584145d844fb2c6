"""Weak values and von Neumann pointer simulations for pre/post-selected systems."""

from .collective import (
    CollectiveMixture,
    CollectiveSpec,
    CollectiveStats,
    collective_mixture,
    collective_pointer_stats,
    collective_weak_value,
    success_probability,
)
from .errors import (
    AllBranchesVanishError,
    DegenerateEnsembleError,
    DimensionMismatchError,
    UnsupportedConfigurationError,
    WeakMeasError,
)
from .pointer import (
    MOMENTUM_SHIFT_FACTOR,
    CouplingSpec,
    PointerMixture,
    ReadingSample,
    WeakEstimate,
    estimate,
    mixture,
    momentum_mean,
    position_cdf,
    position_mean,
    position_pdf,
    position_variance,
    sample,
    simultaneous,
    window_mass,
)
from .prepost import (
    AblDistribution,
    PrePostEnsemble,
    WeakValue,
    abl_probabilities,
    branch_amplitudes,
    certainty_check,
    postselection_probability,
    weak_value,
)
from .qcore import (
    Observable,
    StateVector,
    apply,
    expectation,
    inner,
    op_tensor,
    projector,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "AblDistribution",
    "AllBranchesVanishError",
    "CollectiveMixture",
    "CollectiveSpec",
    "CollectiveStats",
    "CouplingSpec",
    "DegenerateEnsembleError",
    "DimensionMismatchError",
    "MOMENTUM_SHIFT_FACTOR",
    "Observable",
    "PointerMixture",
    "PrePostEnsemble",
    "ReadingSample",
    "StateVector",
    "UnsupportedConfigurationError",
    "WeakEstimate",
    "WeakMeasError",
    "WeakValue",
    "abl_probabilities",
    "apply",
    "branch_amplitudes",
    "certainty_check",
    "collective_mixture",
    "collective_pointer_stats",
    "collective_weak_value",
    "estimate",
    "expectation",
    "inner",
    "mixture",
    "momentum_mean",
    "op_tensor",
    "position_cdf",
    "position_mean",
    "position_pdf",
    "position_variance",
    "postselection_probability",
    "projector",
    "sample",
    "simultaneous",
    "success_probability",
    "tensor",
    "weak_value",
    "window_mass",
]
