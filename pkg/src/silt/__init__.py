"""silt: chaos-expansion kernels and regularized self-intersection
local times of d-dimensional Brownian motion.

The package computes the deterministic kernel functions of the Wiener
chaos expansion of the (Gaussian-, gap-, and cut-) regularized local
time, their closed-form expectations, L^2 norms and convergence-rate
tables, and Monte Carlo estimates of the corresponding path
functionals, including renormalized tail and partition-function
experiments.  The ``silt`` command-line tool exposes each experiment
as a subcommand.
"""

from silt._backend import backend_name
from silt.core import (
    KernelPoint,
    ModelParams,
    MultiIndex,
    chaos_weight,
    enumerate_multi_indices,
)
from silt.errors import (
    PreconditionError,
    QuadratureError,
    SiltError,
    WeightOverflowError,
)
from silt.expectations import (
    RegularizationSpec,
    divergence_constant_k,
    expected_combined_lt,
    expected_gap_lt,
    expected_gaussian_lt,
)
from silt.kernels import (
    KernelValue,
    TimeRectangle,
    cut_kernel,
    gap_kernel,
    kernel_quadrature_oracle,
    phi_eps_kernel,
    phi_kernel,
    psi_coefficient,
    rho_bound,
    rho_kernel,
)
from silt.montecarlo import (
    BrownianPath,
    MCEstimate,
    TailExperiment,
    centered_lt,
    centered_lt_samples,
    chebyshev_tail_bound,
    chebyshev_tail_intermediate,
    effective_gap,
    empirical_tail,
    gaussian_lt,
    mc_gaussian_lt,
    mc_occupation_d1,
    occupation_oracle_d1,
    partition_estimate,
    sample_path,
)
from silt.norms import (
    ChaosDistance,
    RateRow,
    RateTable,
    VarianceBreakdown,
    chaos_distance_sq,
    phi_centered_variance,
    phi_centered_variance_breakdown,
    rate_verification,
    rho_l2_norm_sq,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    # core
    "ModelParams",
    "MultiIndex",
    "KernelPoint",
    "enumerate_multi_indices",
    "chaos_weight",
    # errors
    "SiltError",
    "PreconditionError",
    "QuadratureError",
    "WeightOverflowError",
    # expectations
    "RegularizationSpec",
    "expected_gaussian_lt",
    "expected_gap_lt",
    "expected_combined_lt",
    "divergence_constant_k",
    # kernels
    "KernelValue",
    "TimeRectangle",
    "psi_coefficient",
    "phi_kernel",
    "phi_eps_kernel",
    "rho_kernel",
    "gap_kernel",
    "cut_kernel",
    "rho_bound",
    "kernel_quadrature_oracle",
    # norms
    "ChaosDistance",
    "RateRow",
    "RateTable",
    "VarianceBreakdown",
    "rho_l2_norm_sq",
    "chaos_distance_sq",
    "rate_verification",
    "phi_centered_variance",
    "phi_centered_variance_breakdown",
    # montecarlo
    "BrownianPath",
    "MCEstimate",
    "TailExperiment",
    "sample_path",
    "effective_gap",
    "gaussian_lt",
    "centered_lt",
    "centered_lt_samples",
    "mc_gaussian_lt",
    "occupation_oracle_d1",
    "mc_occupation_d1",
    "chebyshev_tail_bound",
    "chebyshev_tail_intermediate",
    "empirical_tail",
    "partition_estimate",
]
