"""Simulation and verification toolkit for Wright-Fisher diffusions and the
stick-breaking (GEM) measure-valued diffusion.

Layers:

- `constants`: closed-form curvature/metric/rate constants and series bounds
- `spectral`: orthonormal-polynomial eigenbasis, heat kernels, quadrature
- `sde`: reproducible path simulation, coupling by change of measures
- `gem`: stick-breaking geometry, product kernels and product-form bounds
- `checks`: inequality verification suite with margins and reports
- `report`, `plots`, `cli`: deterministic artifacts and the command line
"""

from .constants import (
    RHO_DIAMETER,
    HarnackExponent,
    MetricEval,
    ParamSequence,
    WFParams,
    beta_from_gamma,
    explicit_sequence,
    gamma_quadratic_bound,
    gamma_series,
    harnack_exponent_1d,
    k_ab,
    product_metric_d,
    psi_series,
    rho,
    s_min,
    stick_coords,
)
from .spectral import (
    KernelEval,
    OrthoBasis,
    RecurrenceBreakdownError,
    SupKernel,
    TruncationFloorError,
    ball_volume,
    beta_moment,
    build_basis,
    chebyshev_grid,
    heat_kernel,
    kernel_deviation_diagonal,
    kernel_tail_bound,
    recurrence_coefficients,
    semigroup_apply,
    sup_kernel,
)
from .sde import (
    CouplingEnsemble,
    CouplingPath,
    EnsembleResult,
    EstimateCI,
    PathSample,
    couple_ensemble,
    coupling_drift_rate,
    coupling_envelope,
    girsanov_bound,
    girsanov_moment,
    mc_expectation,
    path_generator,
    simulate_coupling,
    simulate_ensemble,
    simulate_path,
    step_wf,
)
from .gem import (
    C0_DISPLAY,
    C0_H2,
    CubePoint,
    GEMPath,
    GEMSample,
    ProductKernel,
    SimplexPoint,
    UniformKernelBounds,
    build_product_bases,
    ergodicity_bound,
    kernel_uniform_bounds,
    phi,
    product_harnack_bound,
    product_kernel,
    psi,
    sample_gem,
    simulate_gem_path,
    two_param_params,
)
from .checks import (
    CheckReport,
    build_jobs,
    list_checks,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # constants
    "RHO_DIAMETER",
    "HarnackExponent",
    "MetricEval",
    "ParamSequence",
    "WFParams",
    "beta_from_gamma",
    "explicit_sequence",
    "gamma_quadratic_bound",
    "gamma_series",
    "harnack_exponent_1d",
    "k_ab",
    "product_metric_d",
    "psi_series",
    "rho",
    "s_min",
    "stick_coords",
    # spectral
    "KernelEval",
    "OrthoBasis",
    "RecurrenceBreakdownError",
    "SupKernel",
    "TruncationFloorError",
    "ball_volume",
    "beta_moment",
    "build_basis",
    "chebyshev_grid",
    "heat_kernel",
    "kernel_deviation_diagonal",
    "kernel_tail_bound",
    "recurrence_coefficients",
    "semigroup_apply",
    "sup_kernel",
    # sde
    "CouplingEnsemble",
    "CouplingPath",
    "EnsembleResult",
    "EstimateCI",
    "PathSample",
    "couple_ensemble",
    "coupling_drift_rate",
    "coupling_envelope",
    "girsanov_bound",
    "girsanov_moment",
    "mc_expectation",
    "path_generator",
    "simulate_coupling",
    "simulate_ensemble",
    "simulate_path",
    "step_wf",
    # gem
    "C0_DISPLAY",
    "C0_H2",
    "CubePoint",
    "GEMPath",
    "GEMSample",
    "ProductKernel",
    "SimplexPoint",
    "UniformKernelBounds",
    "build_product_bases",
    "ergodicity_bound",
    "kernel_uniform_bounds",
    "phi",
    "product_harnack_bound",
    "product_kernel",
    "psi",
    "sample_gem",
    "simulate_gem_path",
    "two_param_params",
    # checks
    "CheckReport",
    "build_jobs",
    "list_checks",
    "run_suite",
]
