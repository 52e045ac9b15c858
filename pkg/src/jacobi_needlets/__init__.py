"""Needlet frames and weighted function-space norms for tensor-product Jacobi expansions."""
from .approx import ApproxRun, abs_power_target, bs_tau_norm, greedy_nterm, jackson_table
from .cubature import (
    BudgetExceededError,
    CubatureLevel,
    ball_measure,
    build_level,
    interval_measure,
    lp_norm,
    maximal_indicator,
    tile_measure,
)
from .cutoff import (
    CoveringError,
    CutoffFunction,
    CutoffTypeError,
    DerivativeGauge,
    GaugeClass,
    make_dual_cutoff,
    make_multivariate,
    make_radial_impostor,
    make_small_derivative_univariate,
    make_univariate,
    verify_admissibility,
)
from .frame import (
    CoverageError,
    NeedletCoefficients,
    NeedletFrame,
    analyze,
    build_frame,
    needlet_norms,
    synthesize,
)
from .jacobi_poly import (
    ConvergenceError,
    DomainError,
    JacobiPair,
    QuadratureRule,
    eval_orthonormal,
    eval_orthonormal_deriv,
    gauss_jacobi,
    jacobi_norm,
)
from .kernel import KernelSpec, eval_kernel, reproduction_error, spectral_convolve
from .spaces import (
    InvalidSpaceParams,
    Multiplier,
    SpaceParams,
    apply_multiplier,
    b_norm_kernel,
    f_norm_kernel,
    seq_norm,
)
from .tensor import JacobiExpansion, TensorJacobiParams, rho, weight_W

__version__ = "0.1.0"
