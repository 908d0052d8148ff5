"""Norm ratios of p-stabilized eigenforms, conditionally convergent Euler
products ordered by increasing norm, and numerical Petersson periods."""

from .errors import (
    AccuracyError,
    DomainError,
    IdentityError,
    IncompleteSourceError,
    NormalizationError,
    OrderingError,
    PstabError,
    RamanujanBoundError,
    ReductionError,
    RejectedInputError,
    UnsupportedInputError,
)
from .euler import (
    ConvergenceRow,
    EulerFactorSpec,
    PartialProductState,
    cm32_ideal_stream,
    cm32_rational_stream,
    convergence_table,
    log_series_partial,
    partial_euler_product,
    rearrangement_gap,
    sym2_local_factor,
    sym2_stream,
)
from .forms import (
    CoefficientTable,
    EigenformSpec,
    FormSource,
    SatakeData,
    cm32_ap_fast,
    cm32_prime_eigenvalues,
    coefficient_table,
    curve_ap,
    delta_coefficients,
    delta_prime_eigenvalues,
    extend_multiplicative,
    hecke_char_value,
    satake_for,
    satake_parameters,
)
from .lattice import (
    GaussianIdeal,
    Splitting,
    cornacchia_two_squares,
    gaussian_ideals_by_norm,
    ideals_above,
    is_prime,
    primary_associate,
    rational_primes,
)
from .reference import (
    HidaBridge,
    QuadratureMesh,
    QuadratureResult,
    SmoothingReport,
    evaluate_level1_form,
    global_factorization_check,
    hida_bridge,
    hida_bridge_value,
    petersson_inner_gamma0p,
    petersson_norm_gamma0p,
    petersson_norm_level1,
    smoothed_dirichlet_value,
)
from .stabilization import (
    StabilizationReport,
    adelic_up_norm,
    local_period,
    stabilization_limit_table,
    stabilization_report,
    stabilized_norm_ratio,
    up_norm_ratio,
)

__version__ = "0.1.0"
