"""Numerics for set-valued functions on dyadic grids: convex bodies and
their support calculus, Aumann integrals, fractional averaging and maximal
operators, matrix-weighted norms with duals and geometric-mean
interpolation, and the experiment suites that measure the operator bounds.
"""

from ._version import __version__
from .bodies import (
    ConvexBody,
    UnboundedGaugeError,
    conv_union,
    fold_minkowski,
    gauge,
    hausdorff,
    magnitude,
    minkowski_sum,
    origin_body,
    scale,
    support_batch,
)
from .fields import (
    DistributionTable,
    NormField,
    SetField,
    aumann_integral,
    distribution,
    dp_distance,
    lp_norm,
    magnitude_bound_check,
    random_simple_field,
    weak_norm,
)
from .grids import (
    DyadicCube,
    DyadicDomain,
    cube_containing_point,
    cubes_covering_domain,
    dyadic_cube_family,
    grid_translations,
    parent_cube,
    verify_nesting,
    verify_tiling,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    run_bodies_selftest,
    run_endpoint_bounds,
    run_marcinkiewicz,
    run_reverse_factorization,
    run_riesz_thorin,
)
from .matrices import (
    MatrixField,
    SpdMatrix,
    geometric_mean,
    gm_double_dual_norm,
    operator_norm,
    random_spd_matrix,
    spd_power,
)
from .operators import (
    ExponentConfig,
    dyadic_frac_maximal,
    frac_average,
    full_maximal_envelope,
    scalar_frac_maximal,
    sublinearity_check,
)
from .seminorms import (
    DegenerateSeminormError,
    DualNorm,
    EuclideanNorm,
    GaugeNorm,
    GeometricMeanDoubleDual,
    MatrixNorm,
    WeightedGeometricMean,
    direction_grid,
)
from .weights import (
    a1_matrix_constant,
    ap_matrix_constant,
    ap_norm_check,
    classical_a1_constant,
    classical_ap_constant,
    fixture_weights,
    interpolated_exponent,
    operator_bound_scan,
    reverse_factorization,
)

__all__ = [
    "ConvexBody",
    "DegenerateSeminormError",
    "DistributionTable",
    "DualNorm",
    "DyadicCube",
    "DyadicDomain",
    "EuclideanNorm",
    "ExperimentConfig",
    "ExperimentReport",
    "ExponentConfig",
    "GaugeNorm",
    "GeometricMeanDoubleDual",
    "MatrixField",
    "MatrixNorm",
    "NormField",
    "SetField",
    "SpdMatrix",
    "UnboundedGaugeError",
    "WeightedGeometricMean",
    "__version__",
    "a1_matrix_constant",
    "ap_matrix_constant",
    "ap_norm_check",
    "aumann_integral",
    "classical_a1_constant",
    "classical_ap_constant",
    "conv_union",
    "cube_containing_point",
    "cubes_covering_domain",
    "direction_grid",
    "distribution",
    "dp_distance",
    "dyadic_cube_family",
    "dyadic_frac_maximal",
    "fixture_weights",
    "fold_minkowski",
    "frac_average",
    "full_maximal_envelope",
    "gauge",
    "geometric_mean",
    "gm_double_dual_norm",
    "grid_translations",
    "hausdorff",
    "interpolated_exponent",
    "lp_norm",
    "magnitude",
    "magnitude_bound_check",
    "minkowski_sum",
    "operator_bound_scan",
    "operator_norm",
    "origin_body",
    "parent_cube",
    "random_simple_field",
    "random_spd_matrix",
    "reverse_factorization",
    "run_bodies_selftest",
    "run_endpoint_bounds",
    "run_marcinkiewicz",
    "run_reverse_factorization",
    "run_riesz_thorin",
    "scalar_frac_maximal",
    "scale",
    "spd_power",
    "sublinearity_check",
    "support_batch",
    "verify_nesting",
    "verify_tiling",
    "weak_norm",
]
