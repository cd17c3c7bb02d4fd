"""rglab: numerical laboratory for random real algebraic geometry."""

__version__ = "0.1.0"

from .streams import RngStream, seed_stream
from .gaussian import (
    GaussianVector,
    RegressionSplit,
    abs_moment_normal,
    expected_abs_det_mc,
    gaussian_density,
    psd_factor,
    regression_split,
    sample_gaussian_vector,
)
from .polys import (
    BargmannFockSample,
    HomogeneousPolyMap,
    IsotropicMixtureSample,
    PolyMap,
    bf_truncation_order,
    enumerate_multi_indices,
    enumerate_multi_indices_affine,
    polymap_from_json,
    polymap_to_json,
    sample_bargmann_fock,
    sample_isotropic_mixture,
    sample_kostlan,
)
from .kernels import (
    KernelSpec,
    bargmann_fock_kernel,
    dehomogenized_kernel,
    isotropic_series_kernel,
    joint_field_gradient_cov,
    kernel_eval,
    kernel_sup_distance,
    kostlan_kernel,
    rescaled_kernel,
    scalar_profile,
)
from .kacrice import (
    Chart,
    IsotropicMoments,
    MixedKostlanSpec,
    NormalFraming,
    isotropic_moments,
    isotropic_point_expectation,
    isotropic_submanifold_expectation,
    kac_rice_density_1d,
    kac_rice_expectation,
    mixed_kostlan_expectation,
    shub_smale_expectation,
)
from .subspaces import frame_volume, jacobian, projection_angle, subspace_angle
from .roots import (
    CountResult,
    McCountResult,
    UnivariatePoly,
    circle_count_mixture,
    count_real_roots,
    mc_expected_count,
    projective_zero_count,
    sphere_zero_count,
    system_count_rp2,
)
from .grids import (
    ContourSet,
    GridFunction,
    betti_sublevel,
    contour_to_csv,
    critical_count_on_curve,
    grid_from_json,
    grid_to_json,
    marching_squares_components,
    sample_grid,
)
from .condition import (
    BridgeProfile,
    ChebyshevPoly2,
    ConditionReport,
    DiskBaseField,
    SemicontinuityVerdict,
    SharpFamilyField,
    bounds,
    chebyshev_approximate,
    condition_report,
    lattice_centers,
    milnor_thom_bound,
    reach_bound,
    reach_equation,
    semicontinuity_check,
    sharp_family,
    witdash_bound,
)
from .fields import PlaneField, RingDistance, TrigField, kostlan_plane_field, random_trig_field
from . import errors

__all__ = [
    "RngStream",
    "seed_stream",
    "GaussianVector",
    "RegressionSplit",
    "abs_moment_normal",
    "expected_abs_det_mc",
    "gaussian_density",
    "psd_factor",
    "regression_split",
    "sample_gaussian_vector",
    "BargmannFockSample",
    "HomogeneousPolyMap",
    "IsotropicMixtureSample",
    "PolyMap",
    "bf_truncation_order",
    "enumerate_multi_indices",
    "enumerate_multi_indices_affine",
    "polymap_from_json",
    "polymap_to_json",
    "sample_bargmann_fock",
    "sample_isotropic_mixture",
    "sample_kostlan",
    "KernelSpec",
    "bargmann_fock_kernel",
    "dehomogenized_kernel",
    "isotropic_series_kernel",
    "joint_field_gradient_cov",
    "kernel_eval",
    "kernel_sup_distance",
    "kostlan_kernel",
    "rescaled_kernel",
    "scalar_profile",
    "Chart",
    "IsotropicMoments",
    "MixedKostlanSpec",
    "NormalFraming",
    "isotropic_moments",
    "isotropic_point_expectation",
    "isotropic_submanifold_expectation",
    "kac_rice_density_1d",
    "kac_rice_expectation",
    "mixed_kostlan_expectation",
    "shub_smale_expectation",
    "frame_volume",
    "jacobian",
    "projection_angle",
    "subspace_angle",
    "CountResult",
    "McCountResult",
    "UnivariatePoly",
    "circle_count_mixture",
    "count_real_roots",
    "mc_expected_count",
    "projective_zero_count",
    "sphere_zero_count",
    "system_count_rp2",
    "ContourSet",
    "GridFunction",
    "betti_sublevel",
    "contour_to_csv",
    "critical_count_on_curve",
    "grid_from_json",
    "grid_to_json",
    "marching_squares_components",
    "sample_grid",
    "BridgeProfile",
    "ChebyshevPoly2",
    "ConditionReport",
    "DiskBaseField",
    "SemicontinuityVerdict",
    "SharpFamilyField",
    "bounds",
    "chebyshev_approximate",
    "condition_report",
    "lattice_centers",
    "milnor_thom_bound",
    "reach_bound",
    "reach_equation",
    "semicontinuity_check",
    "sharp_family",
    "witdash_bound",
    "PlaneField",
    "RingDistance",
    "TrigField",
    "kostlan_plane_field",
    "random_trig_field",
    "errors",
    "__version__",
]
