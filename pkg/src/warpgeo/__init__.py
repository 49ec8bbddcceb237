"""Numerical metric geometry of warped sphere-circle products and their
extreme limit: certified distance brackets, convergence diagnostics, volumes,
and Hausdorff-measure estimates."""

from .geometry import (
    ConstantWarp,
    ExtremeWarp,
    Point,
    SequenceWarp,
    Tangent,
    WarpFamily,
    metric_norm,
    pole_distance,
    product_distance,
    s1_distance,
    s2_distance,
    singular_envelope_threshold,
    warp_eval,
    warp_schedule,
)
from .quadrature import QuadratureConfig, adaptive_quad
from .curves import (
    ParamCurve,
    Polyline,
    Segment,
    coord_line,
    curve_length,
    fiber_circle,
    meridian,
    polyline_length,
    theta_arc,
)
from .bounds import (
    BoundCertificate,
    best_waypoint_bound,
    diameter_bound,
    length_monotone_check,
    singular_fiber_lower,
    singular_pair_bound,
    three_arc_bound,
    three_arc_curve,
    two_leg_fiber_bound,
    waypoint_bound,
    waypoint_curve,
)
from .grid import GridGraph, GridSpec
from .solver import (
    DistanceBracket,
    calibrate_grid_error,
    distance_bracket,
    graph_distance,
    refine_path,
    restricted_distance,
    restriction_gap_estimate,
)
from .sampling import PairSample, sample_pairs
from .convergence import (
    completion_identity_check,
    continuity_modulus,
    continuity_modulus_check,
    gh_upper_bound,
    pointwise_convergence_scan,
    uniform_gap,
)
from .measures import (
    CoverEstimate,
    VolumeResult,
    fiber_length,
    h1_partition_sum,
    hausdorff_cover,
    hausdorff_dim_scan,
    limit_volume,
    smallest_valid_m,
    volume,
    volume_convergence,
    volume_upper_bound,
)

__version__ = "0.1.0"
