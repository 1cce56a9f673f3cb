"""curvethick: thickness of discretized closed curves in R^n.

Computes the normal injectivity radius of a closed polyline as
min(focal distance, half the minimal doubly-critical chord), cross-validates
it against rolling-ball and normal-cut-value oracles, smooths curves while
preserving a curvature floor, certifies Hausdorff-close isotopies, evaluates
a-priori isotopy-class count bounds, and tightens curves toward ideal shape
at fixed length.
"""

__version__ = "0.1.0"

from .curve import (
    ArcCoordinate,
    DiscreteCurve,
    TangentField,
    arc_coordinate,
    build_curve,
    c1_distance,
    estimate_tangents,
    hausdorff_distance,
    nearest_point,
    point_at,
    tangent_at,
    validate_embedded,
    vertex_coordinate,
)
from .errors import (
    BoundaryPoint,
    BracketMiss,
    ComponentMismatch,
    CurveError,
    DegenerateSegment,
    DomainTooSmall,
    InvalidDims,
    LadderExhausted,
    NonpositiveThickness,
    NoTangents,
    NumericFailure,
    OutOfRange,
    SelfIntersection,
    TooFewVertices,
    ZeroThicknessStart,
)
from .thickness import (
    DoubleCriticalPair,
    NormalSampleSpec,
    ThicknessReport,
    cut_value_oracle,
    default_sample_spec,
    find_double_critical_pairs,
    focal_distance,
    mdc,
    normal_cut_value,
    rolling_ball_oracle,
    sup_curvature,
    thickness,
)

__all__ = [name for name in dir() if not name.startswith("_")]
