"""Central table of numeric defaults.

Every tunable constant used by the library lives here so that runs are
reproducible from a manifest.  Values are dimensionless factors unless noted.

====================  =========  =====================================================
name                  value      meaning
====================  =========  =====================================================
SELF_INTERSECT_TOL    1e-9       x bounding-box diagonal; min allowed distance between
                                 nonadjacent segments of an embedded curve
COLLINEAR_FACTOR      1e12       triple treated as collinear when its circumradius
                                 exceeds this factor x local edge length
PERP_TOL              1e-3       rad; max deviation of a critical chord from
                                 perpendicularity at each endpoint
ADJ_SEGMENTS          4.0        adjacency window: this many segment lengths ...
ADJ_FOCAL_FACTOR      0.1        ... or this fraction of the focal-distance estimate,
                                 whichever is larger (within-component pairs only)
NORMALS_2D            2          sampled unit normals per vertex in the plane
NORMALS_3D            32         sampled unit normals per vertex in R^3
NORMALS_ND            64         sampled unit normals per vertex in R^n, n >= 4
BRACKET_LO/HI         0.5/1.5    default oracle radius bracket, x formula thickness
BISECT_TOL_FACTOR     2e-5       bisection tolerance, x formula thickness
                                 (floored at twice the chord sagitta)
EXCL_SEGMENTS         2.0        oracle exclusion window: this many local segment
                                 lengths of arc around the base vertex, capped at
                                 pi / (2 sup curvature)
ISOTOPY_FRAMES        8          interpolation steps checked by the isotopy sweep
ISOTOPY_EXCL_FACTOR   2.0        fiber-uniqueness arc exclusion, x rho
RHO_FRACTION          0.125      suggested isotopy radius: thickness / 8
ETA_D1_MIN            -2.25      bump-profile slope floor (exact by construction)
ETA_D2_MAX            61.0       bump-profile second-derivative cap (measured 60.75)
DELTA_OVER_H          4.0        minimum mollifier scale in grid spacings
WINDOW_CURV_CAP       1.2        ladder window width cap, x target radius R2
LADDER_MAX_HALVINGS   12         delta halvings before the ladder gives up
TIGHTEN_BUMP_EVERY    16         one whole-arc bump per this many moves
TIGHTEN_BATCH         64         accepted moves per cooling step
TIGHTEN_REFRESH       256        accepted moves between full thickness recomputes
====================  =========  =====================================================
"""

SELF_INTERSECT_TOL = 1e-9
COLLINEAR_FACTOR = 1e12

PERP_TOL = 1e-3
ADJ_SEGMENTS = 4.0
ADJ_FOCAL_FACTOR = 0.1

NORMALS_2D = 2
NORMALS_3D = 32
NORMALS_ND = 64
BRACKET_LO = 0.5
BRACKET_HI = 1.5
BISECT_TOL_FACTOR = 2e-5
EXCL_SEGMENTS = 2.0

ISOTOPY_FRAMES = 8
ISOTOPY_EXCL_FACTOR = 2.0
RHO_FRACTION = 0.125

ETA_D1_MIN = -2.25
ETA_D2_MAX = 61.0
DELTA_OVER_H = 4.0
WINDOW_CURV_CAP = 1.2
LADDER_MAX_HALVINGS = 12

TIGHTEN_BUMP_EVERY = 16
TIGHTEN_BATCH = 64
TIGHTEN_REFRESH = 256

BLOCK_ROWS = 256  # row-block size for pairwise distance matrices
