"""Isotopy certification for Hausdorff-close curves, and a-priori bounds on
the number of isotopy/diffeomorphism classes of thick curves in a ball.

The isotopy check projects one curve onto the other along nearest points and
sweeps the straight-line fiber homotopy, validating embeddedness at every
frame; the verdict is "isotopic" or "inconclusive", never a proof of
non-isotopy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import defaults
from ._geom import point_segment_distances
from .curve import ArcCoordinate, validate_embedded
from .errors import (
    ComponentMismatch,
    InvalidDims,
    NonpositiveThickness,
    SelfIntersection,
    DegenerateSegment,
    TooFewVertices,
)


@dataclass(frozen=True)
class IsotopyCheck:
    """Result of the nearest-point projection isotopy test.

    verdict "isotopic" requires: every vertex of the moving curve within rho
    of the target, unique nearest points (no second approach within rho
    outside an arc neighborhood of the foot), a monotone degree +-1 induced
    circle map per component, and embeddedness of every homotopy frame.
    Anything else is "inconclusive", with the failing check named.
    """

    rho_used: float
    verdict: str                # "isotopic" | "inconclusive"
    failure: str = None
    feet: tuple = ()            # per component of L: (N_c,) foot ArcCoordinates
    foot_distances: tuple = ()
    fiber_unique: tuple = ()
    degrees: tuple = ()
    frames: int = 0

    @property
    def isotopic(self):
        return self.verdict == "isotopic"

    def to_dict(self):
        return {
            "rho_used": self.rho_used,
            "verdict": self.verdict,
            "failure": self.failure,
            "degrees": list(self.degrees),
            "frames": self.frames,
            "max_foot_distance": (max(float(np.max(d)) for d in self.foot_distances)
                                  if self.foot_distances else None),
            "feet": [[c.to_dict() for c in comp] for comp in self.feet],
            "fiber_unique": [np.asarray(f).tolist() for f in self.fiber_unique],
        }


def suggested_rho(thickness_value):
    """Projection radius guaranteeing the isotopy sweep for curves: t / 8."""
    if not thickness_value > 0:
        raise NonpositiveThickness(
            f"thickness must be positive, got {thickness_value}")
    return float(thickness_value) * defaults.RHO_FRACTION


def _project_all(target, points):
    d, t = point_segment_distances(points, target.seg_p0, target.seg_dir,
                                   target.seg_len2)
    j = np.argmin(d, axis=1)
    rows = np.arange(len(points))
    return d, j, t[rows, j]


def isotopy_check(target, moving, rho, frames=None):
    """Check that `moving` can be carried onto `target` along normal fibers.

    Projects every vertex of `moving` to its nearest point on `target`,
    verifies containment in the rho-tube, fiber uniqueness, monotone
    degree +-1 coverage per component, then sweeps
    Omega(q, t) = foot(q) + t (q - foot(q)) for t in {0, 1/T, ..., 1} and
    validates embeddedness of each intermediate curve.
    """
    if target.n_components != moving.n_components:
        raise ComponentMismatch(
            f"{target.n_components} components vs {moving.n_components}")
    if frames is None:
        frames = defaults.ISOTOPY_FRAMES
    rho = float(rho)

    def fail(reason, **extra):
        return IsotopyCheck(rho_used=rho, verdict="inconclusive",
                            failure=reason, frames=frames, **extra)

    d_all, j_all, t_all = _project_all(target, moving.verts)
    rows = np.arange(len(moving.verts))
    dist = d_all[rows, j_all]
    if dist.max() > rho * (1.0 + 1e-12):
        return fail(f"moving curve leaves the rho-tube: max distance "
                    f"{dist.max():.6g} > rho = {rho:.6g}")

    foot_comp = target.seg_comp[j_all]
    foot_s = target.vert_s[j_all] + t_all * target.seg_len[j_all]
    feet_points = target.seg_p0[j_all] + t_all[:, None] * target.seg_dir[j_all]

    # component pairing: each moving ring must project into a single target
    # ring, and the pairing must be a bijection
    pairing = {}
    for c in range(moving.n_components):
        lo = moving.offsets[c]
        hi = lo + moving.ring_size(c)
        comps = np.unique(foot_comp[lo:hi])
        if len(comps) != 1:
            return fail(f"component {c} projects onto several target rings")
        pairing[c] = int(comps[0])
    if len(set(pairing.values())) != moving.n_components:
        return fail("component pairing is not a bijection")

    # fiber uniqueness: beyond an arc neighborhood of the foot, the target
    # must stay farther than rho from the vertex
    excl = defaults.ISOTOPY_EXCL_FACTOR * rho
    seg_mid_s = target.vert_s + 0.5 * target.seg_len
    ring_len = np.array([target.ring_length(c)
                         for c in range(target.n_components)])
    seg_ring = ring_len[target.seg_comp]
    unique_flags = np.empty(len(moving.verts), dtype=bool)
    block = 4 * defaults.BLOCK_ROWS
    for lo in range(0, len(moving.verts), block):
        hi = min(lo + block, len(moving.verts))
        d = d_all[lo:hi].copy()
        same = foot_comp[lo:hi, None] == target.seg_comp[None, :]
        delta = np.abs(foot_s[lo:hi, None] - seg_mid_s[None, :]) % seg_ring
        delta = np.minimum(delta, seg_ring - delta)
        near = same & (delta <= excl + 0.5 * target.seg_len[None, :])
        d[near] = np.inf
        unique_flags[lo:hi] = d.min(axis=1) > rho
    if not unique_flags.all():
        bad = int(np.flatnonzero(~unique_flags)[0])
        return fail(f"nearest-point fiber not unique at moving vertex {bad}",
                    fiber_unique=tuple(
                        unique_flags[moving.offsets[c]:
                                     moving.offsets[c] + moving.ring_size(c)]
                        for c in range(moving.n_components)))

    # monotone degree +-1 circle map per component
    degrees = []
    for c in range(moving.n_components):
        lo = moving.offsets[c]
        hi = lo + moving.ring_size(c)
        tc = pairing[c]
        length = ring_len[tc]
        s = foot_s[lo:hi]
        step = (np.roll(s, -1) - s) % length
        step = np.where(step > length / 2.0, step - length, step)
        pos = step > 1e-12 * length
        neg = step < -1e-12 * length
        if pos.any() and neg.any():
            return fail(f"projection of component {c} is not monotone")
        winding = step.sum() / length
        deg = int(round(winding))
        if deg not in (-1, 1) or abs(winding - deg) > 1e-6:
            return fail(f"projection of component {c} has degree {winding:.3f},"
                        f" not +-1")
        if not (np.abs(step) > 0).all():
            return fail(f"projection of component {c} is not injective "
                        f"(repeated foot points)")
        degrees.append(deg)

    # straight-line normal-fiber homotopy, checked frame by frame
    offsets = [moving.offsets[c] for c in range(moving.n_components)]
    sizes = [moving.ring_size(c) for c in range(moving.n_components)]
    for step_i in range(frames + 1):
        t = step_i / frames
        pts = feet_points + t * (moving.verts - feet_points)
        rings = [pts[offsets[c]:offsets[c] + sizes[c]]
                 for c in range(moving.n_components)]
        try:
            frame = moving.with_positions(rings, validate=False)
            validate_embedded(frame)
        except (SelfIntersection, DegenerateSegment, TooFewVertices) as exc:
            return fail(f"homotopy frame t = {t:.3f} is not embedded: {exc}")

    feet = []
    for c in range(moving.n_components):
        lo = moving.offsets[c]
        coords = []
        for i in range(sizes[c]):
            flat = j_all[lo + i]
            tc = int(target.seg_comp[flat])
            seg = int(flat - target.offsets[tc])
            coords.append(ArcCoordinate(tc, seg, float(t_all[lo + i]),
                                        float(foot_s[lo + i])))
        feet.append(tuple(coords))
    return IsotopyCheck(
        rho_used=rho, verdict="isotopic", failure=None,
        feet=tuple(feet),
        foot_distances=tuple(
            dist[offsets[c]:offsets[c] + sizes[c]]
            for c in range(moving.n_components)),
        fiber_unique=tuple(
            unique_flags[offsets[c]:offsets[c] + sizes[c]]
            for c in range(moving.n_components)),
        degrees=tuple(degrees),
        frames=frames,
    )


# ---------------------------------------------------------------------------
# a-priori class-count bounds for thick submanifolds of a ball in R^n


def _log_sphere_volume(j):
    """log vol(S^j(1)) = log(2 pi^((j+1)/2) / Gamma((j+1)/2))."""
    return (math.log(2.0) + 0.5 * (j + 1) * math.log(math.pi)
            - math.lgamma(0.5 * (j + 1)))


@dataclass(frozen=True)
class BoundsReport:
    """Constructible constants bounding the class count of thick k-submanifolds
    of the ball of radius r in R^n with thickness at least epsilon.

    Large quantities carry log-space companions (natural log); class_bound is
    reported through its exponent: the count is at most 2^lambda0.
    """

    n: int
    k: int
    r: float
    epsilon: float
    rescaled_radius: float      # R = r / epsilon
    d0: float
    log_d0: float
    v0: float
    log_v0: float
    i0: float
    log_i0: float
    rho: float
    lambda0: float
    log_lambda0: float
    log2_class_bound: float     # = lambda0: count <= 2 ** lambda0

    def to_dict(self):
        from .io import encode_float

        return {
            "n": self.n, "k": self.k, "r": self.r, "epsilon": self.epsilon,
            "rescaled_radius": self.rescaled_radius,
            "d0": encode_float(self.d0), "log_d0": self.log_d0,
            "v0": encode_float(self.v0), "log_v0": self.log_v0,
            "i0": encode_float(self.i0), "log_i0": self.log_i0,
            "rho": self.rho,
            "lambda0": encode_float(self.lambda0),
            "log_lambda0": self.log_lambda0,
            "log2_class_bound": encode_float(self.log2_class_bound),
        }

    @staticmethod
    def from_dict(d):
        from .io import decode_float

        return BoundsReport(
            n=int(d["n"]), k=int(d["k"]), r=float(d["r"]),
            epsilon=float(d["epsilon"]),
            rescaled_radius=float(d["rescaled_radius"]),
            d0=decode_float(d["d0"]), log_d0=float(d["log_d0"]),
            v0=decode_float(d["v0"]), log_v0=float(d["log_v0"]),
            i0=decode_float(d["i0"]), log_i0=float(d["log_i0"]),
            rho=float(d["rho"]),
            lambda0=decode_float(d["lambda0"]),
            log_lambda0=float(d["log_lambda0"]),
            log2_class_bound=decode_float(d["log2_class_bound"]),
        )


def class_count_bound(n, k, r, epsilon):
    """Evaluate the constant chain bounding the number of isotopy classes.

    After rescaling to R = r / epsilon and unit thickness:
      d0 = (8R)^n / 2,
      v0 = ((n-1) vol S^n / (n vol S^(n-k-1))) e^(1-n),
      i0 = pi for curves (k = 1), else exp(-(n/2) (8R)^n),
      rho = 1/8 for k = 1, else i0 / 4,
      lambda0 = (16 R / i0)^n,  class count <= 2^lambda0.
    Everything that can explode is evaluated in log space.
    """
    n = int(n)
    k = int(k)
    if not (n > k >= 1):
        raise InvalidDims(f"need n > k >= 1, got n = {n}, k = {k}")
    if not (r > 0 and epsilon > 0):
        raise InvalidDims("radius and thickness floor must be positive")

    big_r = r / epsilon
    log_8r = math.log(8.0 * big_r)
    log_d0 = n * log_8r - math.log(2.0)
    log_v0 = (math.log(n - 1) - math.log(n) + _log_sphere_volume(n)
              - _log_sphere_volume(n - k - 1) + (1.0 - n))
    if k == 1:
        log_i0 = math.log(math.pi)
        rho = 0.125
    else:
        log_i0 = -0.5 * n * math.exp(n * log_8r)
        rho = 0.25 * math.exp(log_i0)
    log_lambda0 = n * (math.log(16.0 * big_r) - log_i0)

    def safe_exp(x):
        try:
            return math.exp(x)
        except OverflowError:
            return math.inf

    return BoundsReport(
        n=n, k=k, r=float(r), epsilon=float(epsilon),
        rescaled_radius=big_r,
        d0=safe_exp(log_d0), log_d0=log_d0,
        v0=safe_exp(log_v0), log_v0=log_v0,
        i0=safe_exp(log_i0), log_i0=log_i0,
        rho=rho,
        lambda0=safe_exp(log_lambda0), log_lambda0=log_lambda0,
        log2_class_bound=safe_exp(log_lambda0),
    )
