"""Discrete model of closed curves in R^n.

A :class:`DiscreteCurve` is one or more closed vertex rings (polylines) with
precomputed segment and arclength tables.  Construction validates
embeddedness; all instances are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import defaults
from ._geom import (
    circumcircle_tangents,
    pair_chunks,
    point_segment_distances,
    segment_pairs_min_dist,
)
from .errors import (
    DegenerateSegment,
    NoTangents,
    OutOfRange,
    SelfIntersection,
    TooFewVertices,
)


@dataclass(frozen=True)
class DiscreteCurve:
    """Closed polyline rings in R^n with segment/arclength tables.

    components[c] is an (N_c, dim) array of ring vertices; segment i of ring c
    joins vertex i to vertex (i+1) mod N_c.  cum_s[c] has length N_c + 1 with
    cum_s[c][0] = 0 and cum_s[c][-1] = ring length.
    """

    dim: int
    components: tuple
    seg_lengths: tuple
    cum_s: tuple
    # flattened tables over all rings, in component order
    verts: np.ndarray       # (M, dim)
    seg_p0: np.ndarray      # (M, dim)
    seg_dir: np.ndarray     # (M, dim), p1 - p0
    seg_len: np.ndarray     # (M,)
    seg_len2: np.ndarray    # (M,)
    seg_comp: np.ndarray    # (M,) component id
    vert_s: np.ndarray      # (M,) arclength of each vertex within its ring
    offsets: tuple          # flat start index of each component
    bbox_diag: float

    @property
    def n_components(self):
        return len(self.components)

    @property
    def n_vertices(self):
        return len(self.verts)

    def ring_length(self, c):
        return float(self.cum_s[c][-1])

    @property
    def ring_lengths(self):
        return np.array([self.ring_length(c) for c in range(self.n_components)])

    @property
    def total_length(self):
        return float(sum(self.ring_length(c) for c in range(self.n_components)))

    def ring_size(self, c):
        return len(self.components[c])

    def flat_index(self, c, i):
        return self.offsets[c] + (i % self.ring_size(c))

    def with_positions(self, components, validate=True):
        """New curve with replaced vertex positions (same topology)."""
        if validate:
            return build_curve(components, self.dim)
        return _assemble(
            [np.asarray(r, dtype=float) for r in components], self.dim
        )

    def scaled(self, factor, validate=False):
        return self.with_positions(
            [np.asarray(r) * factor for r in self.components], validate=validate
        )

    def transformed(self, rotation=None, translation=None, validate=False):
        rings = []
        for r in self.components:
            p = np.asarray(r)
            if rotation is not None:
                p = p @ np.asarray(rotation).T
            if translation is not None:
                p = p + np.asarray(translation)
            rings.append(p)
        return self.with_positions(rings, validate=validate)


@dataclass(frozen=True)
class TangentField:
    """Per-vertex unit tangents, aligned with the curve's flat vertex table."""

    vectors: tuple   # per-component (N_c, dim) unit arrays
    method: str
    flat: np.ndarray  # (M, dim)

    def matches(self, curve):
        return len(self.vectors) == curve.n_components and all(
            v.shape == c.shape for v, c in zip(self.vectors, curve.components)
        )


@dataclass(frozen=True)
class ArcCoordinate:
    """Position on a ring: segment index plus barycentric parameter.

    s is the cumulative arclength of the point from the ring's vertex 0.
    """

    component: int
    segment: int
    t: float
    s: float

    def to_dict(self):
        return {
            "component": self.component,
            "segment": self.segment,
            "t": self.t,
            "s": self.s,
        }

    @staticmethod
    def from_dict(d):
        return ArcCoordinate(int(d["component"]), int(d["segment"]),
                             float(d["t"]), float(d["s"]))


def _assemble(rings, dim):
    """Build a DiscreteCurve from validated rings (no embeddedness check)."""
    # always copy: the read-only flag must never leak onto caller arrays
    clean = [np.array(r, dtype=float, order="C") for r in rings]
    seg_lengths = []
    cum = []
    dirs_all = []
    comp = []
    vert_s = []
    offsets = []
    off = 0
    for c, ring in enumerate(clean):
        dirs = np.roll(ring, -1, axis=0) - ring
        lens = np.linalg.norm(dirs, axis=1)
        cs = np.concatenate([[0.0], np.cumsum(lens)])
        seg_lengths.append(lens)
        cum.append(cs)
        dirs_all.append(dirs)
        comp.append(np.full(len(ring), c, dtype=np.intp))
        vert_s.append(cs[:-1])
        offsets.append(off)
        off += len(ring)
    verts = np.vstack(clean)
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    seg_len = np.concatenate(seg_lengths)
    return DiscreteCurve(
        dim=dim,
        components=tuple(_readonly(r) for r in clean),
        seg_lengths=tuple(_readonly(a) for a in seg_lengths),
        cum_s=tuple(_readonly(a) for a in cum),
        verts=_readonly(verts),
        seg_p0=_readonly(verts.copy()),
        seg_dir=_readonly(np.vstack(dirs_all)),
        seg_len=_readonly(seg_len),
        seg_len2=_readonly(seg_len**2),
        seg_comp=_readonly(np.concatenate(comp)),
        vert_s=_readonly(np.concatenate(vert_s)),
        offsets=tuple(offsets),
        bbox_diag=float(np.linalg.norm(hi - lo)),
    )


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def adjacent_segment_mask(curve, i_idx, j_idx):
    """True where flat segments i and j share a vertex (same ring)."""
    same = curve.seg_comp[i_idx] == curve.seg_comp[j_idx]
    out = np.zeros(len(i_idx), dtype=bool)
    if not same.any():
        return out
    comp = curve.seg_comp[i_idx]
    for c in range(curve.n_components):
        sel = same & (comp == c)
        if not sel.any():
            continue
        off = curve.offsets[c]
        n = curve.ring_size(c)
        d = np.abs((j_idx[sel] - off) - (i_idx[sel] - off))
        out[sel] = (d <= 1) | (d == n - 1)
    return out


def nonadjacent_pair_chunks(curve, target=400_000):
    """Chunks of nonadjacent flat segment-pair indices (i < j)."""
    for i_idx, j_idx in pair_chunks(len(curve.seg_p0), target):
        keep = ~adjacent_segment_mask(curve, i_idx, j_idx)
        if keep.any():
            yield i_idx[keep], j_idx[keep]


def validate_embedded(curve, tol=None):
    """Check that no two nonadjacent segments come closer than tol.

    tol defaults to SELF_INTERSECT_TOL x bounding-box diagonal.  Raises
    SelfIntersection on failure; otherwise returns a positive lower bound on
    the minimum nonadjacent clearance (exact for pairs anywhere near tol).
    """
    if tol is None:
        tol = defaults.SELF_INTERSECT_TOL * curve.bbox_diag
    mid = curve.seg_p0 + 0.5 * curve.seg_dir
    half = 0.5 * curve.seg_len
    best = np.inf
    for i_idx, j_idx in nonadjacent_pair_chunks(curve):
        # midpoint distance minus half-lengths bounds the pair distance below
        gap = mid[j_idx] - mid[i_idx]
        bound = (np.sqrt(np.einsum("ij,ij->i", gap, gap))
                 - half[i_idx] - half[j_idx])
        near = bound <= 4.0 * tol
        far = ~near
        if far.any():
            best = min(best, float(bound[far].min()))
        if not near.any():
            continue
        ii, jj = i_idx[near], j_idx[near]
        d = segment_pairs_min_dist(
            curve.seg_p0[ii], curve.seg_dir[ii], curve.seg_len2[ii],
            curve.seg_p0[jj], curve.seg_dir[jj], curve.seg_len2[jj],
        )
        k = int(np.argmin(d))
        if d[k] < best:
            best = float(d[k])
        if d[k] <= tol:
            raise SelfIntersection(
                f"segments {int(ii[k])} and {int(jj[k])} are "
                f"{float(d[k]):.3e} apart (tolerance {tol:.3e})"
            )
    return best


def build_curve(points, dim=None):
    """Validate vertex rings and build a DiscreteCurve.

    points: a single (N, dim) array or a list of per-component arrays.
    Raises TooFewVertices, DegenerateSegment or SelfIntersection.
    """
    if isinstance(points, np.ndarray) and points.ndim == 2:
        rings = [points]
    else:
        rings = [np.asarray(r, dtype=float) for r in points]
        if rings and rings[0].ndim != 2:
            rings = [np.asarray(points, dtype=float)]
    rings = [np.asarray(r, dtype=float) for r in rings]
    if not rings:
        raise TooFewVertices("curve has no components")
    if dim is None:
        dim = rings[0].shape[1]
    for c, ring in enumerate(rings):
        if ring.ndim != 2 or ring.shape[1] != dim:
            raise OutOfRange(
                f"component {c} has shape {ring.shape}, expected (*, {dim})"
            )
        if not np.all(np.isfinite(ring)):
            raise OutOfRange(f"component {c} contains non-finite coordinates")
        if len(ring) < 4:
            raise TooFewVertices(
                f"component {c} has {len(ring)} vertices, need at least 4"
            )
        lens = np.linalg.norm(np.roll(ring, -1, axis=0) - ring, axis=1)
        if np.any(lens == 0.0):
            i = int(np.argmin(lens))
            raise DegenerateSegment(
                f"component {c} has a zero-length edge at vertex {i}"
            )
    if dim < 2:
        raise OutOfRange("ambient dimension must be >= 2")
    curve = _assemble(rings, dim)
    validate_embedded(curve)
    return curve


def estimate_tangents(curve):
    """Per-vertex unit tangents from circumscribed circles of vertex triples.

    Second-order accurate on smooth samplings; collinear triples (circumradius
    beyond COLLINEAR_FACTOR x local edge) fall back to the normalized chord
    v_{i+1} - v_{i-1}, which is exact on straight stretches.
    """
    vecs = []
    flats = []
    for ring in curve.components:
        prev_pts = np.roll(ring, 1, axis=0)
        next_pts = np.roll(ring, -1, axis=0)
        t, _ = circumcircle_tangents(
            prev_pts, ring, next_pts, defaults.COLLINEAR_FACTOR
        )
        t = _readonly(t)
        vecs.append(t)
        flats.append(t)
    return TangentField(
        vectors=tuple(vecs),
        method="circumcircle+chord_fallback",
        flat=_readonly(np.vstack(flats)),
    )


def require_tangents(curve, tangents):
    """Return a tangent field for curve, estimating one if none is given."""
    if tangents is None:
        return estimate_tangents(curve)
    if not tangents.matches(curve):
        raise NoTangents("tangent field does not match the curve's components")
    return tangents


def arc_coordinate(curve, component, s, wrap=False):
    """ArcCoordinate of the point at arclength s along a ring."""
    if not 0 <= component < curve.n_components:
        raise OutOfRange(f"component {component} out of range")
    length = curve.ring_length(component)
    if wrap:
        s = s % length
    elif not 0.0 <= s <= length:
        raise OutOfRange(f"arclength {s} outside [0, {length}]")
    cs = curve.cum_s[component]
    seg = int(np.searchsorted(cs, s, side="right")) - 1
    seg = min(max(seg, 0), curve.ring_size(component) - 1)
    ls = curve.seg_lengths[component][seg]
    t = (s - cs[seg]) / ls if ls > 0 else 0.0
    return ArcCoordinate(component, seg, float(min(max(t, 0.0), 1.0)), float(s))


def vertex_coordinate(curve, component, i):
    i = i % curve.ring_size(component)
    return ArcCoordinate(component, i, 0.0, float(curve.cum_s[component][i]))


def point_at(curve, coord):
    """Point in R^n at an arc coordinate (linear interpolation)."""
    c = coord.component
    if not 0 <= c < curve.n_components:
        raise OutOfRange(f"component {c} out of range")
    n = curve.ring_size(c)
    if not 0 <= coord.segment < n:
        raise OutOfRange(f"segment {coord.segment} out of range for ring of {n}")
    if not 0.0 <= coord.t <= 1.0:
        raise OutOfRange(f"parameter t={coord.t} outside [0, 1]")
    ring = curve.components[c]
    a = ring[coord.segment]
    b = ring[(coord.segment + 1) % n]
    return a + coord.t * (b - a)


def tangent_at(curve, tangents, coord):
    """Unit tangent at an arc coordinate, interpolated between vertex tangents."""
    c = coord.component
    n = curve.ring_size(c)
    ta = tangents.vectors[c][coord.segment]
    tb = tangents.vectors[c][(coord.segment + 1) % n]
    v = (1.0 - coord.t) * ta + coord.t * tb
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return ta
    return v / nv


def nearest_point(curve, x):
    """Nearest curve point to x: (distance, ArcCoordinate)."""
    d, t = point_segment_distances(
        np.asarray(x, dtype=float)[None, :],
        curve.seg_p0, curve.seg_dir, curve.seg_len2,
    )
    j = int(np.argmin(d[0]))
    c = int(curve.seg_comp[j])
    seg = j - curve.offsets[c]
    tt = float(t[0, j])
    s = float(curve.cum_s[c][seg] + tt * curve.seg_lengths[c][seg])
    return float(d[0, j]), ArcCoordinate(c, seg, tt, s)


def hausdorff_distance(a, b, samples_per_segment=1):
    """Symmetric Hausdorff distance between two curves (vertex-sampled)."""
    def one_sided(src, dst):
        pts = src.verts
        if samples_per_segment > 1:
            extra = []
            for k in range(1, samples_per_segment):
                extra.append(src.seg_p0 + (k / samples_per_segment) * src.seg_dir)
            pts = np.vstack([pts] + extra)
        d, _ = point_segment_distances(pts, dst.seg_p0, dst.seg_dir, dst.seg_len2)
        return float(d.min(axis=1).max())

    return max(one_sided(a, b), one_sided(b, a))


def c1_distance(a, b, tangents_a=None, tangents_b=None):
    """Upper bound on the C^1 distance between two curves.

    Uses the arclength-proportional correspondence between matching rings
    (position gap plus tangent angle gap, maximized over vertices of `a`).
    This bounds the true infimum over diffeomorphisms from above.
    """
    if a.n_components != b.n_components:
        raise ValueError("component counts differ")
    ta = require_tangents(a, tangents_a)
    tb = require_tangents(b, tangents_b)
    worst = 0.0
    for c in range(a.n_components):
        la = a.ring_length(c)
        lb = b.ring_length(c)
        sa = a.cum_s[c][:-1]
        sb = sa * (lb / la)
        for i, s in enumerate(sb):
            coord = arc_coordinate(b, c, s, wrap=True)
            p = point_at(b, coord)
            tg = tangent_at(b, tb, coord)
            gap = float(np.linalg.norm(a.components[c][i] - p))
            dot = float(np.clip(np.dot(ta.vectors[c][i], tg), -1.0, 1.0))
            worst = max(worst, gap + float(np.arccos(dot)))
    return worst
