"""Vectorized geometric kernels shared across modules.

All reductions here are index-ordered (numpy min/argmin over fixed axes), so
results are identical regardless of how callers block or thread the loops.
"""

from __future__ import annotations

import numpy as np


def circumradius_curvature(prev_pts, pts, next_pts):
    """Menger curvature (inverse circumradius) of each vertex triple.

    Collinear triples give 0; degenerate (repeated-point) triples give 0.
    """
    u = prev_pts - pts
    w = next_pts - pts
    uu = np.einsum("ij,ij->i", u, u)
    ww = np.einsum("ij,ij->i", w, w)
    uw = np.einsum("ij,ij->i", u, w)
    gram = np.clip(uu * ww - uw * uw, 0.0, None)
    double_area = np.sqrt(gram)
    chord = np.linalg.norm(w - u, axis=1)
    denom = np.sqrt(uu * ww) * chord
    out = np.zeros(len(pts))
    ok = denom > 0.0
    out[ok] = 2.0 * double_area[ok] / denom[ok]
    return out


def circumcircle_tangents(prev_pts, pts, next_pts, collinear_factor):
    """Unit tangent at each middle vertex from the circumscribed circle.

    Falls back to the normalized chord next-prev when the triple is collinear
    within tolerance (circumradius > collinear_factor x shorter edge).
    Tangents are oriented so that t . (next - prev) > 0.
    """
    u = prev_pts - pts
    w = next_pts - pts
    chord = next_pts - prev_pts
    uu = np.einsum("ij,ij->i", u, u)
    ww = np.einsum("ij,ij->i", w, w)
    uw = np.einsum("ij,ij->i", u, w)
    det = uu * ww - uw * uw  # squared area of the (u, w) parallelogram

    # circumcenter relative to the middle vertex: o = alpha u + beta w
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = (0.5 * uu * ww - 0.5 * ww * uw) / det
        beta = (0.5 * ww * uu - 0.5 * uu * uw) / det
        o = alpha[:, None] * u + beta[:, None] * w
        rad2 = np.einsum("ij,ij->i", o, o)
    edge = np.minimum(uu, ww)

    collinear = ~np.isfinite(rad2) | (rad2 > (collinear_factor**2) * edge) | (det <= 0)

    # tangent: component of the chord orthogonal to the radius direction o
    proj = np.einsum("ij,ij->i", chord, o)
    with np.errstate(divide="ignore", invalid="ignore"):
        tang = chord - (proj / rad2)[:, None] * o
    norms = np.linalg.norm(tang, axis=1)
    bad = collinear | (norms <= 0) | ~np.isfinite(norms)

    out = np.empty_like(pts)
    good = ~bad
    out[good] = tang[good] / norms[good, None]
    if np.any(bad):
        fb = chord[bad]
        out[bad] = fb / np.linalg.norm(fb, axis=1)[:, None]

    # orientation: forward along the ring
    sgn = np.einsum("ij,ij->i", out, chord)
    flip = sgn < 0
    out[flip] = -out[flip]
    return out, collinear


def point_segment_distances(points, seg_p0, seg_dir, seg_len2):
    """Exact distances from each point to each segment.

    Returns (dist, t) with shapes (P, S): foot parameters are clamped to [0, 1].
    """
    diff = points[:, None, :] - seg_p0[None, :, :]
    t = np.einsum("psd,sd->ps", diff, seg_dir) / seg_len2[None, :]
    np.clip(t, 0.0, 1.0, out=t)
    foot = seg_p0[None, :, :] + t[:, :, None] * seg_dir[None, :, :]
    d = np.linalg.norm(points[:, None, :] - foot, axis=2)
    return d, t


def min_point_curve_distance(points, seg_p0, seg_dir, seg_len2, block=256):
    """Min distance from each point to the union of segments, blocked."""
    n = len(points)
    out = np.empty(n)
    arg = np.empty(n, dtype=np.intp)
    tpar = np.empty(n)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        d, t = point_segment_distances(points[lo:hi], seg_p0, seg_dir, seg_len2)
        j = np.argmin(d, axis=1)
        rows = np.arange(hi - lo)
        out[lo:hi] = d[rows, j]
        arg[lo:hi] = j
        tpar[lo:hi] = t[rows, j]
    return out, arg, tpar


def _pair_quantities(p0s, d1s, len1sq, q0s, d2s, len2sq):
    """Shared quantities for elementwise segment-pair computations."""
    r0 = q0s - p0s
    a = len1sq
    b = np.einsum("ij,ij->i", d2s, d1s)
    c = len2sq
    e = np.einsum("ij,ij->i", r0, d1s)
    f = np.einsum("ij,ij->i", r0, d2s)
    return r0, a, b, c, e, f


def segment_pairs_min_dist(p0s, d1s, len1sq, q0s, d2s, len2sq):
    """Exact min distance for each segment pair (elementwise arrays)."""
    r0, a, b, c, e, f = _pair_quantities(p0s, d1s, len1sq, q0s, d2s, len2sq)
    det = b * b - a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        s_in = (b * f - c * e) / det
        t_in = (a * f - b * e) / det
    interior_ok = np.isfinite(s_in) & np.isfinite(t_in)
    s_in = np.where(interior_ok, s_in, 0.0)
    t_in = np.where(interior_ok, t_in, 0.0)
    cands = (
        (np.clip(s_in, 0.0, 1.0), np.clip(t_in, 0.0, 1.0)),
        (np.zeros_like(b), np.clip(-f / c, 0.0, 1.0)),
        (np.ones_like(b), np.clip((b - f) / c, 0.0, 1.0)),
        (np.clip(e / a, 0.0, 1.0), np.zeros_like(b)),
        (np.clip((e + b) / a, 0.0, 1.0), np.ones_like(b)),
    )
    best = None
    for s, t in cands:
        vec = r0 + t[:, None] * d2s - s[:, None] * d1s
        d = np.einsum("ij,ij->i", vec, vec)
        best = d if best is None else np.minimum(best, d)
    return np.sqrt(best)


def segment_batch_min_dist(p0, d1, len1sq, q0s, d2s, len2sq):
    """Exact min distance between one segment and a batch of segments."""
    n = len(q0s)
    return segment_pairs_min_dist(
        np.broadcast_to(p0, (n, len(p0))),
        np.broadcast_to(d1, (n, len(d1))),
        np.broadcast_to(len1sq, (n,)),
        q0s, d2s, len2sq,
    )


def critical_chord_candidates(p0s, d1s, len1sq, q0s, d2s, len2sq):
    """Candidate critical-chord parameters for each segment pair.

    Returns (K, 5, 2) array of (s, t) pairs: the unconstrained perpendicular
    foot (clamped) followed by the four edge configurations, which cover the
    vertex-vertex and vertex-interior cases.
    """
    r0, a, b, c, e, f = _pair_quantities(p0s, d1s, len1sq, q0s, d2s, len2sq)
    det = b * b - a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        s_in = (b * f - c * e) / det
        t_in = (a * f - b * e) / det
    bad = ~(np.isfinite(s_in) & np.isfinite(t_in))
    s_in = np.where(bad, 0.5, s_in)
    t_in = np.where(bad, 0.5, t_in)

    n = len(q0s)
    st = np.empty((n, 5, 2))
    st[:, 0, 0] = np.clip(s_in, 0.0, 1.0)
    st[:, 0, 1] = np.clip(t_in, 0.0, 1.0)
    st[:, 1, 0] = 0.0
    st[:, 1, 1] = np.clip(-f / c, 0.0, 1.0)
    st[:, 2, 0] = 1.0
    st[:, 2, 1] = np.clip((b - f) / c, 0.0, 1.0)
    st[:, 3, 0] = np.clip(e / a, 0.0, 1.0)
    st[:, 3, 1] = 0.0
    st[:, 4, 0] = np.clip((e + b) / a, 0.0, 1.0)
    st[:, 4, 1] = 1.0
    return st


def circular_arc_distance(s1, s2, ring_length):
    """Shorter arc distance between arclength positions on a ring."""
    d = np.abs(s1 - s2) % ring_length
    return np.minimum(d, ring_length - d)


def unit_rows(a, eps=0.0):
    """Normalize rows; rows with norm <= eps are returned unchanged."""
    n = np.linalg.norm(a, axis=-1, keepdims=True)
    return np.where(n > eps, a / np.where(n > 0, n, 1.0), a)


def pair_chunks(m, target):
    """Yield (i_idx, j_idx) covering all i < j in chunks of about target pairs."""
    i = 0
    while i < m - 1:
        rows = []
        total = 0
        while i < m - 1 and total < target:
            rows.append(i)
            total += m - 1 - i
            i += 1
        i_idx = np.concatenate([np.full(m - 1 - r, r, dtype=np.intp) for r in rows])
        j_idx = np.concatenate([np.arange(r + 1, m, dtype=np.intp) for r in rows])
        yield i_idx, j_idx
