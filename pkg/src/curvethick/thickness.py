"""Thickness of discrete curves.

The formula side: sup curvature over vertex triples (inverse circumradius),
its reciprocal as the focal distance, the doubly-critical chord search, and
thickness = min(focal distance, half the minimal doubly-critical chord).

The oracle side: two independent brute-force procedures, a rolling tangent
ball and the per-normal cut value, both driven by bisection over exact
point-segment distances.  Their agreement with the formula is the library's
main cross-check.

All reductions are index-ordered, so results do not depend on blocking or
thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import defaults
from ._geom import (
    circular_arc_distance,
    circumradius_curvature,
    critical_chord_candidates,
)
from ._parallel import map_blocks
from .curve import ArcCoordinate, nonadjacent_pair_chunks, require_tangents
from .errors import BracketMiss


def sup_curvature(curve):
    """Max inverse circumradius over consecutive vertex triples.

    Collinear triples contribute 0.
    """
    worst = 0.0
    for ring in curve.components:
        k = circumradius_curvature(
            np.roll(ring, 1, axis=0), ring, np.roll(ring, -1, axis=0)
        )
        worst = max(worst, float(k.max()))
    return worst


def focal_distance(curve):
    """1 / sup curvature; +inf when every triple is collinear."""
    k = sup_curvature(curve)
    return math.inf if k == 0.0 else 1.0 / k


def _max_curvature_coordinate(curve):
    best = (-1.0, None)
    for c, ring in enumerate(curve.components):
        k = circumradius_curvature(
            np.roll(ring, 1, axis=0), ring, np.roll(ring, -1, axis=0)
        )
        i = int(np.argmax(k))
        if k[i] > best[0]:
            best = (float(k[i]),
                    ArcCoordinate(c, i, 0.0, float(curve.cum_s[c][i])))
    return best[1]


@dataclass(frozen=True)
class DoubleCriticalPair:
    """Chord meeting the curve perpendicularly (within tolerance) at both ends.

    In Euclidean space every segment is minimal up to its midpoint, so no
    extra minimality test is applied; a curved-ambient port must restore it.
    """

    coord_p: ArcCoordinate
    coord_q: ArcCoordinate
    chord_length: float
    residual_angles: tuple

    def to_dict(self):
        return {
            "p": self.coord_p.to_dict(),
            "q": self.coord_q.to_dict(),
            "chord_length": self.chord_length,
            "residual_angles": list(self.residual_angles),
        }

    @staticmethod
    def from_dict(d):
        return DoubleCriticalPair(
            ArcCoordinate.from_dict(d["p"]),
            ArcCoordinate.from_dict(d["q"]),
            float(d["chord_length"]),
            tuple(float(x) for x in d["residual_angles"]),
        )


def default_adjacency_window(curve, focal_estimate=None):
    """max(ADJ_SEGMENTS segment lengths, ADJ_FOCAL_FACTOR x focal estimate) per ring."""
    if focal_estimate is None:
        focal_estimate = focal_distance(curve)
    fe = 0.0 if math.isinf(focal_estimate) else focal_estimate
    return tuple(
        max(
            defaults.ADJ_SEGMENTS * float(np.mean(curve.seg_lengths[c])),
            defaults.ADJ_FOCAL_FACTOR * fe,
        )
        for c in range(curve.n_components)
    )


def _segment_turns(curve, tf):
    """Angle between the vertex tangents at the two ends of each segment."""
    turns = []
    for c in range(curve.n_components):
        t = tf.vectors[c]
        dots = np.clip(np.einsum("ij,ij->i", t, np.roll(t, -1, axis=0)), -1.0, 1.0)
        turns.append(np.arccos(dots))
    return np.concatenate(turns)


def _tangent_on_segment(curve, tf, flat_seg, t):
    """Interpolated unit tangent at parameter t of flat segment indices."""
    comp = curve.seg_comp[flat_seg]
    ta = tf.flat[flat_seg]
    nxt = np.empty_like(flat_seg)
    for c in range(curve.n_components):
        sel = comp == c
        off = curve.offsets[c]
        n = curve.ring_size(c)
        nxt[sel] = off + ((flat_seg[sel] - off + 1) % n)
    tb = tf.flat[nxt]
    v = (1.0 - t)[:, None] * ta + t[:, None] * tb
    nv = np.linalg.norm(v, axis=1, keepdims=True)
    nv[nv == 0.0] = 1.0
    return v / nv


def _arc_position(curve, flat_seg, t):
    return curve.vert_s[flat_seg] + t * curve.seg_len[flat_seg]


def find_double_critical_pairs(curve, tangents=None, perp_tol=None,
                               adjacency_window=None, threads=1):
    """All chords perpendicular to the curve at both endpoints.

    Solves the 2x2 perpendicular-foot system on every nonadjacent segment
    pair, adds the clamped edge/vertex configurations, refines survivors by
    one Newton step on the criticality residuals, then filters by
    perpendicularity tolerance (radians) and arc separation and deduplicates
    pairs closer than one segment in both arc coordinates.  Pairs are returned
    sorted by chord length.
    """
    tf = require_tangents(curve, tangents)
    if perp_tol is None:
        perp_tol = defaults.PERP_TOL
    windows = (adjacency_window if adjacency_window is not None
               else default_adjacency_window(curve))
    if np.isscalar(windows):
        windows = tuple(float(windows) for _ in range(curve.n_components))

    turns = _segment_turns(curve, tf)
    mid = curve.seg_p0 + 0.5 * curve.seg_dir
    ring_len = np.array([curve.ring_length(c) for c in range(curve.n_components)])
    win = np.array(windows)

    def scan_chunk(chunk):
        i_idx, j_idx = chunk
        # midpoint prefilter: a critical chord must be near-perpendicular to
        # both segment directions; the foot can move at most half a segment
        # from the midpoint, so allow that much angular slack.
        c = mid[j_idx] - mid[i_idx]
        clen = np.linalg.norm(c, axis=1)
        ok = clen > 0
        li = curve.seg_len[i_idx]
        lj = curve.seg_len[j_idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            cos1 = np.abs(np.einsum("ij,ij->i", c, curve.seg_dir[i_idx])) / (clen * li)
            cos2 = np.abs(np.einsum("ij,ij->i", c, curve.seg_dir[j_idx])) / (clen * lj)
            slack = (li + lj) / clen
        tol = np.sin(perp_tol) + turns[i_idx] + turns[j_idx] + slack
        ok &= (cos1 <= tol) & (cos2 <= tol)
        # same-component pairs that cannot clear the adjacency window
        same = curve.seg_comp[i_idx] == curve.seg_comp[j_idx]
        if same.any():
            ci = curve.seg_comp[i_idx[same]]
            sep = circular_arc_distance(
                _arc_position(curve, i_idx[same], np.full(same.sum(), 0.5)),
                _arc_position(curve, j_idx[same], np.full(same.sum(), 0.5)),
                ring_len[ci],
            )
            bad = sep + 0.5 * (li[same] + lj[same]) <= win[ci]
            sub = np.flatnonzero(same)
            ok[sub[bad]] = False
        return i_idx[ok], j_idx[ok]

    chunks = list(nonadjacent_pair_chunks(curve))
    picked = map_blocks(scan_chunk, chunks, threads)
    picked = [p for p in picked if p is not None and len(p[0])]
    if not picked:
        return []
    i_idx = np.concatenate([p[0] for p in picked])
    j_idx = np.concatenate([p[1] for p in picked])

    st = critical_chord_candidates(
        curve.seg_p0[i_idx], curve.seg_dir[i_idx], curve.seg_len2[i_idx],
        curve.seg_p0[j_idx], curve.seg_dir[j_idx], curve.seg_len2[j_idx],
    )

    # flatten candidates: (K, 5, 2) -> rows
    k = len(i_idx)
    segs_p = np.repeat(i_idx, 5)
    segs_q = np.repeat(j_idx, 5)
    s = st[:, :, 0].ravel()
    t = st[:, :, 1].ravel()

    res1, res2, chord = _residuals(curve, tf, segs_p, s, segs_q, t)
    pre_tol = perp_tol + turns[segs_p] + turns[segs_q]
    keep = (np.maximum(res1, res2) <= pre_tol) & (chord > 0)
    segs_p, segs_q, s, t = segs_p[keep], segs_q[keep], s[keep], t[keep]
    if len(segs_p) == 0:
        return []

    segs_p, s, segs_q, t = _newton_refine(curve, tf, segs_p, s, segs_q, t)
    res1, res2, chord = _residuals(curve, tf, segs_p, s, segs_q, t)

    keep = (np.maximum(res1, res2) <= perp_tol) & (chord > 0)
    comp_p = curve.seg_comp[segs_p]
    comp_q = curve.seg_comp[segs_q]
    sp = _arc_position(curve, segs_p, s)
    sq = _arc_position(curve, segs_q, t)
    same = comp_p == comp_q
    sep = np.where(
        same,
        circular_arc_distance(sp, sq, ring_len[np.where(same, comp_p, 0)]),
        np.inf,
    )
    keep &= np.where(same, sep > win[np.where(same, comp_p, 0)], True)
    if not keep.any():
        return []
    segs_p, segs_q, s, t = segs_p[keep], segs_q[keep], s[keep], t[keep]
    res1, res2, chord = res1[keep], res2[keep], chord[keep]
    comp_p, comp_q, sp, sq = comp_p[keep], comp_q[keep], sp[keep], sq[keep]

    order = np.lexsort((sq, sp, chord))
    mean_seg = [float(np.mean(curve.seg_lengths[c]))
                for c in range(curve.n_components)]
    n_buckets = [max(1, int(round(curve.ring_length(c) / mean_seg[c])))
                 for c in range(curve.n_components)]
    rl = [curve.ring_length(c) for c in range(curve.n_components)]

    def close(c1, a1, a2):
        d = abs(a1 - a2) % rl[c1]
        return min(d, rl[c1] - d) < mean_seg[c1]

    pairs = []
    buckets = {}  # (cp, bp, cq, bq) -> list of (sp, sq) kept in that cell
    for idx in order:
        cp, cq = int(comp_p[idx]), int(comp_q[idx])
        a, b = float(sp[idx]), float(sq[idx])
        bp = int(a / mean_seg[cp]) % n_buckets[cp]
        bq = int(b / mean_seg[cq]) % n_buckets[cq]
        dup = False
        for dp in (-1, 0, 1):
            for dq in (-1, 0, 1):
                kp = (cp, (bp + dp) % n_buckets[cp], cq, (bq + dq) % n_buckets[cq])
                for (ka, kb) in buckets.get(kp, ()):
                    if close(cp, a, ka) and close(cq, b, kb):
                        dup = True
                        break
                kp2 = (cq, (bq + dq) % n_buckets[cq], cp, (bp + dp) % n_buckets[cp])
                if not dup and kp2 != kp:
                    for (ka, kb) in buckets.get(kp2, ()):
                        if close(cq, b, ka) and close(cp, a, kb):
                            dup = True
                            break
                if dup:
                    break
            if dup:
                break
        if dup:
            continue
        buckets.setdefault((cp, bp, cq, bq), []).append((a, b))
        pairs.append(_make_pair(curve, segs_p[idx], s[idx], segs_q[idx], t[idx],
                                chord[idx], res1[idx], res2[idx]))
    return pairs


def _make_pair(curve, seg_p, s, seg_q, t, chord, r1, r2):
    cp = int(curve.seg_comp[seg_p])
    cq = int(curve.seg_comp[seg_q])
    lp = int(seg_p - curve.offsets[cp])
    lq = int(seg_q - curve.offsets[cq])
    coord_p = ArcCoordinate(cp, lp, float(s),
                            float(curve.cum_s[cp][lp] + s * curve.seg_lengths[cp][lp]))
    coord_q = ArcCoordinate(cq, lq, float(t),
                            float(curve.cum_s[cq][lq] + t * curve.seg_lengths[cq][lq]))
    return DoubleCriticalPair(coord_p, coord_q, float(chord),
                              (float(r1), float(r2)))


def _residuals(curve, tf, segs_p, s, segs_q, t):
    p = curve.seg_p0[segs_p] + s[:, None] * curve.seg_dir[segs_p]
    q = curve.seg_p0[segs_q] + t[:, None] * curve.seg_dir[segs_q]
    chord = q - p
    clen = np.linalg.norm(chord, axis=1)
    safe = np.where(clen > 0, clen, 1.0)
    u = chord / safe[:, None]
    tp = _tangent_on_segment(curve, tf, segs_p, s)
    tq = _tangent_on_segment(curve, tf, segs_q, t)
    r1 = np.abs(np.arcsin(np.clip(np.einsum("ij,ij->i", u, tp), -1.0, 1.0)))
    r2 = np.abs(np.arcsin(np.clip(np.einsum("ij,ij->i", u, tq), -1.0, 1.0)))
    return r1, r2, clen


def _newton_refine(curve, tf, segs_p, s, segs_q, t):
    """One Newton step on the two criticality residuals in arclength.

    Clamped linear solutions on polylines are only first-order critical; a
    single finite-difference Newton step restores second-order accuracy.
    The step is capped at one local segment length.
    """
    sp = _arc_position(curve, segs_p, s)
    sq = _arc_position(curve, segs_q, t)
    hp = 0.1 * curve.seg_len[segs_p]
    hq = 0.1 * curve.seg_len[segs_q]
    comp_p = curve.seg_comp[segs_p]
    comp_q = curve.seg_comp[segs_q]

    def g(ap, aq):
        fp, up = _state_at_s(curve, tf, comp_p, ap)
        fq, uq = _state_at_s(curve, tf, comp_q, aq)
        chord = fq - fp
        clen = np.linalg.norm(chord, axis=1)
        safe = np.where(clen > 0, clen, 1.0)
        u = chord / safe[:, None]
        return (np.einsum("ij,ij->i", u, up), np.einsum("ij,ij->i", u, uq))

    g1, g2 = g(sp, sq)
    g1p, g2p = g(sp + hp, sq)
    g1m, g2m = g(sp - hp, sq)
    g1q, g2q = g(sp, sq + hq)
    g1mq, g2mq = g(sp, sq - hq)
    j11 = (g1p - g1m) / (2 * hp)
    j21 = (g2p - g2m) / (2 * hp)
    j12 = (g1q - g1mq) / (2 * hq)
    j22 = (g2q - g2mq) / (2 * hq)
    det = j11 * j22 - j12 * j21
    ok = np.abs(det) > 1e-14
    det = np.where(ok, det, 1.0)
    ds = np.where(ok, -(j22 * g1 - j12 * g2) / det, 0.0)
    dt = np.where(ok, -(-j21 * g1 + j11 * g2) / det, 0.0)
    cap_p = curve.seg_len[segs_p]
    cap_q = curve.seg_len[segs_q]
    ds = np.clip(ds, -cap_p, cap_p)
    dt = np.clip(dt, -cap_q, cap_q)
    sp2 = sp + ds
    sq2 = sq + dt
    return _locate(curve, comp_p, sp2) + _locate(curve, comp_q, sq2)


def _locate(curve, comp, s):
    """Map per-component arclengths to (flat segment, parameter)."""
    seg = np.empty(len(s), dtype=np.intp)
    t = np.empty(len(s))
    for c in range(curve.n_components):
        sel = comp == c
        if not sel.any():
            continue
        length = curve.ring_length(c)
        ss = np.mod(s[sel], length)
        cs = curve.cum_s[c]
        idx = np.clip(np.searchsorted(cs, ss, side="right") - 1, 0,
                      curve.ring_size(c) - 1)
        ls = curve.seg_lengths[c][idx]
        t[sel] = np.clip((ss - cs[idx]) / np.where(ls > 0, ls, 1.0), 0.0, 1.0)
        seg[sel] = curve.offsets[c] + idx
    return seg, t


def _state_at_s(curve, tf, comp, s):
    seg, t = _locate(curve, comp, s)
    p = curve.seg_p0[seg] + t[:, None] * curve.seg_dir[seg]
    u = _tangent_on_segment(curve, tf, seg, t)
    return p, u


def mdc(curve, tangents=None, perp_tol=None, adjacency_window=None, threads=1):
    """Minimal doubly-critical chord length; +inf when no pair exists."""
    pairs = find_double_critical_pairs(curve, tangents, perp_tol,
                                       adjacency_window, threads)
    if not pairs:
        return math.inf
    return pairs[0].chord_length


@dataclass(frozen=True)
class ThicknessReport:
    """Thickness and its ingredients, plus optional oracle cross-checks."""

    focal_distance: float
    mdc: float
    thickness: float
    attaining_feature: str          # "focal" | "doubly_critical"
    attaining_location: object      # ArcCoordinate or DoubleCriticalPair
    sup_curvature: float
    oracle_rolling_ball: float = None
    oracle_cut_value: float = None
    max_discrepancy: float = None

    def to_dict(self):
        from .io import encode_float

        loc = (self.attaining_location.to_dict()
               if self.attaining_location is not None else None)
        return {
            "focal_distance": encode_float(self.focal_distance),
            "mdc": encode_float(self.mdc),
            "thickness": encode_float(self.thickness),
            "attaining_feature": self.attaining_feature,
            "attaining_location": loc,
            "sup_curvature": self.sup_curvature,
            "oracle_rolling_ball": encode_float(self.oracle_rolling_ball),
            "oracle_cut_value": encode_float(self.oracle_cut_value),
            "max_discrepancy": encode_float(self.max_discrepancy),
        }

    @staticmethod
    def from_dict(d):
        from .io import decode_float

        feature = d["attaining_feature"]
        loc = d.get("attaining_location")
        if loc is not None:
            loc = (DoubleCriticalPair.from_dict(loc) if "chord_length" in loc
                   else ArcCoordinate.from_dict(loc))
        return ThicknessReport(
            focal_distance=decode_float(d["focal_distance"]),
            mdc=decode_float(d["mdc"]),
            thickness=decode_float(d["thickness"]),
            attaining_feature=feature,
            attaining_location=loc,
            sup_curvature=float(d["sup_curvature"]),
            oracle_rolling_ball=decode_float(d.get("oracle_rolling_ball")),
            oracle_cut_value=decode_float(d.get("oracle_cut_value")),
            max_discrepancy=decode_float(d.get("max_discrepancy")),
        )


def thickness(curve, tangents=None, perp_tol=None, adjacency_window=None,
              oracle="none", spec=None, threads=1):
    """ThicknessReport with thickness = min(focal distance, mdc / 2).

    Ties are reported as doubly critical.  oracle in {"none", "ball", "cut",
    "both"} adds the corresponding brute-force values and the worst
    |oracle - thickness| as max_discrepancy.
    """
    tf = require_tangents(curve, tangents)
    fg = focal_distance(curve)
    pairs = find_double_critical_pairs(curve, tf, perp_tol, adjacency_window,
                                       threads)
    dcd = pairs[0].chord_length if pairs else math.inf
    value = min(fg, 0.5 * dcd)
    if fg < 0.5 * dcd:
        feature = "focal"
        location = _max_curvature_coordinate(curve)
    else:
        feature = "doubly_critical"
        location = pairs[0] if pairs else None

    ball = cut = disc = None
    if oracle != "none":
        if spec is None:
            spec = default_sample_spec(curve, value)
        if oracle in ("ball", "both"):
            ball = rolling_ball_oracle(curve, spec, tf, threads=threads)
        if oracle in ("cut", "both"):
            cut = cut_value_oracle(curve, spec, tf, threads=threads)
        present = [x for x in (ball, cut) if x is not None]
        disc = max(abs(x - value) for x in present) if present else None

    return ThicknessReport(
        focal_distance=fg,
        mdc=dcd,
        thickness=value,
        attaining_feature=feature,
        attaining_location=location,
        sup_curvature=sup_curvature(curve),
        oracle_rolling_ball=ball,
        oracle_cut_value=cut,
        max_discrepancy=disc,
    )


@dataclass(frozen=True)
class NormalSampleSpec:
    """How the oracles sample the unit normal bundle and bisect radii."""

    normal_directions_per_vertex: int
    radius_bracket: tuple
    bisection_tolerance: float

    def __post_init__(self):
        if self.normal_directions_per_vertex < 1:
            raise ValueError("need at least one normal direction per vertex")
        lo, hi = self.radius_bracket
        if not lo < hi:
            raise ValueError("radius bracket must satisfy lo < hi")
        if not self.bisection_tolerance > 0:
            raise ValueError("bisection tolerance must be positive")


def default_sample_spec(curve, thickness_estimate, normals=None):
    """Bracket seeded from the formula value, per the oracle precondition."""
    if normals is None:
        normals = {2: defaults.NORMALS_2D, 3: defaults.NORMALS_3D}.get(
            curve.dim, defaults.NORMALS_ND)
    t = float(thickness_estimate)
    if not math.isfinite(t) or t <= 0:
        t = 0.5 * curve.bbox_diag
    # tolerance floor: twice the chord sagitta, else the polyline's own
    # quantization noise triggers false deaths in the cut-value predicate
    sagitta = float(np.max(curve.seg_len)) ** 2 * sup_curvature(curve) / 8.0
    return NormalSampleSpec(
        normal_directions_per_vertex=normals,
        radius_bracket=(defaults.BRACKET_LO * t, defaults.BRACKET_HI * t),
        bisection_tolerance=max(defaults.BISECT_TOL_FACTOR * t, 2.0 * sagitta),
    )


def _normal_bases(tangent_flat):
    """Orthonormal basis of each vertex's normal space, via batched QR.

    Column 0 of the QR factor spans the tangent; the remaining columns are
    the normal frame.  Deterministic for fixed input.
    """
    m, d = tangent_flat.shape
    a = np.zeros((m, d, d))
    a[:, :, 0] = tangent_flat
    a[:, :, 1:] = np.broadcast_to(np.eye(d)[:, : d - 1], (m, d, d - 1))
    q, r = np.linalg.qr(a)
    # make the decomposition unambiguous: positive diagonal of r
    sign = np.sign(np.einsum("mii->mi", r))
    sign[sign == 0] = 1.0
    q = q * sign[:, None, :]
    return q[:, :, 1:]  # (m, d, d-1): columns are normal directions


def _sphere_directions(count, ambient_minus_one):
    """Deterministic low-discrepancy points on S^(ambient_minus_one - 1)."""
    n = ambient_minus_one
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        a = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(a), np.sin(a)])
    from scipy.stats import norm, qmc

    h = qmc.Halton(d=n, scramble=False)
    h.fast_forward(1)  # skip the origin point
    u = h.random(count)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass(frozen=True)
class _OracleSamples:
    """Tangency base points with sampled unit normals and exclusion arcs.

    Bases sit at segment midpoints: there the polyline is locally flat, so a
    tangent ball osculates the discrete curve without the O(h^2) chord-sagitta
    bias that vertex-based tangency suffers near the focal radius.
    """

    points: np.ndarray   # (S, d) base points
    comp: np.ndarray     # (S,) component of the base
    arc_s: np.ndarray    # (S,) arclength of the base within its ring
    dirs: np.ndarray     # (S, d) unit normals
    excl: np.ndarray     # (S,) excluded arc radius around the base


def oracle_samples(curve, tangents, count):
    """Midpoint-based (base, unit normal) samples, segment-major order."""
    tf = require_tangents(curve, tangents)
    d = curve.dim
    m = len(curve.seg_p0)
    mid = curve.seg_p0 + 0.5 * curve.seg_dir
    tmid = _tangent_on_segment(curve, tf, np.arange(m, dtype=np.intp),
                               np.full(m, 0.5))
    if d == 2:
        n1 = np.column_stack([-tmid[:, 1], tmid[:, 0]])
        dirs = np.stack([n1, -n1], axis=1)  # (m, 2, 2)
        count = 2
    else:
        bases = _normal_bases(tmid)                # (m, d, d-1)
        sph = _sphere_directions(count, d - 1)     # (count, d-1)
        count = len(sph)
        dirs = np.einsum("mdk,ck->mcd", bases, sph)

    k = sup_curvature(curve)
    cap = math.inf if k == 0.0 else math.pi / (2.0 * k)
    local = np.empty(m)
    for c in range(curve.n_components):
        off = curve.offsets[c]
        lens = curve.seg_lengths[c]
        local[off:off + len(lens)] = np.maximum(
            np.maximum(lens, np.roll(lens, 1)), np.roll(lens, -1))
    excl = np.minimum(defaults.EXCL_SEGMENTS * local, cap)

    rep = np.repeat(np.arange(m, dtype=np.intp), count)
    return _OracleSamples(
        points=mid[rep],
        comp=curve.seg_comp[rep],
        arc_s=(curve.vert_s + 0.5 * curve.seg_len)[rep],
        dirs=dirs.reshape(m * count, d),
        excl=excl[rep],
    )


class _ClearanceEngine:
    """Min distance from probe points to the non-excluded segments.

    Excluded: segments of the sample's own component whose arc span overlaps
    the exclusion window around the base point.  The exclusion removes the
    trivial attainment at the base without hiding focal failures, which reach
    out to arc distance of order 1 / curvature.  The exclusion mask depends
    only on the samples, so it is built once and reused across bisection.
    """

    def __init__(self, curve, samples, threads=1, block=None, min_tol=None):
        self.block = block or 4 * defaults.BLOCK_ROWS
        self.threads = threads
        # single precision is safe when the tolerance dwarfs the rounding
        # noise of centered coordinates; distances are translation-invariant
        self.center = 0.5 * (curve.verts.min(axis=0) + curve.verts.max(axis=0))
        f32_noise = 64.0 * np.finfo(np.float32).eps * max(curve.bbox_diag, 1e-30)
        self.dtype = (np.float32 if min_tol is not None and min_tol > f32_noise
                      else np.float64)
        p0 = (curve.seg_p0 - self.center).astype(self.dtype)
        self.p0t = np.ascontiguousarray(p0.T)
        self.dirt = np.ascontiguousarray(curve.seg_dir.T.astype(self.dtype))
        self.len2 = curve.seg_len2.astype(self.dtype)
        self.p0d = np.einsum("ij,ij->i", p0, curve.seg_dir.astype(self.dtype))
        self.p0n = np.einsum("ij,ij->i", p0, p0)
        seg_mid_s = curve.vert_s + 0.5 * curve.seg_len
        ring = np.array([curve.ring_length(c)
                         for c in range(curve.n_components)])[curve.seg_comp]
        n = len(samples.points)
        self.mask = np.empty((n, len(curve.seg_p0)), dtype=bool)
        half_len = 0.5 * curve.seg_len
        for lo in range(0, n, self.block):
            hi = min(lo + self.block, n)
            same = samples.comp[lo:hi, None] == curve.seg_comp[None, :]
            delta = np.abs(samples.arc_s[lo:hi, None] - seg_mid_s[None, :]) % ring
            delta = np.minimum(delta, ring - delta)
            self.mask[lo:hi] = same & (
                delta <= samples.excl[lo:hi, None] + half_len[None, :])

    def __call__(self, idx, points):
        def run(rows):
            x = (points[rows] - self.center).astype(self.dtype)
            q = x @ self.dirt - self.p0d[None, :]
            nd = (np.einsum("ij,ij->i", x, x)[:, None]
                  - 2.0 * (x @ self.p0t) + self.p0n[None, :])
            t = np.clip(q / self.len2[None, :], 0.0, 1.0)
            d2 = nd - t * (2.0 * q - t * self.len2[None, :])
            d2[self.mask[idx[rows]]] = np.inf
            return np.sqrt(np.clip(d2.min(axis=1).astype(np.float64), 0.0, None))

        blocks = [np.arange(lo, min(lo + self.block, len(points)))
                  for lo in range(0, len(points), self.block)]
        outs = map_blocks(run, blocks, self.threads)
        return np.concatenate(outs) if outs else np.empty(0)



def _min_death_radius(clear_many, n_samples, lo, hi, tol, slack, what):
    """Smallest per-sample death radius, by bisection with monotone pruning.

    A sample is dead at r when its clearance drops below r - slack; dead sets
    are monotone in r, so a probe that finds deaths bounds the search above,
    and every radius below it only needs that probe's dead set.  The deepest
    hit is bisected alone, then one pass over the remaining candidates at
    (value - tol) either certifies the minimum or descends.  Returns None if
    no sample is dead at r_hi; raises BracketMiss if some sample is already
    dead at r_lo.
    """
    active = np.arange(n_samples)
    b = None
    for frac in (0.55, 0.75, 1.0):
        r = lo + frac * (hi - lo)
        c = clear_many(np.full(len(active), r), active)
        margin = c - (r - slack)
        dead = margin < 0
        if np.any(dead):
            b = r
            active = active[dead]
            margin = margin[dead]
            break
    if b is None:
        return None

    c = clear_many(np.full(len(active), lo), active)
    if np.any(c < lo - slack):
        raise BracketMiss(f"some {what} is already below r_lo = {lo}")

    while True:
        i0 = active[int(np.argmin(margin))]
        one = np.array([i0])
        a, bb = lo, b
        while bb - a > tol:
            r = 0.5 * (a + bb)
            if clear_many(np.array([r]), one)[0] < r - slack:
                bb = r
            else:
                a = r
        value = 0.5 * (a + bb)
        r1 = value - tol
        if r1 <= lo:
            return value
        c = clear_many(np.full(len(active), r1), active)
        margin = c - (r1 - slack)
        dead = margin < 0
        if not np.any(dead):
            return value
        active = active[dead]
        margin = margin[dead]
        b = r1


def rolling_ball_oracle(curve, spec, tangents=None, threads=1):
    """Infimum radius at which some tangent ball hits the curve again.

    Global bisection on r: at each candidate, every (vertex, sampled normal)
    ball B(p + r w, r) is tested for containing a curve point outside the
    base-point neighborhood, by exact point-segment distance.  Samples proven
    clear of the current radius carry a Lipschitz certificate forward so only
    near-critical samples are re-evaluated.
    """
    tf = require_tangents(curve, tangents)
    samples = oracle_samples(curve, tf, spec.normal_directions_per_vertex)
    engine = _ClearanceEngine(curve, samples, threads,
                              min_tol=spec.bisection_tolerance)
    lo, hi = spec.radius_bracket

    def clear_at(r, idx):
        return engine(idx, samples.points[idx] + r * samples.dirs[idx])

    def clear_many(r_arr, idx):
        return engine(idx, samples.points[idx] + r_arr[:, None] * samples.dirs[idx])

    value = _min_death_radius(clear_many, len(samples.points), lo, hi,
                              spec.bisection_tolerance, slack=0.0,
                              what="tangent ball")
    if value is None:
        raise BracketMiss(f"no tangent ball hits the curve at r_hi = {hi}")
    return value


def cut_value_oracle(curve, spec, tangents=None, threads=1):
    """Min over sampled normals of the normal cut value.

    Per sample, r_w is found by bisection on the predicate
    d(p + r w, curve minus a base neighborhood) >= r - tol; samples whose
    bracket lies entirely above the current best minimum are retired early.
    Samples still alive at r_hi contribute r_hi.
    """
    tf = require_tangents(curve, tangents)
    samples = oracle_samples(curve, tf, spec.normal_directions_per_vertex)
    engine = _ClearanceEngine(curve, samples, threads,
                              min_tol=spec.bisection_tolerance)
    lo, hi = spec.radius_bracket
    tol = spec.bisection_tolerance

    def clear(r_arr, idx):
        return engine(idx, samples.points[idx] + r_arr[:, None] * samples.dirs[idx])

    value = _min_death_radius(clear, len(samples.points), lo, hi, tol,
                              slack=tol, what="normal cut value")
    if value is None:
        # every sampled normal is still alive at r_hi: all contribute r_hi
        return hi
    return value


def normal_cut_value(curve, coord, direction, spec):
    """Cut value along one explicit normal ray; r_hi if still alive at r_hi.

    coord is an ArcCoordinate giving the base point on the curve.
    """
    from .curve import point_at

    w = np.asarray(direction, dtype=float)
    w = w / np.linalg.norm(w)
    p = point_at(curve, coord)
    k = sup_curvature(curve)
    cap = math.inf if k == 0.0 else math.pi / (2.0 * k)
    local = float(np.max(curve.seg_lengths[coord.component]))
    samples = _OracleSamples(
        points=p[None, :],
        comp=np.array([coord.component], dtype=np.intp),
        arc_s=np.array([coord.s]),
        dirs=w[None, :],
        excl=np.array([min(defaults.EXCL_SEGMENTS * local, cap)]),
    )
    engine = _ClearanceEngine(curve, samples)
    lo, hi = spec.radius_bracket
    tol = spec.bisection_tolerance
    one = np.array([0])

    def clearance(r):
        return engine(one, (p + r * w)[None, :])[0]

    if clearance(lo) < lo - tol:
        raise BracketMiss(f"cut value below r_lo = {lo}")
    if clearance(hi) >= hi - tol:
        return hi
    a, b = lo, hi
    while b - a > tol:
        r = 0.5 * (a + b)
        if clearance(r) >= r - tol:
            a = r
        else:
            b = r
    return 0.5 * (a + b)
