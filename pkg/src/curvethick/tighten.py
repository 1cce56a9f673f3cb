"""Ropelength descent at fixed length (ideal-shape search).

Seeded stochastic descent over vertex moves in the estimated normal plane,
with occasional whole-arc low-frequency bumps.  A move is accepted only if it
lowers length / thickness, keeps the curve embedded, and is certified
isotopic to its predecessor by the nearest-point projection check, so the
isotopy class is preserved by construction.  The curve is rescaled to its
original total length after every accepted move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import defaults
from ._geom import (
    circular_arc_distance,
    circumcircle_tangents,
    circumradius_curvature,
    critical_chord_candidates,
    segment_pairs_min_dist,
)
from .curve import adjacent_segment_mask, nonadjacent_pair_chunks
from .errors import ZeroThicknessStart
from .isotopy import isotopy_check, suggested_rho
from .thickness import default_adjacency_window, thickness


@dataclass(frozen=True)
class TightenConfig:
    seed: int = 0
    steps: int = 20_000
    step_scale: float = 0.08          # initial amplitude, x current thickness
    cooling: float = 0.97             # per accepted batch of `batch` moves
    batch: int = defaults.TIGHTEN_BATCH
    bump_every: int = defaults.TIGHTEN_BUMP_EVERY
    refresh_every: int = defaults.TIGHTEN_REFRESH
    temperature: float = 0.0          # 0 = greedy descent (nonincreasing)
    isotopy_frames: int = 4
    length_constraint: str = "renormalize_each_step"

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if not 0.0 < self.cooling < 1.0:
            raise ValueError("cooling must be in (0, 1)")
        if not self.step_scale > 0:
            raise ValueError("step_scale must be positive")


@dataclass(frozen=True)
class TightenTrace:
    """Per-iteration objective/thickness records plus the final curve.

    With the default zero temperature the objective is nonincreasing over
    accepted steps, and every accepted step carries an isotopy certificate
    against its predecessor.
    """

    records: tuple     # dicts: iteration, kind, objective, thickness, ...
    final_curve: object
    final_report: object
    accepted: int
    config: TightenConfig

    def accepted_objectives(self):
        return [r["objective"] for r in self.records if r["accepted"]]


class _State:
    """Incremental ropelength bookkeeping for a set of vertex rings.

    Maintains per-vertex tangents and curvatures and a per-segment row
    minimum of critical-chord lengths.  Vertex moves update only the touched
    rows; other rows are tightened against the moved segments, which can
    leave them stale on the low side, so a full recompute runs every
    `refresh_every` accepted moves.
    """

    def __init__(self, template, positions):
        self.template = template
        self.dim = template.dim
        self.offsets = list(template.offsets)
        self.sizes = [template.ring_size(c) for c in range(template.n_components)]
        self.pos = np.array(positions, dtype=float)
        m = len(self.pos)
        self.m = m
        self.tan = np.zeros((m, self.dim))
        self.kappa = np.zeros(m)
        self.rowmin = np.full(m, np.inf)
        self.window = None
        self.refresh()

    # ring index helpers -------------------------------------------------
    def comp_of(self, flat):
        return int(self.template.seg_comp[flat])

    def ring_slice(self, c):
        return slice(self.offsets[c], self.offsets[c] + self.sizes[c])

    def wrap(self, c, i):
        return self.offsets[c] + (i - self.offsets[c]) % self.sizes[c]

    def neighbors(self, flat, delta):
        c = self.comp_of(flat)
        return self.wrap(c, flat + delta)

    # geometry tables ----------------------------------------------------
    def seg_dir(self):
        out = np.empty_like(self.pos)
        for c in range(len(self.sizes)):
            sl = self.ring_slice(c)
            ring = self.pos[sl]
            out[sl] = np.roll(ring, -1, axis=0) - ring
        return out

    def arc_positions(self):
        s = np.empty(self.m)
        lengths = np.empty(len(self.sizes))
        seglen = np.linalg.norm(self._dirs, axis=1)
        for c in range(len(self.sizes)):
            sl = self.ring_slice(c)
            cs = np.concatenate([[0.0], np.cumsum(seglen[sl])])
            s[sl] = cs[:-1]
            lengths[c] = cs[-1]
        return s, lengths, seglen

    def refresh(self):
        self._dirs = self.seg_dir()
        self._len = np.linalg.norm(self._dirs, axis=1)
        self._len2 = self._len**2
        self.vert_s, self.ring_lengths, _ = self.arc_positions()
        for c in range(len(self.sizes)):
            sl = self.ring_slice(c)
            ring = self.pos[sl]
            prev_pts = np.roll(ring, 1, axis=0)
            next_pts = np.roll(ring, -1, axis=0)
            self.tan[sl], _ = circumcircle_tangents(
                prev_pts, ring, next_pts, defaults.COLLINEAR_FACTOR)
            self.kappa[sl] = circumradius_curvature(prev_pts, ring, next_pts)
        if self.window is None:
            curve = self.curve(validate=False)
            self.window = np.array(default_adjacency_window(curve))
        self.rowmin = np.full(self.m, np.inf)
        for i in range(self.m):
            contrib = self._row(i)
            self.rowmin[i] = min(self.rowmin[i], contrib.min())
            np.minimum(self.rowmin, contrib, out=self.rowmin)

    def _row(self, i):
        """Best critical-chord length between segment i and every segment."""
        c_i = self.comp_of(i)
        n_i = self.sizes[c_i]
        off = self.offsets[c_i]
        st = critical_chord_candidates(
            np.broadcast_to(self.pos[i], (self.m, self.dim)),
            np.broadcast_to(self._dirs[i], (self.m, self.dim)),
            np.broadcast_to(self._len2[i], (self.m,)),
            self.pos, self._dirs, self._len2,
        )
        best = np.full(self.m, np.inf)
        t_i0 = self.tan[i]
        t_i1 = self.tan[self.neighbors(i, 1)]
        turn_i = math.acos(min(1.0, max(-1.0, float(t_i0 @ t_i1))))
        nxt = np.empty(self.m, dtype=np.intp)
        for c in range(len(self.sizes)):
            sl = self.ring_slice(c)
            idxs = np.arange(sl.start, sl.stop)
            nxt[sl] = self.offsets[c] + (idxs - self.offsets[c] + 1) % self.sizes[c]
        t_j0 = self.tan
        t_j1 = self.tan[nxt]
        turns_j = np.arccos(np.clip(np.einsum("ij,ij->i", t_j0, t_j1), -1, 1))
        for cand in range(5):
            s = st[:, cand, 0]
            t = st[:, cand, 1]
            p = self.pos[i] + s[:, None] * self._dirs[i]
            q = self.pos + t[:, None] * self._dirs
            chord = q - p
            clen = np.linalg.norm(chord, axis=1)
            ok = clen > 0
            u = chord / np.where(ok, clen, 1.0)[:, None]
            tp = (1 - s)[:, None] * t_i0 + s[:, None] * t_i1
            tp /= np.maximum(np.linalg.norm(tp, axis=1, keepdims=True), 1e-30)
            tq = (1 - t)[:, None] * t_j0 + t[:, None] * t_j1
            tq /= np.maximum(np.linalg.norm(tq, axis=1, keepdims=True), 1e-30)
            r1 = np.abs(np.arcsin(np.clip(np.einsum("ij,ij->i", u, tp), -1, 1)))
            r2 = np.abs(np.arcsin(np.clip(np.einsum("ij,ij->i", u, tq), -1, 1)))
            tol = defaults.PERP_TOL + turn_i + turns_j
            ok &= (r1 <= tol) & (r2 <= tol)
            # arc separation within the same ring
            same = self.template.seg_comp == c_i
            s_i = self.vert_s[i] + s * self._len[i]
            s_j = self.vert_s + t * self._len
            sep = circular_arc_distance(s_i, s_j, self.ring_lengths[c_i])
            ok &= np.where(same, sep > self.window[c_i], True)
            best = np.where(ok, np.minimum(best, clen), best)
        # nonadjacency
        best[i] = np.inf
        best[self.neighbors(i, 1)] = np.inf
        best[self.neighbors(i, -1)] = np.inf
        return best

    # incremental move application ----------------------------------------
    def affected_by_vertex(self, flat):
        segs = sorted({self.neighbors(flat, d) for d in (-2, -1, 0, 1)})
        verts = sorted({self.neighbors(flat, d) for d in (-1, 0, 1)})
        return segs, verts

    def apply_vertex_move(self, flat, new_pos):
        """Move one vertex; returns an undo closure."""
        segs, verts = self.affected_by_vertex(flat)
        saved = {
            "pos": (flat, self.pos[flat].copy()),
            "dirs": [(j, self._dirs[j].copy()) for j in segs],
            "len": [(j, self._len[j]) for j in segs],
            "tan": [(j, self.tan[j].copy()) for j in verts],
            "kappa": [(j, self.kappa[j]) for j in verts],
            "rowmin": self.rowmin.copy(),
            "vert_s": self.vert_s.copy(),
            "ring_lengths": self.ring_lengths.copy(),
        }
        self.pos[flat] = new_pos
        for j in segs:
            nj = self.neighbors(j, 1)
            self._dirs[j] = self.pos[nj] - self.pos[j]
            self._len[j] = np.linalg.norm(self._dirs[j])
            self._len2[j] = self._len[j] ** 2
        for j in verts:
            a = self.pos[self.neighbors(j, -1)]
            b = self.pos[j]
            cpt = self.pos[self.neighbors(j, 1)]
            tj, _ = circumcircle_tangents(a[None], b[None], cpt[None],
                                          defaults.COLLINEAR_FACTOR)
            self.tan[j] = tj[0]
            self.kappa[j] = circumradius_curvature(a[None], b[None], cpt[None])[0]
        self.vert_s, self.ring_lengths, _ = self.arc_positions()
        for j in segs:
            contrib = self._row(j)
            self.rowmin[j] = contrib.min()
            np.minimum(self.rowmin, contrib, out=self.rowmin)

        def undo():
            self.pos[saved["pos"][0]] = saved["pos"][1]
            for j, v in saved["dirs"]:
                self._dirs[j] = v
            for j, v in saved["len"]:
                self._len[j] = v
                self._len2[j] = v * v
            for j, v in saved["tan"]:
                self.tan[j] = v
            for j, v in saved["kappa"]:
                self.kappa[j] = v
            self.rowmin = saved["rowmin"]
            self.vert_s = saved["vert_s"]
            self.ring_lengths = saved["ring_lengths"]

        return undo

    def rescale(self, factor, center):
        self.pos = center + factor * (self.pos - center)
        self._dirs *= factor
        self._len *= factor
        self._len2 = self._len**2
        self.kappa /= factor
        self.rowmin *= factor
        self.vert_s *= factor
        self.ring_lengths *= factor
        self.window *= factor

    # metrics --------------------------------------------------------------
    def total_length(self):
        return float(self._len.sum())

    def thickness_estimate(self):
        k = float(self.kappa.max())
        focal = math.inf if k == 0 else 1.0 / k
        half_mdc = 0.5 * float(self.rowmin.min())
        if focal <= half_mdc:
            return focal, "focal"
        return half_mdc, "doubly_critical"

    def objective(self):
        t, feature = self.thickness_estimate()
        if not (t > 0 and math.isfinite(t)):
            return math.inf, t, feature
        return self.total_length() / t, t, feature

    def curve(self, validate=False):
        rings = [self.pos[self.ring_slice(c)] for c in range(len(self.sizes))]
        return self.template.with_positions(rings, validate=validate)

    def embedded_after_vertex_move(self, flat, tol):
        """Check the moved segments against all nonadjacent segments."""
        segs, _ = self.affected_by_vertex(flat)
        js = np.arange(self.m)
        for i in (self.neighbors(flat, -1), flat):
            mask = ~adjacent_segment_mask(self.template,
                                          np.full(self.m, i, dtype=np.intp), js)
            mask[i] = False
            sel = js[mask]
            d = segment_pairs_min_dist(
                np.broadcast_to(self.pos[i], (len(sel), self.dim)),
                np.broadcast_to(self._dirs[i], (len(sel), self.dim)),
                np.broadcast_to(self._len2[i], (len(sel),)),
                self.pos[sel], self._dirs[sel], self._len2[sel],
            )
            if d.min() <= tol:
                return False
        return True

    def embedded_full(self, tol):
        for i_idx, j_idx in nonadjacent_pair_chunks(self.template):
            d = segment_pairs_min_dist(
                self.pos[i_idx], self._dirs[i_idx], self._len2[i_idx],
                self.pos[j_idx], self._dirs[j_idx], self._len2[j_idx])
            if d.min() <= tol:
                return False
        return True


def tighten(start, config=None):
    """Descend ropelength = length / thickness at fixed total length.

    Returns a TightenTrace; every accepted step is embedded and isotopic to
    its predecessor (class safety by construction).
    """
    if config is None:
        config = TightenConfig()
    start_report = thickness(start)
    if not (start_report.thickness > 0
            and math.isfinite(start_report.thickness)):
        raise ZeroThicknessStart(
            f"starting thickness {start_report.thickness} is not positive")

    rng = np.random.default_rng(config.seed)
    state = _State(start, start.verts)
    target_length = state.total_length()
    tol = defaults.SELF_INTERSECT_TOL * start.bbox_diag
    obj, th, feature = state.objective()
    scale = config.step_scale
    records = []
    accepted = 0
    prev_curve = state.curve(validate=False)

    for it in range(config.steps):
        bump_move = (it + 1) % config.bump_every == 0
        if bump_move:
            mode = int(rng.integers(1, 7))
            phase = float(rng.uniform(0.0, 2.0 * np.pi))
            mag = abs(float(rng.standard_normal()))
            comp = int(rng.integers(0, len(state.sizes)))
            undo, kind = _apply_bump(state, comp, mode, phase,
                                     0.5 * mag * scale * th), "bump"
            cheap_embedded = state.embedded_full(tol)
        else:
            comp = int(rng.integers(0, len(state.sizes)))
            vert = state.offsets[comp] + int(rng.integers(0, state.sizes[comp]))
            raw = rng.standard_normal(state.dim)
            mag = abs(float(rng.standard_normal()))
            t = state.tan[vert]
            normal = raw - t * float(t @ raw)
            norm = np.linalg.norm(normal)
            if norm < 1e-12:
                normal = np.zeros_like(t)
                norm = 1.0
            step_vec = (mag * scale * th / norm) * normal
            undo = state.apply_vertex_move(vert, state.pos[vert] + step_vec)
            kind = "vertex"
            cheap_embedded = state.embedded_after_vertex_move(vert, tol)

        new_obj, new_th, new_feature = state.objective()
        metro = float(rng.random())
        better = new_obj < obj
        if config.temperature > 0 and not better and math.isfinite(new_obj):
            rel = (new_obj - obj) / max(abs(obj), 1e-300)
            better = metro < math.exp(-rel / config.temperature)

        ok = better and cheap_embedded and math.isfinite(new_obj)
        verdict = None
        if ok:
            cand = state.curve(validate=False)
            chk = isotopy_check(prev_curve, cand, suggested_rho(th),
                                frames=config.isotopy_frames)
            verdict = chk.verdict
            ok = chk.isotopic

        if ok:
            accepted += 1
            # renormalize to the original total length about the centroid
            factor = target_length / state.total_length()
            center = state.pos.mean(axis=0)
            state.rescale(factor, center)
            prev_curve = state.curve(validate=False)
            obj, th, feature = state.objective()
            if accepted % config.batch == 0:
                scale *= config.cooling
            if accepted % config.refresh_every == 0:
                state.refresh()
                obj, th, feature = state.objective()
        else:
            undo()

        records.append({
            "iteration": it,
            "kind": kind,
            "accepted": bool(ok),
            "objective": obj,
            "thickness": th,
            "attaining_feature": feature,
            "isotopy": verdict,
            "step_scale": scale,
        })

    final_curve = state.curve(validate=True)
    final_report = thickness(final_curve)
    return TightenTrace(
        records=tuple(records),
        final_curve=final_curve,
        final_report=final_report,
        accepted=accepted,
        config=config,
    )


def _apply_bump(state, comp, mode, phase, amplitude):
    """Low-frequency normal-field displacement of one whole ring."""
    sl = state.ring_slice(comp)
    saved_pos = state.pos[sl].copy()
    saved = {
        "dirs": state._dirs.copy(), "len": state._len.copy(),
        "len2": state._len2.copy(), "tan": state.tan.copy(),
        "kappa": state.kappa.copy(), "rowmin": state.rowmin.copy(),
        "vert_s": state.vert_s.copy(),
        "ring_lengths": state.ring_lengths.copy(),
    }
    s = state.vert_s[sl]
    length = state.ring_lengths[comp]
    field = amplitude * np.cos(2.0 * np.pi * mode * s / length + phase)
    t = state.tan[sl]
    if state.dim == 2:
        normal = np.column_stack([-t[:, 1], t[:, 0]])
    else:
        ref = np.zeros(state.dim)
        ref[state.dim - 1] = 1.0
        normal = ref[None, :] - t * (t @ ref)[:, None]
        nn = np.linalg.norm(normal, axis=1, keepdims=True)
        normal = np.where(nn > 1e-12, normal / np.where(nn > 0, nn, 1.0), 0.0)
    state.pos[sl] = saved_pos + field[:, None] * normal
    state.refresh()

    def undo():
        state.pos[sl] = saved_pos
        state._dirs = saved["dirs"]
        state._len = saved["len"]
        state._len2 = saved["len2"]
        state.tan = saved["tan"]
        state.kappa = saved["kappa"]
        state.rowmin = saved["rowmin"]
        state.vert_s = saved["vert_s"]
        state.ring_lengths = saved["ring_lengths"]

    return undo
