import math

import numpy as np
import pytest

import curvethick as ct
from curvethick import fixtures

from test_curve import rigid_motion


def brute_force_ellipse_critical_chords(a=2.0, b=1.0, n=2400):
    """Independent oracle: scan parameter pairs of the analytic ellipse for
    chords perpendicular to both analytic tangents (coarse grid + refinement
    by local minimization of the residual)."""
    ts = np.linspace(0, 2 * np.pi, n, endpoint=False)
    p = np.column_stack([a * np.cos(ts), b * np.sin(ts)])
    tan = np.column_stack([-a * np.sin(ts), b * np.cos(ts)])
    tan /= np.linalg.norm(tan, axis=1, keepdims=True)
    lengths = []
    for i in range(0, n, 8):
        chord = p - p[i]
        c2 = np.einsum("ij,ij->i", chord, chord)
        ok = c2 > 1e-6
        r1 = np.abs(np.einsum("ij,j->i", chord, tan[i])) / np.sqrt(np.where(ok, c2, 1))
        r2 = np.abs(np.einsum("ij,ij->i", chord, tan)) / np.sqrt(np.where(ok, c2, 1))
        hit = ok & (r1 < 5e-3) & (r2 < 5e-3)
        lengths.extend(np.sqrt(c2[hit]).tolist())
    return np.array(lengths)


class TestCurvature:
    def test_unit_circle(self):
        assert ct.sup_curvature(fixtures.circle(1000)) == pytest.approx(1.0, abs=1e-5)

    def test_ellipse_sup_curvature_is_a_over_b2(self):
        # analytic sup of ellipse curvature: a / b^2 at the major vertices
        assert ct.sup_curvature(fixtures.ellipse(4000, 2, 1)) == pytest.approx(
            2.0, abs=1e-3)

    def test_stadium_flats_contribute_zero(self):
        c = fixtures.stadium(4000)
        assert ct.sup_curvature(c) == pytest.approx(1.0, abs=1e-4)

    def test_focal_distance_values(self):
        assert ct.focal_distance(fixtures.circle(1000)) == pytest.approx(1.0, abs=1e-5)
        assert ct.focal_distance(fixtures.ellipse(4000)) == pytest.approx(0.5, abs=3e-4)
        assert ct.focal_distance(fixtures.circle(1000, radius=3.0)) == pytest.approx(
            3.0, abs=1e-4)


class TestDoubleCriticalPairs:
    def test_circle_pairs_are_antipodal(self):
        pairs = ct.find_double_critical_pairs(fixtures.circle(1000))
        assert len(pairs) > 100
        lens = np.array([p.chord_length for p in pairs])
        assert np.abs(lens - 2.0).max() < 1e-4

    def test_ellipse_has_exactly_two_chord_lengths(self):
        pairs = ct.find_double_critical_pairs(fixtures.ellipse(4000))
        lens = np.array(sorted(p.chord_length for p in pairs))
        clusters = [lens[0]]
        for x in lens[1:]:
            if x - clusters[-1] > 0.05:
                clusters.append(x)
        assert np.allclose(clusters, [2.0, 4.0], atol=1e-3)
        # cross-check against the analytic brute-force scan
        brute = brute_force_ellipse_critical_chords()
        assert brute.min() == pytest.approx(2.0, abs=1e-2)
        assert brute.max() == pytest.approx(4.0, abs=1e-2)
        assert not ((brute > 2.1) & (brute < 3.9)).any()

    def test_concentric_circle_chords(self):
        pairs = ct.find_double_critical_pairs(fixtures.concentric_circles())
        by_kind = {}
        for p in pairs:
            key = (min(p.coord_p.component, p.coord_q.component),
                   max(p.coord_p.component, p.coord_q.component))
            by_kind.setdefault(key, []).append(p.chord_length)
        # cross-component chords are radial at both ends: same angle (gap
        # chord, length 2) or antipodal through the center (length 4)
        cross = np.array(by_kind[(0, 1)])
        assert np.abs(np.minimum(np.abs(cross - 2.0), np.abs(cross - 4.0))).max() < 1e-3
        assert cross.min() == pytest.approx(2.0, abs=1e-3)
        assert np.allclose(by_kind[(0, 0)], 2.0, atol=1e-3)   # inner diameter
        assert np.allclose(by_kind[(1, 1)], 6.0, atol=1e-3)   # outer diameter

    def test_residuals_within_tolerance(self):
        pairs = ct.find_double_critical_pairs(fixtures.ellipse(1000))
        for p in pairs:
            assert max(p.residual_angles) <= 1e-3

    def test_mdc_values(self):
        assert ct.mdc(fixtures.circle(1000)) == pytest.approx(2.0, abs=1e-4)
        assert ct.mdc(fixtures.ellipse(4000)) == pytest.approx(2.0, abs=1e-3)
        assert ct.mdc(fixtures.concentric_circles()) == pytest.approx(2.0, abs=1e-3)


class TestThicknessFormula:
    def test_circle(self):
        rep = ct.thickness(fixtures.circle(1000))
        assert rep.thickness == pytest.approx(1.0, abs=1e-4)
        assert rep.focal_distance == pytest.approx(1.0, abs=1e-4)
        assert rep.mdc / 2 == pytest.approx(1.0, abs=1e-4)
        # tie between the two terms is reported as doubly critical
        assert rep.attaining_feature == "doubly_critical"

    def test_ellipse_focal_dichotomy(self):
        rep = ct.thickness(fixtures.ellipse(4000))
        assert rep.thickness == pytest.approx(0.5, rel=1e-2)
        assert rep.attaining_feature == "focal"
        assert rep.mdc == pytest.approx(2.0, rel=1e-2)

    def test_stadium(self):
        rep = ct.thickness(fixtures.stadium(2000))
        assert rep.thickness == pytest.approx(1.0, abs=1e-4)

    def test_ordering_invariant(self):
        for c in (fixtures.circle(500), fixtures.ellipse(1000),
                  fixtures.trefoil(400), fixtures.random_trig_curve(5, n=800)):
            rep = ct.thickness(c)
            assert rep.thickness <= rep.focal_distance
            assert rep.thickness <= rep.mdc / 2
            assert rep.thickness == min(rep.focal_distance, rep.mdc / 2)

    def test_scaling(self):
        base = fixtures.random_trig_curve(2, n=600)
        t0 = ct.thickness(base).thickness
        for lam in (0.5, 2.0, 10.0):
            t = ct.thickness(base.scaled(lam)).thickness
            assert t == pytest.approx(lam * t0, rel=1e-9)

    def test_rigid_invariance(self):
        rng = np.random.default_rng(7)
        base = fixtures.random_trig_curve(4, n=600)
        t0 = ct.thickness(base).thickness
        for _ in range(3):
            q, shift = rigid_motion(rng, 2)
            t = ct.thickness(base.transformed(rotation=q, translation=shift)).thickness
            assert t == pytest.approx(t0, rel=1e-9)

    def test_report_roundtrip(self):
        rep = ct.thickness(fixtures.ellipse(500), oracle="ball")
        back = ct.ThicknessReport.from_dict(rep.to_dict())
        assert back == rep

    def test_chord_length_lower_bound(self):
        # chord(s) >= sin(s C)/C - discretization margin, s in (0, pi/(2C)]
        for c in (fixtures.circle(800), fixtures.ellipse(1500),
                  fixtures.trefoil(900)):
            k = ct.sup_curvature(c)
            ring = c.components[0]
            s = c.cum_s[0][:-1]
            margin = 2.0 * float(c.seg_len.max())
            for i in range(0, len(ring), max(1, len(ring) // 40)):
                arc = np.abs(s - s[i])
                arc = np.minimum(arc, c.ring_length(0) - arc)
                sel = (arc > 0) & (arc <= np.pi / (2 * k))
                chord = np.linalg.norm(ring[sel] - ring[i], axis=1)
                assert (chord >= np.sin(arc[sel] * k) / k - margin).all()


class TestOracles:
    def test_circle_rolling_ball(self):
        c = fixtures.circle(1000)
        spec = ct.default_sample_spec(c, 1.0)
        v = ct.rolling_ball_oracle(c, spec)
        assert v == pytest.approx(1.0, abs=5e-3)

    def test_ellipse_rolling_ball(self):
        c = fixtures.ellipse(4000)
        spec = ct.default_sample_spec(c, 0.5)
        assert ct.rolling_ball_oracle(c, spec) == pytest.approx(0.5, abs=5e-3)

    def test_concentric_rolling_ball(self):
        c = fixtures.concentric_circles()
        spec = ct.default_sample_spec(c, 1.0)
        assert ct.rolling_ball_oracle(c, spec) == pytest.approx(1.0, abs=5e-3)

    def test_cut_value_circle_directions(self):
        c = fixtures.circle(1000)
        spec = ct.default_sample_spec(c, 1.0)
        coord = ct.vertex_coordinate(c, 0, 0)
        inward = -c.verts[0] / np.linalg.norm(c.verts[0])
        assert ct.normal_cut_value(c, coord, inward, spec) == pytest.approx(
            1.0, abs=5e-3)
        # outward ray never re-meets the curve: contributes the bracket top
        assert ct.normal_cut_value(c, coord, -inward, spec) == spec.radius_bracket[1]

    def test_cut_value_ellipse_major_vertex(self):
        c = fixtures.ellipse(4000)
        spec = ct.default_sample_spec(c, 0.5)
        coord = ct.vertex_coordinate(c, 0, 0)  # vertex at (2, 0)
        assert ct.normal_cut_value(c, coord, np.array([-1.0, 0.0]), spec) == \
            pytest.approx(0.5, abs=5e-3)

    def test_cut_value_stadium_flat_midpoint(self):
        c = fixtures.stadium(2000)
        spec = ct.default_sample_spec(c, 1.0)
        top = int(np.argmin(np.abs(c.verts[:, 0]) + np.abs(c.verts[:, 1] - 1.0)))
        coord = ct.vertex_coordinate(c, 0, top)
        assert ct.normal_cut_value(c, coord, np.array([0.0, -1.0]), spec) == \
            pytest.approx(1.0, abs=5e-3)

    def test_cut_value_oracle_matches_formula(self):
        c = fixtures.circle(1000)
        spec = ct.default_sample_spec(c, 1.0)
        assert ct.cut_value_oracle(c, spec) == pytest.approx(1.0, abs=5e-3)

    def test_bracket_miss(self):
        c = fixtures.circle(500)
        low = ct.NormalSampleSpec(2, (3.0, 4.0), 1e-4)
        with pytest.raises(ct.BracketMiss):
            ct.rolling_ball_oracle(c, low)
        below = ct.NormalSampleSpec(2, (0.01, 0.02), 1e-4)
        with pytest.raises(ct.BracketMiss):
            ct.rolling_ball_oracle(c, below)

    def test_theorem_equivalence_band(self):
        # |oracle - min(F_g, MDC/2)| <= 10 (bisection tol + discretization)
        for c in (fixtures.circle(1000), fixtures.stadium(2000),
                  fixtures.random_trig_curve(1, n=1500)):
            rep = ct.thickness(c, oracle="both")
            spec = ct.default_sample_spec(c, rep.thickness)
            disc = float(c.seg_len.max()) ** 2 * rep.sup_curvature
            band = 10.0 * (spec.bisection_tolerance + disc)
            assert abs(rep.oracle_rolling_ball - rep.thickness) <= band
            assert abs(rep.oracle_cut_value - rep.thickness) <= band + \
                0.01 * rep.thickness

    def test_deterministic_across_threads(self):
        c = fixtures.random_trig_curve(9, n=800)
        rep1 = ct.thickness(c, oracle="both", threads=1)
        rep2 = ct.thickness(c, oracle="both", threads=4)
        assert rep1.oracle_rolling_ball == rep2.oracle_rolling_ball
        assert rep1.oracle_cut_value == rep2.oracle_cut_value
        assert rep1.mdc == rep2.mdc


class TestSemicontinuity:
    """Thickness is upper and MDC lower semicontinuous under C^1 perturbation."""

    def test_thickness_upper_semicontinuous(self):
        base = fixtures.circle(1000)
        t0 = ct.thickness(base).thickness
        tail = []
        for j in range(24, 33):
            kj = fixtures.radial_wave_circle(1000, amplitude=0.05 / j, frequency=8)
            tail.append(ct.thickness(kj).thickness)
        band = 3 * (0.05 / 24) + 1e-4
        assert max(tail) <= t0 + band

    def test_mdc_lower_semicontinuous(self):
        base = fixtures.circle(1000)
        m0 = ct.mdc(base)
        tail = []
        for j in range(24, 33):
            kj = fixtures.radial_wave_circle(1000, amplitude=0.05 / j, frequency=8)
            tail.append(ct.mdc(kj))
        band = 3 * (0.05 / 24) + 1e-4
        assert min(tail) >= m0 - band
