import json

import numpy as np
import pytest

import curvethick as ct
from curvethick import fixtures, io


def rigid_motion(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    q *= np.sign(np.diag(r))
    shift = rng.normal(size=dim)
    return q, shift


class TestBuildCurve:
    def test_ngon_perimeter(self):
        c = fixtures.circle(1000)
        assert c.total_length == pytest.approx(2000 * np.sin(np.pi / 1000), rel=1e-12)

    def test_perimeter_second_order_convergence(self):
        errs = []
        for n in (250, 500, 1000):
            errs.append(2 * np.pi - fixtures.circle(n, radius=1.0).total_length)
        # halving h divides the error by about 4
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
        assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)

    def test_repeated_vertex_rejected(self):
        square = np.array([[0.0, 0], [1, 0], [1, 0], [1, 1], [0, 1]])
        with pytest.raises(ct.DegenerateSegment):
            ct.build_curve(square)

    def test_crossing_segments_rejected(self):
        bowtie = np.array([[0.0, 0], [2, 2], [2, 0], [0, 2]])
        with pytest.raises(ct.SelfIntersection):
            ct.build_curve(bowtie)

    def test_too_few_vertices(self):
        with pytest.raises(ct.TooFewVertices):
            ct.build_curve(np.array([[0.0, 0], [1, 0], [0, 1]]))

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ct.OutOfRange):
            ct.build_curve([np.zeros((5, 2)) + np.arange(5)[:, None]], dim=3)

    def test_components_are_immutable(self):
        c = fixtures.circle(16)
        with pytest.raises(ValueError):
            c.components[0][0, 0] = 7.0


class TestTangents:
    def test_circle_tangents_match_analytic(self):
        c = fixtures.circle(200)
        tf = ct.estimate_tangents(c)
        # vertices of a circle triple lie on the circle itself, so the
        # circumscribed-circle tangent is exact up to roundoff
        radial = np.abs(np.einsum("ij,ij->i", tf.flat, c.verts))
        assert radial.max() < 1e-12

    def test_ellipse_tangents_match_analytic(self):
        n, a, b = 2000, 2.0, 1.0
        c = fixtures.ellipse(n, a, b)
        tf = ct.estimate_tangents(c)
        ts = np.linspace(0, 2 * np.pi, n, endpoint=False)
        exact = np.column_stack([-a * np.sin(ts), b * np.cos(ts)])
        exact /= np.linalg.norm(exact, axis=1, keepdims=True)
        dots = np.clip(np.einsum("ij,ij->i", tf.flat, exact), -1, 1)
        assert np.arccos(dots).max() < 1e-5

    def test_collinear_fallback_on_flat(self):
        c = fixtures.stadium(2000)
        tf = ct.estimate_tangents(c)
        # vertices well inside the top flat: tangent is exactly the edge direction
        on_flat = (np.abs(c.verts[:, 1] - 1.0) < 1e-12) & (np.abs(c.verts[:, 0]) < 1.5)
        idx = np.flatnonzero(on_flat)[1:-1]
        assert len(idx) > 10
        assert np.allclose(np.abs(tf.flat[idx, 0]), 1.0, atol=1e-15)
        assert np.allclose(tf.flat[idx, 1], 0.0, atol=1e-15)

    def test_unit_norm_and_orientation(self):
        c = fixtures.trefoil(500)
        tf = ct.estimate_tangents(c)
        assert np.abs(np.linalg.norm(tf.flat, axis=1) - 1.0).max() < 1e-12
        ring = c.components[0]
        fwd = np.roll(ring, -1, axis=0) - np.roll(ring, 1, axis=0)
        assert (np.einsum("ij,ij->i", tf.flat, fwd) > 0).all()

    def test_equivariance_under_rigid_motion(self):
        rng = np.random.default_rng(3)
        c = fixtures.ellipse(300)
        q, shift = rigid_motion(rng, 2)
        moved = c.transformed(rotation=q, translation=shift)
        t0 = ct.estimate_tangents(c).flat @ q.T
        t1 = ct.estimate_tangents(moved).flat
        assert np.abs(t0 - t1).max() < 1e-12


class TestPointAt:
    def test_endpoints_and_midpoint(self):
        ring = np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]])
        c = ct.build_curve(ring)
        assert np.allclose(ct.point_at(c, ct.ArcCoordinate(0, 1, 0.0, 1.0)), [1, 0])
        assert np.allclose(ct.point_at(c, ct.ArcCoordinate(0, 0, 0.5, 0.5)), [0.5, 0])

    def test_halfway_is_antipode(self):
        n = 1000
        c = fixtures.circle(n)
        coord = ct.arc_coordinate(c, 0, c.ring_length(0) / 2)
        p = ct.point_at(c, coord)
        # antipode of the starting vertex (1, 0), up to O(1/N^2)
        assert np.linalg.norm(p - np.array([-1.0, 0.0])) < 10.0 / n**2

    def test_out_of_range(self):
        c = fixtures.circle(10)
        with pytest.raises(ct.OutOfRange):
            ct.point_at(c, ct.ArcCoordinate(0, 10, 0.0, 0.0))
        with pytest.raises(ct.OutOfRange):
            ct.point_at(c, ct.ArcCoordinate(0, 0, 1.5, 0.0))
        with pytest.raises(ct.OutOfRange):
            ct.arc_coordinate(c, 0, -0.1)

    def test_one_lipschitz_in_arclength(self):
        rng = np.random.default_rng(11)
        c = fixtures.trefoil(300)
        length = c.ring_length(0)
        s = rng.uniform(0, length, size=60)
        pts = [ct.point_at(c, ct.arc_coordinate(c, 0, si)) for si in s]
        for i in range(0, 60, 2):
            gap = np.linalg.norm(pts[i] - pts[i + 1])
            arc = abs(s[i] - s[i + 1])
            assert gap <= min(arc, length - arc) + 1e-12


class TestIO:
    def test_json_roundtrip(self, tmp_path):
        c = fixtures.concentric_circles(64, 128)
        path = tmp_path / "curve.json"
        io.save_curve(c, path)
        back = io.load_curve(path)
        assert back.dim == c.dim
        assert back.n_components == 2
        for a, b in zip(back.components, c.components):
            assert np.array_equal(a, b)

    def test_csv_roundtrip(self, tmp_path):
        c = fixtures.concentric_circles(64, 128)
        path = tmp_path / "curve.csv"
        io.save_curve(c, path)
        back = io.load_curve(path)
        assert back.n_components == 2
        for a, b in zip(back.components, c.components):
            assert np.array_equal(a, b)

    def test_csv_dim_inferred(self, tmp_path):
        c = fixtures.trefoil(100)
        path = tmp_path / "t.csv"
        io.save_curve(c, path)
        assert io.load_curve(path).dim == 3

    def test_unbounded_encoding(self):
        assert io.encode_float(float("inf")) == "unbounded"
        assert io.decode_float("unbounded") == float("inf")
        assert json.loads(json.dumps({"x": io.encode_float(2.5)}))["x"] == 2.5
