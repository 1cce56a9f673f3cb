"""Parametric test curves and patches.

All generators are deterministic; the random ones take an explicit seed.
"""

from __future__ import annotations

import numpy as np

from .curve import build_curve, estimate_tangents


def circle(n=1000, radius=1.0, center=(0.0, 0.0), dim=2):
    """Regular n-gon inscribed in a circle, optionally embedded in R^dim."""
    ts = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    pts = np.zeros((n, dim))
    pts[:, 0] = center[0] + radius * np.cos(ts)
    pts[:, 1] = center[1] + radius * np.sin(ts)
    return build_curve(pts, dim)


def ellipse(n=4000, a=2.0, b=1.0):
    ts = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    pts = np.column_stack([a * np.cos(ts), b * np.sin(ts)])
    return build_curve(pts, 2)


def stadium(n=2000, radius=1.0, flat=4.0):
    """Two flats of the given length joined by semicircular caps.

    Flats sit at y = +-radius for |x| <= flat/2; cap centers at (+-flat/2, 0).
    Vertices are spaced uniformly in arclength.
    """
    half = flat / 2.0
    perim = 2.0 * np.pi * radius + 2.0 * flat
    s = np.linspace(0.0, perim, n, endpoint=False)
    pts = np.empty((n, 2))
    for i, si in enumerate(s):
        if si < flat:  # top flat, right to left
            pts[i] = (half - si, radius)
        elif si < flat + np.pi * radius:  # left cap
            a = (si - flat) / radius
            pts[i] = (-half - radius * np.sin(a), radius * np.cos(a))
        elif si < 2.0 * flat + np.pi * radius:  # bottom flat, left to right
            pts[i] = (-half + (si - flat - np.pi * radius), -radius)
        else:  # right cap
            a = (si - 2.0 * flat - np.pi * radius) / radius
            pts[i] = (half + radius * np.sin(a), -radius * np.cos(a))
    return build_curve(pts, 2)


def rounded_rectangle(n=2000, width=2.0, height=1.0, corner=0.5):
    """Axis-aligned rectangle with quarter-circle corners of the given radius."""
    w = width / 2.0 - corner
    h = height / 2.0 - corner
    if w < 0 or h < 0:
        raise ValueError("corner radius too large")
    flat_x, flat_y = 2.0 * w, 2.0 * h
    quarter = 0.5 * np.pi * corner
    perim = 2.0 * (flat_x + flat_y) + 4.0 * quarter
    s = np.linspace(0.0, perim, n, endpoint=False)
    pts = np.empty((n, 2))
    marks = np.cumsum([flat_x, quarter, flat_y, quarter,
                       flat_x, quarter, flat_y, quarter])
    for i, si in enumerate(s):
        if si < marks[0]:        # top flat, right to left
            pts[i] = (w - si, h + corner)
        elif si < marks[1]:      # top-left corner
            a = (si - marks[0]) / corner
            pts[i] = (-w - corner * np.sin(a), h + corner * np.cos(a))
        elif si < marks[2]:      # left flat, top to bottom
            pts[i] = (-w - corner, h - (si - marks[1]))
        elif si < marks[3]:      # bottom-left corner
            a = (si - marks[2]) / corner
            pts[i] = (-w - corner * np.cos(a), -h - corner * np.sin(a))
        elif si < marks[4]:      # bottom flat, left to right
            pts[i] = (-w + (si - marks[3]), -h - corner)
        elif si < marks[5]:      # bottom-right corner
            a = (si - marks[4]) / corner
            pts[i] = (w + corner * np.sin(a), -h - corner * np.cos(a))
        elif si < marks[6]:      # right flat, bottom to top
            pts[i] = (w + corner, -h + (si - marks[5]))
        else:                    # top-right corner
            a = (si - marks[6]) / corner
            pts[i] = (w + corner * np.cos(a), h + corner * np.sin(a))
    return build_curve(pts, 2)


def concentric_circles(n_inner=500, n_outer=1500, r_inner=1.0, r_outer=3.0):
    t1 = np.linspace(0.0, 2.0 * np.pi, n_inner, endpoint=False)
    t2 = np.linspace(0.0, 2.0 * np.pi, n_outer, endpoint=False)
    inner = r_inner * np.column_stack([np.cos(t1), np.sin(t1)])
    outer = r_outer * np.column_stack([np.cos(t2), np.sin(t2)])
    return build_curve([inner, outer], 2)


def trefoil(n=600):
    """Standard (2,3) torus-curve polyline."""
    ts = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    x = (2.0 + np.cos(3.0 * ts)) * np.cos(2.0 * ts)
    y = (2.0 + np.cos(3.0 * ts)) * np.sin(2.0 * ts)
    z = np.sin(3.0 * ts)
    return build_curve(np.column_stack([x, y, z]), 3)


def radial_wave_circle(n=1000, amplitude=0.05, frequency=8, phase=0.0,
                       radius=1.0):
    """Circle with a radial cosine bump: r(theta) = radius + amp cos(f theta + phase)."""
    ts = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    r = radius + amplitude * np.cos(frequency * ts + phase)
    return build_curve(np.column_stack([r * np.cos(ts), r * np.sin(ts)]), 2)


def reparametrized_circle(n=1000, amplitude=0.05, frequency=8, phase=0.0,
                          radius=1.0):
    """Unit-speed circle resampled with tangential (parameter) noise."""
    ts = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    ts = ts + (amplitude / max(frequency, 1)) * np.sin(frequency * ts + phase)
    return build_curve(
        radius * np.column_stack([np.cos(ts), np.sin(ts)]), 2
    )


def random_trig_curve(seed, n=2000, degree=5, scale=0.18):
    """Seeded closed planar curve r(theta) = 1 + sum of trig terms up to `degree`.

    Coefficients decay like 1/k^2 and the total radial excursion is capped so
    the curve stays star-shaped (hence embedded) with moderate curvature.
    """
    rng = np.random.default_rng(seed)
    for _ in range(64):
        a = rng.normal(size=degree) / (1.0 + np.arange(1, degree + 1)) ** 2
        b = rng.normal(size=degree) / (1.0 + np.arange(1, degree + 1)) ** 2
        total = np.sum(np.abs(a)) + np.sum(np.abs(b))
        if total == 0.0:
            continue
        a *= scale / total
        b *= scale / total
        ts = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        r = np.ones_like(ts)
        for k in range(1, degree + 1):
            r += a[k - 1] * np.cos(k * ts) + b[k - 1] * np.sin(k * ts)
        if r.min() <= 0.3:
            continue
        pts = np.column_stack([r * np.cos(ts), r * np.sin(ts)])
        try:
            return build_curve(pts, 2)
        except ValueError:
            continue
    raise RuntimeError(f"could not draw an embedded curve for seed {seed}")


def normal_perturbation(curve, seed, amplitude, modes=4):
    """Curve displaced along estimated normals by a smooth random field.

    The field is a low-frequency trig mix per component with sup <= amplitude.
    In R^2 the normal is the rotated tangent; in higher dimensions a random
    (seeded) unit combination of the normal basis is used per mode.
    """
    rng = np.random.default_rng(seed)
    tf = estimate_tangents(curve)
    rings = []
    for c, ring in enumerate(curve.components):
        n = len(ring)
        length = curve.ring_length(c)
        s = curve.cum_s[c][:-1]
        field = np.zeros(n)
        coef = rng.normal(size=2 * modes)
        for k in range(1, modes + 1):
            w = 2.0 * np.pi * k / length
            field += coef[2 * k - 2] * np.cos(w * s) + coef[2 * k - 1] * np.sin(w * s)
        peak = np.max(np.abs(field))
        if peak > 0:
            field *= amplitude / peak
        t = tf.vectors[c]
        if curve.dim == 2:
            normal = np.column_stack([-t[:, 1], t[:, 0]])
        else:
            raw = rng.normal(size=curve.dim)
            normal = raw[None, :] - t * (t @ raw)[:, None]
            nn = np.linalg.norm(normal, axis=1, keepdims=True)
            normal = np.where(nn > 1e-12, normal / np.where(nn > 0, nn, 1.0), 0.0)
        rings.append(ring + field[:, None] * normal)
    return build_curve(rings, curve.dim)
