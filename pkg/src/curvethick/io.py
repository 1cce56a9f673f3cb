"""Curve and patch file formats.

Curve JSON: {"dim": n, "components": [[[x1, ..., xn], ...], ...]}.
Curve CSV: one vertex per row, a blank row separates components; the ambient
dimension is inferred from the column count.

Infinite values are serialized as the JSON string "unbounded" so that min()
semantics survive the round trip exactly.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .curve import build_curve


def encode_float(x):
    if x is None:
        return None
    if math.isinf(x):
        return "unbounded"
    return float(x)


def decode_float(x):
    if x is None:
        return None
    if x == "unbounded":
        return math.inf
    return float(x)


def curve_to_dict(curve):
    return {
        "dim": curve.dim,
        "components": [np.asarray(r).tolist() for r in curve.components],
    }


def curve_from_dict(d):
    return build_curve([np.asarray(r, dtype=float) for r in d["components"]],
                       int(d["dim"]))


def save_curve(curve, path):
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for c, ring in enumerate(curve.components):
                if c > 0:
                    w.writerow([])
                for row in np.asarray(ring):
                    w.writerow([repr(float(x)) for x in row])
    else:
        with open(path, "w") as fh:
            json.dump(curve_to_dict(curve), fh)
            fh.write("\n")


def load_curve(path):
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _load_curve_csv(path.read_text())
    with open(path) as fh:
        return curve_from_dict(json.load(fh))


def _load_curve_csv(text):
    rings = []
    current = []
    for row in csv.reader(_io.StringIO(text)):
        if not row or all(not cell.strip() for cell in row):
            if current:
                rings.append(np.asarray(current, dtype=float))
                current = []
            continue
        current.append([float(x) for x in row])
    if current:
        rings.append(np.asarray(current, dtype=float))
    return build_curve(rings)


def patch_to_dict(patch):
    return {
        "k": patch.k,
        "m": patch.m,
        "origin": np.asarray(patch.origin).tolist(),
        "spacing": patch.spacing,
        "shape": list(patch.shape),
        "values": np.asarray(patch.values).tolist(),
        "jacobian": np.asarray(patch.jacobian).tolist(),
        "grad_bound": patch.grad_bound,
        "lipschitz_bound": patch.lipschitz_bound,
    }


def patch_from_dict(d):
    from .patch import GraphPatch

    return GraphPatch(
        k=int(d["k"]),
        m=int(d["m"]),
        origin=np.asarray(d["origin"], dtype=float),
        spacing=float(d["spacing"]),
        shape=tuple(int(x) for x in d["shape"]),
        values=np.asarray(d["values"], dtype=float),
        jacobian=np.asarray(d["jacobian"], dtype=float),
        grad_bound=float(d["grad_bound"]),
        lipschitz_bound=float(d["lipschitz_bound"]),
    )


def save_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)
