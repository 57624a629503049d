# SPDX-License-Identifier: AGPL-3.0-only
import math

import attr
import numpy as np

from unfold.errors import (
    DegenerateGeometry,
    DegenerateLayout,
    DimensionMismatch,
    NoIncidentPairs,
)

EPS = 1e-12


def _coords(layout):
    return np.asarray(getattr(layout, "coords", layout), dtype=float)


def _sign(values, tol):
    s = np.sign(values)
    s[np.abs(values) <= tol] = 0
    return s


def _orient(a, b, c):
    return ((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
            - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0]))


def crossing_pairs(g, layout):
    """
    Returns the ``(i, j)`` edge index pairs, ``i < j``, whose segments cross
    at a point interior to both. Edges sharing an endpoint never cross.
    """
    X = _coords(layout)
    if g.m < 2:
        return []
    eu = np.array([e.u for e in g.edges])
    ev = np.array([e.v for e in g.edges])
    I, J = np.triu_indices(g.m, 1)
    keep = ((eu[I] != eu[J]) & (eu[I] != ev[J])
            & (ev[I] != eu[J]) & (ev[I] != ev[J]))
    I, J = I[keep], J[keep]
    if not I.size:
        return []
    p1, q1, p2, q2 = X[eu[I]], X[ev[I]], X[eu[J]], X[ev[J]]
    extent = float(np.ptp(X, axis=0).max()) if len(X) else 0.0
    tol = EPS * max(extent * extent, 1.0)
    o1 = _sign(_orient(p1, q1, p2), tol)
    o2 = _sign(_orient(p1, q1, q2), tol)
    o3 = _sign(_orient(p2, q2, p1), tol)
    o4 = _sign(_orient(p2, q2, q1), tol)

    collinear = (o1 == 0) & (o2 == 0) & (o3 == 0) & (o4 == 0)
    if collinear.any():
        _check_overlaps(p1[collinear], q1[collinear],
                        p2[collinear], q2[collinear], tol)
    crossing = (o1 * o2 < 0) & (o3 * o4 < 0)
    return list(zip(I[crossing].tolist(), J[crossing].tolist()))


def _check_overlaps(p1, q1, p2, q2, tol):
    # project each collinear pair on its dominant axis
    d = q1 - p1
    axis = (np.abs(d[:, 0]) < np.abs(d[:, 1])).astype(int)
    rows = np.arange(len(p1))
    a1, b1 = p1[rows, axis], q1[rows, axis]
    a2, b2 = p2[rows, axis], q2[rows, axis]
    lo = np.maximum(np.minimum(a1, b1), np.minimum(a2, b2))
    hi = np.minimum(np.maximum(a1, b1), np.maximum(a2, b2))
    if np.any(hi - lo >= -math.sqrt(tol)):
        raise DegenerateGeometry("collinear edges overlap")


def count_crossings(g, layout):
    return len(crossing_pairs(g, layout))


def angular_resolution(g, layout):
    X = _coords(layout)
    delta = g.max_degree()
    if delta < 2:
        raise NoIncidentPairs("no vertex has two incident edges")
    best = math.inf
    for x in range(g.n):
        nbrs = g.neighbors(x)
        if len(nbrs) < 2:
            continue
        d = X[list(nbrs)] - X[x]
        angles = np.sort(np.arctan2(d[:, 1], d[:, 0]))
        gaps = np.diff(np.append(angles, angles[0] + 2 * math.pi))
        best = min(best, float(gaps.min()))
    return best / (2 * math.pi / delta)


def crossing_resolution(g, layout):
    "Smallest crossing angle over pi/2, or None for a planar drawing."
    pairs = crossing_pairs(g, layout)
    if not pairs:
        return None
    X = _coords(layout)
    I = np.array([p[0] for p in pairs])
    J = np.array([p[1] for p in pairs])
    eu = np.array([e.u for e in g.edges])
    ev = np.array([e.v for e in g.edges])
    d1 = X[ev[I]] - X[eu[I]]
    d2 = X[ev[J]] - X[eu[J]]
    cross = np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    dot = np.abs((d1 * d2).sum(axis=1))
    return float(np.arctan2(cross, dot).min() / (math.pi / 2))


def procrustes_statistic(X, Y):
    """
    Residual of the best similarity transform (reflections allowed) taking
    one drawing onto the other, normalised to [0, 1].
    """
    X, Y = _coords(X), _coords(Y)
    if X.shape != Y.shape:
        raise DimensionMismatch(f"layouts of shapes {X.shape} and {Y.shape}")
    X0 = X - X.mean(axis=0)
    Y0 = Y - Y.mean(axis=0)
    nx = float((X0 ** 2).sum())
    ny = float((Y0 ** 2).sum())
    if nx == 0 or ny == 0:
        raise DegenerateLayout("all points of a layout coincide")
    s = float(np.linalg.svd(X0.T @ Y0, compute_uv=False).sum())
    return float(np.clip(1.0 - s * s / (nx * ny), 0.0, 1.0))


@attr.s(frozen=True)
class MetricReport:
    nc = attr.ib()
    ang_res = attr.ib(default=None)
    cros_res = attr.ib(default=None)
    ps = attr.ib(default=None)

    def as_row(self):
        return {"nc": self.nc, "ang_res": self.ang_res,
                "cros_res": self.cros_res, "ps": self.ps}


def evaluate(g, layout, reference=None):
    try:
        ang = angular_resolution(g, layout)
    except NoIncidentPairs:
        ang = None
    ps = None
    if reference is not None:
        ps = procrustes_statistic(reference, layout)
    return MetricReport(count_crossings(g, layout), ang,
                        crossing_resolution(g, layout), ps)
