"""Geometry kernel: prism triangulation, Moller-Trumbore segment tests and the
line-of-sight predicate between a UAV position and a ground user."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateFootprint

EPS_PARAM = 1e-9  # open-interval / barycentric slack, parametric units
EPS_BOUNDARY = 1e-9  # metres; point-on-edge tolerance for 2D tests
_BROAD_MARGIN = 1e-7  # metres; broad phase only ever rejects with this much clearance
_CHUNK = 16384


class Segment3(NamedTuple):
    a: tuple[float, float, float]
    b: tuple[float, float, float]


class Triangle3(NamedTuple):
    v0: tuple[float, float, float]
    v1: tuple[float, float, float]
    v2: tuple[float, float, float]


# ---------------------------------------------------------------------------
# 2D polygon helpers


def polygon_area(poly: Sequence[Sequence[float]]) -> float:
    """Signed shoelace area; positive for counter-clockwise corners."""
    s = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(px, py, ax, ay, bx, by, tol=EPS_BOUNDARY) -> bool:
    dx, dy = bx - ax, by - ay
    ll = dx * dx + dy * dy
    if ll == 0.0:
        return (px - ax) ** 2 + (py - ay) ** 2 <= tol * tol
    t = ((px - ax) * dx + (py - ay) * dy) / ll
    t = min(1.0, max(0.0, t))
    qx, qy = ax + t * dx, ay + t * dy
    return (px - qx) ** 2 + (py - qy) ** 2 <= tol * tol


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = _orient(*q1, *q2, *p1)
    d2 = _orient(*q1, *q2, *p2)
    d3 = _orient(*p1, *p2, *q1)
    d4 = _orient(*p1, *p2, *q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    return (
        (d1 == 0 and _on_segment(*p1, *q1, *q2, tol=0.0))
        or (d2 == 0 and _on_segment(*p2, *q1, *q2, tol=0.0))
        or (d3 == 0 and _on_segment(*q1, *p1, *p2, tol=0.0))
        or (d4 == 0 and _on_segment(*q2, *p1, *p2, tol=0.0))
    )


def polygon_is_simple(poly: Sequence[Sequence[float]]) -> bool:
    """True when no two non-adjacent edges touch and no corner repeats."""
    n = len(poly)
    if n < 3:
        return False
    if len({(float(x), float(y)) for x, y in poly}) != n:
        return False
    edges = [(tuple(poly[i]), tuple(poly[(i + 1) % n])) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(*edges[i], *edges[j]):
                return False
    return True


def point_in_polygon(p: Sequence[float], poly: Sequence[Sequence[float]]) -> bool:
    """Even-odd containment; points on the boundary count as inside."""
    px, py = float(p[0]), float(p[1])
    n = len(poly)
    inside = False
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        if _on_segment(px, py, ax, ay, bx, by):
            return True
        if (ay > py) != (by > py):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < xint:
                inside = not inside
    return inside


def point_strictly_in_polygon(p: Sequence[float], poly: Sequence[Sequence[float]]) -> bool:
    n = len(poly)
    for i in range(n):
        if _on_segment(p[0], p[1], *poly[i], *poly[(i + 1) % n]):
            return False
    return point_in_polygon(p, poly)


def points_in_polygon(pts: np.ndarray, poly: Sequence[Sequence[float]]) -> np.ndarray:
    """Vectorised :func:`point_in_polygon` over an ``(n, 2)`` array."""
    pts = np.asarray(pts, dtype=float)
    px, py = pts[:, 0], pts[:, 1]
    poly = np.asarray(poly, dtype=float)
    inside = np.zeros(len(pts), dtype=bool)
    boundary = np.zeros(len(pts), dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for (ax, ay), (bx, by) in zip(poly, np.roll(poly, -1, axis=0)):
            dx, dy = bx - ax, by - ay
            ll = dx * dx + dy * dy
            t = np.clip(((px - ax) * dx + (py - ay) * dy) / ll, 0.0, 1.0)
            qx, qy = ax + t * dx, ay + t * dy
            boundary |= (px - qx) ** 2 + (py - qy) ** 2 <= EPS_BOUNDARY**2
            crosses = (ay > py) != (by > py)
            xint = ax + (py - ay) * dx / dy
            inside ^= crosses & (px < xint)
    return inside | boundary


# ---------------------------------------------------------------------------
# triangulation


@dataclass(frozen=True, eq=False)
class PrismMesh:
    """Closed triangle mesh of one building. ``triangles`` has shape (T, 3, 3)."""

    triangles: np.ndarray
    source: object
    lateral_count: int
    cap_count: int

    @property
    def building_id(self) -> int:
        return getattr(self.source, "id", 0)

    @property
    def height(self) -> float:
        return float(self.source.height)

    @property
    def bbox_xy(self) -> tuple[float, float, float, float]:
        xs = self.triangles[:, :, 0]
        ys = self.triangles[:, :, 1]
        return float(xs.min()), float(xs.max()), float(ys.min()), float(ys.max())

    def as_triangles(self) -> list[Triangle3]:
        return [Triangle3(*(tuple(map(float, v)) for v in tri)) for tri in self.triangles]


def _drop_collinear(poly: list[tuple[float, float]]) -> list[tuple[float, float]]:
    pts = list(poly)
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        n = len(pts)
        for i in range(n):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
            scale = np.hypot(b[0] - a[0], b[1] - a[1]) * np.hypot(c[0] - b[0], c[1] - b[1])
            if abs(_orient(*a, *b, *c)) <= 1e-12 * max(scale, 1e-300):
                del pts[i]
                changed = True
                break
    return pts


def _is_convex(poly: Sequence[tuple[float, float]]) -> bool:
    n = len(poly)
    return all(_orient(*poly[i - 1], *poly[i], *poly[(i + 1) % n]) > 0 for i in range(n))


def _in_triangle_2d(p, a, b, c) -> bool:
    return _orient(*a, *b, *p) >= 0 and _orient(*b, *c, *p) >= 0 and _orient(*c, *a, *p) >= 0


def ear_clip(poly: Sequence[tuple[float, float]]) -> list[tuple[int, int, int]]:
    """Ear-clipping triangulation of a simple counter-clockwise polygon.

    Returns index triples into ``poly``.
    """
    idx = list(range(len(poly)))
    tris = []
    while len(idx) > 3:
        n = len(idx)
        for k in range(n):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % n]
            a, b, c = poly[i0], poly[i1], poly[i2]
            if _orient(*a, *b, *c) <= 0:
                continue
            if any(
                _in_triangle_2d(poly[j], a, b, c)
                for j in idx
                if j not in (i0, i1, i2) and poly[j] not in (a, b, c)
            ):
                continue
            tris.append((i0, i1, i2))
            del idx[k]
            break
        else:
            raise DegenerateFootprint("no ear found; footprint cannot be triangulated")
    tris.append(tuple(idx))
    return tris


def triangulate(prism) -> PrismMesh:
    """Closed mesh of a polygonal prism: two triangles per wall plus both caps.

    Convex footprints are fanned; others are ear clipped. Collinear corners are
    merged first so the mesh stays watertight.
    """
    corners = [(float(x), float(y)) for x, y in prism.bottom_corners]
    corners = _drop_collinear(corners)
    if len(corners) < 3:
        raise DegenerateFootprint(f"building {getattr(prism, 'id', '?')}: footprint is degenerate")
    if polygon_area(corners) < 0:
        corners.reverse()
    h = float(prism.height)

    if _is_convex(corners):
        cap = [(0, i, i + 1) for i in range(1, len(corners) - 1)]
    else:
        cap = ear_clip(corners)

    bottom = [(x, y, 0.0) for x, y in corners]
    top = [(x, y, h) for x, y in corners]
    tris = []
    n = len(corners)
    for i in range(n):
        j = (i + 1) % n
        tris.append((bottom[i], bottom[j], top[j]))
        tris.append((bottom[i], top[j], top[i]))
    for i, j, k in cap:
        tris.append((top[i], top[j], top[k]))
        tris.append((bottom[i], bottom[k], bottom[j]))
    return PrismMesh(np.array(tris, dtype=float), prism, 2 * n, 2 * len(cap))


def edge_incidence(mesh: PrismMesh) -> Counter:
    """Count of triangles incident to each undirected edge."""
    counts: Counter = Counter()
    for tri in mesh.triangles:
        verts = [tuple(v) for v in tri]
        for a, b in ((0, 1), (1, 2), (2, 0)):
            counts[frozenset((verts[a], verts[b]))] += 1
    return counts


def is_watertight(mesh: PrismMesh) -> bool:
    return all(c == 2 for c in edge_incidence(mesh).values())


# ---------------------------------------------------------------------------
# segment / triangle


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def segment_intersects_triangle(seg: Segment3, tri: Triangle3, eps: float = EPS_PARAM) -> bool:
    """Moller-Trumbore test restricted to the open segment.

    Contacts at the segment's endpoints (parametric t within ``eps`` of 0 or 1)
    and segments parallel to the triangle plane are not intersections.
    """
    a, b = seg
    v0, v1, v2 = tri
    d = _sub(b, a)
    e1 = _sub(v1, v0)
    e2 = _sub(v2, v0)
    p = _cross(d, e2)
    det = _dot(e1, p)
    scale = np.sqrt(_dot(d, d) * _dot(e1, e1) * _dot(e2, e2))
    if abs(det) <= 1e-12 * scale:
        return False
    inv = 1.0 / det
    s = _sub(a, v0)
    u = _dot(s, p) * inv
    if u < -eps or u > 1.0 + eps:
        return False
    q = _cross(s, e1)
    v = _dot(d, q) * inv
    if v < -eps or u + v > 1.0 + eps:
        return False
    t = _dot(e2, q) * inv
    return eps < t < 1.0 - eps


def _mt_hits(a: np.ndarray, d: np.ndarray, tris: np.ndarray, eps: float = EPS_PARAM) -> np.ndarray:
    """Vectorised Moller-Trumbore: (S,) segments against (T,) triangles -> (S,) any-hit."""
    v0 = tris[None, :, 0, :]
    e1 = (tris[:, 1, :] - tris[:, 0, :])[None]
    e2 = (tris[:, 2, :] - tris[:, 0, :])[None]
    dd = d[:, None, :]

    def cross(x, y):
        return np.stack(
            (
                x[..., 1] * y[..., 2] - x[..., 2] * y[..., 1],
                x[..., 2] * y[..., 0] - x[..., 0] * y[..., 2],
                x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0],
            ),
            axis=-1,
        )

    def dot(x, y):
        return x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1] + x[..., 2] * y[..., 2]

    p = cross(dd, e2)
    det = dot(e1, p)
    scale = np.sqrt(dot(dd, dd) * dot(e1, e1) * dot(e2, e2))
    ok = np.abs(det) > 1e-12 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / det
        s = a[:, None, :] - v0
        u = dot(s, p) * inv
        q = cross(s, e1)
        v = dot(dd, q) * inv
        t = dot(e2, q) * inv
    with np.errstate(invalid="ignore"):
        hit = ok & (u >= -eps) & (u <= 1.0 + eps) & (v >= -eps) & (u + v <= 1.0 + eps)
        hit &= (t > eps) & (t < 1.0 - eps)
    return hit.any(axis=1)


def _broad_phase(a: np.ndarray, d: np.ndarray, mesh: PrismMesh) -> np.ndarray:
    """Segments that may touch ``mesh``. Never rejects a segment MT would flag."""
    xmin, xmax, ymin, ymax = mesh.bbox_xy
    m = _BROAD_MARGIN
    lo = np.zeros(len(a))
    hi = np.ones(len(a))
    with np.errstate(divide="ignore", invalid="ignore"):
        for axis, (cmin, cmax) in enumerate(((xmin - m, xmax + m), (ymin - m, ymax + m))):
            o = a[:, axis]
            dv = d[:, axis]
            flat = dv == 0.0
            t1 = (cmin - o) / dv
            t2 = (cmax - o) / dv
            tlo = np.where(flat, np.where((o >= cmin) & (o <= cmax), -np.inf, np.inf), np.minimum(t1, t2))
            thi = np.where(flat, np.where((o >= cmin) & (o <= cmax), np.inf, -np.inf), np.maximum(t1, t2))
            lo = np.maximum(lo, tlo)
            hi = np.minimum(hi, thi)
    overlap = lo <= hi
    z_lo = np.minimum(a[:, 2] + lo * d[:, 2], a[:, 2] + hi * d[:, 2])
    return overlap & (z_lo <= mesh.height + m)


def blocked_by(a: np.ndarray, b: np.ndarray, mesh: PrismMesh) -> np.ndarray:
    """Boolean mask of the segments ``a[k] -> b[k]`` obstructed by ``mesh``."""
    a = np.asarray(a, dtype=float).reshape(-1, 3)
    b = np.asarray(b, dtype=float).reshape(-1, 3)
    d = b - a
    out = np.zeros(len(a), dtype=bool)
    cand = np.flatnonzero(_broad_phase(a, d, mesh))
    for start in range(0, len(cand), _CHUNK):
        sel = cand[start : start + _CHUNK]
        out[sel] = _mt_hits(a[sel], d[sel], mesh.triangles)
    return out


def los_matrix(uavs: np.ndarray, ues: np.ndarray, meshes: Iterable[PrismMesh]) -> np.ndarray:
    """LoS flags for every (uav, ue) pair, shape ``(len(uavs), len(ues))``."""
    uavs = np.asarray(uavs, dtype=float).reshape(-1, 3)
    ues = np.asarray(ues, dtype=float).reshape(-1, 3)
    k, n = len(uavs), len(ues)
    a = np.repeat(uavs, n, axis=0)
    b = np.tile(ues, (k, 1))
    blocked = np.zeros(k * n, dtype=bool)
    for mesh in meshes:
        open_ = ~blocked
        if not open_.any():
            break
        idx = np.flatnonzero(open_)
        blocked[idx] = blocked_by(a[idx], b[idx], mesh)
    return ~blocked.reshape(k, n)


def has_los(uav: Sequence[float], ue: Sequence[float], meshes: Iterable[PrismMesh]) -> bool:
    """True when no building triangle blocks the open segment ``uav -> ue``."""
    if tuple(map(float, uav)) == tuple(map(float, ue)):
        raise ValueError("LoS is undefined for coincident endpoints")
    return bool(los_matrix(np.asarray(uav, float), np.asarray(ue, float), meshes)[0, 0])


def blocking_buildings(uav: Sequence[float], ue: Sequence[float], meshes: Iterable[PrismMesh]) -> list[int]:
    """Ids of every building whose mesh blocks ``uav -> ue``."""
    a = np.asarray(uav, float)[None]
    b = np.asarray(ue, float)[None]
    return [m.building_id for m in meshes if blocked_by(a, b, m)[0]]
