"""Independent reference computations used by the tests.

Nothing here calls into uavplace's numerical code: link-budget values are
recomputed in 50-digit arithmetic and geometric audits use their own
formulations.
"""

from __future__ import annotations

from collections import Counter

import mpmath as mp
import numpy as np

mp.mp.dps = 50
C = mp.mpf(299792458)


def dbm_to_w(dbm) -> mp.mpf:
    return mp.power(10, (mp.mpf(dbm) - 30) / 10)


def db_to_lin(db) -> mp.mpf:
    return mp.power(10, mp.mpf(db) / 10)


def snr(tx_w, gt, gr, f_hz, noise_w, d, loss_db=0):
    lam = C / mp.mpf(f_hz)
    num = mp.mpf(tx_w) * mp.mpf(gt) * mp.mpf(gr) * lam**2
    den = (4 * mp.pi) ** 2 * mp.mpf(d) ** 2 * db_to_lin(loss_db) * mp.mpf(noise_w)
    return num / den


def capacity(w_hz, snr_lin):
    return mp.mpf(w_hz) * mp.log(1 + mp.mpf(snr_lin), 2)


def max_distance(tx_w, gt, gr, f_hz, noise_w, snr_req, loss_db=0):
    lam = C / mp.mpf(f_hz)
    num = mp.mpf(tx_w) * mp.mpf(gt) * mp.mpf(gr) * lam**2
    return mp.sqrt(num / ((4 * mp.pi) ** 2 * db_to_lin(loss_db) * mp.mpf(noise_w) * mp.mpf(snr_req)))


def rel(a, b) -> float:
    return float(abs(mp.mpf(a) - mp.mpf(b)) / abs(mp.mpf(b)))


# ---------------------------------------------------------------------------
# geometry


def edge_audit(triangles) -> Counter:
    """Undirected edge -> number of incident triangles, keyed on exact vertex tuples."""
    c: Counter = Counter()
    for tri in np.asarray(triangles, dtype=float):
        vs = [tuple(v) for v in tri]
        for i in range(3):
            c[frozenset((vs[i], vs[(i + 1) % 3]))] += 1
    return c


def point_segment_distance(p, a, b) -> float:
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def segment_segment_distance(p1, q1, p2, q2) -> float:
    """Closest distance between two 3D segments (clamped closest-point solve)."""
    p1, q1, p2, q2 = (np.asarray(v, dtype=float) for v in (p1, q1, p2, q2))
    d1, d2, r = q1 - p1, q2 - p2, p1 - p2
    a, e, f = np.dot(d1, d1), np.dot(d2, d2), np.dot(d2, r)
    c, b = np.dot(d1, r), np.dot(d1, d2)
    denom = a * e - b * b
    s = np.clip((b * f - c * e) / denom, 0.0, 1.0) if denom > 1e-18 * a * e else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t, s = 0.0, np.clip(-c / a, 0.0, 1.0)
    elif t > 1.0:
        t, s = 1.0, np.clip((b - c) / a, 0.0, 1.0)
    best = np.linalg.norm((p1 + s * d1) - (p2 + t * d2))
    # endpoint checks guard the near-parallel branch
    return float(min(best, point_segment_distance(p1, p2, q2), point_segment_distance(q1, p2, q2),
                     point_segment_distance(p2, p1, q1), point_segment_distance(q2, p1, q1)))


def point_polygon_face_distance(p, corners3) -> float:
    """Distance from ``p`` to a planar convex or non-convex polygon face given by 3D corners,
    using the face's own plane (corners are either all horizontal or a vertical quad)."""
    p = np.asarray(p, dtype=float)
    pts = np.asarray(corners3, dtype=float)
    n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
    if np.linalg.norm(n) == 0:
        for k in range(3, len(pts)):
            n = np.cross(pts[1] - pts[0], pts[k] - pts[0])
            if np.linalg.norm(n) > 0:
                break
    n = n / np.linalg.norm(n)
    h = float(np.dot(p - pts[0], n))
    foot = p - h * n
    # inside test in the face plane: drop the dominant normal axis
    ax = int(np.argmax(np.abs(n)))
    keep = [i for i in range(3) if i != ax]
    q = foot[keep]
    poly = pts[:, keep]
    inside = False
    m = len(poly)
    for i in range(m):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % m]
        if (y1 > q[1]) != (y2 > q[1]) and q[0] < x1 + (q[1] - y1) * (x2 - x1) / (y2 - y1):
            inside = not inside
    if inside:
        return abs(h)
    return min(point_segment_distance(p, pts[i], pts[(i + 1) % m]) for i in range(m))


def prism_edges(corners, height):
    """Edges of the solid (not of its triangulation): bottom ring, top ring, verticals."""
    out = []
    n = len(corners)
    for i in range(n):
        (x1, y1), (x2, y2) = corners[i], corners[(i + 1) % n]
        out.append(((x1, y1, 0.0), (x2, y2, 0.0)))
        out.append(((x1, y1, height), (x2, y2, height)))
        out.append(((x1, y1, 0.0), (x1, y1, height)))
    return out


def prism_faces(corners, height):
    n = len(corners)
    faces = [[(x, y, 0.0) for x, y in corners], [(x, y, height) for x, y in corners]]
    for i in range(n):
        (x1, y1), (x2, y2) = corners[i], corners[(i + 1) % n]
        faces.append([(x1, y1, 0.0), (x2, y2, 0.0), (x2, y2, height), (x1, y1, height)])
    return faces


def near_boundary(a, b, prisms, eps: float = 1e-6) -> bool:
    """True when the LoS answer for segment ab could flip under an ``eps`` perturbation.

    Away from edges of a solid, and with both endpoints clear of its faces, a
    transversal crossing stays a crossing and a miss stays a miss.
    """
    for corners, h in prisms:
        for e0, e1 in prism_edges(corners, h):
            if segment_segment_distance(a, b, e0, e1) < eps:
                return True
        for face in prism_faces(corners, h):
            if point_polygon_face_distance(a, face) < eps or point_polygon_face_distance(b, face) < eps:
                return True
    return False


def coverage_counts(points: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Boolean (P, N) coverage matrix by direct distance comparison."""
    d = np.sqrt(((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2))
    return d <= radii[None, :]
