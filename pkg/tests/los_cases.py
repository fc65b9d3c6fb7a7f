"""Seeded random (segment, prism set) cases for LoS cross-checks."""

from __future__ import annotations

import math

import numpy as np

from uavplace.geometry import point_in_polygon, polygon_is_simple
from uavplace.scenario import PolygonPrism


def _star(rng, cx, cy, r, n):
    # radial polygon with jittered radii; angular gaps stay below pi so it is simple
    ang = (np.arange(n) + rng.uniform(-0.3, 0.3, n)) * (2 * math.pi / n)
    rad = r * rng.uniform(0.35, 1.0, n)
    return [(cx + float(a) * math.cos(t), cy + float(a) * math.sin(t)) for t, a in zip(ang, rad)]


def _footprint(rng, kind, cx, cy, s):
    if kind == "rect":
        w, h = s * rng.uniform(0.5, 1.0, 2)
        return [(cx - w, cy - h), (cx + w, cy - h), (cx + w, cy + h), (cx - w, cy + h)]
    if kind == "tri":
        return [(cx - s, cy - s), (cx + s, cy - 0.5 * s), (cx, cy + s)]
    if kind == "L":
        t = s * rng.uniform(0.2, 0.6)
        return [(cx - s, cy - s), (cx + s, cy - s), (cx + s, cy - t), (cx - t, cy - t), (cx - t, cy + s), (cx - s, cy + s)]
    if kind == "U":
        t = s * 0.4
        return [(cx - s, cy - s), (cx + s, cy - s), (cx + s, cy + s), (cx + t, cy + s), (cx + t, cy - t),
                (cx - t, cy - t), (cx - t, cy + s), (cx - s, cy + s)]
    return _star(rng, cx, cy, s, int(rng.integers(5, 10)))


def _in_solid(p, prisms) -> bool:
    return any(p[2] <= q.height and point_in_polygon(p[:2], q.bottom_corners) for q in prisms)


KINDS = ("rect", "tri", "L", "U", "star")


def random_cases(n: int, seed: int = 0):
    """Yield ``(uav, ue, prisms)``; prisms may overlap, which LoS does not care about."""
    rng = np.random.Generator(np.random.PCG64(seed))
    for k in range(n):
        prisms = []
        for j in range(int(rng.integers(1, 5))):
            kind = KINDS[(k + j) % len(KINDS)]
            cx, cy = rng.uniform(5, 35, 2)
            corners = _footprint(rng, kind, float(cx), float(cy), float(rng.uniform(3, 9)))
            assert polygon_is_simple(corners)
            prisms.append(PolygonPrism(tuple(corners), float(rng.uniform(2, 20)), j + 1))
        # endpoints stay outside every solid, as UAV and UE positions do in a valid scenario
        while True:
            ue = (float(rng.uniform(0, 40)), float(rng.uniform(0, 40)), 0.0 if k % 3 else float(rng.uniform(0, 10)))
            if not _in_solid(ue, prisms):
                break
        while True:
            uav = tuple(float(v) for v in rng.uniform((0, 0, 0.5), (40, 40, 30)))
            if not _in_solid(uav, prisms):
                break
        yield uav, ue, prisms
