"""Scenario templates: hand-authored use-case layouts and seeded random venues.

The ``fig3`` layouts mimic the structure of a small urban block (three
buildings, eight ground users); coordinates are illustrative, not surveyed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import geometry
from .scenario import DEFAULT_MCS_RATES_MBPS, Scenario, scenario_from_dict

DATA_DIR = Path(__file__).parent / "data"

FIG3_BUILDINGS = [
    {"id": 1, "bottom_corners": [[25, 20], [50, 20], [50, 45], [25, 45]], "height": 20.0},
    {"id": 2, "bottom_corners": [[60, 55], [85, 55], [85, 65], [70, 65], [70, 85], [60, 85]], "height": 14.0},
    {"id": 3, "bottom_corners": [[15, 60], [35, 58], [40, 75], [28, 88], [12, 78]], "height": 17.0},
]

FIG3_USERS = [(10, 10), (58, 26), (32, 52), (90, 40), (66, 48), (76, 72), (48, 92), (12, 36)]

# two far users for the split-coverage case; the other six keep FIG3 positions
FIG3_SPLIT_USERS = FIG3_USERS[:6] + [(520, 45), (530, 35)]


@dataclass(frozen=True)
class ScenarioTemplate:
    name: str
    ue_count: int = 8
    demand_pattern: str = "uniform"  # uniform | two-tier | ladder
    building_layout: str = "fig3"  # fig3 | fig3-split | random
    seed: int = 0
    bandwidth_mhz: float = 20.0
    ladder_start: int = 0
    max_mcs_index: int = 8
    venue_size: tuple[float, float] = (60.0, 60.0)
    z_span: float = 19.0
    n_buildings: int = 3
    height_range: tuple[float, float] = (3.0, 10.0)
    z_max: float | None = None


TEMPLATES = {
    "usecase_a": ScenarioTemplate("usecase_a", demand_pattern="uniform"),
    "usecase_b": ScenarioTemplate("usecase_b", demand_pattern="two-tier"),
    "usecase_c": ScenarioTemplate(
        "usecase_c", demand_pattern="ladder", building_layout="fig3-split", bandwidth_mhz=80.0
    ),
    "usecase_c_1to8": ScenarioTemplate(
        "usecase_c_1to8", demand_pattern="ladder", building_layout="fig3-split", bandwidth_mhz=80.0, ladder_start=1
    ),
    "random": ScenarioTemplate("random", demand_pattern="ladder", building_layout="random", max_mcs_index=3),
    "random_small": ScenarioTemplate(
        "random_small",
        ue_count=6,
        demand_pattern="ladder",
        building_layout="random",
        max_mcs_index=3,
        venue_size=(20.0, 20.0),
        z_span=9.0,
        n_buildings=2,
        height_range=(3.0, 8.0),
    ),
}

BUNDLED = ("usecase_a", "usecase_b", "usecase_c")


def demands_mbps(template: ScenarioTemplate) -> list[float]:
    rates = DEFAULT_MCS_RATES_MBPS
    n = template.ue_count
    if template.demand_pattern == "uniform":
        return [rates[template.ladder_start]] * n
    if template.demand_pattern == "two-tier":
        high = (n + 1) // 2
        return [rates[1]] * high + [rates[0]] * (n - high)
    if template.demand_pattern == "ladder":
        span = template.max_mcs_index + 1
        return [rates[min(template.ladder_start + i % span, len(rates) - 1)] for i in range(n)]
    raise ValueError(f"unknown demand pattern {template.demand_pattern!r}")


def _random_footprint(rng: np.random.Generator, w: float, d: float) -> list[list[float]]:
    kind = rng.integers(3)
    size = rng.uniform(4.0, min(w, d) / 3)
    cx = rng.uniform(size, w - size)
    cy = rng.uniform(size, d - size)
    r = lambda v: float(round(v, 2))
    if kind == 0:
        sx, sy = size, rng.uniform(0.5, 1.0) * size
        pts = [(cx - sx / 2, cy - sy / 2), (cx + sx / 2, cy - sy / 2), (cx + sx / 2, cy + sy / 2), (cx - sx / 2, cy + sy / 2)]
    elif kind == 1:
        pts = [(cx - size / 2, cy - size / 2), (cx + size / 2, cy - size / 3), (cx, cy + size / 2)]
    else:
        s, t = size / 2, size / 6
        pts = [(cx - s, cy - s), (cx + s, cy - s), (cx + s, cy - t), (cx - t, cy - t), (cx - t, cy + s), (cx - s, cy + s)]
    return [[r(x), r(y)] for x, y in pts]


def _overlap(p, q) -> bool:
    if any(geometry.point_in_polygon(c, q) for c in p) or any(geometry.point_in_polygon(c, p) for c in q):
        return True
    edges = lambda poly: [(poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly))]
    return any(geometry._segments_cross(*e, *f) for e in edges(p) for f in edges(q))


def _random_layout(t: ScenarioTemplate, rng: np.random.Generator):
    w, d = t.venue_size
    buildings = []
    while len(buildings) < t.n_buildings:
        fp = _random_footprint(rng, w, d)
        if any(_overlap(fp, b["bottom_corners"]) for b in buildings):
            continue
        h = float(round(rng.uniform(*t.height_range), 1))
        buildings.append({"id": len(buildings) + 1, "bottom_corners": fp, "height": h})
    users = []
    while len(users) < t.ue_count:
        x, y = (float(round(v, 2)) for v in rng.uniform((0.0, 0.0), (w, d)))
        if any(geometry.point_in_polygon((x, y), b["bottom_corners"]) for b in buildings):
            continue
        users.append((x, y))
    tallest = max(b["height"] for b in buildings)
    venue = {"x_min": 0.0, "x_max": float(w), "y_min": 0.0, "y_max": float(d), "z_min": tallest,
             "z_max": min(100.0, tallest + t.z_span)}
    return buildings, users, venue


def generate_dict(template: ScenarioTemplate, seed: int | None = None) -> dict:
    """Scenario JSON document for ``template``; ``seed`` overrides the template seed."""
    seed = template.seed if seed is None else seed
    if template.building_layout == "fig3":
        buildings, positions, venue = FIG3_BUILDINGS, FIG3_USERS, {}
    elif template.building_layout == "fig3-split":
        buildings, positions, venue = FIG3_BUILDINGS, FIG3_SPLIT_USERS, {}
    elif template.building_layout == "random":
        buildings, positions, venue = _random_layout(template, np.random.Generator(np.random.PCG64(seed)))
    else:
        raise ValueError(f"unknown building layout {template.building_layout!r}")
    if template.z_max is not None:
        venue = dict(venue, z_max=template.z_max)
    demands = demands_mbps(replace(template, ue_count=len(positions)))
    return {
        "name": template.name if template.building_layout != "random" else f"{template.name}-{seed}",
        "venue": venue,
        "buildings": [dict(b) for b in buildings],
        "users": [
            {"id": i + 1, "x": float(x), "y": float(y), "demand_mbps": dem}
            for i, ((x, y), dem) in enumerate(zip(positions, demands))
        ],
        "radio": {"bandwidth_mhz": template.bandwidth_mhz},
    }


def generate(template: ScenarioTemplate | str, seed: int | None = None) -> Scenario:
    if isinstance(template, str):
        template = TEMPLATES[template]
    return scenario_from_dict(generate_dict(template, seed))


def bundled_path(name: str) -> Path:
    return DATA_DIR / f"{name}.json"
