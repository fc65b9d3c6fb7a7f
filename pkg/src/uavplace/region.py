"""Feasible positioning volume: coverage spheres per user, selection of the
largest jointly coverable user subset and its discretised candidate set."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import radio
from .errors import EmptyRegion
from .scenario import Point3, Scenario


@dataclass(frozen=True)
class CoverageSphere:
    ue_id: int
    center: Point3
    radius_m: float


@dataclass(frozen=True, eq=False)
class FeasibleRegion:
    associated_ues: tuple[int, ...]
    candidates: np.ndarray  # (K, 3), sorted lexicographically by (x, y, z)
    grid_step_m: float
    uncovered_ues: tuple[int, ...] = ()
    valid_points: int = 0

    def __len__(self) -> int:
        return len(self.candidates)


def build_spheres(scenario: Scenario, los_assumed: bool = True) -> list[CoverageSphere]:
    """One sphere per user whose radius is the distance limit for its demand.

    With ``los_assumed=False`` radii include the NLoS penalty (conservative mode).
    """
    lb = scenario.link_budget
    spheres = []
    for u in scenario.users:
        snr_req = radio.required_snr(u.demand_bps, scenario.mcs_table)
        spheres.append(CoverageSphere(u.id, u.position, radio.max_distance(lb, snr_req, los_assumed)))
    return spheres


def grid_axes(scenario: Scenario) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lattice anchored at the venue's minimum corner with spacing ``grid_step_m``."""
    v, h = scenario.venue, scenario.grid_step_m

    def axis(lo, hi):
        n = int(math.floor((hi - lo) / h + 1e-9)) + 1
        return lo + h * np.arange(n, dtype=float)

    return axis(v.x_min, v.x_max), axis(v.y_min, v.y_max), axis(v.z_min, v.z_max)


def _slices(scenario: Scenario, spheres: list[CoverageSphere]):
    """Yield ``(points, cover)`` per altitude; ``cover[p, i]`` marks sphere i covering p."""
    xs, ys, zs = grid_axes(scenario)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    centers = np.array([s.center for s in spheres], dtype=float)
    radii = np.array([s.radius_m for s in spheres], dtype=float)
    for z in zs:
        dx = gx[:, None] - centers[None, :, 0]
        dy = gy[:, None] - centers[None, :, 1]
        dz = z - centers[None, :, 2]
        dist = np.sqrt(dx * dx + dy * dy + dz * dz)
        pts = np.column_stack((gx, gy, np.full_like(gx, z)))
        yield pts, dist <= radii[None, :]


def select_region(spheres: list[CoverageSphere], scenario: Scenario) -> FeasibleRegion:
    """Scan the venue lattice and keep the points of the best coverable subset.

    The subset covered by the most spheres wins; ties go to the larger summed
    demand, then the larger candidate count, then the smallest sorted id tuple.
    """
    if not spheres:
        raise EmptyRegion("no coverage spheres")
    ids = np.array([s.ue_id for s in spheres])
    demand = {u.id: u.demand_bps for u in scenario.users}

    best = 0
    valid = 0
    for _, cover in _slices(scenario, spheres):
        valid += len(cover)
        best = max(best, int(cover.sum(axis=1).max(initial=0)))
    if best == 0:
        raise EmptyRegion("no valid grid point lies inside any coverage sphere")

    groups: dict[bytes, list[np.ndarray]] = {}
    masks: dict[bytes, np.ndarray] = {}
    for pts, cover in _slices(scenario, spheres):
        rows = cover.sum(axis=1) == best
        if not rows.any():
            continue
        sub = cover[rows]
        keys = np.packbits(sub, axis=1)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        for j, key in enumerate(uniq):
            kb = key.tobytes()
            groups.setdefault(kb, []).append(pts[rows][inverse == j])
            masks.setdefault(kb, sub[inverse == j][0])

    def rank(kb: bytes):
        members = tuple(sorted(int(i) for i in ids[masks[kb]]))
        count = sum(len(g) for g in groups[kb])
        return (-math.fsum(demand[i] for i in members), -count, members)

    chosen = min(groups, key=rank)
    members = tuple(sorted(int(i) for i in ids[masks[chosen]]))
    cands = np.concatenate(groups[chosen])
    order = np.lexsort((cands[:, 2], cands[:, 1], cands[:, 0]))
    uncovered = tuple(sorted(int(i) for i in ids if int(i) not in members))
    return FeasibleRegion(members, cands[order], scenario.grid_step_m, uncovered, valid)


def region_report(region: FeasibleRegion, spheres: list[CoverageSphere]) -> dict:
    """Summary used for ``--dump-region`` and embedded in result files."""
    c = region.candidates
    return {
        "candidate_count": int(len(c)),
        "associated_count": len(region.associated_ues),
        "associated_ues": list(region.associated_ues),
        "uncovered_ues": list(region.uncovered_ues),
        "grid_step_m": region.grid_step_m,
        "valid_grid_points": region.valid_points,
        "bounding_box": {
            "x_min": float(c[:, 0].min()),
            "x_max": float(c[:, 0].max()),
            "y_min": float(c[:, 1].min()),
            "y_max": float(c[:, 1].max()),
            "z_min": float(c[:, 2].min()),
            "z_max": float(c[:, 2].max()),
        },
        "spheres": [{"ue_id": s.ue_id, "radius_m": s.radius_m} for s in spheres],
    }
