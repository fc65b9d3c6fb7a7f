"""Brute-force references used to cross-check the optimiser and the LoS kernel.

``sampled_los`` deliberately avoids the triangle meshes: it walks the segment
and tests footprint containment plus height, so a bug in the mesh path cannot
validate itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import geometry, radio
from .errors import CandidateCapExceeded, EmptyCandidateSet
from .pso import TIE_RTOL, PlacementResult, rank_optima
from .region import FeasibleRegion
from .scenario import Point3, Scenario

DEFAULT_CANDIDATE_CAP = 10**6
_BATCH = 2048


@dataclass(frozen=True)
class OracleResult:
    best_fitness_bps: float
    argmax_positions: tuple[Point3, ...]
    evaluations: int
    reports: tuple[radio.LinkReport, ...] = ()


def grid_search(
    region: FeasibleRegion,
    scenario: Scenario,
    meshes=None,
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> OracleResult:
    """Evaluate every candidate and return all positions tying the maximum."""
    cands = np.asarray(region.candidates, dtype=float)
    if len(cands) == 0:
        raise EmptyCandidateSet("region has no candidate positions")
    if len(cands) > cap:
        raise CandidateCapExceeded(f"{len(cands)} candidates exceed the oracle cap of {cap}")
    if meshes is None:
        meshes = scenario.meshes()
    reports: list[radio.LinkReport] = []
    for start in range(0, len(cands), _BATCH):
        reports.extend(radio.evaluate_many(cands[start : start + _BATCH], scenario, meshes))
    best = max(r.aggregate_bps for r in reports)
    floor = best - TIE_RTOL * abs(best)
    top = [r for r in reports if r.aggregate_bps >= floor]
    argmax = tuple(sorted(Point3(*r.position) for r in top))
    return OracleResult(best, argmax, len(reports), tuple(top))


def as_placement(res: OracleResult, region: FeasibleRegion, scenario: Scenario) -> PlacementResult:
    """Wrap an oracle result in the solver's result type for shared output code."""
    optima = rank_optima(list(res.reports), region.associated_ues)
    return PlacementResult(
        optimal_positions=optima,
        g_best=optima[0].position if optima else None,
        iterations_run=0,
        fitness_history=(),
        evaluations=res.evaluations,
        seed=None,
        method="grid_search",
        scenario_name=scenario.name,
        slot=scenario.slot,
        visited=tuple((o.position, o.fitness_bps, o.los_count) for o in sorted(optima, key=lambda o: tuple(o.position))),
    )


def sampled_los(
    uav: Sequence[float],
    ue: Sequence[float],
    prisms: Sequence,
    samples: int = 10_000,
) -> bool:
    """LoS by dense sampling of interior segment points against prism volumes."""
    if samples < 1000:
        raise ValueError("sampled_los needs at least 1000 samples")
    a = np.asarray(uav, dtype=float)
    b = np.asarray(ue, dtype=float)
    t = np.arange(1, samples, dtype=float) / samples
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    for prism in prisms:
        low = pts[:, 2] <= prism.height
        if not low.any():
            continue
        inside = geometry.points_in_polygon(pts[low, :2], prism.bottom_corners)
        if inside.any():
            return False
    return True
