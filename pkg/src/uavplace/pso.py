"""Particle swarm search over the discrete candidate set of a feasible region."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import radio
from .errors import EmptyCandidateSet, ValidationError
from .region import FeasibleRegion
from .scenario import Point3, Scenario

TIE_RTOL = 1e-6


@dataclass(frozen=True)
class PsoConfig:
    particles: int = 30
    max_iterations: int = 100
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5
    early_stop_after: int = 10
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.particles < 1:
            raise ValidationError("particles must be >= 1")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not 0 < self.inertia < 1:
            raise ValidationError("inertia must lie in (0, 1)")
        if not (self.cognitive > 0 and self.social > 0):
            raise ValidationError("cognitive and social coefficients must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")


@dataclass(frozen=True)
class Particle:
    position: Point3
    velocity: tuple[float, float, float]
    p_best: Point3
    p_best_fitness: float


@dataclass(frozen=True)
class OptimalPosition:
    position: Point3
    fitness_bps: float
    links: tuple[radio.LinkMetrics, ...]
    los_count: int
    mean_distance_m: float
    total_capacity_bps: float
    c_max_violated: bool


@dataclass(frozen=True)
class PlacementResult:
    optimal_positions: tuple[OptimalPosition, ...]
    g_best: Point3 | None
    iterations_run: int
    fitness_history: tuple[float, ...]
    evaluations: int
    seed: int | None = None
    method: str = "pso"
    scenario_name: str = ""
    slot: int = 0
    region_summary: dict = field(default_factory=dict)
    visited: tuple[tuple[Point3, float, int], ...] = ()
    particles: tuple[Particle, ...] = ()

    @property
    def best_fitness_bps(self) -> float:
        return self.optimal_positions[0].fitness_bps if self.optimal_positions else 0.0


def is_perfect(fitness: float, scenario: Scenario, los_flags: Sequence[bool]) -> bool:
    """Every demand met in full and every given link (associated users) in LoS."""
    return fitness == scenario.total_demand_bps and all(los_flags)


def _mean_distance(report: radio.LinkReport, associated: set[int]) -> float:
    ds = [m.distance_m for m in report.links if m.ue_id in associated] or [m.distance_m for m in report.links]
    return math.fsum(ds) / len(ds)


def to_optimal(report: radio.LinkReport, associated: Sequence[int]) -> OptimalPosition:
    return OptimalPosition(
        position=Point3(*report.position),
        fitness_bps=report.aggregate_bps,
        links=report.links,
        los_count=report.los_count,
        mean_distance_m=_mean_distance(report, set(associated)),
        total_capacity_bps=report.total_capacity_bps,
        c_max_violated=report.c_max_violated,
    )


def rank_optima(reports: Sequence[radio.LinkReport], associated: Sequence[int]) -> tuple[OptimalPosition, ...]:
    """Reports within the tie tolerance of the best, ranked.

    Order: fitness desc, LoS links desc, mean distance to associated users asc,
    then coordinates.
    """
    if not reports:
        return ()
    best = max(r.aggregate_bps for r in reports)
    floor = best - TIE_RTOL * abs(best)
    opts = [to_optimal(r, associated) for r in reports if r.aggregate_bps >= floor]
    opts.sort(key=lambda o: (-o.fitness_bps, -o.los_count, o.mean_distance_m, tuple(o.position)))
    return tuple(opts)


class FitnessCache:
    """Memoised fitness per candidate index; batch evaluation optionally threaded."""

    def __init__(self, candidates: np.ndarray, scenario: Scenario, threads: int = 1):
        self.candidates = candidates
        self.scenario = scenario
        self.meshes = scenario.meshes()
        self.threads = threads
        self.reports: dict[int, radio.LinkReport] = {}

    def ensure(self, indices: Sequence[int]) -> None:
        todo = list(dict.fromkeys(i for i in indices if i not in self.reports))
        if not todo:
            return
        if self.threads > 1 and len(todo) > 1:
            chunks = [todo[k :: self.threads] for k in range(self.threads)]
            chunks = [c for c in chunks if c]
            with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
                results = list(pool.map(self._eval, chunks))
            for chunk, reps in zip(chunks, results):
                self.reports.update(zip(chunk, reps))
        else:
            self.reports.update(zip(todo, self._eval(todo)))

    def _eval(self, idx: list[int]) -> list[radio.LinkReport]:
        return radio.evaluate_many(self.candidates[idx], self.scenario, self.meshes)

    def fitness(self, i: int) -> float:
        return self.reports[i].aggregate_bps


def _project(tree: cKDTree, targets: np.ndarray) -> list[int]:
    """Nearest candidate per target; equidistant candidates resolve to the lowest index."""
    d, idx = tree.query(targets)
    out = []
    for t, dist, i in zip(targets, d, idx):
        ties = tree.query_ball_point(t, dist * (1 + 1e-12) + 1e-12)
        out.append(int(min(ties)) if ties else int(i))
    return out


def optimize(
    region: FeasibleRegion,
    scenario: Scenario,
    cfg: PsoConfig = PsoConfig(),
    meshes=None,
) -> PlacementResult:
    """Run the swarm over ``region.candidates`` maximising aggregate served throughput.

    Particle positions are always candidate indices: each velocity step is
    projected back onto the nearest candidate. Every position visited that
    matches the final best fitness is returned, ranked.
    """
    cands = np.asarray(region.candidates, dtype=float)
    n = len(cands)
    if n == 0:
        raise EmptyCandidateSet("region has no candidate positions")

    cache = FitnessCache(cands, scenario, cfg.threads)
    if meshes is not None:
        cache.meshes = meshes
    associated = set(region.associated_ues)
    assoc_mask = [u.id in associated for u in scenario.users]
    tree = cKDTree(cands)
    vmax = 0.5 * float(np.linalg.norm(cands.max(axis=0) - cands.min(axis=0)))  # per-axis cap

    gens = [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.particles)]
    pos = [int(g.integers(n)) for g in gens]
    vel = np.zeros((cfg.particles, 3))
    pbest = list(pos)
    pbest_fit = [-math.inf] * cfg.particles
    gbest, gbest_fit = -1, -math.inf
    history: list[float] = []
    iterations = 0

    for it in range(cfg.max_iterations):
        cache.ensure(pos)
        for p, i in enumerate(pos):
            f = cache.fitness(i)
            if f > pbest_fit[p]:
                pbest[p], pbest_fit[p] = i, f
            if f > gbest_fit:
                gbest, gbest_fit = i, f
        history.append(gbest_fit)
        iterations = it + 1

        if len(cache.reports) == n:
            break
        if iterations >= cfg.early_stop_after:
            rep = cache.reports[gbest]
            if is_perfect(gbest_fit, scenario, [m.los for m, a in zip(rep.links, assoc_mask) if a]):
                break
        if iterations == cfg.max_iterations:
            break

        x = cands[pos]
        r = np.array([g.random(2) for g in gens])
        vel = (
            cfg.inertia * vel
            + cfg.cognitive * r[:, :1] * (cands[pbest] - x)
            + cfg.social * r[:, 1:] * (cands[gbest] - x)
        )
        vel = np.clip(vel, -vmax, vmax)
        pos = _project(tree, x + vel)

    visited_idx = sorted(cache.reports)
    reports = [cache.reports[i] for i in visited_idx]
    optima = rank_optima(reports, region.associated_ues)
    visited = tuple((Point3(*map(float, cands[i])), cache.fitness(i), cache.reports[i].los_count) for i in visited_idx)
    particles = tuple(
        Particle(Point3(*map(float, cands[pos[p]])), tuple(map(float, vel[p])),
                 Point3(*map(float, cands[pbest[p]])), pbest_fit[p])
        for p in range(cfg.particles)
    )
    return PlacementResult(
        optimal_positions=optima,
        g_best=Point3(*map(float, cands[gbest])),
        iterations_run=iterations,
        fitness_history=tuple(history),
        evaluations=len(cache.reports),
        seed=cfg.seed,
        method="pso",
        scenario_name=scenario.name,
        slot=scenario.slot,
        visited=visited,
        particles=particles,
    )
