"""Link-budget arithmetic: free-space SNR with a scalar NLoS penalty, Shannon
capacity, demand-capped throughput and the coverage radius per demand."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import geometry
from .errors import DemandExceedsTable, ZeroDistance
from .scenario import LinkBudget, McsEntry, Scenario


@dataclass(frozen=True)
class LinkMetrics:
    ue_id: int
    distance_m: float
    los: bool
    snr_linear: float
    capacity_bps: float
    demand_bps: float
    served_bps: float
    demand_met: bool


@dataclass(frozen=True)
class LinkReport:
    """Per-UE metrics at one UAV position plus the aggregates."""

    position: tuple[float, float, float]
    links: tuple[LinkMetrics, ...]
    aggregate_bps: float
    total_capacity_bps: float
    c_max_violated: bool

    @property
    def los_count(self) -> int:
        return sum(m.los for m in self.links)


_LN2 = math.log(2.0)


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    dx, dy, dz = a[0] - b[0], a[1] - b[1], a[2] - b[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def loss_factor(los: bool, nlos_extra_loss_db: float) -> float:
    return 1.0 if los else 10.0 ** (nlos_extra_loss_db / 10.0)


def _numerator(lb: LinkBudget) -> float:
    lam = lb.wavelength_m
    return lb.tx_power_w * lb.tx_gain * lb.rx_gain * lam * lam / ((4.0 * math.pi) ** 2)


def snr(lb: LinkBudget, distance_m: float, los: bool) -> float:
    """Received SNR (linear) at ``distance_m``."""
    if distance_m <= 0:
        raise ZeroDistance("SNR is singular at zero distance")
    loss = loss_factor(los, lb.nlos_extra_loss_db)
    return _numerator(lb) / (distance_m * distance_m * loss * lb.noise_floor_w)


def capacity(lb: LinkBudget, snr_linear: float) -> float:
    # log1p keeps full relative precision when the SNR is tiny
    return lb.bandwidth_hz * (math.log1p(snr_linear) / _LN2)


def required_mcs(demand_bps: float, mcs_table: Sequence[McsEntry]) -> McsEntry:
    """Lowest-rate entry whose rate covers ``demand_bps``."""
    for entry in mcs_table:
        if entry.rate_bps >= demand_bps:
            return entry
    raise DemandExceedsTable(
        f"demand {demand_bps / 1e6:g} Mbit/s exceeds the MCS table maximum "
        f"of {mcs_table[-1].rate_bps / 1e6:g} Mbit/s"
    )


def required_snr(demand_bps: float, mcs_table: Sequence[McsEntry]) -> float:
    return required_mcs(demand_bps, mcs_table).min_snr_linear


def max_distance(lb: LinkBudget, snr_req: float, los_assumed: bool = True) -> float:
    """Largest UAV-UE distance at which the SNR still reaches ``snr_req``."""
    loss = loss_factor(los_assumed, lb.nlos_extra_loss_db)
    return math.sqrt(_numerator(lb) / (loss * lb.noise_floor_w * snr_req))


def _user_arrays(scenario: Scenario) -> tuple[np.ndarray, list[float], list[int]]:
    pos = np.array([u.position for u in scenario.users], dtype=float)
    return pos, [u.demand_bps for u in scenario.users], [u.id for u in scenario.users]


def evaluate_many(
    points: np.ndarray,
    scenario: Scenario,
    meshes: Sequence[geometry.PrismMesh] | None = None,
) -> list[LinkReport]:
    """:func:`evaluate_links` for a batch of UAV positions, shape ``(K, 3)``.

    Results do not depend on how positions are batched.
    """
    if meshes is None:
        meshes = scenario.meshes()
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    lb = scenario.link_budget
    ue_pos, demands, ids = _user_arrays(scenario)

    diff = points[:, None, :] - ue_pos[None, :, :]
    dist = np.sqrt(diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1] + diff[..., 2] * diff[..., 2])
    if (dist == 0.0).any():
        raise ZeroDistance("UAV position coincides with a user")
    los = geometry.los_matrix(points, ue_pos, meshes)
    loss = np.where(los, 1.0, loss_factor(False, lb.nlos_extra_loss_db))
    snr_arr = _numerator(lb) / (dist * dist * loss * lb.noise_floor_w)

    c_max = lb.channel_capacity_cap_bps
    reports = []
    for k in range(len(points)):
        links = []
        for i in range(len(ids)):
            s = float(snr_arr[k, i])
            cap = capacity(lb, s)
            served = min(demands[i], cap)
            links.append(
                LinkMetrics(
                    ue_id=ids[i],
                    distance_m=float(dist[k, i]),
                    los=bool(los[k, i]),
                    snr_linear=s,
                    capacity_bps=cap,
                    demand_bps=demands[i],
                    served_bps=served,
                    demand_met=cap >= demands[i],
                )
            )
        total_c = math.fsum(m.capacity_bps for m in links)
        reports.append(
            LinkReport(
                position=tuple(float(v) for v in points[k]),
                links=tuple(links),
                aggregate_bps=math.fsum(m.served_bps for m in links),
                total_capacity_bps=total_c,
                c_max_violated=c_max is not None and total_c > c_max,
            )
        )
    return reports


def evaluate_links(
    uav: Sequence[float],
    scenario: Scenario,
    meshes: Sequence[geometry.PrismMesh] | None = None,
) -> LinkReport:
    """Per-UE LoS, SNR, capacity and served throughput at one UAV position."""
    return evaluate_many(np.asarray(uav, dtype=float)[None], scenario, meshes)[0]
