"""Problem-instance data model, JSON scenario loading and result serialization.

Everything inside the package works in linear SI units (W, Hz, m, bit/s).
Decibel quantities only exist in the JSON files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple, Sequence

from . import geometry
from .errors import DemandExceedsTable, ParseError, ValidationError

SPEED_OF_LIGHT = 299_792_458.0

DEFAULT_FREQUENCY_MHZ = 5250.0
DEFAULT_BANDWIDTH_MHZ = 20.0
DEFAULT_TX_POWER_DBM = 20.0
DEFAULT_GAIN_DBI = 0.0
DEFAULT_NOISE_FLOOR_DBM = -85.0
DEFAULT_NLOS_LOSS_DB = 25.0
DEFAULT_GRID_STEP_M = 1.0
DEFAULT_MARGIN_M = 2.0
DEFAULT_CEILING_M = 100.0
MIN_ALTITUDE_M = 1.0

# 802.11ac, 80 MHz, 2 spatial streams, 800 ns GI, MCS 0..8
DEFAULT_MCS_RATES_MBPS = (58.5, 117.0, 175.5, 234.0, 351.0, 468.0, 526.5, 585.0, 702.0)


def dbm_to_w(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def w_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w * 1000.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


class Point3(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class PolygonPrism:
    """A building: a simple footprint at ground level extruded to ``height``."""

    bottom_corners: tuple[tuple[float, float], ...]
    height: float
    id: int = 0

    @property
    def top_corners(self) -> tuple[Point3, ...]:
        return tuple(Point3(x, y, self.height) for x, y in self.bottom_corners)


@dataclass(frozen=True)
class UserEquipment:
    id: int
    position: Point3
    demand_bps: float


@dataclass(frozen=True)
class LinkBudget:
    frequency_hz: float
    bandwidth_hz: float
    tx_power_w: float
    tx_gain: float
    rx_gain: float
    noise_floor_w: float
    nlos_extra_loss_db: float
    channel_capacity_cap_bps: float | None = None

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @classmethod
    def from_db(
        cls,
        frequency_mhz: float = DEFAULT_FREQUENCY_MHZ,
        bandwidth_mhz: float = DEFAULT_BANDWIDTH_MHZ,
        tx_power_dbm: float = DEFAULT_TX_POWER_DBM,
        tx_gain_dbi: float = DEFAULT_GAIN_DBI,
        rx_gain_dbi: float = DEFAULT_GAIN_DBI,
        noise_floor_dbm: float = DEFAULT_NOISE_FLOOR_DBM,
        nlos_loss_db: float = DEFAULT_NLOS_LOSS_DB,
        c_max_mbps: float | None = None,
    ) -> "LinkBudget":
        return cls(
            frequency_hz=frequency_mhz * 1e6,
            bandwidth_hz=bandwidth_mhz * 1e6,
            tx_power_w=dbm_to_w(tx_power_dbm),
            tx_gain=db_to_linear(tx_gain_dbi),
            rx_gain=db_to_linear(rx_gain_dbi),
            noise_floor_w=dbm_to_w(noise_floor_dbm),
            nlos_extra_loss_db=nlos_loss_db,
            channel_capacity_cap_bps=None if c_max_mbps is None else c_max_mbps * 1e6,
        )


@dataclass(frozen=True)
class McsEntry:
    index: int
    rate_bps: float
    min_snr_linear: float


def default_mcs_table(bandwidth_hz: float) -> tuple[McsEntry, ...]:
    """Default rate ladder with Shannon-inverted thresholds at ``bandwidth_hz``."""
    return tuple(
        McsEntry(i, r * 1e6, shannon_min_snr(r * 1e6, bandwidth_hz))
        for i, r in enumerate(DEFAULT_MCS_RATES_MBPS)
    )


def shannon_min_snr(rate_bps: float, bandwidth_hz: float) -> float:
    return 2.0 ** (rate_bps / bandwidth_hz) - 1.0


@dataclass(frozen=True)
class Venue:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_min: float
    z_max: float

    def contains(self, p: Sequence[float], tol: float = 1e-9) -> bool:
        return (
            self.x_min - tol <= p[0] <= self.x_max + tol
            and self.y_min - tol <= p[1] <= self.y_max + tol
            and self.z_min - tol <= p[2] <= self.z_max + tol
        )


@dataclass(frozen=True)
class Scenario:
    venue: Venue
    buildings: tuple[PolygonPrism, ...]
    users: tuple[UserEquipment, ...]
    link_budget: LinkBudget
    mcs_table: tuple[McsEntry, ...]
    grid_step_m: float = DEFAULT_GRID_STEP_M
    name: str = ""
    slot: int = 0
    ceiling_m: float = DEFAULT_CEILING_M
    _meshes: Any = field(default=None, init=False, repr=False, compare=False)

    @property
    def tallest_building_m(self) -> float:
        return max((b.height for b in self.buildings), default=0.0)

    @property
    def total_demand_bps(self) -> float:
        return math.fsum(u.demand_bps for u in self.users)

    def user(self, ue_id: int) -> UserEquipment:
        for u in self.users:
            if u.id == ue_id:
                return u
        raise KeyError(ue_id)

    def meshes(self) -> list[geometry.PrismMesh]:
        """Triangulated buildings, built once per scenario."""
        if self._meshes is None:
            object.__setattr__(self, "_meshes", [geometry.triangulate(b) for b in self.buildings])
        return self._meshes


# ---------------------------------------------------------------------------
# loading


def _number(obj: dict, key: str, where: str, default: Any = ...) -> float:
    if key not in obj or obj[key] is None:
        if default is ...:
            raise ParseError(f"{where}: missing required field '{key}'")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ParseError(f"{where}: field '{key}' must be a number, got {val!r}")
    if not math.isfinite(val):
        raise ValidationError(f"{where}: field '{key}' must be finite")
    return float(val)


def _require_dict(obj: Any, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    return obj


def _require_list(obj: Any, where: str) -> list:
    if not isinstance(obj, list):
        raise ParseError(f"{where}: expected an array")
    return obj


def _parse_building(raw: Any, idx: int) -> PolygonPrism:
    where = f"buildings[{idx}]"
    raw = _require_dict(raw, where)
    corners_raw = _require_list(raw.get("bottom_corners"), f"{where}.bottom_corners")
    corners = []
    for j, c in enumerate(corners_raw):
        if not isinstance(c, (list, tuple)) or len(c) != 2:
            raise ParseError(f"{where}.bottom_corners[{j}]: expected [x, y]")
        x, y = (_number({"v": v}, "v", f"{where}.bottom_corners[{j}]") for v in c)
        corners.append((x, y))
    height = _number(raw, "height", where)
    bid = raw.get("id", idx)
    if not isinstance(bid, int) or isinstance(bid, bool):
        raise ParseError(f"{where}: id must be an integer")
    return PolygonPrism(tuple(corners), height, bid)


def _parse_user(raw: Any, idx: int) -> UserEquipment:
    where = f"users[{idx}]"
    raw = _require_dict(raw, where)
    uid = raw.get("id")
    if not isinstance(uid, int) or isinstance(uid, bool):
        raise ParseError(f"{where}: 'id' must be an integer")
    x = _number(raw, "x", where)
    y = _number(raw, "y", where)
    demand = _number(raw, "demand_mbps", where) * 1e6
    return UserEquipment(uid, Point3(x, y, 0.0), demand)


def _parse_mcs(raw: Any, bandwidth_hz: float) -> tuple[McsEntry, ...]:
    entries = []
    for i, e in enumerate(_require_list(raw, "mcs_table")):
        e = _require_dict(e, f"mcs_table[{i}]")
        index = e.get("index", i)
        if not isinstance(index, int) or isinstance(index, bool):
            raise ParseError(f"mcs_table[{i}]: index must be an integer")
        rate = _number(e, "rate_mbps", f"mcs_table[{i}]") * 1e6
        if "min_snr_db" in e:
            snr = db_to_linear(_number(e, "min_snr_db", f"mcs_table[{i}]"))
        elif "min_snr" in e:
            snr = _number(e, "min_snr", f"mcs_table[{i}]")
        else:
            snr = shannon_min_snr(rate, bandwidth_hz)
        entries.append(McsEntry(index, rate, snr))
    return tuple(entries)


def scenario_from_dict(data: Any) -> Scenario:
    """Build and validate a :class:`Scenario` from parsed JSON."""
    data = _require_dict(data, "scenario")

    buildings = tuple(
        _parse_building(b, i) for i, b in enumerate(_require_list(data.get("buildings", []), "buildings"))
    )
    users = tuple(_parse_user(u, i) for i, u in enumerate(_require_list(data.get("users"), "users")))

    radio = _require_dict(data.get("radio", {}), "radio")
    c_max = _number(data, "c_max_mbps", "scenario", None)
    lb = LinkBudget.from_db(
        frequency_mhz=_number(radio, "frequency_mhz", "radio", DEFAULT_FREQUENCY_MHZ),
        bandwidth_mhz=_number(radio, "bandwidth_mhz", "radio", DEFAULT_BANDWIDTH_MHZ),
        tx_power_dbm=_number(radio, "tx_power_dbm", "radio", DEFAULT_TX_POWER_DBM),
        tx_gain_dbi=_number(radio, "tx_gain_dbi", "radio", DEFAULT_GAIN_DBI),
        rx_gain_dbi=_number(radio, "rx_gain_dbi", "radio", DEFAULT_GAIN_DBI),
        noise_floor_dbm=_number(radio, "noise_floor_dbm", "radio", DEFAULT_NOISE_FLOOR_DBM),
        nlos_loss_db=_number(radio, "nlos_loss_db", "radio", DEFAULT_NLOS_LOSS_DB),
        c_max_mbps=c_max,
    )

    if "mcs_table" in data and data["mcs_table"] is not None:
        mcs = _parse_mcs(data["mcs_table"], lb.bandwidth_hz)
    else:
        mcs = default_mcs_table(lb.bandwidth_hz)

    grid_step = _number(data, "grid_step_m", "scenario", DEFAULT_GRID_STEP_M)
    slot = data.get("slot", 0)
    if not isinstance(slot, int) or isinstance(slot, bool):
        raise ParseError("scenario: 'slot' must be an integer")
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ParseError("scenario: 'name' must be a string")

    venue_raw = _require_dict(data.get("venue", {}), "venue")
    margin = _number(venue_raw, "margin_m", "venue", DEFAULT_MARGIN_M)
    ceiling = _number(venue_raw, "ceiling_m", "venue", DEFAULT_CEILING_M)
    if users:
        ux = [u.position.x for u in users]
        uy = [u.position.y for u in users]
        bbox = (min(ux) - margin, max(ux) + margin, min(uy) - margin, max(uy) + margin)
    else:
        bbox = (0.0, 0.0, 0.0, 0.0)
    tallest = max((b.height for b in buildings), default=0.0)
    venue = Venue(
        x_min=_number(venue_raw, "x_min", "venue", bbox[0]),
        x_max=_number(venue_raw, "x_max", "venue", bbox[1]),
        y_min=_number(venue_raw, "y_min", "venue", bbox[2]),
        y_max=_number(venue_raw, "y_max", "venue", bbox[3]),
        z_min=_number(venue_raw, "z_min", "venue", max(tallest, MIN_ALTITUDE_M)),
        z_max=_number(venue_raw, "z_max", "venue", ceiling),
    )

    scenario = Scenario(
        venue=venue,
        buildings=buildings,
        users=users,
        link_budget=lb,
        mcs_table=mcs,
        grid_step_m=grid_step,
        name=name,
        slot=slot,
        ceiling_m=ceiling,
    )
    validate(scenario)
    return scenario


def validate(s: Scenario) -> None:
    """Raise on the first violated invariant; returns nothing on success."""
    lb = s.link_budget
    for label, val in (
        ("radio.frequency", lb.frequency_hz),
        ("radio.bandwidth", lb.bandwidth_hz),
        ("radio.tx_power", lb.tx_power_w),
        ("radio.tx_gain", lb.tx_gain),
        ("radio.rx_gain", lb.rx_gain),
        ("radio.noise_floor", lb.noise_floor_w),
    ):
        if not val > 0:
            raise ValidationError(f"{label} must be positive")
    if lb.nlos_extra_loss_db < 0:
        raise ValidationError("radio.nlos_loss_db must be >= 0")
    if lb.channel_capacity_cap_bps is not None and not lb.channel_capacity_cap_bps > 0:
        raise ValidationError("c_max_mbps must be positive")

    if not s.grid_step_m > 0:
        raise ValidationError("grid_step_m must be positive")

    if not s.mcs_table:
        raise ValidationError("mcs_table must not be empty")
    for prev, cur in zip(s.mcs_table, s.mcs_table[1:]):
        if not cur.rate_bps > prev.rate_bps:
            raise ValidationError("mcs_table must be sorted by strictly ascending rate")
        if not cur.min_snr_linear > prev.min_snr_linear:
            raise ValidationError("mcs_table min_snr must increase strictly with rate")
    for e in s.mcs_table:
        if not e.min_snr_linear > 0:
            raise ValidationError(f"mcs_table entry {e.index}: min_snr must be positive")

    ids = set()
    for b in s.buildings:
        where = f"building {b.id}"
        if b.id in ids:
            raise ValidationError(f"duplicate building id {b.id}")
        ids.add(b.id)
        if len(b.bottom_corners) < 3:
            raise ValidationError(f"{where}: footprint needs at least 3 corners")
        if not b.height > 0:
            raise ValidationError(f"{where}: height must be positive")
        if not geometry.polygon_is_simple(b.bottom_corners):
            raise ValidationError(f"{where}: footprint is self-intersecting")
        if abs(geometry.polygon_area(b.bottom_corners)) <= 1e-12:
            raise ValidationError(f"{where}: footprint has zero area")

    v = s.venue
    if not (v.x_min <= v.x_max and v.y_min <= v.y_max):
        raise ValidationError("venue x/y bounds are inverted")
    if not v.z_min > 0:
        raise ValidationError("venue z_min must be above ground")
    if v.z_min < s.tallest_building_m:
        raise ValidationError(
            f"venue z_min {v.z_min} is below the tallest building ({s.tallest_building_m})"
        )
    if v.z_max > s.ceiling_m:
        raise ValidationError(f"venue z_max {v.z_max} exceeds the ceiling {s.ceiling_m}")
    if v.z_max < v.z_min:
        raise ValidationError("venue z_max is below z_min")

    if not s.users:
        raise ValidationError("scenario has no users")
    seen = set()
    max_rate = s.mcs_table[-1].rate_bps
    for u in s.users:
        if u.id in seen:
            raise ValidationError(f"duplicate user id {u.id}")
        seen.add(u.id)
        if not u.demand_bps > 0:
            raise ValidationError(f"user {u.id}: demand must be positive")
        p = u.position
        if p.z != 0.0:
            raise ValidationError(f"user {u.id}: users must be on the ground (z = 0)")
        if not (v.x_min <= p.x <= v.x_max and v.y_min <= p.y <= v.y_max):
            raise ValidationError(f"user {u.id}: position outside venue bounds")
        for b in s.buildings:
            if geometry.point_strictly_in_polygon((p.x, p.y), b.bottom_corners):
                raise ValidationError(f"user {u.id}: position inside building {b.id}")
        if u.demand_bps > max_rate:
            raise DemandExceedsTable(
                f"user {u.id}: demand {u.demand_bps / 1e6:g} Mbit/s exceeds the MCS table "
                f"maximum of {max_rate / 1e6:g} Mbit/s"
            )


def load_scenario(path: str | Path) -> Scenario:
    """Read, parse and validate a scenario JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    return loads_scenario(text)


def loads_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return scenario_from_dict(data)


def _r(x: float) -> float:
    # dB values are written with 12 significant digits so that dumps are a fixpoint
    return float(f"{x:.12g}")


def scenario_to_dict(s: Scenario) -> dict:
    lb = s.link_budget
    out: dict[str, Any] = {
        "name": s.name,
        "slot": s.slot,
        "grid_step_m": s.grid_step_m,
        "venue": {
            "x_min": s.venue.x_min,
            "x_max": s.venue.x_max,
            "y_min": s.venue.y_min,
            "y_max": s.venue.y_max,
            "z_min": s.venue.z_min,
            "z_max": s.venue.z_max,
            "ceiling_m": s.ceiling_m,
        },
        "buildings": [
            {"id": b.id, "bottom_corners": [[x, y] for x, y in b.bottom_corners], "height": b.height}
            for b in s.buildings
        ],
        "users": [
            {"id": u.id, "x": u.position.x, "y": u.position.y, "demand_mbps": u.demand_bps / 1e6}
            for u in s.users
        ],
        "radio": {
            "frequency_mhz": lb.frequency_hz / 1e6,
            "bandwidth_mhz": lb.bandwidth_hz / 1e6,
            "tx_power_dbm": _r(w_to_dbm(lb.tx_power_w)),
            "tx_gain_dbi": _r(linear_to_db(lb.tx_gain)),
            "rx_gain_dbi": _r(linear_to_db(lb.rx_gain)),
            "noise_floor_dbm": _r(w_to_dbm(lb.noise_floor_w)),
            "nlos_loss_db": lb.nlos_extra_loss_db,
        },
        "mcs_table": [
            {"index": e.index, "rate_mbps": e.rate_bps / 1e6, "min_snr": e.min_snr_linear}
            for e in s.mcs_table
        ],
    }
    if lb.channel_capacity_cap_bps is not None:
        out["c_max_mbps"] = lb.channel_capacity_cap_bps / 1e6
    return out


def dumps_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def dump_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps_json(scenario_to_dict(s)), encoding="utf-8")


# ---------------------------------------------------------------------------
# results


def point_dict(p: Sequence[float]) -> dict:
    return {"x": float(p[0]), "y": float(p[1]), "z": float(p[2])}


def link_dict(m) -> dict:
    return {
        "ue_id": m.ue_id,
        "distance_m": m.distance_m,
        "los": m.los,
        "snr_linear": m.snr_linear,
        "capacity_bps": m.capacity_bps,
        "demand_bps": m.demand_bps,
        "served_bps": m.served_bps,
        "demand_met": m.demand_met,
    }


def result_to_dict(result) -> dict:
    """Result document for a :class:`uavplace.pso.PlacementResult`."""
    ranking = []
    for rank, opt in enumerate(result.optimal_positions, start=1):
        ranking.append(
            {
                "rank": rank,
                "position": point_dict(opt.position),
                "fitness_bps": opt.fitness_bps,
                "los_count": opt.los_count,
                "mean_distance_m": opt.mean_distance_m,
                "total_capacity_bps": opt.total_capacity_bps,
                "c_max_violated": opt.c_max_violated,
                "per_ue": [link_dict(m) for m in opt.links],
            }
        )
    best = result.optimal_positions[0] if result.optimal_positions else None
    return {
        "method": result.method,
        "scenario": result.scenario_name,
        "slot": result.slot,
        "seed": result.seed,
        "g_best": point_dict(result.g_best) if result.g_best is not None else None,
        "max_fitness_bps": best.fitness_bps if best else 0.0,
        "iterations_run": result.iterations_run,
        "evaluations": result.evaluations,
        "fitness_history": list(result.fitness_history),
        "ranking": ranking,
        "per_ue": [link_dict(m) for m in best.links] if best else [],
        "region": result.region_summary,
    }


RANKING_CSV_HEADER = ("rank", "x", "y", "z", "fitness_bps", "los_count", "mean_distance_m")


def ranking_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RANKING_CSV_HEADER)
    for rank, opt in enumerate(result.optimal_positions, start=1):
        p = opt.position
        w.writerow([rank, repr(float(p[0])), repr(float(p[1])), repr(float(p[2])),
                    repr(opt.fitness_bps), opt.los_count, repr(opt.mean_distance_m)])
    return buf.getvalue()


def write_result(result, path: str | Path) -> tuple[Path, Path]:
    """Write ``result`` as JSON at ``path`` plus a ranking CSV next to it.

    Returns the JSON and CSV paths. Output is byte-identical for equal results.
    """
    path = Path(path)
    csv_path = path.with_suffix(".csv")
    path.write_text(dumps_json(result_to_dict(result)), encoding="utf-8")
    csv_path.write_text(ranking_csv(result), encoding="utf-8")
    return path, csv_path
