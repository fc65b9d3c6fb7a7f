"""Command-line interface.

Exit codes: 0 success, 2 parse/validation error, 3 empty region,
4 demand exceeds the MCS table, 5 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__, geometry, oracle, pso, radio, region, scenarios
from .errors import EXIT_IO, EXIT_OK, EXIT_VALIDATION, PlacementError, ValidationError
from .scenario import (
    Scenario,
    dump_scenario,
    dumps_json,
    link_dict,
    load_scenario,
    point_dict,
    scenario_to_dict,
    validate,
    write_result,
)


def _resolve(path: str) -> Path:
    p = Path(path)
    if not p.exists() and path in scenarios.BUNDLED:
        return scenarios.bundled_path(path)
    return p


def _load(args) -> tuple[Scenario, Path]:
    path = _resolve(args.scenario)
    s = load_scenario(path)
    if getattr(args, "grid_step", None) is not None:
        s = dataclasses.replace(s, grid_step_m=args.grid_step)
        validate(s)
    return s, path


def _fmt_table(result, n: int = 5) -> str:
    rows = [f"{'rank':>4}  {'x':>8} {'y':>8} {'z':>8}  {'fitness Mbit/s':>14}  {'LoS':>5}  {'mean dist m':>11}"]
    for rank, o in enumerate(result.optimal_positions[:n], start=1):
        p = o.position
        rows.append(
            f"{rank:>4}  {p.x:>8.2f} {p.y:>8.2f} {p.z:>8.2f}  {o.fitness_bps / 1e6:>14.3f}  "
            f"{o.los_count:>2}/{len(o.links):<2}  {o.mean_distance_m:>11.2f}"
        )
    return "\n".join(rows)


def _write_visited(result, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "y", "z", "fitness_bps", "los_count"))
        for p, fit, los in result.visited:
            w.writerow((repr(p.x), repr(p.y), repr(p.z), repr(fit), los))


def _run_pipeline(args, method: str) -> int:
    timings = {}
    t = time.perf_counter()
    s, path = _load(args)
    timings["load"] = time.perf_counter() - t

    t = time.perf_counter()
    spheres = region.build_spheres(s, los_assumed=not args.nlos_spheres)
    reg = region.select_region(spheres, s)
    summary = region.region_report(reg, spheres)
    timings["region"] = time.perf_counter() - t

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    if args.dump_region:
        (out / "region.json").write_text(dumps_json(summary), encoding="utf-8")
        outputs.append("region.json")

    t = time.perf_counter()
    if method == "pso":
        cfg = pso.PsoConfig(
            particles=args.particles,
            max_iterations=args.iterations,
            seed=args.seed,
            threads=args.threads,
        )
        result = pso.optimize(reg, s, cfg)
        config = dataclasses.asdict(cfg)
    else:
        res = oracle.grid_search(reg, s, cap=args.cap)
        result = oracle.as_placement(res, reg, s)
        config = {"cap": args.cap}
    result = dataclasses.replace(result, region_summary=summary)
    timings["optimize"] = time.perf_counter() - t

    write_result(result, out / "result.json")
    _write_visited(result, out / "visited.csv")
    outputs += ["result.json", "result.csv", "visited.csv"]

    if not args.no_plots:
        t = time.perf_counter()
        from . import plotting

        if result.fitness_history:
            plotting.plot_convergence(result.fitness_history, out / "convergence.png")
            outputs.append("convergence.png")
        plotting.plot_candidates(result, s, out / "candidates.png")
        outputs.append("candidates.png")
        timings["plots"] = time.perf_counter() - t

    config.pop("threads", None)
    manifest = {
        "tool": "uavplace",
        "version": __version__,
        "command": method if method == "oracle" else "solve",
        "scenario": {"path": str(path), "sha256": hashlib.sha256(path.read_bytes()).hexdigest()},
        "config": {
            "optimizer": config,
            "threads": args.threads,
            "grid_step_m": s.grid_step_m,
            "sphere_mode": "nlos" if args.nlos_spheres else "los",
            "radio": scenario_to_dict(s)["radio"],
            "c_max_mbps": None if s.link_budget.channel_capacity_cap_bps is None
            else s.link_budget.channel_capacity_cap_bps / 1e6,
        },
        "timings_s": timings,
        "outputs": outputs,
    }
    (out / "manifest.json").write_text(dumps_json(manifest), encoding="utf-8")

    print(f"scenario {s.name or path.name}: {summary['candidate_count']} candidates, "
          f"associated UEs {summary['associated_ues']}, uncovered {summary['uncovered_ues']}")
    if method == "pso":
        print(f"iterations {result.iterations_run}, evaluations {result.evaluations}, "
              f"co-optimal positions {len(result.optimal_positions)}")
    else:
        print(f"evaluations {result.evaluations}, co-optimal positions {len(result.optimal_positions)}")
    print(_fmt_table(result))
    return EXIT_OK


def cmd_solve(args) -> int:
    return _run_pipeline(args, "pso")


def cmd_oracle(args) -> int:
    return _run_pipeline(args, "oracle")


def cmd_los_check(args) -> int:
    s, _ = _load(args)
    uav = tuple(args.uav)
    if args.ue_id is not None:
        ue = tuple(s.user(args.ue_id).position)
    elif args.ue is not None:
        ue = tuple(args.ue)
    else:
        raise ValidationError("either --ue or --ue-id is required")
    if uav == ue:
        raise ValidationError("UAV and UE positions coincide")
    blockers = geometry.blocking_buildings(uav, ue, s.meshes())
    doc = {"uav": point_dict(uav), "ue": point_dict(ue), "los": not blockers, "blocking_buildings": blockers}
    if args.json:
        print(dumps_json(doc), end="")
    else:
        print("LoS" if not blockers else "NLoS blocked by buildings " + ", ".join(map(str, blockers)))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    s, _ = _load(args)
    uav = tuple(args.uav)
    if not s.venue.contains(uav):
        raise ValidationError(f"position {uav} is outside the venue bounds")
    rep = radio.evaluate_links(uav, s)
    doc = {
        "position": point_dict(uav),
        "per_ue": [link_dict(m) for m in rep.links],
        "aggregate_bps": rep.aggregate_bps,
        "total_capacity_bps": rep.total_capacity_bps,
        "c_max_bps": s.link_budget.channel_capacity_cap_bps,
        "c_max_violated": rep.c_max_violated,
        "los_count": rep.los_count,
    }
    if args.out:
        Path(args.out).write_text(dumps_json(doc), encoding="utf-8")
    print(f"{'UE':>4} {'dist m':>9} {'link':>5} {'SNR dB':>8} {'cap Mbit/s':>11} {'demand':>8} {'served':>8}")
    for m in rep.links:
        snr_db = 10 * __import__("math").log10(m.snr_linear)
        print(f"{m.ue_id:>4} {m.distance_m:>9.2f} {'LoS' if m.los else 'NLoS':>5} {snr_db:>8.2f} "
              f"{m.capacity_bps / 1e6:>11.3f} {m.demand_bps / 1e6:>8.2f} {m.served_bps / 1e6:>8.3f}")
    print(f"aggregate R = {rep.aggregate_bps / 1e6:.6f} Mbit/s ({rep.aggregate_bps!r} bit/s); "
          f"sum C = {rep.total_capacity_bps / 1e6:.3f} Mbit/s; c_max violated: {rep.c_max_violated}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.list:
        for name in sorted(scenarios.TEMPLATES):
            print(name)
        return EXIT_OK
    if args.template not in scenarios.TEMPLATES:
        raise ValidationError(f"unknown template {args.template!r}")
    s = scenarios.generate(args.template, args.seed)
    dump_scenario(s, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavplace", description="UAV access point placement")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pipeline=True):
        p.add_argument("--scenario", required=True, help="scenario JSON path or bundled name")
        p.add_argument("--grid-step", type=float, default=None, help="override grid step (m)")
        if pipeline:
            p.add_argument("--out", default="out", help="output directory")
            p.add_argument("--dump-region", action="store_true", help="write region.json")
            p.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
            p.add_argument("--nlos-spheres", action="store_true", help="size spheres with the NLoS penalty")
            p.add_argument("--no-plots", action="store_true", help="skip PNG figures")

    p = sub.add_parser("solve", help="run the swarm optimiser")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--particles", type=int, default=30)
    p.add_argument("--iterations", type=int, default=100)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exhaustive search over the feasible region")
    common(p)
    p.add_argument("--cap", type=int, default=oracle.DEFAULT_CANDIDATE_CAP)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("los-check", help="classify one UAV-UE link")
    common(p, pipeline=False)
    p.add_argument("--uav", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--ue", type=float, nargs=3, metavar=("X", "Y", "Z"))
    p.add_argument("--ue-id", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_los_check)

    p = sub.add_parser("evaluate", help="per-UE link metrics at a UAV position")
    common(p, pipeline=False)
    p.add_argument("--uav", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--out", default=None, help="write metrics JSON here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gen", help="write a scenario from a template")
    p.add_argument("--template", default="usecase_a")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="scenario.json")
    p.add_argument("--list", action="store_true", help="list template names")
    p.set_defaults(func=cmd_gen)
    return parser


def _fail(exc_kind: str, message: str, code: int, out: str | None) -> int:
    doc = {"error": exc_kind, "message": message, "exit_code": code}
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    if out:
        try:
            d = Path(out)
            if d.is_dir() or not d.suffix:
                d.mkdir(parents=True, exist_ok=True)
                (d / "error.json").write_text(dumps_json(doc), encoding="utf-8")
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = getattr(args, "out", None) if args.command in ("solve", "oracle") else None
    try:
        return args.func(args)
    except PlacementError as exc:
        return _fail(exc.kind, str(exc), exc.exit_code, out)
    except OSError as exc:
        return _fail("IOError", str(exc), EXIT_IO, out)
    except ValueError as exc:
        return _fail("ValidationError", str(exc), EXIT_VALIDATION, out)


if __name__ == "__main__":
    sys.exit(main())
