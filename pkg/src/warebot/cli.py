"""Command-line interface: planning, benchmarking, simulation, calibration,
tracking metrics, and the operator service."""

import argparse
import csv
import json
import os
import sys

from .benchmark import benchmark_planners, parse_sizes, write_benchmark_csv
from .kalman import write_filter_trace
from .mapping import load_map
from .planner import astar_search
from .sim import (
    SimConfig,
    SimNoise,
    calibrate_scale,
    read_episode_csv,
    rmse,
    rmse_metric,
    run_episode,
    sim_config_from_dict,
    write_episode_csv,
)

_OPEN_SET_NAMES = {"heap": "binary_heap", "list": "linked_list"}


def _cell(text: str):
    h, _, v = text.partition(",")
    return (int(h), int(v))


def _load_sim_config(args) -> SimConfig:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = sim_config_from_dict(json.load(fh))
    else:
        cfg = SimConfig()
    if getattr(args, "seed", None) is not None:
        cfg = SimConfig(**{**cfg.__dict__, "seed": args.seed})
    if getattr(args, "noise", None) == "off":
        cfg = SimConfig(**{**cfg.__dict__, "noise": SimNoise.off()})
    return cfg


def cmd_plan(args):
    ogm = load_map(args.map)
    path = astar_search(_cell(args.start), _cell(args.end), ogm,
                        _OPEN_SET_NAMES[args.open_set])
    for h, v in path.cells:
        print(f"{h} {v}")
    return 0


def cmd_bench(args):
    rows = benchmark_planners(parse_sizes(args.sizes), n_pairs=args.pairs,
                              obstacle_density=args.density, seed=args.seed)
    if args.out == "-":
        write_benchmark_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            write_benchmark_csv(rows, fh)
    return 0


def cmd_simulate(args):
    cfg = _load_sim_config(args)
    trace = [] if args.filter_trace else None
    log = run_episode(args.map, _cell(args.start), _cell(args.goal), cfg,
                      filter_trace=trace)
    with open(args.out, "w", newline="") as fh:
        write_episode_csv(fh, log)
    if args.filter_trace:
        with open(args.filter_trace, "w", newline="") as fh:
            write_filter_trace(fh, trace)
    rx, rz, rt = rmse(log)
    print(f"outcome={log.outcome} ticks={len(log)} "
          f"rmse_x={rx:.6f} rmse_z={rz:.6f} rmse_track={rt:.6f}")
    return 0


def cmd_calibrate(args):
    pairs = []
    with open(args.pairs, newline="") as fh:
        for row in csv.reader(fh):
            try:
                pairs.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                continue  # header or blank line
    k = calibrate_scale(pairs)
    print(f"{k:.6f}")
    return 0


def cmd_rmse(args):
    with open(args.episode, newline="") as fh:
        log = read_episode_csv(fh)
    rx, rz, rt = rmse(log)
    print(f"rmse_x={rx:.6f} rmse_z={rz:.6f} rmse_track={rt:.6f}")
    if args.scale_h and args.scale_v:
        mx, mz, mt = rmse_metric(log, args.scale_h, args.scale_v)
        print(f"metric_x={mx:.6f} metric_z={mz:.6f} metric_track={mt:.6f}")
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import ServiceConfig, create_app

    bind = os.environ.get("WAREBOT_BIND", "127.0.0.1:8000")
    host, _, port = bind.partition(":")
    host = args.host or host or "127.0.0.1"
    port = args.port or int(port or 8000)
    config = ServiceConfig(
        ogm=load_map(args.map),
        start_cell=_cell(args.start),
        sim=_load_sim_config(args),
        speed=args.speed,
    )
    uvicorn.run(create_app(config), host=host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="warebot")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan a path on a map file")
    p.add_argument("--map", required=True)
    p.add_argument("--start", required=True, help="h,v")
    p.add_argument("--end", required=True, help="h,v")
    p.add_argument("--open-set", choices=("heap", "list"), default="heap")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="time the planners on random maps")
    p.add_argument("--sizes", default="168x120,336x240,672x480")
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--density", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("simulate", help="run one closed-loop episode")
    p.add_argument("--map", required=True)
    p.add_argument("--start", required=True, help="h,v")
    p.add_argument("--goal", required=True, help="h,v")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise", choices=("default", "off"), default="default")
    p.add_argument("--out", default="episode.csv")
    p.add_argument("--filter-trace", default=None)
    p.add_argument("--config", default=None, help="sim parameter JSON file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit the map-units-per-metre scale")
    p.add_argument("--pairs", required=True, help="CSV of real,measured rows")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("rmse", help="tracking error of a recorded episode")
    p.add_argument("--episode", required=True)
    p.add_argument("--scale-h", type=float, default=None)
    p.add_argument("--scale-v", type=float, default=None)
    p.set_defaults(func=cmd_rmse)

    p = sub.add_parser("serve", help="start the operator service")
    p.add_argument("--map", required=True)
    p.add_argument("--start", default="0,0", help="h,v")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--speed", type=float, default=1.0,
                   help="real-time multiple; 0 runs unpaced")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise", choices=("default", "off"), default="default")
    p.add_argument("--config", default=None, help="sim parameter JSON file")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
