"""Command-line entry points: run missions, analyze clouds, serve, replay, report."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

LOG_ENV = "FORESTBENCH_LOG"


def _setup_logging() -> None:
    level = os.environ.get(LOG_ENV, "info").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _load_config(args):
    from .mission import MissionConfig, get_preset

    if args.config:
        cfg = MissionConfig.from_json(args.config)
    elif args.preset:
        cfg = get_preset(args.preset, seed=args.seed)
    else:
        raise SystemExit("either --config or --preset is required")
    if args.seed is not None:
        cfg.seed = args.seed
        world = cfg.world.to_dict()
        world["seed"] = args.seed
        from .simworld import WorldSpec

        cfg.world = WorldSpec.from_dict(world)
    if args.out:
        cfg.output_dir = args.out
    return cfg


def cmd_sim_run(args) -> int:
    from .mission import MissionSession

    cfg = _load_config(args)
    t0 = time.time()
    session = MissionSession(cfg)
    report = session.run()
    wall = time.time() - t0
    print(report.summary_text())
    print(f"wall clock        : {wall:.1f} s")
    print(f"artifacts         : {Path(cfg.output_dir).resolve()}")
    return 0


def cmd_analyze(args) -> int:
    from .mission.analyze import analyze_cloud
    from .plyio import PlyError

    try:
        inventory = analyze_cloud(args.cloud, args.out)
    except PlyError as err:
        print(f"error: malformed PLY: {err}", file=sys.stderr)
        return 2
    with_dbh = sum(1 for t in inventory.trees.values() if t.dbh is not None)
    print(f"trees: {len(inventory.trees)} ({with_dbh} with DBH)")
    print(f"artifacts: {Path(args.out).resolve()}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .mission import MissionSession
    from .service.server import create_app

    cfg = _load_config(args)
    session = MissionSession(cfg)
    app = create_app(session, speed=args.speed)
    print(f"serving on ws://{args.host}:{args.port}/ws (speed x{args.speed})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_replay(args) -> int:
    from .service.replay import iter_replay, serve_replay

    if args.port:
        serve_replay(args.log, args.port, args.speed, host=args.host)
        return 0
    for line in iter_replay(args.log, args.speed):
        print(line)
    return 0


def cmd_report(args) -> int:
    from .metrics import MissionReport

    path = Path(args.run_dir) / "report.json" if Path(args.run_dir).is_dir() else Path(args.run_dir)
    report = MissionReport.load(path)
    print(report.summary_text())
    if args.json:
        print(report.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forestbench",
        description="Deterministic synthetic-forest mission workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="simulation commands")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)
    run = sim_sub.add_parser("run", help="run a mission headless")
    _add_config_args(run)
    run.set_defaults(func=cmd_sim_run)

    analyze = sub.add_parser("analyze", help="analyze a PLY cloud offline")
    analyze.add_argument("cloud", help="input PLY (binary little-endian, xyz)")
    analyze.add_argument("--out", default="analysis_out", help="output directory")
    analyze.set_defaults(func=cmd_analyze)

    serve = sub.add_parser("serve", help="host the live mission service")
    _add_config_args(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8800)
    serve.add_argument("--speed", type=float, default=1.0,
                       help="simulated seconds per wall second")
    serve.set_defaults(func=cmd_serve)

    replay = sub.add_parser("replay", help="re-emit a recorded event log")
    replay.add_argument("log", help="events.jsonl from a prior run")
    replay.add_argument("--speed", type=float, default=1.0)
    replay.add_argument("--host", default="127.0.0.1")
    replay.add_argument("--port", type=int, default=0,
                        help="serve over WebSocket instead of stdout")
    replay.set_defaults(func=cmd_replay)

    report = sub.add_parser("report", help="print a stored mission report")
    report.add_argument("run_dir", help="run directory or report.json path")
    report.add_argument("--json", action="store_true", help="also dump raw JSON")
    report.set_defaults(func=cmd_report)
    return parser


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="mission config JSON path")
    p.add_argument("--preset", help="built-in preset name (see README)")
    p.add_argument("--seed", type=int, default=None, help="override the seed")
    p.add_argument("--out", help="output directory override")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
