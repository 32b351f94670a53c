"""Command-line entry points: run, compare, plan, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .planner import FieldPolygon, plan_coverage
from .scenario import (
    ParseError,
    ValidationError,
    compare_controllers,
    load_scenario,
    run_scenario,
)
from .vehicles import NonFiniteState

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SIMULATION = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agrosim",
        description="Co-simulation workbench for automated agricultural vehicles.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write its trace")
    p_run.add_argument("scenario", type=Path, help="scenario JSON file")
    p_run.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default: ./out)")

    p_cmp = sub.add_parser("compare",
                           help="run a speed scenario once per controller variant")
    p_cmp.add_argument("scenario", type=Path, help="scenario JSON file")
    p_cmp.add_argument("--variants", default="raw,avg,butter,lffc",
                       help="comma-separated variant names")
    p_cmp.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default: ./out)")

    p_plan = sub.add_parser("plan", help="plan coverage for a polygon")
    p_plan.add_argument("polygon", type=Path,
                        help="JSON file: vertex list or {\"vertices\": [...]}")
    p_plan.add_argument("--width", type=float, required=True,
                        help="implement width in meters")
    p_plan.add_argument("--direction", type=float, default=0.0,
                        help="swath direction in radians (default 0)")

    p_serve = sub.add_parser("serve", help="start the HTTP/WebSocket service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=None,
                         help="overrides AGROSIM_PORT (default 8080)")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.scenario)
    summary = run_scenario(cfg, args.out / cfg.name)
    json.dump(summary.to_dict(), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.scenario)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    rows = compare_controllers(cfg, variants, args.out / cfg.name)
    json.dump(rows, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_plan(args: argparse.Namespace) -> int:
    try:
        raw = json.loads(args.polygon.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    vertices = raw["vertices"] if isinstance(raw, dict) else raw
    poly = FieldPolygon.from_vertices(vertices)
    plan = plan_coverage(poly, args.width, args.direction)
    json.dump(plan.to_dict(), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    port = args.port if args.port is not None else int(
        os.environ.get("AGROSIM_PORT", "8080"))
    uvicorn.run(create_app(), host=args.host, port=port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "compare": _cmd_compare,
               "plan": _cmd_plan, "serve": _cmd_serve}[args.command]
    try:
        return handler(args)
    except ParseError as exc:
        print(f"parse error: line {exc.line}: {exc.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"invalid config: {exc.field}: {exc.reason}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, KeyError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NonFiniteState as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
