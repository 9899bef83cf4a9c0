"""Command-line entry points.

Verbs: run a scenario file, sweep a matrix of scenario files, serve the
live session service, or run a packaged demo. Exit code 0 on success,
2 on validation problems (bad files, bad configuration), 3 on runtime
failures. COOPTRAJ_LOG controls the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import CoopTrajError
from .harness import matrix_to_csv, run_matrix, run_scenario
from .scenario import DEMO_NAMES, Scenario, load_demo

log = logging.getLogger("cooptraj")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cooptraj",
        description="Cooperative trajectory planning engine and simulator",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="trace/matrix file format")

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario", type=Path)
    common(p_run)

    p_matrix = sub.add_parser("matrix", help="run every scenario JSON in a directory")
    p_matrix.add_argument("directory", type=Path)
    p_matrix.add_argument("--reps", type=int, default=1)
    common(p_matrix)

    p_demo = sub.add_parser("demo", help="run a packaged demo scenario")
    p_demo.add_argument("name", choices=DEMO_NAMES)
    common(p_demo)

    p_serve = sub.add_parser("serve", help="start the live session service")
    p_serve.add_argument("--addr", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8700)
    p_serve.add_argument("--ui", type=Path, default=Path("frontend/dist"),
                         help="directory of UI static assets")
    p_serve.add_argument("--rtf", type=float, default=1.0,
                         help="execution real-time factor (0 = as fast as possible)")
    return parser


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _report_outputs(report, out: Path | None, fmt: str) -> None:
    if out is None:
        sys.stdout.write(report.to_json())
        return
    base = report.scenario_id
    _write_text(out / f"{base}.report.json", report.to_json())
    if fmt == "csv":
        _write_text(out / f"{base}.trace.csv", report.trace.to_csv())
    else:
        rows = [
            dict(zip("t,px,py,vx,vy,uHx,uHy,uAx,uAy,conflict".split(","), map(float, row)))
            for row in zip(
                report.trace.t,
                report.trace.positions[:, 0], report.trace.positions[:, 1],
                report.trace.velocities[:, 0], report.trace.velocities[:, 1],
                report.trace.u_h[:, 0], report.trace.u_h[:, 1],
                report.trace.u_a[:, 0], report.trace.u_a[:, 1],
                report.trace.conflict,
            )
        ]
        _write_text(out / f"{base}.trace.json", json.dumps(rows) + "\n")
    log.info("wrote outputs for %s to %s", report.scenario_id, out)


def _cmd_run(args) -> int:
    scenario = Scenario.from_json(args.scenario.read_text("utf-8"))
    report = run_scenario(scenario, seed=args.seed)
    _report_outputs(report, args.out, args.format)
    return EXIT_OK


def _cmd_demo(args) -> int:
    scenario = load_demo(args.name)
    report = run_scenario(scenario, seed=args.seed)
    _report_outputs(report, args.out, args.format)
    return EXIT_OK


def _cmd_matrix(args) -> int:
    files = sorted(args.directory.glob("*.json"))
    if not files:
        raise ValueError(f"no scenario files in {args.directory}")
    scenarios = [Scenario.from_json(f.read_text("utf-8")) for f in files]
    if args.seed is not None:
        from dataclasses import replace

        scenarios = [replace(s, seed=args.seed) for s in scenarios]
    rows = run_matrix(scenarios, repetitions=args.reps)
    if args.out is None:
        sys.stdout.write(matrix_to_csv(rows))
    elif args.format == "csv":
        _write_text(args.out / "matrix.csv", matrix_to_csv(rows))
    else:
        _write_text(args.out / "matrix.json", json.dumps(rows, indent=2) + "\n")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    ui = str(args.ui) if args.ui and args.ui.is_dir() else None
    if args.ui and ui is None:
        log.warning("UI directory %s not found; serving the protocol only", args.ui)
    app = create_app(realtime_factor=args.rtf, ui_dir=ui)
    uvicorn.run(app, host=args.addr, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("COOPTRAJ_LOG", "WARNING"))
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "run":
            return _cmd_run(args)
        if args.verb == "matrix":
            return _cmd_matrix(args)
        if args.verb == "demo":
            return _cmd_demo(args)
        if args.verb == "serve":
            return _cmd_serve(args)
        parser.error(f"unknown verb {args.verb}")
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        log.error("validation error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CoopTrajError as exc:
        log.error("runtime error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
