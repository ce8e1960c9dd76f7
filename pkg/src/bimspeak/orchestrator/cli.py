"""Command line entry points: serve, repl, run-experiment."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .config import EngineConfig
from .engine import Engine


def _demo_script_path() -> str:
    return str(resources.files("bimspeak.data").joinpath("demo/script.json"))


def _load_config(args: argparse.Namespace) -> EngineConfig:
    if args.config:
        config = EngineConfig.from_file(args.config)
    else:
        config = EngineConfig(backend="mock", mock_script_path=_demo_script_path())
    if getattr(args, "mock_script", None):
        config.backend = "mock"
        config.mock_script_path = args.mock_script
    config.validate()
    return config


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    engine = Engine(_load_config(args))
    static = args.static_dir
    if static is None:
        bundled = Path(__file__).resolve().parents[3] / "frontend" / "dist"
        static = str(bundled) if bundled.is_dir() else None
    app = create_app(engine, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_repl(args: argparse.Namespace) -> int:
    engine = Engine(_load_config(args))
    session = engine.create_session()
    print(f"session {session.id}; empty line to exit")
    prompt = "you> "
    while True:
        try:
            line = input(prompt)
        except EOFError:
            break
        if not line.strip():
            break
        try:
            if session.pending is not None:
                outcome = engine.answer_question(session, line)
            else:
                outcome = engine.handle_utterance(session, line)
        except Exception as exc:  # REPL survives anything
            print(f"error: {exc}")
            continue
        reply = session.turns[-1].text
        print(f"bim [{outcome.status}]> {reply}")
        prompt = "answer> " if outcome.status == "NeedsAnswer" else "you> "
    return 0


def cmd_run_experiment(args: argparse.Namespace) -> int:
    from ..experiment import compute_accuracy, parse_code_list, run_experiment

    if args.backend == "live" and not args.confirm_live:
        print("live runs cost money; pass --confirm-live to proceed", file=sys.stderr)
        return 2
    codes = parse_code_list(args.codes)
    records = run_experiment(
        codes,
        args.runs,
        args.out,
        backend=args.backend,
        seed=args.seed,
        violation_p=args.violation_p,
        check_enabled=not args.no_check,
        jobs=args.jobs,
        resume=args.resume,
    )
    table = compute_accuracy(records)
    print(f"{table.total} runs: material {table.material_accuracy}, thickness {table.thickness_accuracy}")
    print(f"records: {Path(args.out) / 'records.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bimspeak", description="dialogue-driven wall detailing engine")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP/WebSocket server")
    serve.add_argument("--config", help="engine config JSON")
    serve.add_argument("--mock-script", help="mock script path (forces mock backend)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--static-dir", help="frontend build to serve at /")
    serve.set_defaults(fn=cmd_serve)

    repl = sub.add_parser("repl", help="single text-mode session")
    repl.add_argument("--config", help="engine config JSON")
    repl.add_argument("--mock-script", help="mock script path (forces mock backend)")
    repl.set_defaults(fn=cmd_repl)

    exp = sub.add_parser("run-experiment", help="batch evaluation over prompt codes")
    exp.add_argument("--codes", default="CE1,CE2,CI1,CI2,TE1,TE2,TI1,TI2")
    exp.add_argument("--runs", type=int, default=30)
    exp.add_argument("--backend", choices=("mock", "live"), default="mock")
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--violation-p", type=float, default=0.3, help="mock fault-injection probability")
    exp.add_argument("--no-check", action="store_true", help="disable the compliance check loop")
    exp.add_argument("--jobs", type=int, default=1)
    exp.add_argument("--resume", action="store_true", help="keep existing records, run the rest")
    exp.add_argument("--confirm-live", action="store_true")
    exp.add_argument("--out", required=True, help="output directory")
    exp.set_defaults(fn=cmd_run_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
