"""Command-line entry points.

The CLI is a thin layer over the package: each subcommand parses flags,
calls the corresponding library function, and reports errors with their
file/line context. Exit code 0 on success, 2 on any diagnosed failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .errors import EngineError
from .replay import (
    InteractiveFeedback,
    OracleFeedback,
    RunConfig,
    format_report_table,
    run_episode,
)
from .semantics import KnowledgeStatement
from .space import calibrate
from .storage import (
    StoredRun,
    load_embeddings,
    save_embeddings,
    save_episode,
    save_run,
)
from .synth import ScenarioSpec, generate_synthetic_episode
from .assessment import CompetenceMemory


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compass",
        description="Online competence assessment over embedding vectors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="solve the kernel width from a reference collection")
    cal.add_argument("--reference", required=True, help="embedding collection (JSON Lines)")
    cal.add_argument("--out", required=True, help="output run document (calibration + empty memory)")
    cal.add_argument("--mean-target", type=float, default=0.5)
    cal.add_argument("--tolerance", type=float, default=1e-9)

    run = sub.add_parser("run", help="replay an episode with terminal or ground-truth feedback")
    _add_run_flags(run)
    run.add_argument("--mode", required=True, choices=("interactive", "oracle"))

    serve = sub.add_parser("serve", help="replay an episode behind the HTTP feedback service")
    _add_run_flags(serve)
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--pace-ms", type=int, default=500, help="delay between auto-advanced frames")
    serve.add_argument("--manual", action="store_true", help="advance only on POST /api/step")
    serve.add_argument("--panel", default=None, help="directory of built panel assets to serve at /")

    synth = sub.add_parser("synth", help="generate a clustered synthetic episode + reference")
    synth.add_argument("--spec", required=True, help="scenario spec (JSON)")
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--out-episode", required=True)
    synth.add_argument("--out-reference", required=True)

    return parser


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--episode", required=True, help="episode file (JSON Lines)")
    sub.add_argument("--calibration", required=True, help="run document with the calibration")
    sub.add_argument("--state", default=None, help="run state to resume from and persist to")
    sub.add_argument("--threshold", type=float, default=0.5)
    sub.add_argument(
        "--knowledge",
        action="append",
        default=[],
        metavar="POLARITY:PHRASE",
        help="knowledge statement, e.g. 'incompetent:nature' (repeatable)",
    )
    sub.add_argument("--atlas", default=None, help="labeled atlas for knowledge statements")
    sub.add_argument("--wordvecs", default=None, help="word2vec-text vectors for knowledge statements")
    sub.add_argument("--report", default=None, help="event log output (JSON Lines)")


def _run_config(args: argparse.Namespace, mode: str) -> RunConfig:
    return RunConfig(
        mode=mode,
        episode_path=args.episode,
        calibration_path=args.calibration,
        run_state_path=args.state,
        threshold=args.threshold,
        knowledge=tuple(KnowledgeStatement.parse(text) for text in args.knowledge),
        atlas_path=args.atlas,
        lexicon_path=args.wordvecs,
        report_path=args.report,
        port=getattr(args, "port", 8000),
        pace_ms=getattr(args, "pace_ms", 500),
        manual=getattr(args, "manual", False),
    )


def _cmd_calibrate(args: argparse.Namespace) -> int:
    reference = load_embeddings(args.reference)
    model = calibrate(
        reference,
        mean_target=args.mean_target,
        tolerance=args.tolerance,
        provenance={"reference": str(args.reference)},
    )
    save_run(StoredRun(calibration=model, memory=CompetenceMemory()), args.out)
    print(
        f"calibrated kernel width {model.kernel_width!r} over {model.reference_count} "
        f"descriptors (dimension {model.dimension}) -> {args.out}"
    )
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = _run_config(args, args.mode)
    if args.mode == "oracle":
        provider = OracleFeedback()
    else:
        provider = InteractiveFeedback(sys.stdin, sys.stdout)
    report = run_episode(config, provider)
    print(format_report_table(report))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    # Imported here so the core subcommands work without the service stack.
    import uvicorn

    from .replay import load_run_inputs
    from .service import ReplaySession, create_app

    config = _run_config(args, "serve")
    frames, calibration, memory, expert = load_run_inputs(config)
    session = ReplaySession(
        frames,
        calibration,
        memory,
        config.threshold,
        expert=expert,
        pace_ms=config.pace_ms,
        manual=config.manual,
        state_path=config.run_state_path,
        report_path=config.report_path,
    )
    app = create_app(session, panel_dir=args.panel)
    session.start()
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except OSError as exc:
        print(f"error: could not bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 2
    finally:
        session.stop()
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = ScenarioSpec.from_json_file(args.spec)
    frames, reference = generate_synthetic_episode(spec, args.seed)
    save_episode(frames, args.out_episode)
    save_embeddings(reference, args.out_reference)
    print(
        f"wrote {len(frames)} frames -> {args.out_episode} and "
        f"{len(reference)} reference descriptors -> {args.out_reference}"
    )
    return 0


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "run": _cmd_run,
    "serve": _cmd_serve,
    "synth": _cmd_synth,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
