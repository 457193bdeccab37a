"""Command-line front door: analyze a deck or serve the HTTP API."""

from __future__ import annotations

import argparse
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from .pipeline import PipelineConfig, run_pipeline, utc_now
from .provider import ProviderConfig, make_transport
from .schema import serialize_document
from .service import MAX_UPLOAD_BYTES, fetch_pdf

FIXED_CLOCK_INSTANT = datetime(2000, 1, 1, tzinfo=timezone.utc)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deckqa",
        description="Generate a structured question annotation for a PDF slide deck.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="run the pipeline over one deck")
    analyze.add_argument("--input", type=Path, help="path to a PDF file")
    analyze.add_argument("--url", help="URL of a PDF to fetch")
    analyze.add_argument("--out", type=Path, help="write the final document here (default: stdout)")
    mode = analyze.add_mutually_exclusive_group()
    mode.add_argument("--mock", dest="mode", action="store_const", const="mock",
                      help="deterministic offline provider (default)")
    mode.add_argument("--live", dest="mode", action="store_const", const="live",
                      help="live HTTP provider (needs LLM_API_KEY)")
    analyze.set_defaults(mode="mock")
    analyze.add_argument("--seed", type=int, default=0, help="mock provider seed")
    analyze.add_argument("--window-size", type=int, default=8)
    analyze.add_argument("--overlap", type=int, default=2)
    analyze.add_argument("--render-scale", type=float, default=2.0)
    analyze.add_argument("--debug-dir", type=Path, help="dump per-phase JSON into this directory")
    analyze.add_argument("--fixed-clock", action="store_true",
                         help="pin processed_at to 2000-01-01T00:00:00Z for reproducible output")
    analyze.add_argument("--deck-citation", default="", help="citation string for deck_metadata")
    analyze.add_argument("--deck-url", default=None, help="source URL recorded in deck_metadata")

    serve = commands.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=int(os.environ.get("PORT", "8080")))
    return parser


def _cmd_analyze(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if (args.input is None) == (args.url is None):
        parser.error("provide exactly one of --input or --url")
    if args.input is not None:
        try:
            pdf_bytes = args.input.read_bytes()
        except OSError as exc:
            print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
            return 1
    else:
        try:
            pdf_bytes = fetch_pdf(args.url, MAX_UPLOAD_BYTES)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1

    config = PipelineConfig(
        window_size=args.window_size,
        overlap=args.overlap,
        render_scale=args.render_scale,
        provider=ProviderConfig(mode=args.mode, seed=args.seed),
        clock=(lambda: FIXED_CLOCK_INSTANT) if args.fixed_clock else utc_now,
        debug_dir=args.debug_dir,
        source_file=args.input.name if args.input is not None else args.url.rsplit("/", 1)[-1],
        deck_citation=args.deck_citation,
        deck_url=args.deck_url,
    )

    def sink(event) -> None:
        print(event.to_json_line(), file=sys.stderr, flush=True)

    try:
        document = run_pipeline(pdf_bytes, config, make_transport(config.provider), sink)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    text = serialize_document(document)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    try:
        uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    except SystemExit as exc:
        return int(exc.code or 0)
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "analyze":
        return _cmd_analyze(args, parser)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
