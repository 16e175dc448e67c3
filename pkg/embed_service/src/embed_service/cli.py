"""Command line entry points: serve the HTTP API or run batch exports."""

from __future__ import annotations

import argparse
import json
import sys

from .config import ServiceConfig
from .export import export_manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-service",
        description="Deterministic text/audio embedding service and batch exporter.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8901)
    serve.add_argument("--config", default=None, help="path to a JSON service config")

    export = sub.add_parser("export", help="embed a corpus manifest into an EMB1 file")
    export.add_argument("manifest", help="line-delimited JSON corpus manifest")
    export.add_argument("out", help="output EMB1 path")
    export.add_argument("--modality", choices=("text", "audio"), required=True)
    export.add_argument("--model", default="band-profile")

    sub.add_parser("info", help="print the served models as JSON")
    return parser


def entry(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.subcommand == "serve":
        import uvicorn

        from .app import create_app

        config = (
            ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
        )
        uvicorn.run(create_app(config), host=args.host, port=args.port)
        return 0

    if args.subcommand == "export":
        try:
            report = export_manifest(
                args.manifest, args.out, modality=args.modality, model=args.model
            )
        except (ValueError, OSError) as exc:
            print(f"export failed: {exc}", file=sys.stderr)
            return 1
        print(
            f"wrote {report.n_embedded} {report.modality} vectors to {report.path}"
            + (f" (skipped {report.n_skipped} clips without audio)" if report.n_skipped else "")
        )
        return 0

    if args.subcommand == "info":
        config = ServiceConfig()
        print(
            json.dumps(
                [
                    {
                        "name": backend.name,
                        "version": backend.version,
                        "dim": backend.dim,
                        "modalities": list(backend.modalities),
                    }
                    for backend in config.backends().values()
                ],
                indent=2,
            )
        )
        return 0

    raise AssertionError(f"unhandled subcommand {args.subcommand!r}")


if __name__ == "__main__":
    sys.exit(entry())
