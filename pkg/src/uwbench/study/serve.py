"""Entry point that hosts the study service with uvicorn."""

from __future__ import annotations

import argparse
from pathlib import Path

import uvicorn

from .service import build_app


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="uwstudy", description="serve a pairwise-comparison study"
    )
    parser.add_argument("--data", required=True, help="study data directory")
    parser.add_argument("--ui", default=None, help="static frontend bundle to mount at /ui")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args(argv)

    ui_dir = args.ui
    if ui_dir is None:
        bundled = Path(args.data) / "ui"
        ui_dir = bundled if bundled.is_dir() else None
    app = build_app(args.data, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
