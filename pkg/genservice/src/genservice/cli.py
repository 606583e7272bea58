"""Service launcher: `genservice --stub --port 8080`.

Environment variables provide deployment defaults: GENSERVICE_CHECKPOINT,
GENSERVICE_DEVICE, GENSERVICE_PORT.
"""

from __future__ import annotations

import argparse
import os

import uvicorn

from .app import create_app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="genservice", description=__doc__)
    parser.add_argument(
        "--stub", action="store_true", help="serve deterministic noise images, no model"
    )
    parser.add_argument("--checkpoint", default=os.environ.get("GENSERVICE_CHECKPOINT"))
    parser.add_argument("--device", default=os.environ.get("GENSERVICE_DEVICE", "cpu"))
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument(
        "--port", type=int, default=int(os.environ.get("GENSERVICE_PORT", "8080"))
    )
    args = parser.parse_args(argv)

    mode = "stub" if args.stub or not args.checkpoint else "real"
    app = create_app(mode=mode, checkpoint=args.checkpoint, device=args.device)
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
