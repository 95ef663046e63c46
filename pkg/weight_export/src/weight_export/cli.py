"""Command-line entry point: ``export_weights <output.vggw>``."""

from __future__ import annotations

import argparse
import json
import sys

from .exporter import export


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="export_weights",
        description="Write the first three VGG-19 conv layers as a VGGW file.",
    )
    parser.add_argument("output", help="path of the VGGW file to write")
    parser.add_argument(
        "--source",
        help="local checkpoint (.pth state dict) instead of the published download",
    )
    opts = parser.parse_args(argv)
    try:
        manifest = export(opts.output, source=opts.source)
    except Exception as exc:  # noqa: BLE001  - boundary: any failure is exit 1
        print(f"export_weights: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(manifest.to_dict(), indent=2))
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
