"""Command line: `dataset-bridge --dataset bnci2014_008 --source DIR --out DIR`."""

from __future__ import annotations

import argparse
import sys

from .convert import convert
from .specs import SPECS, DownloadError, SchemaMismatch


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dataset-bridge",
        description="Convert public P300 speller recordings to the neutral session format",
    )
    parser.add_argument("--dataset", required=True, choices=sorted(SPECS))
    parser.add_argument("--source", required=True, help="directory of cached .mat files")
    parser.add_argument("--out", required=True, help="output directory for sessions")
    parser.add_argument(
        "--download", action="store_true",
        help="fetch missing files from the public distribution",
    )
    args = parser.parse_args(argv)
    try:
        written = convert(args.dataset, args.source, args.out, download=args.download)
    except (SchemaMismatch, DownloadError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for directory in written:
        print(directory)
    print(f"{len(written)} sessions written")
    return 0


if __name__ == "__main__":
    sys.exit(main())
