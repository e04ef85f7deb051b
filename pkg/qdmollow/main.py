"""
Command line entry point for the quantum dot resonance fluorescence simulator.
"""
import logging
import sys
from typing import List, Optional

from qdmollow.cli.commands import build_parser, dispatch
from qdmollow.settings import Settings


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = Settings.load()

    level = getattr(logging, (args.log_level or settings.log_level).upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    return dispatch(args, settings)


if __name__ == "__main__":
    sys.exit(main())
