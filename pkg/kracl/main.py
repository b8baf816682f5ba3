import argparse
import logging
import sys
from typing import Optional, Sequence

from .cli import COMMANDS
from .core.config import settings
from .core.errors import KraclError
from .core.logging import configure_logging
from .core.metrics import export_metrics

logger = logging.getLogger("kracl")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kracl",
        description="Knowledge graph completion with relation-aware attention and a contrastive objective",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(settings)
    try:
        status = args.handler(args)
    except (KraclError, FileNotFoundError) as exc:
        print(f"kracl {args.command}: {exc}", file=sys.stderr)
        return 2
    export_metrics(settings.METRICS_FILE)
    return status


if __name__ == "__main__":
    sys.exit(main())
