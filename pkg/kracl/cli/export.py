import argparse
from pathlib import Path

from ..DB import load_checkpoint
from ..services.export import export_embeddings


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("export", help="write final-layer embeddings as text")
    parser.add_argument("--checkpoint", required=True, type=Path)
    parser.add_argument("--out", required=True, type=Path)
    parser.set_defaults(handler=run_export)


def run_export(args: argparse.Namespace) -> int:
    export_embeddings(load_checkpoint(args.checkpoint), args.out)
    print(args.out)
    return 0
