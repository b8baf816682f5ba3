import argparse
import json
from pathlib import Path

from ..services.data import DatasetService


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("stats", help="entity/relation/split counts, in-degrees and relation categories")
    parser.add_argument("--data", required=True, help="dataset directory or name under KRACL_DATA_ROOT")
    parser.set_defaults(handler=run_stats)

    parser = subparsers.add_parser("corrupt", help="write a sparsified and/or noised copy of a dataset")
    parser.add_argument("--data", required=True)
    parser.add_argument("--remove-frac", type=float, default=0.0)
    parser.add_argument("--add-noise-frac", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True, type=Path)
    parser.set_defaults(handler=run_corrupt)


def run_stats(args: argparse.Namespace) -> int:
    service = DatasetService()
    print(json.dumps(service.stats_report(service.load(args.data)), indent=2))
    return 0


def run_corrupt(args: argparse.Namespace) -> int:
    dataset = DatasetService().corrupt(args.data, args.out, args.remove_frac, args.add_noise_frac, args.seed)
    print(json.dumps({"out": str(args.out), "train": int(dataset.train.shape[0])}))
    return 0
