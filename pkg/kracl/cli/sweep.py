import argparse
import json
import logging
from pathlib import Path
from typing import List

from ..core.errors import ConfigError
from ..models.dataset import Split
from ..models.training import SweepKind, SweepResult
from ..services.training import ABLATIONS, DEFAULT_ABLATIONS, SweepService, load_config
from ..services.training.sweep import DEFAULT_NOISE_FRACTIONS, DEFAULT_REMOVE_FRACTIONS

logger = logging.getLogger(__name__)


def _split_list(value: str) -> List[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("sweep", help="ablation, sparsity or noise experiment as repeated train/eval runs")
    parser.add_argument("--config", required=True, type=Path, help="flat key = value file of TrainConfig fields")
    parser.add_argument("--kind", required=True, choices=[kind.value for kind in SweepKind])
    parser.add_argument("--variants", default=",".join(DEFAULT_ABLATIONS), help=f"ablation variants, any of {','.join(ABLATIONS)}")
    parser.add_argument("--seeds", default="0,1,2", help="ablation seeds; data sweeps use the first one")
    parser.add_argument("--fractions", default=None, help="remove or noise fractions, comma separated")
    parser.add_argument("--epochs", type=int, default=None, help="overrides the number of epochs in the config")
    parser.add_argument("--split", choices=[Split.VALID.value, Split.TEST.value], default=Split.TEST.value)
    parser.add_argument("--out", type=Path, default=None, help="also write the full JSON result here")
    parser.set_defaults(handler=run_sweep)


def run_sweep(args: argparse.Namespace) -> int:
    try:
        seeds = [int(seed) for seed in _split_list(args.seeds)]
        fractions = [float(value) for value in _split_list(args.fractions)] if args.fractions else None
    except ValueError as exc:
        raise ConfigError(f"bad --seeds or --fractions: {exc}") from exc
    if not seeds:
        raise ConfigError("--seeds must name at least one seed")

    service = SweepService(load_config(args.config, {"epochs": args.epochs}), split=Split(args.split))
    kind = SweepKind(args.kind)
    if kind is SweepKind.ABLATION:
        result = service.ablation(_split_list(args.variants), seeds)
    elif kind is SweepKind.SPARSITY:
        result = service.sparsity(fractions or DEFAULT_REMOVE_FRACTIONS, seeds[0])
    else:
        result = service.noise(fractions or DEFAULT_NOISE_FRACTIONS, seeds[0])

    if args.out:
        args.out.write_text(result.model_dump_json(indent=2), encoding="utf-8")
        logger.info("sweep result written path=%s", args.out)
    print(json.dumps(_summary(result), indent=2))
    return 0


def _summary(result: SweepResult) -> dict:
    return {
        "kind": result.kind.value,
        "split": result.split,
        "median_valid_mrr": result.median_valid_mrr(),
        f"median_{result.split}_mrr": result.median_mrr(),
    }
