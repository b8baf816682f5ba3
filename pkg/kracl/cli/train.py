import argparse
import json
import logging
from pathlib import Path

from ..DB import save_checkpoint
from ..services.training import load_config, train

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("train", help="train a model from a config file")
    parser.add_argument("--config", required=True, type=Path, help="flat key = value file of TrainConfig fields")
    parser.add_argument("--seed", type=int, default=None, help="overrides the seed in the config")
    parser.add_argument("--epochs", type=int, default=None, help="overrides the number of epochs in the config")
    parser.add_argument("--out", type=Path, default=None, help="checkpoint path (default checkpoints/<dataset>-seed<N>.ckpt)")
    parser.set_defaults(handler=run_train)


def run_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {"seed": args.seed, "epochs": args.epochs})
    ckpt = train(cfg)
    out = args.out or Path("checkpoints") / f"{Path(cfg.dataset).name}-seed{cfg.seed}.ckpt"
    save_checkpoint(ckpt, out)
    print(json.dumps({
        "checkpoint": str(out),
        "epoch": ckpt.epoch,
        "best_valid_mrr": ckpt.best_valid_mrr,
        "final_loss": ckpt.loss_history[-1] if ckpt.loss_history else None,
    }))
    return 0
