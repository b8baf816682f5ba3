import argparse
import logging
from pathlib import Path
from typing import List

from pydantic import TypeAdapter

from ..DB import load_checkpoint
from ..models.dataset import Split
from ..models.evaluation import BandRow, CategoryRow
from ..services.evaluation import evaluate

logger = logging.getLogger(__name__)

_BAND_ROWS = TypeAdapter(List[BandRow])
_CATEGORY_ROWS = TypeAdapter(List[CategoryRow])


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("eval", help="filtered link-prediction metrics of a checkpoint")
    parser.add_argument("--checkpoint", required=True, type=Path)
    parser.add_argument("--split", choices=[Split.VALID.value, Split.TEST.value], default=Split.TEST.value)
    parser.add_argument("--report", type=Path, default=None, help="also write the full JSON report here")
    parser.set_defaults(handler=run_eval)

    parser = subparsers.add_parser("analyze", help="metrics by in-degree band or relation category")
    parser.add_argument("--checkpoint", required=True, type=Path)
    parser.add_argument("--by", choices=["indegree", "relcat"], required=True)
    parser.add_argument("--split", choices=[Split.VALID.value, Split.TEST.value], default=Split.TEST.value)
    parser.set_defaults(handler=run_analyze)


def run_eval(args: argparse.Namespace) -> int:
    report = evaluate(load_checkpoint(args.checkpoint), Split(args.split))
    if args.report:
        args.report.write_text(report.model_dump_json(indent=2), encoding="utf-8")
        logger.info("report written path=%s", args.report)
    print(report.model_dump_json(exclude={"queries", "ranks", "by_indegree", "by_relation_category"}, indent=2))
    return 0


def run_analyze(args: argparse.Namespace) -> int:
    report = evaluate(load_checkpoint(args.checkpoint), Split(args.split))
    if args.by == "indegree":
        print(_BAND_ROWS.dump_json(report.by_indegree, indent=2).decode("utf-8"))
    else:
        print(_CATEGORY_ROWS.dump_json(report.by_relation_category, indent=2).decode("utf-8"))
    return 0
