"""Command line front end for the mining/training/recommendation pipeline.

Subcommands mirror the pipeline stages: mine -> build-dataset -> train /
evaluate -> recommend. All artifacts are JSON or JSONL and reruns over the
same inputs reproduce them byte for byte.

Exit codes: 0 success, 1 usage error, 2 unreadable or unusable data,
3 training divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cfg import MethodParseError
from .dataset import (
    read_dataset,
    read_records,
    write_dataset,
    write_feature_schema,
    write_json_atomic,
    write_records,
)
from .evaluate import TASKS, cross_validate, train_task
from .gcn import TrainConfig, TrainingDiverged, load_model, save_model
from .mining import MinerConfig
from .pipeline import build_rows, mine_repositories
from .recommend import recommend

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep our code scheme
        raise UsageError(message)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        config = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise DataError(f"config {path} must hold a JSON object")
    return config


def _parse_repo(spec: str) -> tuple[str, Path]:
    name, sep, path = spec.partition("=")
    if sep:
        return name, Path(path)
    p = Path(spec)
    return p.name, p


def _train_config(config: dict, seed: int) -> TrainConfig:
    section = config.get("train", {})
    return TrainConfig(
        hidden=int(section.get("hidden", 32)),
        learning_rate=float(section.get("learning_rate", 1e-2)),
        epochs=int(section.get("epochs", 200)),
        l2=float(section.get("l2", 1e-4)),
        seed=seed,
    )


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        write_json_atomic(out, payload)
    else:
        print(text)


def cmd_mine(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    section = config.get("mine", {})
    miner = MinerConfig(
        max_files=int(section.get("max_files", 50)),
        include_merges=bool(section.get("include_merges", False)),
        max_commits=section.get("max_commits"),
    )
    repos = [_parse_repo(spec) for spec in args.repo]
    for name, path in repos:
        if not (path / ".git").exists() and not (path / "HEAD").exists():
            raise DataError(f"{path} does not look like a git repository")
    records, stats = mine_repositories(
        repos,
        config=miner,
        seed=args.seed,
        balance=not args.no_balance,
        negative_ratio=float(section.get("negative_ratio", 1.0)),
    )
    write_records(args.out, records)
    print(
        json.dumps(
            {
                "records": len(records),
                "positives": sum(1 for r in records if r.polarity.value == "path_adding"),
                "repos": {name: s.as_dict() for name, s in stats.items()},
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def cmd_build_dataset(args: argparse.Namespace) -> int:
    try:
        records = read_records(args.records)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise DataError(f"cannot read records {args.records}: {exc}") from exc
    if not records:
        raise DataError(f"no records in {args.records}")
    rows, audit = build_rows(records)
    write_dataset(args.out, rows)
    schema_out = args.schema_out or str(Path(args.out).parent / "feature_schema.json")
    write_feature_schema(schema_out)
    print(json.dumps(audit.as_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _read_rows(path: str):
    try:
        rows = read_dataset(path)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from exc
    if not rows:
        raise DataError(f"no rows in {path}")
    return rows


def cmd_train(args: argparse.Namespace) -> int:
    rows = _read_rows(args.dataset)
    config = _train_config(_load_config(args.config), args.seed)
    try:
        model, log = train_task(rows, args.task, config)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    save_model(model, args.out)
    print(
        json.dumps(
            {
                "task": args.task,
                "examples": len(rows) if args.task == "level1" else sum(r.positive for r in rows),
                "epochs": len(log.losses),
                "final_loss": log.final_loss,
                "model": str(args.out),
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    rows = _read_rows(args.dataset)
    config = _train_config(_load_config(args.config), args.seed)
    section = _load_config(args.config).get("evaluate", {})
    try:
        report = cross_validate(
            rows,
            args.task,
            k=args.folds if args.folds else int(section.get("folds", 5)),
            seed=args.seed,
            config=config,
            group_by_repo=args.group_by_repo or bool(section.get("group_by_repo", False)),
        )
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    write_json_atomic(args.out, report.as_dict())
    print(json.dumps({"mean": report.mean_metrics, "failed_folds": report.failed_folds},
                     indent=2, sort_keys=True))
    return EXIT_OK


def cmd_recommend(args: argparse.Namespace) -> int:
    try:
        edge_model = load_model(args.model)
        kinds_model = load_model(args.kinds_model) if args.kinds_model else None
        source = Path(args.method_file).read_text()
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise DataError(str(exc)) from exc
    try:
        result = recommend(source, edge_model, kinds_model, top_k=args.top_k)
    except (MethodParseError, ValueError) as exc:
        raise DataError(str(exc)) from exc
    _emit(result, args.out)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="flowgap",
        description="Mine branch-adding commits and recommend method extension points.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="scan git repositories for method changes")
    p.add_argument("--repo", action="append", required=True,
                   metavar="[NAME=]PATH", help="repository to scan; repeatable")
    p.add_argument("--out", required=True, help="records JSONL output path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--no-balance", action="store_true",
                   help="keep all negatives instead of downsampling")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("build-dataset", help="label records into dataset rows")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True, help="dataset JSONL output path")
    p.add_argument("--schema-out", help="feature schema path (default: alongside --out)")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("train", help="fit a model on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--task", choices=TASKS, default="level1")
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON config file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="k-fold cross validation with a report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--task", choices=TASKS, default="level1")
    p.add_argument("--out", required=True, help="report JSON output path")
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--group-by-repo", action="store_true")
    p.add_argument("--config", help="JSON config file")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("recommend", help="rank extension points for one method")
    p.add_argument("--model", required=True, help="edge model JSON")
    p.add_argument("--kinds-model", help="statement-kind model JSON")
    p.add_argument("--method-file", required=True,
                   help="file holding a single method definition")
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_recommend)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
