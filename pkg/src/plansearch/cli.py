"""Command-line entry point: run searches, benchmark modes, check plans and datasets."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence

from .dataset import DatasetSplit, bundled_fixtures, load_dataset, synthetic_records
from .dsl import parse_plan
from .errors import ParseError, PlanSearchError, RuntimeFailure, SchemaError
from .evaluator import evaluate_candidate
from .harness import GeneratorFactory, Report, chat_factory, mock_factory, render_report, run_experiment
from .interpreter import execute_plan, format_answer
from .llm_client import DEFAULT_API_KEY_ENV, DEFAULT_BASE_URL, ChatClient, ClientConfig, ClientMode
from .scene import load_scene
from .search import ALGORITHMS, SearchConfig

log = logging.getLogger("plansearch")

EXIT_OK, EXIT_INVALID, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    """Bad or inconsistent command-line configuration."""


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not a probability")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return value


def _load(args: argparse.Namespace) -> DatasetSplit:
    if args.dataset is None:
        return bundled_fixtures()
    path = Path(args.dataset)
    if not path.exists():
        raise ConfigError(f"dataset {path} does not exist")
    return load_dataset(path)


def _generator_factory(args: argparse.Namespace, split: DatasetSplit) -> tuple[GeneratorFactory, dict]:
    if args.generator == "mock":
        return mock_factory(args.p_step, args.p_full), {"generator": "mock", "p_step": args.p_step, "p_full": args.p_full}
    if not args.model:
        raise ConfigError("--model is required with --generator chat")
    if args.client_mode != "live" and not args.cache:
        raise ConfigError(f"--client-mode {args.client_mode} needs --cache")
    if args.client_mode == "replay" and not Path(args.cache).exists():
        raise ConfigError(f"replay cache {args.cache} does not exist")
    config = ClientConfig(
        model=args.model,
        base_url=args.base_url,
        api_key_env=args.api_key_env,
        temperature=args.temperature,
        max_in_flight=args.workers,
        mode=ClientMode(args.client_mode),
        cache_path=args.cache,
    )
    meta = {"generator": "chat", "model": args.model, "temperature": args.temperature, "examples": args.examples}
    return chat_factory(ChatClient(config), split.library, args.examples), meta


def _configs(args: argparse.Namespace, algorithms: Sequence[str]) -> list[SearchConfig]:
    try:
        return [
            SearchConfig(
                algorithm=a,
                branch=args.branch,
                max_step=args.max_step,
                start_depth=args.start_depth,
                block_size=args.block_size,
            )
            for a in algorithms
        ]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _experiment(args: argparse.Namespace, algorithms: Sequence[str]) -> int:
    split = _load(args)
    factory, meta = _generator_factory(args, split)
    records = split.test if split.test else split.library
    report, _ = run_experiment(
        records,
        _configs(args, algorithms),
        factory,
        repeats=args.repeats,
        base_seed=args.seed,
        workers=args.workers,
        metadata=meta,
    )
    _emit(render_report(report, args.format), args.out)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    return _experiment(args, [args.mode])


def cmd_bench(args: argparse.Namespace) -> int:
    return _experiment(args, ALGORITHMS)


def cmd_eval_plan(args: argparse.Namespace) -> int:
    scene = load_scene(Path(args.scene).read_text(encoding="utf-8"))
    plan = parse_plan(Path(args.plan).read_text(encoding="utf-8"))
    verdict = evaluate_candidate(plan, scene)
    try:
        trace = execute_plan(plan, scene)
    except RuntimeFailure as exc:
        sys.stdout.write(getattr(exc, "trace").to_jsonl())
        sys.stdout.write(verdict.dumps() + "\n")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(trace.to_jsonl())
    answer = format_answer(trace.answer) if trace.answer is not None else None
    print(json.dumps({"answer": answer, "verdict": verdict.to_json()}, sort_keys=True))
    return EXIT_OK if verdict.passed else EXIT_INVALID


def cmd_validate_dataset(args: argparse.Namespace) -> int:
    split = _load(args)
    counts: dict[str, int] = {}
    for rec in split.records:
        counts[rec.question_type] = counts.get(rec.question_type, 0) + 1
    print(json.dumps({"library": len(split.library), "test": len(split.test), "per_type": counts}, sort_keys=True))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    records = synthetic_records(args.questions, seed=args.seed)
    lines = ["p_step,p_full,algorithm,accuracy,mean_steps,rssi"]
    for p_step in args.p_step:
        for p_full in args.p_full:
            report, _ = run_experiment(
                records, _configs(args, ALGORITHMS), mock_factory(p_step, p_full), repeats=args.repeats,
                base_seed=args.seed, workers=args.workers,
            )
            for label in report.algorithms:
                overall = report.overall[label]
                ratio = report.rssi_overall.get(label, {}).get("ratio_of_means")
                lines.append(
                    f"{p_step},{p_full},{label},{overall['accuracy']!r},{overall['mean_steps']!r},"
                    f"{'' if ratio is None else repr(ratio)}"
                )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    path = Path(args.input)
    if not path.exists():
        raise ConfigError(f"report {path} does not exist")
    try:
        report = Report.from_json(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SchemaError(f"{path} is not a report JSON file: {exc}") from exc
    _emit(render_report(report, args.format), args.out)
    return EXIT_OK


def _search_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="dataset JSONL (default: bundled fixtures)")
    p.add_argument("--branch", type=_positive, help="branch factor (default 3, or 5 for tot-block)")
    p.add_argument("--max-step", type=_positive, default=30, help="generator-call budget per question")
    p.add_argument("--start-depth", type=_positive, default=2)
    p.add_argument("--block-size", type=_positive, default=2)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--repeats", type=_positive, default=3)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--generator", choices=("mock", "chat"), default="mock")
    p.add_argument("--p-step", type=_probability, default=1.0, help="mock: single-step success rate")
    p.add_argument("--p-full", type=_probability, default=1.0, help="mock: multi-step success rate")
    p.add_argument("--model", help="chat: model id")
    p.add_argument("--base-url", default=DEFAULT_BASE_URL)
    p.add_argument("--api-key-env", default=DEFAULT_API_KEY_ENV, help="environment variable holding the key")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--client-mode", choices=[m.value for m in ClientMode], default="live")
    p.add_argument("--cache", help="chat: replay cache JSONL")
    p.add_argument("--examples", type=_positive, default=4, help="chat: demonstrations per prompt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plansearch", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one search mode over a dataset")
    p.add_argument("--mode", choices=ALGORITHMS, default="tot")
    _search_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run all four search modes and report")
    _search_options(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("eval-plan", help="execute a plan file against a scene file")
    p.add_argument("--plan", required=True)
    p.add_argument("--scene", required=True)
    p.set_defaults(func=cmd_eval_plan)

    p = sub.add_parser("validate-dataset", help="check a dataset's schema and gold plans")
    p.add_argument("--dataset", help="dataset JSONL (default: bundled fixtures)")
    p.set_defaults(func=cmd_validate_dataset)

    p = sub.add_parser("simulate", help="sweep mock generator success rates over synthetic chains")
    p.add_argument("--p-step", type=_probability, nargs="+", default=[0.5, 0.7, 0.9])
    p.add_argument("--p-full", type=_probability, nargs="+", default=[0.3, 0.5, 0.7])
    p.add_argument("--questions", type=_positive, default=100)
    p.add_argument("--branch", type=_positive)
    p.add_argument("--max-step", type=_positive, default=30)
    p.add_argument("--start-depth", type=_positive, default=2)
    p.add_argument("--block-size", type=_positive, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=_positive, default=3)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="re-render a JSON report")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    func: Callable[[argparse.Namespace], int] = args.func
    try:
        return func(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, SchemaError, PlanSearchError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
