from __future__ import annotations

import argparse
import os
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

import structlog
from prometheus_client import REGISTRY, write_to_textfile

from config.loader import load_scenario
from config.models import ScenarioConfig
from config.validators import parse_node_range
from core.exceptions import ConfigError, SlcmError
from core.experiments import (
    BenchStrategy,
    compare_broadcast,
    run_sweep,
    timed_run,
    zkp_bench,
)
from core.metrics import Metrics
from core.serialization import dumps, to_jsonable
from core.summary import write_summary_csv
from infra.logging_config import configure_logging, scenario_context
from infra.signals import setup_signal_handlers, shutdown_event

__version__ = "1.0.0"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

OUT_DIR_ENV = "SLCM_OUT_DIR"

logger = structlog.get_logger("runner")


def resolve_out_dir(flag: Path | None) -> Path:
    """``--out`` wins, then $SLCM_OUT_DIR, then ./results."""
    if flag is not None:
        return flag
    env = os.environ.get(OUT_DIR_ENV)
    return Path(env) if env else Path("results")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slcm", description="Life-cycle management simulator for mobile ad-hoc networks"
    )
    parser.add_argument("--log-level", default="WARNING")
    parser.add_argument("--log-file", type=Path)
    parser.add_argument("--json-logs", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Simulate one scenario and write its trace")
    run.add_argument("--config", type=Path, required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path)
    run.add_argument("--metrics-out", type=Path, help="Write Prometheus text exposition here")

    sweep = sub.add_parser("sweep", help="Constant-density sweep over node counts")
    sweep.add_argument("--config", type=Path, required=True)
    sweep.add_argument("--nodes", default="10..100:10")
    sweep.add_argument("--seeds", type=_positive_int, default=1)
    sweep.add_argument("--out", type=Path)
    sweep.add_argument("--max-workers", type=_positive_int, default=4)

    compare = sub.add_parser("compare-broadcast", help="GRI against the flooding gather")
    compare.add_argument("--config", type=Path, required=True)
    compare.add_argument("--seeds", type=_positive_int, default=30)

    bench = sub.add_parser("zkp-bench", help="Acceptance rate of the access-control proof")
    bench.add_argument("--rounds", type=_positive_int, required=True)
    bench.add_argument("--trials", type=_positive_int, required=True)
    bench.add_argument(
        "--strategy", choices=[s.value for s in BenchStrategy], default=BenchStrategy.COIN_FLIP
    )
    bench.add_argument("--nodes", type=_positive_int, default=10)
    bench.add_argument("--seed", type=int, default=1)
    return parser


def _load(path: Path, seed: int | None = None) -> ScenarioConfig:
    cfg = load_scenario(path)
    return cfg if seed is None else replace(cfg, seed=seed)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args.config, args.seed)
    out_dir = resolve_out_dir(args.out)
    result = timed_run(cfg, out_dir=out_dir, cancel=shutdown_event)
    stem = f"summary_n{cfg.nodes}_s{cfg.seed}"
    csv_path = write_summary_csv([result.summary], out_dir / f"{stem}.csv")
    summary_path = out_dir / f"{stem}.json"
    summary_path.write_bytes(dumps(to_jsonable(result.summary), pretty=True))
    if args.metrics_out is not None:
        args.metrics_out.parent.mkdir(parents=True, exist_ok=True)
        write_to_textfile(str(args.metrics_out), REGISTRY)
    print(f"trace={result.trace_path} summary={csv_path}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    base = load_scenario(args.config)
    try:
        node_counts = parse_node_range(args.nodes)
    except ValueError as e:
        raise ConfigError(str(e), diagnostics={"nodes": str(e)}) from e
    seeds = [base.seed + i for i in range(args.seeds)]
    out_dir = resolve_out_dir(args.out)
    summaries = run_sweep(
        base,
        node_counts,
        seeds,
        out_dir=out_dir,
        max_workers=args.max_workers,
        cancel=shutdown_event,
    )
    path = write_summary_csv(summaries, out_dir / "sweep.csv")
    print(f"rows={len(summaries)} csv={path}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.config)
    result = compare_broadcast(cfg, [cfg.seed + i for i in range(args.seeds)])
    print(result.report())
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    result = zkp_bench(
        args.rounds, args.trials, strategy=args.strategy, nodes=args.nodes, seed=args.seed
    )
    print(result.report())
    return EXIT_OK


_COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "compare-broadcast": cmd_compare,
    "zkp-bench": cmd_bench,
}


def main(argv: Sequence[str] | None = None) -> int:
    """CLI entry point; returns 0 on success, 1 on config errors, 2 otherwise."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_file, args.json_logs)
    try:
        setup_signal_handlers()
    except ValueError:
        logger.debug("signal_handlers_skipped", reason="not main thread")
    Metrics.build_info.info({"version": __version__, "python_version": sys.version.split()[0]})

    try:
        with scenario_context(args.command):
            return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        logger.error("config_error", error=str(e), diagnostics=e.diagnostics)
        return EXIT_CONFIG
    except SlcmError as e:
        print(f"error: {e}", file=sys.stderr)
        logger.error("run_failed", error=str(e), type=type(e).__name__)
        return EXIT_RUNTIME
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        logger.exception("unhandled_error")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
