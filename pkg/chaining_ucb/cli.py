import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
import voluptuous as vol
from opentelemetry import trace
from scipy.spatial.distance import cdist

from .bench.report import (
    summary_table,
    write_acquisition_csv,
    write_aggregate_csv,
    write_trace_csv,
)
from .bench.runner import async_run_experiment, make_objective, posterior_snapshot
from .bench.stats import bound_violation_stats
from .config import ExperimentConfig, parse_policies, load_config, serialize_config
from .const import DOMAIN, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE
from .cover.greedy_cover import cover_statistics, greedy_cover
from .exceptions import ChainingUcbError, ConfigError, InputError
from .gp.posterior import MatrixDistance, PosteriorState, SearchSpace
from .kernel.graphs import parse_graphs
from .kernel.kernels import KernelSpec
from .policy_types import POLICY_TYPES
from .release_const import COMPONENT_VERSION
from .shared.logging import setup_otel_logging
from .shared.shared import config_digest
from .shared.tracing import setup_tracing

_LOGGER = logging.getLogger(__name__)

tracer = trace.get_tracer(__name__)

METRIC_EUCLIDEAN = "euclidean"
METRIC_PRIOR = "prior"


def _format_number(value: float) -> str:
    return f"{value:.10g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaining_ucb",
        description="Chaining-UCB Bayesian optimization benchmarks on finite spaces",
    )
    parser.add_argument("--version", action="version", version=COMPONENT_VERSION)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument(
        "--no-telemetry",
        action="store_true",
        help="do not export traces and logs even if telemetry_endpoint is set",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write trace and aggregate CSVs")
    _add_experiment_arguments(run)
    run.add_argument("--out-dir", help="overrides out_dir")

    bound = sub.add_parser("bound-check", help="report how often the regret bound is violated")
    _add_experiment_arguments(bound)

    cover = sub.add_parser("cover", help="greedy epsilon-cover of a point set")
    source = cover.add_mutually_exclusive_group(required=True)
    source.add_argument("--points", help="vector rows or graph blocks")
    source.add_argument("--config", help="cover the space of the first run of a config")
    cover.add_argument("--epsilon", type=float, required=True)
    cover.add_argument(
        "--metric",
        choices=[METRIC_EUCLIDEAN, METRIC_PRIOR],
        default=METRIC_EUCLIDEAN,
        help="prior is the pseudo-distance before any observation",
    )
    cover.add_argument("--bandwidth", type=float, default=1.0, help="SE bandwidth of the prior")

    acquisition = sub.add_parser(
        "acquisition", help="per-candidate mean and shifted UCB bonuses of the first run"
    )
    acquisition.add_argument("--config", required=True)
    acquisition.add_argument("--seed", type=int, help="overrides base_seed")
    acquisition.add_argument(
        "--steps", type=int, default=0, help="Chaining-UCB iterations taken before the snapshot"
    )
    acquisition.add_argument("--out", required=True, help="CSV file to write")
    return parser


def _add_experiment_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True)
    parser.add_argument("--seed", type=int, help="overrides base_seed")
    parser.add_argument("--policies", help="comma list, overrides policies")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logging.getLogger(DOMAIN).setLevel(logging.DEBUG if verbose else logging.INFO)


def _setup_telemetry(config: ExperimentConfig, no_telemetry: bool) -> None:
    if no_telemetry or config.telemetry_endpoint is None:
        return
    config_hash = config_digest(serialize_config(config))
    setup_tracing(config.telemetry_endpoint, config_hash)
    handler = setup_otel_logging(config.telemetry_endpoint, config_hash)
    logging.getLogger(DOMAIN).addHandler(handler)
    _LOGGER.info(f"Config hash is {config_hash}")


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    changes = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("Seed must be an unsigned 64-bit integer", key="base_seed")
        changes["base_seed"] = args.seed
    if getattr(args, "policies", None) is not None:
        try:
            changes["policies"] = parse_policies(args.policies)
        except vol.Invalid as e:
            raise ConfigError(str(e), key="policies") from e
    if getattr(args, "out_dir", None) is not None:
        changes["out_dir"] = args.out_dir
    if getattr(args, "jobs", 1) < 1:
        raise ConfigError("--jobs must be at least 1")
    return config.replace(**changes) if changes else config


def cmd_run(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    _setup_telemetry(config, args.no_telemetry)
    with tracer.start_as_current_span("cmd_run"):
        traces = asyncio.run(async_run_experiment(config, args.jobs))
        out_dir = Path(config.out_dir)
        write_trace_csv(traces, out_dir / config.trace_file)
        write_aggregate_csv(traces, out_dir / config.aggregate_file)
        print(summary_table(traces).to_string(float_format=_format_number))
    return EXIT_OK


def cmd_bound_check(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    if not config.compute_bound:
        raise ConfigError("bound-check needs compute_bound = true", key="compute_bound")
    bounded = tuple(p for p in config.policies if POLICY_TYPES[p]["supports_bound"])
    if not bounded:
        raise ConfigError("No configured policy supports the regret bound", key="policies")
    config = config.replace(policies=bounded)
    _setup_telemetry(config, args.no_telemetry)
    with tracer.start_as_current_span("cmd_bound_check"):
        traces = asyncio.run(async_run_experiment(config, args.jobs))
        for policy in bounded:
            stats = bound_violation_stats(traces[policy], config.delta)
            print(f"policy: {policy}")
            print(f"runs: {stats.runs}")
            print(f"violations: {stats.violations}")
            print(f"frequency: {_format_number(stats.frequency)}")
            print(f"delta: {_format_number(config.delta)}")
    return EXIT_OK


def _read_points(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"Cannot read points file {path}: {e.strerror}") from e
    first = next(
        (line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")),
        None,
    )
    if first is None:
        raise InputError(f"No points in {path}")
    if first.split()[0] == "graph":
        return parse_graphs(text)
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].replace(",", " ").split()
        if not line:
            continue
        try:
            rows.append([float(v) for v in line])
        except ValueError as e:
            raise InputError(f"Invalid point in {path} at line {line_no}: {e}") from e
    if len({len(row) for row in rows}) != 1:
        raise InputError(f"Points in {path} have different dimensions")
    return np.array(rows)


def _config_space(path: str) -> SearchSpace:
    config = load_config(path)
    return make_objective(config, config.base_seed).space


def cmd_cover(args: argparse.Namespace) -> int:
    if not args.epsilon > 0:
        raise InputError(f"--epsilon must be positive, got {args.epsilon}")
    with tracer.start_as_current_span("cmd_cover"):
        if args.config is not None:
            space = _config_space(args.config)
            points = space.points
        else:
            points = _read_points(args.points)
            space = None
        is_graph = not isinstance(points, np.ndarray)

        if args.metric == METRIC_EUCLIDEAN and not is_graph:
            distance = MatrixDistance(cdist(points, points))
        else:
            if space is None:
                spec = (
                    KernelSpec.shortest_path()
                    if is_graph
                    else KernelSpec.squared_exponential(args.bandwidth)
                )
                space = SearchSpace.from_points(points, spec)
            # any positive noise leaves the prior untouched before the first observation
            distance = PosteriorState(space, 1.0).distance

        everything = np.arange(distance.size)
        cover = greedy_cover(everything, distance, args.epsilon)
        stats = cover_statistics(everything, distance, cover, args.epsilon)
        print(f"size: {stats.size}")
        print(f"members: {' '.join(str(i) for i in stats.members)}")
        print(f"max_distance: {_format_number(stats.max_distance)}")
        print(f"max_degree: {stats.max_degree}")
    return EXIT_OK


def cmd_acquisition(args: argparse.Namespace) -> int:
    if args.steps < 0:
        raise InputError(f"--steps must be >= 0, got {args.steps}")
    config = _experiment_config(args)
    _setup_telemetry(config, args.no_telemetry)
    with tracer.start_as_current_span("cmd_acquisition"):
        objective, state = posterior_snapshot(config, args.steps)
        t = args.steps + 1
        frame = write_acquisition_csv(objective, state, t, config.delta, args.out)
        print(f"t: {t}")
        print(f"observations: {state.n}")
        print(f"chaining-ucb: {int(frame['chaining_ucb'].to_numpy().argmax())}")
        print(f"gp-ucb: {int(frame['gp_ucb'].to_numpy().argmax())}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "bound-check": cmd_bound_check,
    "cover": cmd_cover,
    "acquisition": cmd_acquisition,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InputError) as e:
        _LOGGER.error(f"{e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ChainingUcbError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
