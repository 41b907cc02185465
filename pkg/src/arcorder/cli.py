"""
Command-line surface for the arcorder toolkit.

Usage:
    python -m src.arcorder.cli <command> --input edges.csv [options]

Every command loads ``config.yaml`` (or ``--config``) and applies its flags as
overrides for the invocation only. Rankings are written to ``--output`` or to
stdout. Exit codes: 0 success, 1 validation or configuration error, 2 I/O error.
"""

from __future__ import annotations

import json
import sys
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO

from .checkpoint import CheckpointMismatchError
from .config import ConfigurationError, OrderingConfig, load_config
from .digraph import CsvFormat, Graph, format_weight, read_graph
from .flat import flat_partition_reorder, resolve_partition_config
from .greedy import greedy_rank
from .logger import get_logger
from .metrics import (
    back_edge_distribution,
    back_edge_report,
    compare_rankings,
    forward_weight,
    max_back_length,
    write_distribution_csv,
)
from .oracle import exact_optimal_ranking
from .pipeline import PipelineError, run_pipeline
from .ranking import Ranking, read_ranking, write_ranking, write_ranking_stream
from .refine import refine_ranking
from .scc import refine_scc_blocks, scc_global_ranking
from .stats import compute_stats

logger = get_logger(__name__)


# --- Arguments ---


def _common_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="Edge-list CSV file.")
    common.add_argument(
        "--output", default=None, help="Output path (ranking file or directory)."
    )
    common.add_argument("--seed", type=int, default=None, help="RNG seed.")
    common.add_argument(
        "--precision",
        type=int,
        default=None,
        help="Decimal digits kept for weights (fixed-point scale 10**precision).",
    )
    common.add_argument(
        "--format-cols",
        default=None,
        help="Source,target,weight columns as names or 0-based positions.",
    )
    common.add_argument("--config", default=None, help="Configuration YAML path.")
    return common


def _add_ranking(parser: ArgumentParser, *, required: bool = True) -> None:
    parser.add_argument(
        "--ranking", required=required, default=None, help="Input ranking file."
    )


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="arcorder",
        description="Node orderings of weighted digraphs that maximize forward edge weight.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    stats_parser = subparsers.add_parser(
        "stats", parents=[common], help="Describe the graph."
    )
    stats_parser.add_argument(
        "--json", dest="as_json", action="store_true", help="Print JSON instead of text."
    )

    subparsers.add_parser(
        "greedy", parents=[common], help="Rank with the adaptive greedy score."
    )

    refine_parser = subparsers.add_parser(
        "refine", parents=[common], help="Correct backward edges locally."
    )
    _add_ranking(refine_parser)
    refine_parser.add_argument("--max-block", type=int, default=None)

    blocks_parser = subparsers.add_parser(
        "scc-blocks", parents=[common], help="Reorder blocks of the largest SCC."
    )
    _add_ranking(blocks_parser)
    blocks_parser.add_argument("--block-size", type=int, default=None)
    blocks_parser.add_argument("--offset", type=int, default=0)
    blocks_parser.add_argument("--perm-limit", type=int, default=None)

    global_parser = subparsers.add_parser(
        "scc-global", parents=[common], help="Rank SCCs in topological order."
    )
    _add_ranking(global_parser)
    global_parser.add_argument("--perm-limit", type=int, default=None)

    flat_parser = subparsers.add_parser(
        "flat", parents=[common], help="Reorder windows of rank groups."
    )
    _add_ranking(flat_parser)
    flat_parser.add_argument("--arity", type=int, default=None)
    flat_parser.add_argument("--level", type=int, default=None)
    flat_parser.add_argument("--start", type=int, default=None)
    flat_parser.add_argument("--end", type=int, default=None)

    pipeline_parser = subparsers.add_parser(
        "pipeline", parents=[common], help="Run the full refinement schedule."
    )
    _add_ranking(pipeline_parser, required=False)
    pipeline_parser.add_argument("--checkpoint", default=None)
    pipeline_parser.add_argument(
        "--resume", action="store_true", help="Start from the checkpoint if present."
    )
    pipeline_parser.add_argument(
        "--stages", default=None, help="Comma-separated stage names."
    )
    pipeline_parser.add_argument("--max-sweeps", type=int, default=None)
    pipeline_parser.add_argument("--time-limit", type=float, default=None)
    pipeline_parser.add_argument(
        "--report", default=None, help="Write the final metrics and history as JSON."
    )

    score_parser = subparsers.add_parser(
        "score", parents=[common], help="Report forward weight and back edges."
    )
    _add_ranking(score_parser)
    score_parser.add_argument("--json", dest="json_path", default=None)

    oracle_parser = subparsers.add_parser(
        "oracle", parents=[common], help="Exact optimum for small graphs."
    )
    oracle_parser.add_argument("--limit", type=int, default=None)
    oracle_parser.add_argument("--mode", choices=("enumerate", "dp"), default=None)

    plot_parser = subparsers.add_parser(
        "plot-data", parents=[common], help="Back-edge length distribution CSVs."
    )
    plot_parser.add_argument("--ranking", nargs="+", required=True)
    plot_parser.add_argument("--bins", type=int, default=None)

    compare_parser = subparsers.add_parser(
        "compare", parents=[common], help="Compare two rankings."
    )
    _add_ranking(compare_parser)
    compare_parser.add_argument("--other", required=True, help="Second ranking file.")
    compare_parser.add_argument("--json", dest="json_path", default=None)

    return parser


def _overrides(args: Namespace) -> Dict[str, Any]:
    """Translate CLI flags into a nested configuration override mapping."""
    overrides: Dict[str, Any] = {
        "input": {"precision": args.precision},
        "greedy": {"seed": args.seed},
        "refine": {"max_block": getattr(args, "max_block", None)},
        "scc": {
            "block_size": getattr(args, "block_size", None),
            "perm_limit": getattr(args, "perm_limit", None),
        },
        "flat": {
            "arity": getattr(args, "arity", None),
            "level": getattr(args, "level", None),
            "start": getattr(args, "start", None),
            "end": getattr(args, "end", None),
        },
        "oracle": {
            "node_limit": getattr(args, "limit", None),
            "mode": getattr(args, "mode", None),
        },
        "metrics": {"bins": getattr(args, "bins", None)},
        "pipeline": {
            "checkpoint": getattr(args, "checkpoint", None),
            "max_sweeps": getattr(args, "max_sweeps", None),
            "time_limit_seconds": getattr(args, "time_limit", None),
        },
    }
    if args.format_cols:
        fmt = CsvFormat.from_columns_spec(args.format_cols)
        overrides["input"].update(
            source_column=fmt.source_column,
            target_column=fmt.target_column,
            weight_column=fmt.weight_column,
        )
    stages = getattr(args, "stages", None)
    if stages:
        overrides["pipeline"]["stages"] = [
            name.strip() for name in stages.split(",") if name.strip()
        ]
    return overrides


# --- Output helpers ---


def _emit_ranking(args: Namespace, g: Graph, r: Ranking) -> None:
    if args.output:
        target = write_ranking(args.output, g, r)
        logger.info("Ranking written to %s", target)
    else:
        write_ranking_stream(g, r, sys.stdout)


def _write_json(path: str | Path, payload: Dict[str, Any]) -> None:
    target = Path(path).expanduser()
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8") as fp:
        json.dump(payload, fp, ensure_ascii=False, indent=2)


def _report_stream(args: Namespace) -> TextIO:
    """Summary lines go to stderr whenever the ranking itself is on stdout."""
    return sys.stdout if args.output else sys.stderr


def _summary(args: Namespace, g: Graph, before: int, after: int) -> None:
    total = g.total_weight
    ratio = after / total if total else 1.0
    print(
        f"forward weight: {format_weight(before, g.precision)} -> "
        f"{format_weight(after, g.precision)} (ratio {ratio:.6f} / {ratio:.4f})",
        file=_report_stream(args),
    )


# --- Commands ---


def cmd_stats(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    stats = compute_stats(g)
    if args.as_json:
        print(json.dumps(stats.to_dict(), indent=2))
    else:
        print("\n".join(stats.format_lines()))


def cmd_greedy(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    ranking = greedy_rank(g, cfg.seed)
    _emit_ranking(args, g, ranking)


def cmd_refine(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    ranking = read_ranking(args.ranking, g)
    refined, report = refine_ranking(g, ranking, cfg.max_block)
    _summary(args, g, report.forward_weight_before, report.forward_weight_after)
    _emit_ranking(args, g, refined)


def cmd_scc_blocks(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    ranking = read_ranking(args.ranking, g)
    refined, report = refine_scc_blocks(
        g, ranking, cfg.block_size, args.offset, perm_limit=cfg.perm_limit
    )
    _summary(args, g, report.forward_weight_before, report.forward_weight_after)
    _emit_ranking(args, g, refined)


def cmd_scc_global(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    ranking = read_ranking(args.ranking, g)
    result = scc_global_ranking(g, ranking, perm_limit=cfg.perm_limit)
    kept = result.ranking if result.improved else ranking
    if not result.improved:
        logger.info("SCC global ranking did not improve FW; keeping the input ranking")
    _summary(args, g, result.previous_forward_weight, forward_weight(g, kept))
    _emit_ranking(args, g, kept)


def cmd_flat(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    ranking = read_ranking(args.ranking, g)
    partition_cfg = resolve_partition_config(
        g.node_count,
        cfg.flat.arity,
        level=cfg.flat.level,
        start=cfg.flat.start,
        end=cfg.flat.end,
    )
    reordered, report = flat_partition_reorder(g, ranking, partition_cfg)
    _summary(args, g, report.forward_weight_before, report.forward_weight_after)
    _emit_ranking(args, g, reordered)


def cmd_pipeline(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    initial = read_ranking(args.ranking, g) if args.ranking else None
    result = run_pipeline(g, cfg, initial=initial, resume=args.resume)
    stream = _report_stream(args)
    print("\n".join(result.report.format_lines()), file=stream)
    print(f"sweeps: {result.sweeps} ({result.stop_reason})", file=stream)
    if args.report:
        _write_json(
            args.report,
            {
                "metrics": result.report.to_dict(),
                "sweeps": result.sweeps,
                "stop_reason": result.stop_reason,
                "history": [dict(record) for record in result.history],
                "config_hash": cfg.config_hash(),
            },
        )
    _emit_ranking(args, g, result.ranking)


def cmd_score(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    report = back_edge_report(g, read_ranking(args.ranking, g))
    print("\n".join(report.format_lines()))
    if args.json_path:
        _write_json(args.json_path, report.to_dict())


def cmd_oracle(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    result = exact_optimal_ranking(
        g, node_limit=cfg.oracle.node_limit, mode=cfg.oracle.mode
    )
    total = g.total_weight
    ratio = result.forward_weight / total if total else 1.0
    print(f"forward weight: {format_weight(result.forward_weight, g.precision)}")
    print(f"forward ratio: {ratio:.6f} ({ratio:.4f})")
    print(f"optimal orderings: {result.optimum_count}")
    print("order: " + " ".join(result.ranking.external_ids(g)))
    if args.output:
        write_ranking(args.output, g, result.ranking)


def cmd_plot_data(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    rankings = [(Path(path), read_ranking(path, g)) for path in args.ranking]
    upper = max(max_back_length(g, r) for _, r in rankings)
    output_dir = Path(args.output or ".").expanduser()
    seen: set[str] = set()
    for index, (path, ranking) in enumerate(rankings):
        stem = path.stem if path.stem not in seen else f"{path.stem}-{index}"
        seen.add(stem)
        series = back_edge_distribution(g, ranking, cfg.bins, upper=upper)
        histogram_path = output_dir / f"{stem}.histogram.csv"
        cumulative_path = output_dir / f"{stem}.cumulative.csv"
        write_distribution_csv(series, histogram_path, cumulative_path)
        print(f"{path}: {series.total} backward edges -> {histogram_path}, {cumulative_path}")


def cmd_compare(args: Namespace, cfg: OrderingConfig, g: Graph) -> None:
    comparison = compare_rankings(
        g, read_ranking(args.ranking, g), read_ranking(args.other, g)
    )
    payload = comparison.to_dict()
    print(f"first forward ratio: {comparison.first.forward_ratio:.6f}")
    print(f"second forward ratio: {comparison.second.forward_ratio:.6f}")
    print(
        f"difference: {payload['forward_weight_difference']} "
        f"({comparison.difference_share * 100:.4f}% of total weight)"
    )
    if args.json_path:
        _write_json(args.json_path, payload)


COMMANDS: Dict[str, Callable[[Namespace, OrderingConfig, Graph], None]] = {
    "stats": cmd_stats,
    "greedy": cmd_greedy,
    "refine": cmd_refine,
    "scc-blocks": cmd_scc_blocks,
    "scc-global": cmd_scc_global,
    "flat": cmd_flat,
    "pipeline": cmd_pipeline,
    "score": cmd_score,
    "oracle": cmd_oracle,
    "plot-data": cmd_plot_data,
    "compare": cmd_compare,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors are validation errors; exit status 2 means I/O
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = load_config(args.config, overrides=_overrides(args))
        g = read_graph(args.input, CsvFormat.from_model(cfg.input))
        COMMANDS[args.command](args, cfg, g)
    except (ValueError, ConfigurationError, PipelineError) as exc:
        # CheckpointMismatchError and every format/validation error land here
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


__all__: List[str] = ["build_parser", "main", "COMMANDS", "CheckpointMismatchError"]


if __name__ == "__main__":
    sys.exit(main())
