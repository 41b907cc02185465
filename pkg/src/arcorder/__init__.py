"""
arcorder: node orderings of weighted digraphs that maximize forward edge weight.
"""

from .config import ConfigurationError, OrderingConfig, load_config
from .digraph import CsvFormat, Graph, GraphFormatError, build_graph, read_graph
from .metrics import back_edge_report, forward_ratio, forward_weight
from .pipeline import PipelineError, PipelineResult, run_pipeline
from .ranking import Ranking, RankingValidationError, read_ranking, write_ranking

__all__ = [
    "ConfigurationError",
    "OrderingConfig",
    "load_config",
    "CsvFormat",
    "Graph",
    "GraphFormatError",
    "build_graph",
    "read_graph",
    "back_edge_report",
    "forward_ratio",
    "forward_weight",
    "PipelineError",
    "PipelineResult",
    "run_pipeline",
    "Ranking",
    "RankingValidationError",
    "read_ranking",
    "write_ranking",
]
