"""Influence maximization by community detection plus TOPSIS ranking, evaluated with SIR."""

__version__ = "0.1.0"

from .graph import Graph, IngestReport, load_graph, parse_edge_list, parse_pajek  # noqa: E402
from .centrality import CentralityTable, centrality_table  # noqa: E402
from .madm import DecisionMatrix, TopsisRanking, topsis_rank  # noqa: E402
from .community import Partition, cut_cost, detect_communities  # noqa: E402
from .seeding import SeedSet, baseline_seeds, gtacb_seeds, select_seeds  # noqa: E402
from .epidemic import SirConfig, SirOutcome, simulate  # noqa: E402
from .harness import ExperimentGrid, generate_modular_graph, run_experiment_grid  # noqa: E402

__all__ = [
    "Graph", "IngestReport", "load_graph", "parse_edge_list", "parse_pajek",
    "CentralityTable", "centrality_table",
    "DecisionMatrix", "TopsisRanking", "topsis_rank",
    "Partition", "cut_cost", "detect_communities",
    "SeedSet", "baseline_seeds", "gtacb_seeds", "select_seeds",
    "SirConfig", "SirOutcome", "simulate",
    "ExperimentGrid", "generate_modular_graph", "run_experiment_grid",
]
