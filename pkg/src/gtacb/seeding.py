"""Seed-set construction: community-based TOPSIS (GTaCB) and single-measure baselines."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .centrality import CRITERIA, CentralityTable, centrality_table
from .community import Partition, detect_communities
from .graph import Graph, induced_subgraph, label_key
from .madm import DecisionMatrix, TopsisRanking, equal_weights, topsis_rank

__all__ = [
    "SeedSet",
    "METHODS",
    "allocation_quotas",
    "topsis_ranking",
    "gtacb_seeds",
    "baseline_seeds",
    "select_seeds",
    "read_seeds",
]

BASELINES = ("dc", "cc", "bc", "pr", "topsis")
METHODS = ("gtacb",) + BASELINES


@dataclass
class SeedSet:
    method: str
    seeds: list[str]
    provenance: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.seeds = [str(s) for s in self.seeds]
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seed set contains duplicates")

    @property
    def K(self) -> int:
        return len(self.seeds)

    def to_json(self) -> str:
        body = {"method": self.method, "K": self.K, "seeds": self.seeds, "params": self.params}
        if self.provenance:
            body["provenance"] = self.provenance
        return json.dumps(body, indent=2)


def read_seeds(text: str) -> SeedSet:
    """Accept the JSON export or plain text with one label per line."""
    stripped = text.strip()
    if stripped.startswith("{"):
        body = json.loads(stripped)
        s = SeedSet(body.get("method", "external"), body["seeds"],
                    body.get("provenance", []), body.get("params", {}))
        if "K" in body and body["K"] != s.K:
            raise ValueError(f"seed file says K={body['K']} but lists {s.K} seeds")
        return s
    labels = [ln.strip() for ln in stripped.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not labels:
        raise ValueError("seed file is empty")
    return SeedSet("external", labels)


def allocation_quotas(K: int, H: int) -> list[int]:
    """First ``K mod H`` communities get ``ceil(K/H)`` seeds, the rest ``floor(K/H)``."""
    if K < 1 or H < 1:
        raise ValueError("K and H must be positive")
    q, extra = divmod(K, H)
    return [q + 1 if p < extra else q for p in range(H)]


def _weights(weights) -> np.ndarray:
    return equal_weights(len(CRITERIA)) if weights is None else np.asarray(weights, dtype=float)


def topsis_ranking(g: Graph, weights=None, table: CentralityTable | None = None) -> TopsisRanking:
    """TOPSIS over (DC, CC, BC, PR) of every node of ``g``, all benefit criteria."""
    table = centrality_table(g) if table is None else table
    dm = DecisionMatrix(g.labels, CRITERIA, table.matrix(), _weights(weights))
    # a criterion constant at zero (e.g. BC inside a clique) cannot rank anyone
    return topsis_rank(dm, zero_columns="ignore")


def _check_k(g: Graph, K: int):
    if not 1 <= K <= g.n:
        raise ValueError(f"K must lie in 1..{g.n}, got {K}")


def gtacb_seeds(g: Graph, K: int, weights=None, partition: Partition | None = None,
                restarts: int = 20, rng_seed: int = 0) -> SeedSet:
    """Pick ``K`` seeds spread over ``K`` detected communities.

    Communities (largest first) are ranked internally by TOPSIS on their
    induced subgraph and contribute their top ``allocation_quotas`` nodes. A
    community smaller than its quota passes the shortfall on to the next one;
    after the last community the leftover wraps once to the start.
    """
    _check_k(g, K)
    if partition is None:
        partition = detect_communities(g, K, restarts=restarts, rng_seed=rng_seed)
    quotas = allocation_quotas(K, partition.H)
    rankings = [topsis_ranking(induced_subgraph(g, members), weights)
                for members in partition.communities()]
    taken = [0] * partition.H
    seeds, provenance = [], []
    carry = 0
    for sweep in range(2):
        for p, ranking in enumerate(rankings):
            want = carry + (quotas[p] if sweep == 0 else 0)
            got = min(want, len(ranking) - taken[p])
            seeds.extend(ranking.nodes[taken[p]:taken[p] + got])
            provenance.extend([p] * got)
            taken[p] += got
            carry = want - got
    if len(seeds) != K:
        raise RuntimeError(f"allocated {len(seeds)} of {K} seeds")
    params = {"weights": _weights(weights).tolist(), "restarts": restarts, "rng_seed": rng_seed,
              "H": partition.H, "sizes": partition.sizes}
    return SeedSet("gtacb", seeds, provenance, params)


def baseline_seeds(g: Graph, K: int, method: str, weights=None,
                   table: CentralityTable | None = None) -> SeedSet:
    """Top ``K`` nodes of the whole graph by one centrality or by global TOPSIS.

    ``table`` may carry precomputed centralities of ``g``.
    """
    _check_k(g, K)
    if method == "topsis":
        ranking = topsis_ranking(g, weights, table)
        scores = ranking.c_star[:K].tolist()
        return SeedSet("topsis", ranking.top(K), scores, {"weights": _weights(weights).tolist()})
    if method not in CRITERIA:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    if table is None:
        table = centrality_table(g)
    values = getattr(table, method)
    keys = [label_key(v) for v in g.labels]
    order = sorted(range(g.n), key=lambda i: (-values[i], keys[i]))[:K]
    return SeedSet(method, [g.labels[i] for i in order], [float(values[i]) for i in order], {})


def select_seeds(g: Graph, K: int, method: str, weights=None, restarts: int = 20,
                 rng_seed: int = 0, partition: Partition | None = None,
                 table: CentralityTable | None = None) -> SeedSet:
    if method == "gtacb":
        return gtacb_seeds(g, K, weights, partition=partition, restarts=restarts, rng_seed=rng_seed)
    return baseline_seeds(g, K, method, weights, table)
