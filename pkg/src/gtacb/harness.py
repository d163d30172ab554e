"""Experiment grids over (method, K, kappa), seed-set overlap and the modular graph generator."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .centrality import centrality_table
from .graph import Graph
from .epidemic import SirConfig, simulate, with_kappa
from .seeding import METHODS, SeedSet, select_seeds

__all__ = [
    "jaccard",
    "jaccard_matrix",
    "diffusion_speed",
    "ExperimentGrid",
    "CellRecord",
    "ExperimentReport",
    "run_experiment_grid",
    "generate_modular_graph",
    "write_report",
]


def _members(s) -> set:
    return set(s.seeds if isinstance(s, SeedSet) else s)


def jaccard(a, b) -> float:
    """``|a & b| / |a | b|`` for two seed sets (or plain iterables of labels)."""
    a, b = _members(a), _members(b)
    if not a or not b:
        raise ValueError("jaccard needs two non-empty sets")
    return len(a & b) / len(a | b)


def jaccard_matrix(sets: Sequence) -> np.ndarray:
    if len(sets) < 2:
        raise ValueError("need at least two seed sets")
    sizes = {len(_members(s)) for s in sets}
    if len(sizes) != 1:
        raise ValueError(f"seed sets differ in size: {sorted(sizes)}")
    m = len(sets)
    out = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            out[i, j] = out[j, i] = jaccard(sets[i], sets[j])
    return out


def diffusion_speed(gamma: float, K: int, tau: float) -> float:
    """Newly infected nodes per period: ``(gamma - K) / tau``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    return (gamma - K) / tau


def generate_modular_graph(n: int, c: int, p: float, r: float, rng_seed: int = 0,
                           strict: bool = False) -> tuple[Graph, np.ndarray]:
    """Random undirected graph with ``c`` planted modules.

    Nodes ``1..n`` are split into ``c`` near-equal consecutive modules. The
    expected degree is ``p * (n - 1)``, a fraction ``r`` of it inside the
    node's own module (``r`` is ignored when ``c == 1``); the implied within/between pair probabilities are
    clipped to 1 unless ``strict`` is set, in which case an unreachable
    target raises. Returns the graph and the planted module of each node.
    """
    if not 1 <= c <= n:
        raise ValueError("need 1 <= c <= n")
    if not (0 <= p <= 1 and 0 <= r <= 1):
        raise ValueError("p and r must lie in [0, 1]")
    module = np.concatenate([np.full(len(part), i) for i, part in enumerate(np.array_split(np.arange(n), c))])
    size = n / c
    degree = p * (n - 1)
    if c == 1:
        # no outside to send the (1 - r) share to: plain random graph
        p_in, p_out = p, 0.0
    else:
        p_in = r * degree / (size - 1) if size > 1 else 0.0
        p_out = (1 - r) * degree / (n - size)
    if strict and (p_in > 1 or p_out > 1):
        raise ValueError(f"infeasible: needs within-module probability {p_in:.3g} "
                         f"and between-module probability {p_out:.3g}")
    p_in, p_out = min(p_in, 1.0), min(p_out, 1.0)
    rng = np.random.default_rng(rng_seed)
    i, j = np.triu_indices(n, k=1)
    prob = np.where(module[i] == module[j], p_in, p_out)
    keep = rng.random(i.size) < prob
    i, j = i[keep], j[keep]
    src = np.concatenate([i, j])
    dst = np.concatenate([j, i])
    labels = tuple(str(v + 1) for v in range(n))
    g = Graph(labels, src, dst, np.ones(src.size), directed=False)
    return g, module


@dataclass
class ExperimentGrid:
    graph: Graph
    methods: Sequence[str] = METHODS
    K_values: Sequence[int] = (5, 10, 20)
    kappa_values: Sequence[float] = (0.2, 0.5)
    sir: SirConfig = field(default_factory=SirConfig)
    weights: Sequence[float] | None = None
    restarts: int = 20

    def __post_init__(self):
        self.methods = tuple(self.methods)
        self.K_values = tuple(int(k) for k in self.K_values)
        self.kappa_values = tuple(float(k) for k in self.kappa_values)
        if not (self.methods and self.K_values and self.kappa_values):
            raise ValueError("methods, K values and kappa values must be non-empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown method(s): {', '.join(unknown)}")
        too_big = [k for k in self.K_values if not 1 <= k <= self.graph.n]
        if too_big:
            raise ValueError(f"K values outside 1..{self.graph.n}: {too_big}")
        for kappa in self.kappa_values:
            with_kappa(self.sir, kappa)


@dataclass
class CellRecord:
    method: str
    K: int
    kappa: float
    gamma_mean: float
    gamma_std: float
    gamma_pct: float
    tau_mean: float
    tau_std: float
    eta: float


@dataclass
class ExperimentReport:
    n: int
    records: list[CellRecord]
    seeds: dict[tuple[str, int], SeedSet]
    methods: tuple[str, ...]
    K_values: tuple[int, ...]
    kappa_values: tuple[float, ...]
    params: dict = field(default_factory=dict)

    def grid_means(self) -> dict[str, dict[str, float]]:
        """Per-method averages of gamma %, tau and eta over all (K, kappa) cells."""
        out = {}
        for m in self.methods:
            rows = [r for r in self.records if r.method == m]
            out[m] = {
                "gamma_pct": math.fsum(r.gamma_pct for r in rows) / len(rows),
                "tau": math.fsum(r.tau_mean for r in rows) / len(rows),
                "eta": math.fsum(r.eta for r in rows) / len(rows),
            }
        return out

    def jaccard_matrices(self) -> dict[int, np.ndarray]:
        if len(self.methods) < 2:
            return {}
        return {K: jaccard_matrix([self.seeds[m, K] for m in self.methods]) for K in self.K_values}

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "methods": list(self.methods),
            "K_values": list(self.K_values),
            "kappa_values": list(self.kappa_values),
            "params": self.params,
            "records": [asdict(r) for r in self.records],
            "grid_means": self.grid_means(),
            "jaccard": {str(K): m.tolist() for K, m in self.jaccard_matrices().items()},
            "seeds": {f"{m}/{K}": s.seeds for (m, K), s in self.seeds.items()},
        }


def _cell(g: Graph, seeds: SeedSet, cfg: SirConfig):
    out = simulate(g, seeds, cfg)
    return out.gamma_mean, out.gamma_std, out.tau_mean, out.tau_std


def run_experiment_grid(grid: ExperimentGrid, jobs: int = 1) -> ExperimentReport:
    """Simulate every (method, K, kappa) cell of ``grid``.

    Seed sets are chosen once per (method, K) and reused for every kappa.
    The random streams of a cell depend on (rng_seed, K, kappa index) only,
    so all methods face common random numbers and identical seed sets give
    identical records.
    """
    g = grid.graph
    base_seed = grid.sir.rng_seed
    table = centrality_table(g) if any(m != "gtacb" for m in grid.methods) else None
    seeds = {}
    for m in grid.methods:
        for K in grid.K_values:
            seeds[m, K] = select_seeds(g, K, m, grid.weights, restarts=grid.restarts,
                                       rng_seed=base_seed, table=table)
    cells = []
    for m in grid.methods:
        for K in grid.K_values:
            for ki, kappa in enumerate(grid.kappa_values):
                cells.append((m, K, kappa, with_kappa(grid.sir, kappa, (K, ki))))
    if jobs <= 1:
        results = [_cell(g, seeds[m, K], cfg) for m, K, _, cfg in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_cell, g, seeds[m, K], cfg) for m, K, _, cfg in cells]
            results = []
            for (m, K, kappa, _), f in zip(cells, futures):
                try:
                    results.append(f.result())
                except Exception as exc:
                    raise RuntimeError(f"cell method={m} K={K} kappa={kappa} failed: {exc}") from exc
    records = []
    for (m, K, kappa, _), (gm, gs, tm, ts) in zip(cells, results):
        records.append(CellRecord(m, K, kappa, gm, gs, gm / g.n, tm, ts, diffusion_speed(gm, K, tm)))
    params = {
        "L": grid.sir.L,
        "alpha": list(grid.sir.alpha),
        "iterations": grid.sir.iterations,
        "rng_seed": base_seed,
        "transmission_mode": grid.sir.transmission_mode,
        "restarts": grid.restarts,
        "weights": None if grid.weights is None else [float(w) for w in grid.weights],
    }
    return ExperimentReport(g.n, records, seeds, grid.methods, grid.K_values, grid.kappa_values, params)


def _fmt(x) -> str:
    return f"{x:.9g}" if isinstance(x, float) else str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def write_report(report: ExperimentReport, outdir) -> list[Path]:
    """Write JSON, the three summary tables, per-K Jaccard matrices and the long CSV."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    means = report.grid_means()
    files = {
        "report.json": json.dumps(report.to_dict(), indent=2) + "\n",
        "table_gamma_pct.csv": _csv(["method", "gamma_pct"], [(m, means[m]["gamma_pct"]) for m in report.methods]),
        "table_tau.csv": _csv(["method", "tau"], [(m, means[m]["tau"]) for m in report.methods]),
        "table_eta.csv": _csv(["method", "eta"], [(m, means[m]["eta"]) for m in report.methods]),
        "cells.csv": _csv(["method", "K", "kappa", "gamma", "tau", "eta"],
                          [(r.method, r.K, r.kappa, r.gamma_mean, r.tau_mean, r.eta) for r in report.records]),
    }
    for K, mat in report.jaccard_matrices().items():
        rows = [[m] + row for m, row in zip(report.methods, mat.tolist())]
        files[f"jaccard_K{K}.csv"] = _csv(["method"] + list(report.methods), rows)
    written = []
    for name, text in files.items():
        path = outdir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
