"""Degree, closeness, betweenness and PageRank over hop-count geodesics."""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import Graph, hop_distances

__all__ = [
    "CentralityTable",
    "ConvergenceError",
    "degree_centrality",
    "closeness_centrality",
    "betweenness_centrality",
    "pagerank",
    "centrality_table",
]

CRITERIA = ("dc", "cc", "bc", "pr")


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; carries the last iterate and its residual."""

    def __init__(self, message: str, last: np.ndarray, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.last = last
        self.residual = residual


def degree_centrality(g: Graph, mode: str = "out") -> np.ndarray:
    """Number of distinct neighbours along out-arcs, in-arcs or either."""
    if mode == "out":
        return np.diff(g.out_ptr).astype(float)
    if mode == "in":
        return np.diff(g.in_ptr).astype(float)
    if mode == "total":
        if not g.directed:
            return np.diff(g.out_ptr).astype(float)
        out, inn = g.out_lists(), g.in_lists()
        return np.array([len(set(o) | set(i)) for o, i in zip(out, inn)], dtype=float)
    raise ValueError(f"mode must be out, in or total, got {mode!r}")


def closeness_centrality(g: Graph) -> np.ndarray:
    """``1 / sum(d(v, u))`` over the nodes ``u`` reachable from ``v``; 0 if none are."""
    adj = g.out_lists()
    cc = np.zeros(g.n)
    for v in range(g.n):
        d = hop_distances(g, v, adj=adj)
        total = int(d[d > 0].sum())
        if total:
            cc[v] = 1.0 / total
    return cc


def betweenness_centrality(g: Graph) -> np.ndarray:
    """Brandes accumulation over directed hop-count shortest paths, unnormalized.

    Every ordered pair ``(s, t)`` contributes, so an undirected path counts
    once per direction.
    """
    n = g.n
    adj = g.out_lists()
    bc = [0.0] * n
    for s in range(n):
        stack = []
        preds = [[] for _ in range(n)]
        sigma = [0] * n
        dist = [-1] * n
        sigma[s] = 1
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            dv = dist[v] + 1
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return np.asarray(bc)


def pagerank(g: Graph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 200) -> np.ndarray:
    """Weighted PageRank by power iteration.

    Node ``i`` passes ``damping * pr[i]`` to its out-neighbours in proportion
    to arc weight; dangling nodes spread theirs uniformly. Stops when the L1
    change drops below ``tol``.
    """
    if not 0 < damping < 1:
        raise ValueError("damping must lie in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = g.n
    strength = np.bincount(g.src, weights=g.weight, minlength=n)
    dangling = strength == 0
    share = g.weight / strength[g.src]
    x = np.full(n, 1.0 / n)
    residual = np.inf
    for _ in range(max_iter):
        flow = np.bincount(g.dst, weights=share * x[g.src], minlength=n)
        new = damping * flow + (damping * x[dangling].sum() + 1.0 - damping) / n
        new /= new.sum()
        residual = float(np.abs(new - x).sum())
        x = new
        if residual < tol:
            return x
    raise ConvergenceError(f"pagerank did not converge in {max_iter} iterations", x, residual)


@dataclass
class CentralityTable:
    labels: tuple[str, ...]
    dc: np.ndarray
    cc: np.ndarray
    bc: np.ndarray
    pr: np.ndarray

    def matrix(self) -> np.ndarray:
        """Rows are nodes, columns are ``(dc, cc, bc, pr)``."""
        return np.column_stack([self.dc, self.cc, self.bc, self.pr])

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(("node",) + CRITERIA)
        for row in zip(self.labels, self.dc, self.cc, self.bc, self.pr):
            out.writerow([row[0]] + [f"{x:.9g}" for x in row[1:]])
        return buf.getvalue()


def centrality_table(g: Graph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 200) -> CentralityTable:
    mode = "out" if g.directed else "total"
    return CentralityTable(
        labels=g.labels,
        dc=degree_centrality(g, mode),
        cc=closeness_centrality(g),
        bc=betweenness_centrality(g),
        pr=pagerank(g, damping, tol, max_iter),
    )
