"""Spectral K-way partitioning scored by inter-community arc weight."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import lobpcg

from .graph import Graph, label_key

__all__ = [
    "Partition",
    "EigenError",
    "cut_cost",
    "detect_communities",
    "spectral_embedding",
    "kmeans",
    "read_partition",
]

# above this size the embedding comes from LOBPCG instead of a dense eigh
DENSE_EIGH_LIMIT = 2000


class EigenError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint communities covering every node of a graph.

    ``assignment[i]`` is the community of node index ``i``. Communities are
    numbered ``0..H-1`` by decreasing size; equal sizes are ordered by their
    smallest member label.
    """

    labels: tuple[str, ...]
    assignment: np.ndarray

    @classmethod
    def from_assignment(cls, labels, assignment) -> "Partition":
        labels = tuple(labels)
        raw = np.asarray(assignment)
        if raw.shape != (len(labels),):
            raise ValueError("assignment length must equal the number of nodes")
        ids, inverse, counts = np.unique(raw, return_inverse=True, return_counts=True)
        first = [None] * len(ids)
        for i, c in enumerate(inverse.tolist()):
            key = label_key(labels[i])
            if first[c] is None or key < first[c]:
                first[c] = key
        order = sorted(range(len(ids)), key=lambda c: (-counts[c], first[c]))
        rank = np.empty(len(ids), dtype=np.int64)
        rank[order] = np.arange(len(ids))
        out = rank[inverse]
        out.setflags(write=False)
        return cls(labels, out)

    @property
    def H(self) -> int:
        return int(self.assignment.max()) + 1

    @property
    def sizes(self) -> list[int]:
        return np.bincount(self.assignment, minlength=self.H).tolist()

    def members(self, c: int) -> list[str]:
        return [self.labels[i] for i in np.flatnonzero(self.assignment == c)]

    def communities(self) -> list[list[str]]:
        return [self.members(c) for c in range(self.H)]

    def community_of(self, label) -> int:
        return int(self.assignment[self.labels.index(str(label))])

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.assignment, other.assignment)

    __hash__ = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["node", "community"])
        for lab, c in zip(self.labels, self.assignment.tolist()):
            out.writerow([lab, c])
        return buf.getvalue()


def read_partition(g: Graph, text: str) -> Partition:
    """Parse ``node,community`` CSV text produced by any community detector."""
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None or [h.strip() for h in header[:2]] != ["node", "community"]:
        raise ValueError("partition CSV must start with header 'node,community'")
    assign = {}
    for lineno, row in enumerate(rows, 2):
        if not row:
            continue
        if len(row) < 2:
            raise ValueError(f"line {lineno}: expected 'node,community'")
        node = row[0].strip()
        if node not in g.index:
            raise ValueError(f"line {lineno}: unknown node {node!r}")
        if node in assign:
            raise ValueError(f"line {lineno}: node {node!r} assigned twice")
        assign[node] = row[1].strip()
    missing = [v for v in g.labels if v not in assign]
    if missing:
        raise ValueError(f"partition misses {len(missing)} node(s), e.g. {missing[0]!r}")
    return Partition.from_assignment(g.labels, [assign[v] for v in g.labels])


def cut_cost(g: Graph, p: Partition) -> float:
    """Total weight of arcs whose endpoints lie in different communities."""
    if p.labels != g.labels:
        if set(p.labels) != set(g.labels):
            raise ValueError("partition does not cover the graph's nodes")
        p = Partition(g.labels, np.array([p.community_of(v) for v in g.labels]))
    a = p.assignment
    return math.fsum(g.weight[a[g.src] != a[g.dst]].tolist())


def _normalized_affinity(g: Graph) -> sparse.csr_matrix:
    a = g.adjacency()
    a = ((a + a.T) * 0.5).tocsr()
    deg = np.asarray(a.sum(axis=1)).ravel()
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    d = sparse.diags(inv_sqrt)
    return (d @ a @ d).tocsr()


def spectral_embedding(g: Graph, k: int, rng_seed: int = 0, tol: float = 1e-8) -> np.ndarray:
    """Row-normalized leading ``k`` eigenvectors of ``D^-1/2 W D^-1/2``, W symmetrized."""
    m = _normalized_affinity(g)
    n = g.n
    if n <= DENSE_EIGH_LIMIT or k >= n // 5:
        vals, vecs = linalg.eigh(m.toarray(), subset_by_index=(n - k, n - 1))
    else:
        rng = np.random.default_rng(rng_seed)
        x0 = rng.standard_normal((n, k))
        vals, vecs = lobpcg(m, x0, largest=True, tol=tol, maxiter=max(200, 20 * k))
        resid = np.linalg.norm(m @ vecs - vecs * vals, axis=0).max()
        if not np.isfinite(resid) or resid > math.sqrt(tol):
            raise EigenError("eigensolver did not converge", float(resid))
    order = np.argsort(-vals, kind="stable")
    emb = vecs[:, order]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    return np.divide(emb, norms, out=np.zeros_like(emb), where=norms > 1e-12)


def kmeans(x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 100) -> np.ndarray:
    """Lloyd's k-means from a farthest-point start; returns labels (clusters may be empty)."""
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(d2))
        centers.append(x[nxt])
        d2 = np.minimum(d2, ((x - x[nxt]) ** 2).sum(axis=1))
    c = np.array(centers)
    sq = (x * x).sum(axis=1)
    labels = None
    for _ in range(max_iter):
        dist = sq[:, None] - 2.0 * (x @ c.T) + (c * c).sum(axis=1)[None, :]
        new = np.argmin(dist, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            pts = x[labels == j]
            if len(pts):
                c[j] = pts.mean(axis=0)
    return labels


def _component_partition(g: Graph, comp: np.ndarray, ncomp: int, k: int) -> np.ndarray:
    # largest components first, each into the currently lightest group
    sizes = np.bincount(comp, minlength=ncomp)
    groups = np.zeros(k, dtype=np.int64)
    target = np.empty(ncomp, dtype=np.int64)
    for c in sorted(range(ncomp), key=lambda c: (-sizes[c], c)):
        j = int(np.argmin(groups))
        target[c] = j
        groups[j] += sizes[c]
    return target[comp]


def detect_communities(g: Graph, k_target: int, restarts: int = 20, rng_seed: int = 0,
                       max_iter: int = 100) -> Partition:
    """Split ``g`` into at most ``k_target`` communities with a small cut.

    When the (symmetrized) graph already has ``k_target`` or more connected
    components they are grouped directly, at zero cut. Otherwise the nodes
    are embedded spectrally and clustered by k-means ``restarts`` times; the
    restart reaching the most non-empty communities and, among those, the
    lowest cut wins (earliest restart on ties).
    """
    if not 1 <= k_target <= g.n:
        raise ValueError(f"k_target must lie in 1..{g.n}, got {k_target}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if k_target == 1:
        return Partition.from_assignment(g.labels, np.zeros(g.n, dtype=np.int64))
    ncomp, comp = csgraph.connected_components(g.adjacency(), directed=True, connection="weak")
    if ncomp >= k_target:
        return Partition.from_assignment(g.labels, _component_partition(g, comp, ncomp, k_target))

    emb = spectral_embedding(g, k_target, rng_seed)
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(r,)))
        part = Partition.from_assignment(g.labels, kmeans(emb, k_target, rng, max_iter))
        key = (-part.H, cut_cost(g, part))
        if best is None or key < best[0]:
            best = (key, part)
    return best[1]
