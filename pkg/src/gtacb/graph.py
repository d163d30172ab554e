"""Directed weighted graphs, file ingestion and hop-count BFS."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy import sparse

__all__ = [
    "Graph",
    "IngestReport",
    "ParseError",
    "UNREACHABLE",
    "label_key",
    "parse_edge_list",
    "parse_pajek",
    "load_graph",
    "normalize_weights",
    "induced_subgraph",
    "bfs_distances",
    "hop_distances",
    "to_edge_list",
]

UNREACHABLE = -1


class ParseError(ValueError):
    """Malformed graph input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def label_key(label: str):
    """Sort key for node labels: integer-looking labels numerically, then the rest lexically."""
    try:
        return (0, int(label), label)
    except ValueError:
        return (1, 0, label)


@dataclass
class IngestReport:
    arcs_read: int = 0
    arcs_merged: int = 0
    self_loops_dropped: int = 0
    was_symmetrized: bool = False
    weight_scale: float = 1.0

    def as_dict(self) -> dict:
        return {
            "arcs_read": self.arcs_read,
            "arcs_merged": self.arcs_merged,
            "self_loops_dropped": self.self_loops_dropped,
            "was_symmetrized": self.was_symmetrized,
            "weight_scale": self.weight_scale,
        }


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable directed graph with positive arc weights.

    Nodes carry string labels and dense indices ``0..n-1``. Arcs are stored
    sorted by ``(src, dst)``, which makes the arc arrays double as the
    out-adjacency in CSR form. ``directed=False`` marks a graph whose arcs
    come in symmetric pairs of equal weight.
    """

    labels: tuple[str, ...]
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    directed: bool = True
    weight_scale: float = 1.0
    index: dict = field(init=False, repr=False)
    out_ptr: np.ndarray = field(init=False, repr=False)
    in_ptr: np.ndarray = field(init=False, repr=False)
    in_src: np.ndarray = field(init=False, repr=False)
    in_weight: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.labels)
        if n < 1:
            raise ValueError("graph needs at least one node")
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        w = np.asarray(self.weight, dtype=np.float64)
        if not (src.shape == dst.shape == w.shape):
            raise ValueError("arc arrays differ in length")
        if src.size:
            if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n:
                raise ValueError("arc endpoint out of range")
            if np.any(src == dst):
                raise ValueError("self-loops are not allowed")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ValueError("weights must be finite and positive")
        order = np.lexsort((dst, src))
        src, dst, w = src[order], dst[order], w[order]
        if src.size > 1:
            dup = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if np.any(dup):
                raise ValueError("duplicate arcs are not allowed")
        for arr in (src, dst, w):
            arr.setflags(write=False)
        set_ = object.__setattr__
        set_(self, "labels", tuple(str(x) for x in self.labels))
        set_(self, "src", src)
        set_(self, "dst", dst)
        set_(self, "weight", w)
        index = {lab: i for i, lab in enumerate(self.labels)}
        if len(index) != n:
            raise ValueError("node labels must be unique")
        set_(self, "index", index)
        set_(self, "out_ptr", np.searchsorted(src, np.arange(n + 1)))
        in_order = np.lexsort((src, dst))
        set_(self, "in_ptr", np.searchsorted(dst[in_order], np.arange(n + 1)))
        set_(self, "in_src", src[in_order])
        set_(self, "in_weight", w[in_order])

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def u(self) -> int:
        return int(self.src.size)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.directed == other.directed
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weight, other.weight)
        )

    __hash__ = None

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, u={self.u}, {kind})"

    def out_neighbors(self, i: int) -> np.ndarray:
        return self.dst[self.out_ptr[i]:self.out_ptr[i + 1]]

    def out_weights(self, i: int) -> np.ndarray:
        return self.weight[self.out_ptr[i]:self.out_ptr[i + 1]]

    def in_neighbors(self, i: int) -> np.ndarray:
        return self.in_src[self.in_ptr[i]:self.in_ptr[i + 1]]

    def in_weights(self, i: int) -> np.ndarray:
        return self.in_weight[self.in_ptr[i]:self.in_ptr[i + 1]]

    def out_lists(self) -> list[list[int]]:
        ptr, dst = self.out_ptr, self.dst.tolist()
        return [dst[ptr[i]:ptr[i + 1]] for i in range(self.n)]

    def in_lists(self) -> list[list[int]]:
        ptr, src = self.in_ptr, self.in_src.tolist()
        return [src[ptr[i]:ptr[i + 1]] for i in range(self.n)]

    def node(self, label) -> int:
        try:
            return self.index[str(label)]
        except KeyError:
            raise KeyError(f"unknown node {label!r}") from None

    def arcs(self) -> Iterable[tuple[str, str, float]]:
        labels = self.labels
        for s, d, w in zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()):
            yield labels[s], labels[d], w

    def adjacency(self) -> sparse.csr_matrix:
        """Weighted adjacency ``A[i, j] = w_ij`` as a CSR matrix."""
        return sparse.csr_matrix(
            (self.weight, (self.src, self.dst)), shape=(self.n, self.n)
        )


class _Builder:
    """Accumulates arcs with merge-by-sum and self-loop dropping."""

    def __init__(self, directed: bool):
        self.directed = directed
        self.labels: list[str] = []
        self.index: dict[str, int] = {}
        self.arcs: dict[tuple[int, int], float] = {}
        self.report = IngestReport(was_symmetrized=not directed)

    def node(self, label: str) -> int:
        i = self.index.get(label)
        if i is None:
            i = self.index[label] = len(self.labels)
            self.labels.append(label)
        return i

    def _put(self, s: int, d: int, w: float):
        key = (s, d)
        if key in self.arcs:
            self.arcs[key] += w
            self.report.arcs_merged += 1
        else:
            self.arcs[key] = w

    def add(self, s: int, d: int, w: float, directed: bool | None = None):
        self.report.arcs_read += 1
        if s == d:
            self.report.self_loops_dropped += 1
            return
        self._put(s, d, w)
        if not (self.directed if directed is None else directed):
            self._put(d, s, w)

    def build(self) -> Graph:
        if not self.labels:
            raise ParseError("empty input: no nodes")
        keys = list(self.arcs)
        src = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        dst = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
        w = np.fromiter(self.arcs.values(), dtype=np.float64, count=len(keys))
        return Graph(tuple(self.labels), src, dst, w, directed=self.directed)


def _parse_weight(token: str, lineno: int) -> float:
    try:
        w = float(token)
    except ValueError:
        raise ParseError(f"bad weight {token!r}", lineno) from None
    if not math.isfinite(w) or w <= 0:
        raise ParseError(f"weight must be finite and positive, got {token!r}", lineno)
    return w


def _lines(text) -> Iterable[str]:
    if isinstance(text, str):
        return text.splitlines()
    return text


def parse_edge_list(text, directed: bool = False, has_weights: bool = True) -> tuple[Graph, IngestReport]:
    """Parse ``src dst [weight]`` lines; ``#`` and ``%`` start comment lines.

    Undirected input becomes a pair of equal-weight arcs per edge. Duplicate
    arcs merge by summing weights; self-loops are dropped (their endpoint is
    still registered as a node).
    """
    b = _Builder(directed)
    for lineno, raw in enumerate(_lines(text), 1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        parts = line.split()
        if len(parts) < 2 or (len(parts) > 3 and has_weights):
            raise ParseError(f"expected 'src dst [weight]', got {line!r}", lineno)
        w = _parse_weight(parts[2], lineno) if has_weights and len(parts) == 3 else 1.0
        b.add(b.node(parts[0]), b.node(parts[1]), w)
    return b.build(), b.report


def parse_pajek(text) -> tuple[Graph, IngestReport]:
    """Parse the ``*Vertices`` / ``*Arcs`` / ``*Edges`` subset of Pajek ``.net``.

    Nodes are labelled by their 1-based Pajek ids. Entries under ``*Edges`` are
    symmetrized, entries under ``*Arcs`` are kept directed. The graph counts as
    undirected only if it has no ``*Arcs`` entries.
    """
    n = None
    section = None
    entries: list[tuple[int, int, float, bool]] = []
    for lineno, raw in enumerate(_lines(text), 1):
        line = raw.strip()
        if not line or line[0] in "%#":
            continue
        if line.startswith("*"):
            head = line.split()
            key = head[0].lower()
            if key == "*vertices":
                if len(head) < 2:
                    raise ParseError("*Vertices needs a count", lineno)
                try:
                    n = int(head[1])
                except ValueError:
                    raise ParseError(f"bad vertex count {head[1]!r}", lineno) from None
                if n < 1:
                    raise ParseError("vertex count must be positive", lineno)
                section = "vertices"
            elif key in ("*arcs", "*edges"):
                if n is None:
                    raise ParseError(f"{head[0]} before *Vertices", lineno)
                section = key[1:]
            elif key == "*network":
                continue
            else:
                raise ParseError(f"unsupported section {head[0]}", lineno)
            continue
        if section is None:
            raise ParseError("missing *Vertices header", lineno)
        if section == "vertices":
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ParseError(f"expected 'src dst [weight]', got {line!r}", lineno)
        try:
            s, d = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"vertex ids must be integers: {line!r}", lineno) from None
        for v in (s, d):
            if not 1 <= v <= n:
                raise ParseError(f"vertex id {v} out of range 1..{n}", lineno)
        w = _parse_weight(parts[2], lineno) if len(parts) >= 3 else 1.0
        entries.append((s, d, w, section == "arcs"))
    if n is None:
        raise ParseError("missing *Vertices header")
    has_arcs = any(e[3] for e in entries)
    b = _Builder(directed=has_arcs)
    for v in range(1, n + 1):
        b.node(str(v))
    for s, d, w, is_arc in entries:
        b.add(s - 1, d - 1, w, directed=is_arc)
    b.report.was_symmetrized = any(not e[3] for e in entries)
    return b.build(), b.report


def normalize_weights(g: Graph) -> Graph:
    """Divide all weights by the maximum weight so they fall in (0, 1]."""
    if g.u == 0:
        raise ValueError("cannot normalize a graph without arcs")
    top = float(g.weight.max())
    if top == 1.0:
        return g
    return replace(g, weight=g.weight / top, weight_scale=g.weight_scale * top)


def load_graph(path, fmt: str = "auto", directed: bool = False, has_weights: bool = True,
               normalize: bool = True) -> tuple[Graph, IngestReport]:
    path = Path(path)
    if fmt == "auto":
        fmt = "pajek" if path.suffix.lower() in (".net", ".paj") else "edgelist"
    text = path.read_text(encoding="utf-8")
    if fmt == "pajek":
        g, report = parse_pajek(text)
    elif fmt == "edgelist":
        g, report = parse_edge_list(text, directed=directed, has_weights=has_weights)
    else:
        raise ValueError(f"unknown graph format {fmt!r}")
    if normalize and g.u:
        g = normalize_weights(g)
        report.weight_scale = g.weight_scale
    return g, report


def induced_subgraph(g: Graph, nodes) -> Graph:
    """Subgraph on ``nodes`` (labels) keeping every arc with both ends inside.

    Node order follows the parent graph, so ``induced_subgraph(g, all)`` equals ``g``.
    """
    idx = sorted({g.node(v) for v in nodes})
    if not idx:
        raise ValueError("empty node set")
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[idx] = np.arange(len(idx))
    keep = (remap[g.src] >= 0) & (remap[g.dst] >= 0)
    return Graph(
        tuple(g.labels[i] for i in idx),
        remap[g.src[keep]],
        remap[g.dst[keep]],
        g.weight[keep],
        directed=g.directed,
        weight_scale=g.weight_scale,
    )


def hop_distances(g: Graph, source: int, direction: str = "out", adj=None) -> np.ndarray:
    """BFS hop counts from node index ``source``; ``UNREACHABLE`` where no path exists."""
    if adj is None:
        if direction == "out":
            adj = g.out_lists()
        elif direction == "in":
            adj = g.in_lists()
        else:
            raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")
    dist = [UNREACHABLE] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dv
                queue.append(w)
    return np.asarray(dist, dtype=np.int64)


def bfs_distances(g: Graph, source, direction: str = "out") -> dict[str, int | None]:
    """Hop distances keyed by label; unreachable nodes map to ``None``."""
    d = hop_distances(g, g.node(source), direction)
    return {lab: (int(x) if x >= 0 else None) for lab, x in zip(g.labels, d)}


def to_edge_list(g: Graph) -> str:
    """Canonical ``src<TAB>dst<TAB>weight`` text, sorted by (src, dst) index."""
    return "".join(f"{s}\t{d}\t{w:.9g}\n" for s, d, w in g.arcs())
