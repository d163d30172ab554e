"""TOPSIS ranking of alternatives against an ideal and an anti-ideal point."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import label_key

__all__ = ["DecisionMatrix", "TopsisRanking", "topsis_rank", "equal_weights"]


def equal_weights(p: int) -> np.ndarray:
    if p < 1:
        raise ValueError("need at least one criterion")
    w = np.full(p, 1.0 / p)
    # push any rounding residue into the last entry so the fsum is exactly 1
    w[-1] = 1.0 - math.fsum(w[:-1])
    return w


@dataclass
class DecisionMatrix:
    alternatives: Sequence[str]
    criteria: Sequence[str]
    values: np.ndarray
    weights: np.ndarray | None = None
    benefit: Sequence[bool] | None = None

    def __post_init__(self):
        self.alternatives = tuple(str(a) for a in self.alternatives)
        self.criteria = tuple(self.criteria)
        self.values = np.asarray(self.values, dtype=float)
        m, p = len(self.alternatives), len(self.criteria)
        if m < 1 or p < 1:
            raise ValueError("decision matrix needs at least one row and one column")
        if self.values.shape != (m, p):
            raise ValueError(f"values shape {self.values.shape} does not match {m}x{p}")
        if np.isnan(self.values).any():
            raise ValueError("decision matrix contains NaN")
        if not np.isfinite(self.values).all():
            raise ValueError("decision matrix contains non-finite values")
        self.weights = equal_weights(p) if self.weights is None else np.asarray(self.weights, dtype=float)
        if self.weights.shape != (p,) or (self.weights < 0).any():
            raise ValueError("weights must be p non-negative numbers")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {math.fsum(self.weights)!r}")
        self.benefit = (True,) * p if self.benefit is None else tuple(bool(b) for b in self.benefit)
        if len(self.benefit) != p:
            raise ValueError("one direction flag per criterion")


@dataclass
class TopsisRanking:
    """Alternatives sorted by closeness ``c_star`` (descending, ties by label)."""

    nodes: list[str]
    c_star: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray
    ideal: np.ndarray = field(repr=False, default=None)
    anti_ideal: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return len(self.nodes)

    def top(self, k: int) -> list[str]:
        return self.nodes[:k]

    def score(self, node) -> float:
        return float(self.c_star[self.nodes.index(str(node))])

    def to_records(self) -> list[dict]:
        return [
            {"node": v, "c_star": float(c), "s_plus": float(sp), "s_minus": float(sm)}
            for v, c, sp, sm in zip(self.nodes, self.c_star, self.s_plus, self.s_minus)
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_records(), indent=2)


def topsis_rank(dm: DecisionMatrix, zero_columns: str = "raise") -> TopsisRanking:
    """Rank the alternatives of ``dm`` by relative closeness to the ideal.

    Columns are vector-normalized, weighted, and compared against the
    per-criterion best (ideal) and worst (anti-ideal) values. A column that is
    zero everywhere cannot be normalized: ``zero_columns="raise"`` rejects it,
    ``"ignore"`` lets it contribute nothing to either distance.
    """
    x = dm.values
    m = x.shape[0]
    # fsum is correctly rounded, so row order cannot change the norms
    norms = np.sqrt([math.fsum(col) for col in (x * x).T])
    zero = norms == 0
    if zero.any():
        if zero_columns == "raise":
            names = ", ".join(c for c, z in zip(dm.criteria, zero) if z)
            raise ValueError(f"criterion {names} is zero for every alternative")
        if zero_columns != "ignore":
            raise ValueError(f"zero_columns must be 'raise' or 'ignore', got {zero_columns!r}")
    r = np.divide(x, norms, out=np.zeros_like(x), where=~zero)
    t = r * dm.weights
    benefit = np.asarray(dm.benefit)
    hi, lo = t.max(axis=0), t.min(axis=0)
    ideal = np.where(benefit, hi, lo)
    anti = np.where(benefit, lo, hi)
    s_plus = np.sqrt(((t - ideal) ** 2).sum(axis=1))
    s_minus = np.sqrt(((t - anti) ** 2).sum(axis=1))
    denom = s_plus + s_minus
    if m == 1:
        c = np.ones(1)
    else:
        c = np.divide(s_minus, denom, out=np.full(m, 0.5), where=denom > 0)
    keys = [label_key(a) for a in dm.alternatives]
    order = sorted(range(m), key=lambda i: (-c[i], keys[i]))
    return TopsisRanking(
        nodes=[dm.alternatives[i] for i in order],
        c_star=c[order],
        s_plus=s_plus[order],
        s_minus=s_minus[order],
        ideal=ideal,
        anti_ideal=anti,
    )
