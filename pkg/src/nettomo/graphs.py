"""Random graph generation and degree statistics.

Graphs are undirected, without stored self-loops, but every degree counts
the node itself: degree(i) = 1 + number of neighbors. All node indices are
0-based in memory; the edge-list file format is 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

REGIME_KINDS = ("dense", "log-sparse", "intermediate-sparse")


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph held as a dense symmetric boolean adjacency matrix.

    Parameters
    ----------
    n : int
        Number of nodes.
    adjacency : ndarray of bool, shape (n, n)
        Symmetric, with an all-False diagonal. Self-loops are never stored;
        the self-count enters through the degree convention instead.
    """

    n: int
    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.shape != (self.n, self.n):
            raise ValueError(f"adjacency shape {adj.shape} does not match n={self.n}")
        if adj.diagonal().any():
            raise ValueError("self-loops are not stored as edges")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build a graph from an iterable of 0-based (i, j) pairs."""
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop ({i}, {j}) not allowed")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            adj[i, j] = adj[j, i] = True
        return cls(n, adj)

    def edges(self) -> list[tuple[int, int]]:
        """Sorted list of edges as 0-based (i, j) with i < j."""
        iu, ju = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def degrees(self) -> np.ndarray:
        """Self-counting degree of every node: 1 + number of neighbors."""
        return 1 + self.adjacency.sum(axis=1)


@dataclass(frozen=True)
class RegimeSpec:
    """Connection-probability regime for the ER ensemble.

    kind selects the scaling law:
      dense               p(n) = dense_p
      log-sparse          p(n) = min(1, log_sparse_c * log(n) / n)
      intermediate-sparse p(n) = min(1, (log n)^(1 + intermediate_exponent) / n)
    """

    kind: str
    dense_p: float = 0.3
    log_sparse_c: float = 2.0
    intermediate_exponent: float = 0.5

    def __post_init__(self):
        if self.kind not in REGIME_KINDS:
            raise ValueError(f"unknown regime kind {self.kind!r}")
        if not 0 < self.dense_p <= 1:
            raise ValueError("dense_p must lie in (0, 1]")
        if self.log_sparse_c <= 1:
            raise ValueError("log_sparse_c must exceed 1")
        if self.intermediate_exponent <= 0:
            raise ValueError("intermediate_exponent must be positive")


@dataclass(frozen=True)
class ObservationSet:
    """Probed node subset S; the complement S' stays latent.

    indices are strictly increasing 0-based node ids; n_total is the size
    of the ambient graph, so the probed fraction is len(indices) / n_total.
    """

    indices: tuple[int, ...]
    n_total: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) == 0:
            raise ValueError("observation set must be nonempty")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if idx[0] < 0 or idx[-1] >= self.n_total:
            raise ValueError("indices out of range")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def fraction(self) -> float:
        return len(self.indices) / self.n_total

    def complement(self) -> np.ndarray:
        """0-based indices of the latent nodes, ascending."""
        mask = np.ones(self.n_total, dtype=bool)
        mask[list(self.indices)] = False
        return np.flatnonzero(mask)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)


class DegreeStats(NamedTuple):
    d_min: int
    d_max: int
    d_mean: float


def gen_er(n: int, p: float, seed: int) -> Graph:
    """Draw an Erdos-Renyi graph: each unordered pair connected w.p. p.

    Deterministic given (n, p, seed).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    adj = np.zeros((n, n), dtype=bool)
    iu, ju = np.triu_indices(n, 1)
    hit = rng.random(iu.shape[0]) < p
    adj[iu[hit], ju[hit]] = True
    adj |= adj.T
    return Graph(n, adj)


def regime_probability(spec: RegimeSpec, n: int) -> float:
    """Connection probability p(n) for the given regime."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if spec.kind == "dense":
        return spec.dense_p
    if spec.kind == "log-sparse":
        return min(1.0, spec.log_sparse_c * math.log(n) / n)
    return min(1.0, math.log(n) ** (1.0 + spec.intermediate_exponent) / n)


def gen_partial_er(s_graph: Graph, n: int, p: float, seed: int) -> tuple[Graph, ObservationSet]:
    """Embed a fixed subgraph into an ER background.

    The probed set S lands on indices 0..|S|-1 and keeps s_graph verbatim;
    every pair touching the complement is drawn i.i.d. Bernoulli(p).
    """
    m = s_graph.n
    if m > n:
        raise ValueError(f"subgraph size {m} exceeds n={n}")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    adj = np.zeros((n, n), dtype=bool)
    adj[:m, :m] = s_graph.adjacency
    iu, ju = np.triu_indices(n, 1)
    # one draw per pair touching S', in upper-triangular order
    outside = np.flatnonzero(ju >= m)
    hit = outside[rng.random(outside.size) < p]
    adj[iu[hit], ju[hit]] = True
    adj |= adj.T
    return Graph(n, adj), ObservationSet(tuple(range(m)), n)


def degree_stats(g: Graph) -> DegreeStats:
    """Minimum, maximum, and mean self-counting degree."""
    d = g.degrees()
    return DegreeStats(int(d.min()), int(d.max()), float(d.mean()))


def write_edge_list(g: Graph, path) -> None:
    """Write the edge-list text format: header "n=<N>", then "l k" lines.

    Node ids are 1-based, each edge appears once with l < k, sorted.
    """
    lines = [f"n={g.n}"]
    lines += [f"{i + 1} {j + 1}" for i, j in g.edges()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edge_list(path) -> Graph:
    """Read the edge-list text format written by write_edge_list."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise ValueError(f"bad edge-list header: {header!r}")
        n = int(header[2:])
        edges = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = line.split()
            edges.append((int(a) - 1, int(b) - 1))
    return Graph.from_edges(n, edges)
