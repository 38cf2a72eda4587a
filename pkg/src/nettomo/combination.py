"""Combination matrices supported on a graph, and the C1/C2 class checks.

A combination matrix is nonnegative, symmetric, supported on the graph's
edges, and has every column summing to the same rho in (0, 1). Stability of
the diffusion recursion follows from the column sums: the spectral radius
never exceeds rho.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

COLUMN_SUM_TOL = 1e-12
_REL_TOL = 1e-9


class SupportError(ValueError):
    """Matrix has weight on a pair that is not an edge of the graph."""


@dataclass(frozen=True, eq=False)
class CombinationMatrix:
    """Validated combination matrix.

    Parameters
    ----------
    entries : ndarray, shape (n, n)
        Nonnegative symmetric weights; every column sums to rho.
    rho : float
        Common column sum, strictly inside (0, 1).
    """

    entries: np.ndarray
    rho: float

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("entries must be a square matrix")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if (a < 0).any():
            raise ValueError("entries must be nonnegative")
        if not np.array_equal(a, a.T):
            raise ValueError("entries must be symmetric")
        colsums = a.sum(axis=0)
        if np.max(np.abs(colsums - self.rho)) > COLUMN_SUM_TOL:
            raise ValueError("column sums deviate from rho beyond tolerance")
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ClassReport:
    """Membership report for the two combination-matrix classes.

    in_c1 holds when every connected off-diagonal entry clears tau / d_mean
    for the reported tau > 0. in_c2 holds when some kappa in (0, rho] traps
    all connected entries inside [kappa/d_max, kappa/d_min]. On graphs with
    no edges both conditions are vacuous and the witnesses default to rho.
    """

    in_c1: bool
    tau: float | None
    in_c2: bool
    kappa: float | None


def build_metropolis(g: Graph, rho: float) -> CombinationMatrix:
    """Metropolis rule: a_lk = rho / max(d_l, d_k) on edges.

    Self-weights complete every column to rho; the self-counting degree
    convention keeps them nonnegative.
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    d = g.degrees()
    a = np.where(g.adjacency, rho / np.maximum.outer(d, d), 0.0)
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, rho - a.sum(axis=0))
    return CombinationMatrix(a, rho)


def build_laplacian(g: Graph, rho: float, lam: float) -> CombinationMatrix:
    """Laplacian rule: a_lk = rho * lam / d_max on edges, 0 < lam <= 1."""
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if not 0 < lam <= 1:
        raise ValueError("lam must lie in (0, 1]")
    d_max = int(g.degrees().max())
    a = np.where(g.adjacency, rho * lam / d_max, 0.0)
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, rho - a.sum(axis=0))
    return CombinationMatrix(a, rho)


def doubly_stochastic_metropolis(g: Graph) -> np.ndarray:
    """Metropolis weights without the rho scaling: columns sum to 1.

    Returned as a plain array because a doubly stochastic matrix is not a
    stable combination matrix; scale it (or pair it with a step-size) before
    feeding the diffusion recursion.
    """
    d = g.degrees()
    c = np.where(g.adjacency, 1.0 / np.maximum.outer(d, d), 0.0)
    np.fill_diagonal(c, 0.0)
    np.fill_diagonal(c, 1.0 - c.sum(axis=0))
    return c


def check_class(a: CombinationMatrix, g: Graph) -> ClassReport:
    """Check C1/C2 membership of a matrix against its supporting graph.

    Raises SupportError if the matrix places weight outside the graph's
    edges. The kappa witness uses the interval test: the two-sided bound
    is feasible iff d_max * (min connected entry) >= d_min * (max connected
    entry), with the lower endpoint as witness.
    """
    if a.n != g.n:
        raise ValueError("matrix and graph sizes differ")
    off = ~np.eye(g.n, dtype=bool)
    misplaced = off & ~g.adjacency & (a.entries > 0)
    if misplaced.any():
        raise SupportError("matrix has weight on non-edges")

    if not g.adjacency.any():
        return ClassReport(in_c1=True, tau=a.rho, in_c2=True, kappa=a.rho)

    conn = a.entries[g.adjacency]
    d = g.degrees()
    d_min, d_max, d_mean = int(d.min()), int(d.max()), float(d.mean())
    min_conn = float(conn.min())
    max_conn = float(conn.max())

    in_c1 = min_conn > 0
    tau = 0.5 * min_conn * d_mean if in_c1 else None

    kappa_low = d_max * min_conn
    kappa_high = d_min * max_conn
    in_c2 = (
        min_conn > 0
        and kappa_low >= kappa_high * (1 - _REL_TOL)
        and kappa_low <= a.rho * (1 + _REL_TOL)
    )
    kappa = min(kappa_low, a.rho) if in_c2 else None
    return ClassReport(in_c1=in_c1, tau=tau, in_c2=in_c2, kappa=kappa)


def write_matrix(a: CombinationMatrix, path) -> None:
    """Write the coordinate text format: "n=<N> rho=<rho>", then "l k value".

    Every nonzero entry appears (both symmetric positions and the diagonal),
    1-based, lexicographic, with 17 significant digits.
    """
    write_coordinate(a.entries, path, rho=a.rho)


def read_matrix(path) -> CombinationMatrix:
    """Read and validate a combination matrix in coordinate format."""
    m, meta = read_coordinate(path)
    if "rho" not in meta:
        raise ValueError("coordinate header lacks rho")
    return CombinationMatrix(m, float(meta["rho"]))


def write_coordinate(m: np.ndarray, path, **meta) -> None:
    """Coordinate writer shared by matrix-like outputs.

    Header is "n=<N>" followed by the extra key=value metadata fields;
    entries are written as "l k value" (1-based) for every nonzero value.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    fields = [f"n={n}"] + [f"{k}={_fmt(v)}" for k, v in meta.items()]
    lines = [" ".join(fields)]
    for i in range(n):
        for j in range(n):
            if m[i, j] != 0.0:
                lines.append(f"{i + 1} {j + 1} {m[i, j]:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_coordinate(path) -> tuple[np.ndarray, dict]:
    """Read a coordinate file; returns (matrix, header metadata dict)."""
    with open(path) as fh:
        header = fh.readline().split()
        meta = {}
        for tok in header:
            key, _, val = tok.partition("=")
            meta[key] = val
        if "n" not in meta:
            raise ValueError("coordinate header lacks n")
        n = int(meta.pop("n"))
        m = np.zeros((n, n))
        for line in fh:
            line = line.strip()
            if not line:
                continue
            i, j, v = line.split()
            m[int(i) - 1, int(j) - 1] = float(v)
    return m, meta


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)
