"""From estimated submatrices to adjacency decisions and their quality.

Decisions are made per ordered pair, either by a fixed threshold or by a
blind two-cluster split of the scaled entries. Error rates and margins are
accounted over ordered pairs throughout; the undirected graph is the OR of
the two directions. Theoretical bias/gap predictions for the three
estimators are evaluated from the model parameters, and a sequence of
pairwise patch probes can be aggregated into one subgraph estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import EstimatedSubmatrix, granger, one_lag, residual
from .graphs import Graph, ObservationSet

DEGENERATE_SEPARATION = 1e-3


class DegenerateEntriesError(ValueError):
    """All off-diagonal entries identical: nothing to cluster."""


class CoverageError(ValueError):
    """Patch probes leave some node pair undecided."""


@dataclass(frozen=True, eq=False)
class AdjacencyEstimate:
    """Decision matrix over the probed set.

    directed holds the per-ordered-pair decisions (diagonal False);
    undirected is their OR. threshold is the unscaled decision threshold
    that produced it (None when not threshold-based); degenerate flags a
    conservative all-disconnected fallback.
    """

    directed: np.ndarray
    threshold: float | None = None
    degenerate: bool = False

    @property
    def undirected(self) -> np.ndarray:
        return self.directed | self.directed.T

    @property
    def size(self) -> int:
        return self.directed.shape[0]


@dataclass(frozen=True)
class ErrorRates:
    """Fractions of misclassified ordered pairs per class.

    e0: disconnected pairs declared connected (false edges).
    e1: connected pairs declared disconnected (missed edges).
    Classes with no members report a rate of 0.
    """

    e0: float
    e1: float
    n_disconnected: int
    n_connected: int


@dataclass(frozen=True)
class MarginReport:
    """Extremes of the estimated entries per connectivity class.

    disc_lo/disc_hi bound the disconnected ordered pairs, conn_lo/conn_hi
    the connected ones; margins of an empty class are None. eta_hat and
    gamma_hat are the scaled bias and gap estimates s_n * disc_hi and
    s_n * (conn_lo - disc_hi).
    """

    disc_lo: float | None
    disc_hi: float | None
    conn_lo: float | None
    conn_hi: float | None
    s_n: float
    eta_hat: float | None
    gamma_hat: float | None


@dataclass(frozen=True)
class ClusterSummary:
    """Outcome of the blind two-cluster split (centers on the scaled axis)."""

    center_lo: float
    center_hi: float
    size_lo: int
    size_hi: int
    threshold_scaled: float
    threshold: float
    degenerate: bool
    iterations: int


@dataclass(frozen=True)
class TheoryPrediction:
    """Predicted scaled bias eta and identifiability gap gamma."""

    eta: float
    gamma: float
    kind: str
    rho: float
    kappa: float
    xi: float
    p: float

    @property
    def zeta(self) -> float:
        return self.rho - self.kappa


def _values(est) -> np.ndarray:
    if isinstance(est, EstimatedSubmatrix):
        return est.values
    return np.asarray(est, dtype=float)


def _truth(truth) -> np.ndarray:
    if isinstance(truth, Graph):
        return truth.adjacency
    return np.asarray(truth, dtype=bool)


def classify_threshold(est, tau: float) -> AdjacencyEstimate:
    """Declare ordered pair (l, k) connected iff its entry exceeds tau."""
    values = _values(est)
    directed = values > tau
    np.fill_diagonal(directed, False)
    return AdjacencyEstimate(directed, threshold=float(tau))


def error_rates(decision, truth) -> ErrorRates:
    """Misclassification rates of a decision against the true subgraph."""
    directed = decision.directed if isinstance(decision, AdjacencyEstimate) \
        else np.asarray(decision, dtype=bool)
    adj = _truth(truth)
    off = ~np.eye(adj.shape[0], dtype=bool)
    disc = off & ~adj
    conn = off & adj
    n0 = int(disc.sum())
    n1 = int(conn.sum())
    e0 = float((disc & directed).sum() / n0) if n0 else 0.0
    e1 = float((conn & ~directed).sum() / n1) if n1 else 0.0
    return ErrorRates(e0, e1, n0, n1)


def margins(est, truth, s_n: float) -> MarginReport:
    """Extremal estimated entries per connectivity class, plus scaled bias/gap."""
    values = _values(est)
    adj = _truth(truth)
    off = ~np.eye(adj.shape[0], dtype=bool)
    disc = values[off & ~adj]
    conn = values[off & adj]
    disc_lo = float(disc.min()) if disc.size else None
    disc_hi = float(disc.max()) if disc.size else None
    conn_lo = float(conn.min()) if conn.size else None
    conn_hi = float(conn.max()) if conn.size else None
    eta_hat = s_n * disc_hi if disc_hi is not None else None
    gamma_hat = s_n * (conn_lo - disc_hi) \
        if conn_lo is not None and disc_hi is not None else None
    return MarginReport(disc_lo, disc_hi, conn_lo, conn_hi, float(s_n), eta_hat, gamma_hat)


def _two_means(values: np.ndarray) -> tuple[float, float, int]:
    """Deterministic 1-D Lloyd iteration for two clusters.

    Centers start at the extremes; points at or above the midpoint belong
    to the upper cluster. Converges exactly (centers stop moving) after
    finitely many sweeps.
    """
    lo = float(values.min())
    hi = float(values.max())
    if lo == hi:
        raise DegenerateEntriesError("all entries identical")
    iterations = 0
    while True:
        iterations += 1
        mid = (lo + hi) / 2
        upper = values >= mid
        new_lo = float(values[~upper].mean())
        new_hi = float(values[upper].mean())
        if new_lo == lo and new_hi == hi:
            return lo, hi, iterations
        lo, hi = new_lo, new_hi


def cluster_classify(est, s_n: float) -> tuple[AdjacencyEstimate, ClusterSummary]:
    """Blind classification by a two-cluster split of the scaled entries.

    Pairs assigned to the higher-center cluster are declared connected; the
    implied threshold is the midpoint of the centers. When the centers are
    separated by less than 1e-3 of the larger magnitude, the split is
    considered spurious: every pair is declared disconnected and the result
    is flagged degenerate.
    """
    values = _values(est)
    size = values.shape[0]
    off = ~np.eye(size, dtype=bool)
    if off.sum() < 2:
        raise DegenerateEntriesError("need at least 2 off-diagonal entries")
    scaled = s_n * values
    lo, hi, iterations = _two_means(scaled[off])
    mid = (lo + hi) / 2
    assigned = scaled >= mid
    degenerate = (hi - lo) < DEGENERATE_SEPARATION * max(abs(lo), abs(hi))
    if degenerate:
        directed = np.zeros((size, size), dtype=bool)
    else:
        directed = assigned & off
    n_hi = int((assigned & off).sum())
    summary = ClusterSummary(lo, hi, int(off.sum()) - n_hi, n_hi,
                             mid, mid / s_n, degenerate, iterations)
    return AdjacencyEstimate(directed, threshold=mid / s_n, degenerate=degenerate), summary


def theory_bias_gap(kind: str, rho: float, kappa: float, xi: float, p: float) -> TheoryPrediction:
    """Predicted scaled bias and gap for an estimator at given parameters.

    Parameters are the column sum rho, the class-C2 witness kappa, the
    probed fraction xi, and the connection probability p; zeta = rho - kappa.
    """
    if not 0 < kappa <= rho < 1:
        raise ValueError("need 0 < kappa <= rho < 1")
    if not 0 <= xi <= 1:
        raise ValueError("xi must lie in [0, 1]")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    zeta = rho - kappa
    if kind == "granger":
        eta = kappa ** 2 * p * (2 * rho - kappa) * (1 - xi) \
            / (1 - (rho ** 2 - 2 * rho * kappa * xi + kappa ** 2 * xi))
        gamma = kappa
    elif kind == "one_lag":
        eta = kappa ** 2 * p * (rho + rho * zeta ** 2 + 2 * zeta) \
            / ((1 - rho ** 2) * (1 - zeta ** 2) ** 2)
        gamma = kappa * (1 + zeta ** 2) / (1 - zeta ** 2) ** 2
    elif kind == "residual":
        eta = -kappa ** 2 * p / ((1 + rho) * (1 + zeta) ** 2)
        gamma = kappa / (1 + zeta) ** 2
    else:
        raise ValueError(f"unknown estimator kind {kind!r}")
    return TheoryPrediction(eta, gamma, kind, rho, kappa, xi, p)


@dataclass(frozen=True, eq=False)
class PatchResult:
    """Aggregated decision over the union of all patches.

    nodes maps the rows of adjacency.directed back to global node ids;
    votes and probes count per-ordered-pair connected votes and probe
    participations.
    """

    nodes: np.ndarray
    adjacency: AdjacencyEstimate
    votes: np.ndarray
    probes: np.ndarray


def estimate_from_pair(kind: str, r0_s: np.ndarray, r1_s: np.ndarray,
                       source: str = "analytic") -> EstimatedSubmatrix:
    """Dispatch one of the three estimators by kind name."""
    if kind == "granger":
        return granger(r0_s, r1_s, source)
    if kind == "one_lag":
        return one_lag(r1_s, source)
    if kind == "residual":
        return residual(r0_s, r1_s, source)
    raise ValueError(f"unknown estimator kind {kind!r}")


def patch_reconstruct(provider, patches, kind: str = "granger",
                      classifier: str = "cluster", tau: float | None = None,
                      s_n: float = 1.0, source: str = "analytic") -> PatchResult:
    """Aggregate pairwise patch probes into one subgraph estimate.

    provider(indices) must return the correlation blocks ([R0]_U, [R1]_U)
    for the sorted union U of a patch pair. Every unordered pair of patches
    is probed once (a single patch is probed alone); each probe is estimated
    and classified on its own, and per-ordered-pair decisions are combined
    by majority vote with ties declared connected. The aggregation is a sum
    of votes, hence invariant to probe order. Raises CoverageError if some
    pair of distinct probed nodes never appears in a probe together.
    """
    sets = [p.as_array() if isinstance(p, ObservationSet) else np.asarray(p, dtype=np.intp)
            for p in patches]
    if not sets:
        raise ValueError("need at least one patch")
    nodes = np.unique(np.concatenate(sets))
    pos = {int(g): i for i, g in enumerate(nodes)}
    m = nodes.size
    votes = np.zeros((m, m), dtype=np.int64)
    probes = np.zeros((m, m), dtype=np.int64)

    pairs = [(i, j) for i in range(len(sets)) for j in range(i + 1, len(sets))]
    if not pairs:
        pairs = [(0, 0)]
    for i, j in pairs:
        union = np.unique(np.concatenate([sets[i], sets[j]])) if i != j else np.unique(sets[i])
        r0_u, r1_u = provider(union)
        est = estimate_from_pair(kind, r0_u, r1_u, source)
        if classifier == "cluster":
            decision, _ = cluster_classify(est, s_n)
        elif classifier == "threshold":
            if tau is None:
                raise ValueError("threshold classifier needs tau")
            decision = classify_threshold(est, tau)
        else:
            raise ValueError(f"unknown classifier {classifier!r}")
        local = np.array([pos[int(g)] for g in union])
        votes[np.ix_(local, local)] += decision.directed
        probes[np.ix_(local, local)] += ~np.eye(union.size, dtype=bool)

    off = ~np.eye(m, dtype=bool)
    if (probes[off] == 0).any():
        raise CoverageError("some probed node pair was never tested")
    directed = np.zeros((m, m), dtype=bool)
    directed[off] = 2 * votes[off] >= probes[off]
    return PatchResult(nodes, AdjacencyEstimate(directed), votes, probes)


def write_decisions(adj: AdjacencyEstimate, path) -> None:
    """Write a decision as an edge list with a flags header.

    Line 1: "n=<N>"; line 2: "flags degenerate=<0|1> threshold=<value|na>";
    then the undirected edges, 1-based, l < k, sorted.
    """
    und = adj.undirected
    n = und.shape[0]
    thr = "na" if adj.threshold is None else f"{adj.threshold:.17g}"
    lines = [f"n={n}", f"flags degenerate={int(adj.degenerate)} threshold={thr}"]
    iu, ju = np.nonzero(np.triu(und, 1))
    lines += [f"{i + 1} {j + 1}" for i, j in zip(iu.tolist(), ju.tolist())]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_decisions(path) -> AdjacencyEstimate:
    """Read a decision file written by write_decisions."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise ValueError(f"bad decisions header: {header!r}")
        n = int(header[2:])
        flags = fh.readline().split()
        if not flags or flags[0] != "flags":
            raise ValueError("missing flags header line")
        meta = dict(tok.partition("=")[::2] for tok in flags[1:])
        directed = np.zeros((n, n), dtype=bool)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = line.split()
            i, j = int(a) - 1, int(b) - 1
            directed[i, j] = directed[j, i] = True
    thr = None if meta.get("threshold", "na") == "na" else float(meta["threshold"])
    return AdjacencyEstimate(directed, threshold=thr,
                             degenerate=meta.get("degenerate", "0") == "1")
