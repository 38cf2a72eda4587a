"""Partial-observation estimators of the combination submatrix.

Given the probed correlation blocks [R0]_S and [R1]_S, three estimators of
A_S are available; each equals A_S plus a structured error term for which
this module also provides independent oracles (a closed form for Granger,
truncated power series for the other two). The oracles exist to cross-check
the estimators, not to feed them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .combination import CombinationMatrix, read_coordinate, write_coordinate
from .graphs import ObservationSet

KINDS = ("granger", "one_lag", "residual")
CONDITION_LIMIT = 1e12


class IllConditionedError(RuntimeError):
    """Probed lag-0 block too ill-conditioned to invert reliably."""


@dataclass(frozen=True, eq=False)
class EstimatedSubmatrix:
    """|S| x |S| estimate of the probed combination submatrix.

    kind names the estimator; source records whether the correlations were
    analytic or empirical (metadata only, the arithmetic is identical).
    condition_number is set by the Granger estimator.
    """

    values: np.ndarray
    kind: str
    source: str
    condition_number: float | None = None

    @property
    def size(self) -> int:
        return self.values.shape[0]


def granger(r0_s: np.ndarray, r1_s: np.ndarray, source: str = "analytic") -> EstimatedSubmatrix:
    """Granger estimator [R1]_S ([R0]_S)^{-1}.

    Exact under full observation; under partial observation it carries the
    closed-form error of error_oracle_granger. Raises IllConditionedError
    when cond([R0]_S) exceeds 1e12 rather than regularizing silently.
    """
    r0_s = np.asarray(r0_s, dtype=float)
    r1_s = np.asarray(r1_s, dtype=float)
    cond = float(np.linalg.cond(r0_s))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllConditionedError(f"cond([R0]_S) = {cond:.3g}")
    values = np.linalg.solve(r0_s.T, r1_s.T).T
    return EstimatedSubmatrix(values, "granger", source, cond)


def one_lag(r1_s: np.ndarray, source: str = "analytic") -> EstimatedSubmatrix:
    """One-lag estimator: the probed lag-1 block itself."""
    return EstimatedSubmatrix(np.asarray(r1_s, dtype=float), "one_lag", source)


def residual(r0_s: np.ndarray, r1_s: np.ndarray, source: str = "analytic") -> EstimatedSubmatrix:
    """Residual estimator [R1]_S - [R0]_S + I."""
    r0_s = np.asarray(r0_s, dtype=float)
    r1_s = np.asarray(r1_s, dtype=float)
    values = r1_s - r0_s + np.eye(r0_s.shape[0])
    return EstimatedSubmatrix(values, "residual", source)


def error_oracle_granger(a: CombinationMatrix, s) -> np.ndarray:
    """Closed-form Granger error A_{SS'} (I_{S'} - [A^2]_{S'})^{-1} [A^2]_{S'S}.

    Zero when S' is empty or decoupled from S.
    """
    idx = _indices(a, s)
    comp = np.setdiff1d(np.arange(a.n), idx)
    if comp.size == 0:
        return np.zeros((idx.size, idx.size))
    m = a.entries
    m2 = m @ m
    block = np.eye(comp.size) - m2[np.ix_(comp, comp)]
    try:
        x = np.linalg.solve(block, m2[np.ix_(comp, idx)])
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError("latent block of I - A^2 is singular") from exc
    return m[np.ix_(idx, comp)] @ x


class SeriesOracle(NamedTuple):
    values: np.ndarray
    terms: int
    tail_bound: float


def error_oracle_series(a: CombinationMatrix, s, kind: str, tol: float) -> SeriesOracle:
    """Truncated power-series error for the one-lag or residual estimator.

    one_lag sums [A^{2h+1}]_S over h >= 1, residual sums
    [A^{2h+1}]_S - [A^{2h}]_S. Entries of A^k are bounded by rho^k, so the
    series is truncated once the geometric tail rho^{next} / (1 - rho^2)
    drops below tol; the number of summed terms and the final bound are
    reported alongside the matrix.
    """
    if kind not in ("one_lag", "residual"):
        raise ValueError(f"no series oracle for kind {kind!r}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    idx = _indices(a, s)
    m = a.entries
    rho = a.rho
    geom = 1.0 - rho ** 2

    total = np.zeros((a.n, a.n))
    m2 = m @ m
    even = m2        # A^{2h} at h = 1
    odd = m @ m2     # A^{2h+1} at h = 1
    h = 0
    while True:
        h += 1
        if kind == "one_lag":
            total += odd
            next_power = 2 * h + 3
        else:
            total += odd - even
            next_power = 2 * h + 2
        tail = rho ** next_power / geom
        if tail < tol:
            break
        even = even @ m2
        odd = odd @ m2
    return SeriesOracle(total[np.ix_(idx, idx)], h, tail)


def _indices(a: CombinationMatrix, s) -> np.ndarray:
    if isinstance(s, ObservationSet):
        if s.n_total != a.n:
            raise ValueError("observation set ambient size differs from matrix")
        return s.as_array()
    return np.asarray(s, dtype=np.intp)


def write_estimate(est: EstimatedSubmatrix, path) -> None:
    """Write an estimate in coordinate format with a metadata header.

    Header fields: n (probe-set size), kind, source, cond ("na" when the
    estimator reports none).
    """
    cond = "na" if est.condition_number is None else f"{est.condition_number:.17g}"
    write_coordinate(est.values, path, kind=est.kind, source=est.source, cond=cond)


def read_estimate(path) -> EstimatedSubmatrix:
    """Read an estimate written by write_estimate."""
    values, meta = read_coordinate(path)
    cond = None if meta.get("cond", "na") == "na" else float(meta["cond"])
    return EstimatedSubmatrix(values, meta["kind"], meta["source"], cond)
