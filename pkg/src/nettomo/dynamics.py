"""VAR diffusion dynamics: simulation, correlations, and source processes.

The network state follows w_i = A w_{i-1} + z_i with i.i.d. noise z. For
unit-variance zero-mean noise the stationary correlations have closed forms
R0 = (I - A^2)^{-1} and R1 = A R0, which this module provides analytically
and estimates from simulated trajectories. The detection and social-learning
recursions are special cases and are exposed as sources and step functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combination import CombinationMatrix
from .graphs import ObservationSet

_CHUNK = 16384
_NEAR_SINGULAR = 1e-10
SOURCE_KINDS = ("standard_gaussian", "detection_llr", "social_llr")


class DivergenceError(RuntimeError):
    """Trajectory exceeded the divergence guard bound."""


class CorrelationError(ValueError):
    """Correlations unavailable: near-singular model or degenerate samples."""


class BeliefError(ValueError):
    """Belief update hit a zero-probability degeneracy."""


@dataclass(frozen=True, eq=False)
class CorrelationPair:
    """Lag-0 and lag-1 correlation matrices of the stationary state.

    origin is "analytic" (closed form, covariance scale) or "empirical"
    (sample estimate, per-agent variance normalized to 1, with
    sample_count retained samples).
    """

    r0: np.ndarray
    r1: np.ndarray
    origin: str
    sample_count: int | None = None

    @property
    def n(self) -> int:
        return self.r0.shape[0]

    def normalized(self) -> "CorrelationPair":
        """Rescale to correlation form: D^{-1/2} R D^{-1/2}, D = diag(r0).

        Puts analytic output on the same scale as empirical estimates.
        """
        d = np.sqrt(np.diag(self.r0))
        if not (d > 0).all():
            raise CorrelationError("r0 diagonal must be positive")
        inv = 1.0 / d
        scale = np.outer(inv, inv)
        return CorrelationPair(self.r0 * scale, self.r1 * scale,
                               self.origin, self.sample_count)

    def restrict(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Submatrices ([r0]_S, [r1]_S) for an ObservationSet or index array."""
        idx = s.as_array() if isinstance(s, ObservationSet) else np.asarray(s, dtype=np.intp)
        return self.r0[np.ix_(idx, idx)], self.r1[np.ix_(idx, idx)]


@dataclass
class TrajectoryStats:
    """Streaming accumulators for correlation estimation.

    t_total counts all simulated steps; the first burn_in of them are
    excluded from the accumulators. sum_outer_1 pairs each retained state
    with its immediate predecessor (the last burn-in state seeds the lag).
    """

    t_total: int
    burn_in: int
    sum_w: np.ndarray
    sum_outer_0: np.ndarray
    sum_outer_1: np.ndarray

    @property
    def retained(self) -> int:
        return self.t_total - self.burn_in

    @property
    def n(self) -> int:
        return self.sum_w.shape[0]


@dataclass(frozen=True)
class SourceSpec:
    """Noise source driving the recursion.

    kind "standard_gaussian" draws z ~ N(0, I). kind "detection_llr" draws
    data x from the Gaussian hypothesis selected by data_under and sets
    z = mu * log-likelihood-ratio(x). kind "social_llr" is the same family
    without the mu factor (raw log-likelihood ratios).
    """

    kind: str
    mu: float = 0.1
    mean0: float = -1.0
    mean1: float = 1.0
    variance: float = 1.0
    data_under: int = 0

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.variance <= 0:
            raise ValueError("variance must be positive")
        if self.kind == "detection_llr" and not 0 < self.mu < 1:
            raise ValueError("mu must lie in (0, 1)")
        if self.data_under not in (0, 1):
            raise ValueError("data_under must be 0 or 1")

    @classmethod
    def gaussian(cls) -> "SourceSpec":
        return cls("standard_gaussian")

    @classmethod
    def detection(cls, mu: float = 0.1, mean0: float = -1.0, mean1: float = 1.0,
                  variance: float = 1.0, data_under: int = 0) -> "SourceSpec":
        return cls("detection_llr", mu, mean0, mean1, variance, data_under)

    @classmethod
    def social(cls, mean0: float = -1.0, mean1: float = 1.0,
               variance: float = 1.0, data_under: int = 0) -> "SourceSpec":
        return cls("social_llr", 1.0, mean0, mean1, variance, data_under)


def analytic_correlations(a: CombinationMatrix) -> CorrelationPair:
    """Closed-form R0 = (I - A^2)^{-1} and R1 = A R0 for unit-variance noise.

    Raises CorrelationError when 1 - rho^2 < 1e-10 (rho bounds the spectral
    radius through the column sums, so the check is exact and cheap).
    """
    if 1.0 - a.rho ** 2 < _NEAR_SINGULAR:
        raise CorrelationError("I - A^2 is numerically singular")
    m = a.entries
    eye = np.eye(a.n)
    r0 = np.linalg.inv(eye - m @ m)
    return CorrelationPair(r0, m @ r0, "analytic")


def analytic_submatrices(a: CombinationMatrix, s) -> tuple[np.ndarray, np.ndarray]:
    """([R0]_S, [R1]_S) without forming the full inverse.

    Solves (I - A^2) X = I[:, S] for the probed columns only; output is
    symmetrized (the exact blocks are symmetric). Same algebra as
    analytic_correlations, a factor n cheaper for small probe sets.
    """
    if 1.0 - a.rho ** 2 < _NEAR_SINGULAR:
        raise CorrelationError("I - A^2 is numerically singular")
    idx = s.as_array() if isinstance(s, ObservationSet) else np.asarray(s, dtype=np.intp)
    m = a.entries
    rhs = np.zeros((a.n, idx.shape[0]))
    rhs[idx, np.arange(idx.shape[0])] = 1.0
    x = np.linalg.solve(np.eye(a.n) - m @ m, rhs)
    r0_s = x[idx, :]
    r1_s = (m @ x)[idx, :]
    return (r0_s + r0_s.T) / 2, (r1_s + r1_s.T) / 2


def _entries(a) -> np.ndarray:
    return a.entries if isinstance(a, CombinationMatrix) else np.asarray(a, dtype=float)


def default_burn_in(a) -> int:
    """Geometric mixing-time heuristic: ceil(10 / (1 - rho))."""
    if isinstance(a, CombinationMatrix):
        rho = a.rho
    else:
        rho = float(np.abs(np.asarray(a)).sum(axis=0).max())
    if rho >= 1:
        return 100
    return math.ceil(10.0 / (1.0 - rho))


def _draw(source: SourceSpec, rng: np.random.Generator, steps: int, n: int) -> np.ndarray:
    if source.kind == "standard_gaussian":
        return rng.standard_normal((steps, n))
    mean = source.mean0 if source.data_under == 0 else source.mean1
    x = mean + math.sqrt(source.variance) * rng.standard_normal((steps, n))
    if source.kind == "detection_llr":
        return detection_llr(x, source)
    return _llr(x, source)


def simulate(a, source: SourceSpec, t: int, seed: int,
             burn_in: int | None = None, divergence_bound: float = 1e9,
             record=None) -> TrajectoryStats:
    """Run the recursion w_i = A w_{i-1} + z_i from w_0 = 0 for t steps.

    Accumulates lag-0 and lag-1 outer products after the first burn_in
    steps (default: the mixing-time heuristic). Raises DivergenceError if
    any |w_k(i)| exceeds divergence_bound. When record is a path or a
    writable text file, retained samples are dumped as CSV rows
    time,agent,value with a header line (time is the 1-based absolute
    step index).

    Deterministic given the seed: identical accumulators on every run.
    """
    if record is not None and not hasattr(record, "write"):
        with open(record, "w") as fh:
            return simulate(a, source, t, seed, burn_in=burn_in,
                            divergence_bound=divergence_bound, record=fh)
    m = _entries(a)
    n = m.shape[0]
    if burn_in is None:
        burn_in = default_burn_in(a)
    if t <= burn_in:
        raise ValueError(f"t={t} must exceed burn_in={burn_in}")
    rng = np.random.default_rng(seed)

    sum_w = np.zeros(n)
    s0 = np.zeros((n, n))
    s1 = np.zeros((n, n))
    w = np.zeros(n)
    prev = w.copy()
    if record is not None:
        record.write("time,agent,value\n")

    done = 0
    while done < t:
        steps = min(_CHUNK, t - done)
        z = _draw(source, rng, steps, n)
        traj = np.empty((steps, n))
        for i in range(steps):
            w = m @ w + z[i]
            traj[i] = w
        if not np.isfinite(traj).all() or np.abs(traj).max() > divergence_bound:
            raise DivergenceError("state exceeded the divergence guard")
        lagged = np.vstack([prev[None, :], traj[:-1]])
        keep = np.arange(done + 1, done + steps + 1) > burn_in
        if keep.any():
            kept = traj[keep]
            sum_w += kept.sum(axis=0)
            s0 += kept.T @ kept
            s1 += kept.T @ lagged[keep]
            if record is not None:
                times = np.flatnonzero(keep) + done + 1
                for ti, row in zip(times, kept):
                    for agent, val in enumerate(row):
                        record.write(f"{ti},{agent + 1},{val:.17g}\n")
        prev = traj[-1].copy()
        done += steps
    return TrajectoryStats(t, burn_in, sum_w, s0, s1)


def empirical_correlations(stats: TrajectoryStats) -> CorrelationPair:
    """Sample correlations from accumulated trajectory statistics.

    Mean-centers with the retained-sample mean, normalizes every agent's
    variance to 1, and symmetrizes both lags. Raises CorrelationError when
    fewer than 2 samples were retained or some agent has zero variance.
    """
    count = stats.retained
    if count < 2:
        raise CorrelationError("need at least 2 retained samples")
    mean = stats.sum_w / count
    c0 = stats.sum_outer_0 / count - np.outer(mean, mean)
    c1 = stats.sum_outer_1 / count - np.outer(mean, mean)
    var = np.diag(c0)
    if not (var > 0).all():
        raise CorrelationError("zero variance: constant trajectory")
    inv = 1.0 / np.sqrt(var)
    scale = np.outer(inv, inv)
    r0 = c0 * scale
    r1 = c1 * scale
    r0 = (r0 + r0.T) / 2
    r1 = (r1 + r1.T) / 2
    return CorrelationPair(r0, r1, "empirical", count)


def correlations_from_samples(x: np.ndarray) -> CorrelationPair:
    """Empirical correlations straight from a (T, n) sample block.

    Same centering, normalization, and symmetrization as the streaming
    path; the lag-1 average runs over the T-1 consecutive pairs.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise CorrelationError("need a (T, n) block with T >= 2")
    t = x.shape[0]
    centered = x - x.mean(axis=0)
    c0 = centered.T @ centered / t
    c1 = centered[1:].T @ centered[:-1] / (t - 1)
    var = np.diag(c0)
    if not (var > 0).all():
        raise CorrelationError("zero variance: constant trajectory")
    inv = 1.0 / np.sqrt(var)
    scale = np.outer(inv, inv)
    r0 = c0 * scale
    r1 = c1 * scale
    r0 = (r0 + r0.T) / 2
    r1 = (r1 + r1.T) / 2
    return CorrelationPair(r0, r1, "empirical", t)


def _llr(x, spec: SourceSpec):
    """Gaussian log-likelihood ratio log p1(x) / p0(x)."""
    return (spec.mean1 - spec.mean0) * (2 * np.asarray(x) - spec.mean0 - spec.mean1) \
        / (2 * spec.variance)


def detection_llr(x, spec: SourceSpec):
    """Step-size-weighted log-likelihood ratio mu * log p1(x)/p0(x).

    For the default means -1/+1 with unit variance this is mu * 2x.
    """
    if spec.kind != "detection_llr":
        raise ValueError("spec must have kind detection_llr")
    return spec.mu * _llr(x, spec)


def detection_kl(spec: SourceSpec) -> float:
    """KL divergence D01 between the two Gaussian hypotheses.

    Equal variances make it symmetric: (mean1 - mean0)^2 / (2 variance).
    Under H0 the agents fluctuate around -D01.
    """
    return (spec.mean1 - spec.mean0) ** 2 / (2 * spec.variance)


def detection_step(w_prev: np.ndarray, c, mu: float, x: np.ndarray,
                   spec: SourceSpec | None = None) -> np.ndarray:
    """One step of the distributed detection recursion.

    Equals the generic VAR step with A = (1 - mu) C^T and z the weighted
    log-likelihood ratios of the data vector x; the matrix is materialized
    the same way simulate receives it, so the two paths agree bit for bit.
    """
    if not 0 < mu < 1:
        raise ValueError("mu must lie in (0, 1)")
    if spec is None:
        spec = SourceSpec.detection(mu=mu)
    a = (1 - mu) * _entries(c).T
    return a @ np.asarray(w_prev, dtype=float) + detection_llr(x, spec)


def bayes_update(beliefs: np.ndarray, likelihoods: np.ndarray) -> np.ndarray:
    """Private Bayesian update: intermediate beliefs per agent.

    Row k of the output is proportional to beliefs[k] * likelihoods[k].
    """
    b = np.asarray(beliefs, dtype=float)
    lik = np.asarray(likelihoods, dtype=float)
    if (b <= 0).any() or (lik <= 0).any():
        raise BeliefError("beliefs and likelihoods must be strictly positive")
    log_psi = np.log(b) + np.log(lik)
    return _norm_rows(log_psi)


def social_learning_step(beliefs: np.ndarray, likelihoods: np.ndarray, c,
                         damping: float = 0.0) -> np.ndarray:
    """Social-learning update: Bayes step, then log-linear combination.

    Agent k combines the intermediate beliefs with exponents c_lk, which in
    log space is the linear map C^T. The optional damping in [0, 1) shrinks
    the exponents by (1 - damping); the resulting log-ratio recursion has
    matrix (1 - damping) C^T and is stable for damping > 0.
    """
    if not 0 <= damping < 1:
        raise ValueError("damping must lie in [0, 1)")
    cm = _entries(c)
    if np.abs(cm.sum(axis=0) - 1.0).max() > 1e-9:
        raise ValueError("combination matrix must be column stochastic")
    log_psi = np.log(bayes_update(beliefs, likelihoods))
    log_mu = (1 - damping) * (cm.T @ log_psi)
    return _norm_rows(log_mu)


def _norm_rows(log_b: np.ndarray) -> np.ndarray:
    """Exponentiate and normalize rows, stabilized by max subtraction."""
    shifted = log_b - log_b.max(axis=1, keepdims=True)
    b = np.exp(shifted)
    total = b.sum(axis=1, keepdims=True)
    if not np.isfinite(total).all() or (total <= 0).any():
        raise BeliefError("belief normalization degenerated")
    return b / total
