"""Estimator-style front end: trajectory matrix in, adjacency out.

NetworkTomography wraps the correlation / estimation / classification
pipeline behind the familiar fit / predict surface so it can live inside
pipelines, grid searches and clone() round trips. X is a (T, n) array of
agent outputs, one row per time step, assumed post-burn-in.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .dynamics import correlations_from_samples
from .inference import classify_threshold, cluster_classify, estimate_from_pair

_KINDS = ("granger", "one_lag", "residual")
_CLASSIFIERS = ("cluster", "threshold")


class NetworkTomography(BaseEstimator):
    """Recover the interaction subgraph of the observed agents.

    Fits lag-0/lag-1 correlations on the sample trajectory, applies one of
    the partial-observation estimators and turns the resulting matrix into
    a symmetric boolean adjacency over the observed agents.

    Parameters
    ----------
    kind : {"granger", "one_lag", "residual"}, default="granger"
        Which estimator to apply to the correlation blocks.
    classifier : {"cluster", "threshold"}, default="cluster"
        Blind two-cluster split of the scaled entries, or a fixed cut.
    tau : float, optional
        Decision threshold. Required when classifier="threshold".
    scale : float, default=1.0
        Scaling applied to the entries before clustering (the natural
        choice is the average degree of the full network when known).

    Attributes
    ----------
    r0_, r1_ : ndarray of shape (n, n)
        Empirical lag-0 and lag-1 correlation matrices.
    estimate_ : ndarray of shape (n, n)
        The estimated interaction submatrix.
    condition_number_ : float or None
        Condition number of r0_ when kind="granger", else None.
    directed_ : ndarray of bool
        Per-ordered-pair decisions.
    adjacency_ : ndarray of bool
        Symmetrized (OR) adjacency decision.
    threshold_ : float or None
        The cut actually used, on the unscaled entry axis.
    degenerate_ : bool
        True when the cluster split collapsed and the conservative
        all-disconnected fallback was returned.
    cluster_ : ClusterSummary or None
        Details of the two-cluster split when classifier="cluster".
    n_features_in_ : int
        Number of observed agents.

    Examples
    --------
    >>> import numpy as np
    >>> from nettomo import NetworkTomography, build_metropolis, gen_er
    >>> rng = np.random.default_rng(0)
    >>> c = build_metropolis(gen_er(12, 0.4, seed=3), rho=0.5).entries
    >>> x = np.zeros((50_000, 12))
    >>> for t in range(1, len(x)):
    ...     x[t] = c @ x[t - 1] + rng.standard_normal(12)
    >>> model = NetworkTomography(kind="granger", scale=5.4).fit(x[1000:])
    >>> model.adjacency_.shape
    (12, 12)
    """

    def __init__(self, kind="granger", classifier="cluster", tau=None, scale=1.0):
        self.kind = kind
        self.classifier = classifier
        self.tau = tau
        self.scale = scale

    def _validate(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.classifier not in _CLASSIFIERS:
            raise ValueError(
                f"classifier must be one of {_CLASSIFIERS}, got {self.classifier!r}")
        if self.classifier == "threshold" and self.tau is None:
            raise ValueError("classifier='threshold' requires tau")
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ValueError("scale must be a positive finite scalar")

    def fit(self, X, y=None):
        """Fit the adjacency decision on a trajectory matrix.

        Parameters
        ----------
        X : array-like of shape (T, n)
            Agent outputs, one time step per row, at least 3 rows.
        y : ignored
            Present for interface compatibility.

        Returns
        -------
        self
        """
        self._validate()
        x = check_array(X, dtype=np.float64, ensure_min_samples=3,
                        ensure_min_features=2)
        pair = correlations_from_samples(x)
        est = estimate_from_pair(self.kind, pair.r0, pair.r1, source="empirical")
        self.r0_ = pair.r0
        self.r1_ = pair.r1
        self.estimate_ = est.values
        self.condition_number_ = est.condition_number
        if self.classifier == "cluster":
            decision, summary = cluster_classify(est, self.scale)
            self.cluster_ = summary
        else:
            decision = classify_threshold(est, self.tau)
            self.cluster_ = None
        self.directed_ = decision.directed
        self.adjacency_ = decision.undirected
        self.threshold_ = decision.threshold
        self.degenerate_ = decision.degenerate
        self.n_features_in_ = x.shape[1]
        return self

    def predict(self, X=None):
        """Return the fitted symmetric adjacency decision.

        The decision is a property of the fitted trajectory; X is accepted
        for pipeline compatibility and ignored.
        """
        check_is_fitted(self, "adjacency_")
        return self.adjacency_

    def fit_predict(self, X, y=None):
        """Fit on X and return the symmetric adjacency decision."""
        return self.fit(X).predict()
