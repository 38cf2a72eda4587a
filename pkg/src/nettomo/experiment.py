"""Config-driven Monte Carlo sweeps with deterministic seeding.

An experiment is a JSON config: a graph regime, a list of network sizes, a
probed-set rule, a combination-matrix rule, estimator kinds, a correlation
source and a classifier. Each (n, trial) cell derives its own seed from the
master seed, so results are reproducible regardless of worker count or
execution order. Per-trial rows go to CSV, aggregates to JSON.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from hashlib import sha256

import numpy as np

from .combination import build_laplacian, build_metropolis
from .dynamics import SourceSpec, analytic_submatrices, empirical_correlations, simulate
from .estimators import KINDS
from .graphs import (Graph, ObservationSet, RegimeSpec, degree_stats, gen_er,
                     gen_partial_er, regime_probability)
from .inference import (classify_threshold, cluster_classify, error_rates,
                        estimate_from_pair, margins, theory_bias_gap)

SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "n", "trial", "seed", "d_min", "d_max", "d_mean", "s_size", "xi",
    "estimator", "e0", "e1", "n_disconnected", "n_connected",
    "disc_lo", "disc_hi", "conn_lo", "conn_hi", "eta_hat", "gamma_hat",
    "theory_eta", "theory_gamma", "condition_number", "degenerate", "error",
)

_INT_COLUMNS = {"n", "trial", "seed", "d_min", "d_max", "s_size",
                "n_disconnected", "n_connected"}

WORKERS_ENV = "NETTOMO_WORKERS"


class ConfigError(ValueError):
    """The experiment config violates the documented schema."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; see from_dict for the JSON schema."""

    regime: RegimeSpec
    n_list: tuple[int, ...]
    s_fraction: float | None
    s_size: int | None
    s_edges: tuple[tuple[int, int], ...] | None
    rule: str
    rho: float
    lam: float | None
    estimators: tuple[str, ...]
    source: str
    t: int | None
    burn_in: int | None
    noise: str
    classifier: str
    tau: float | None
    trials: int
    master_seed: int

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        """Build a config from the versioned JSON schema.

        Layout (all node ids 1-based)::

            {"schema_version": 1,
             "regime": {"kind": "dense", "p": 0.3},
             "n_list": [200, 2000],
             "s": {"fraction": 0.025} | {"size": 10, "edges": [[1, 2], ...]},
             "matrix": {"rule": "metropolis", "rho": 0.5},
             "estimators": ["granger", "one_lag", "residual"],
             "correlations": {"source": "analytic"},
             "classifier": {"kind": "cluster"} | {"kind": "threshold", "tau": 0.05},
             "trials": 20,
             "master_seed": 7}

        The log-sparse regime takes "c", the intermediate-sparse regime
        "exponent"; the laplacian rule takes "lambda"; the empirical source
        takes "t" and optional "burn_in" and "noise".
        """
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, "
                              f"got {d.get('schema_version')!r}")
        known = {"schema_version", "regime", "n_list", "s", "matrix",
                 "estimators", "correlations", "classifier", "trials",
                 "master_seed"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            regime = _parse_regime(_section(d, "regime"))
            n_list = _parse_n_list(d.get("n_list"))
            s_fraction, s_size, s_edges = _parse_s(_section(d, "s"))
            rule, rho, lam = _parse_matrix(_section(d, "matrix"))
            estimators = _parse_estimators(d.get("estimators"))
            source, t, burn_in, noise = _parse_correlations(_section(d, "correlations"))
            classifier, tau = _parse_classifier(_section(d, "classifier"))
            trials = d.get("trials")
            if not isinstance(trials, int) or trials < 1:
                raise ConfigError("trials must be an integer >= 1")
            master_seed = d.get("master_seed")
            if not isinstance(master_seed, int) or master_seed < 0:
                raise ConfigError("master_seed must be a nonnegative integer")
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        if s_size is not None and min(n_list) < s_size:
            raise ConfigError("every n must be >= the fixed subgraph size")
        return cls(regime, n_list, s_fraction, s_size, s_edges, rule, rho, lam,
                   estimators, source, t, burn_in, noise, classifier, tau,
                   trials, master_seed)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        """Echo of the config in the JSON schema layout."""
        regime = {"kind": self.regime.kind}
        if self.regime.kind == "dense":
            regime["p"] = self.regime.dense_p
        elif self.regime.kind == "log-sparse":
            regime["c"] = self.regime.log_sparse_c
        else:
            regime["exponent"] = self.regime.intermediate_exponent
        s = {"fraction": self.s_fraction} if self.s_fraction is not None else \
            {"size": self.s_size,
             "edges": [[i + 1, j + 1] for i, j in self.s_edges]}
        matrix = {"rule": self.rule, "rho": self.rho}
        if self.lam is not None:
            matrix["lambda"] = self.lam
        correlations = {"source": self.source}
        if self.source == "empirical":
            correlations.update(t=self.t, burn_in=self.burn_in, noise=self.noise)
        classifier = {"kind": self.classifier}
        if self.tau is not None:
            classifier["tau"] = self.tau
        return {"schema_version": SCHEMA_VERSION, "regime": regime,
                "n_list": list(self.n_list), "s": s, "matrix": matrix,
                "estimators": list(self.estimators),
                "correlations": correlations, "classifier": classifier,
                "trials": self.trials, "master_seed": self.master_seed}

    @property
    def kappa(self) -> float:
        """Witness used in theory predictions for the configured rule."""
        return self.rho if self.rule == "metropolis" else self.rho * self.lam


def _section(d: dict, key: str) -> dict:
    sec = d.get(key)
    if not isinstance(sec, dict):
        raise ConfigError(f"{key!r} must be an object")
    return sec


def _parse_regime(sec: dict) -> RegimeSpec:
    kind = str(sec.get("kind", "")).replace("_", "-")
    if kind == "dense":
        return RegimeSpec("dense", dense_p=float(sec.get("p", 0.3)))
    if kind == "log-sparse":
        return RegimeSpec("log-sparse", log_sparse_c=float(sec.get("c", 2.0)))
    if kind == "intermediate-sparse":
        return RegimeSpec("intermediate-sparse",
                          intermediate_exponent=float(sec.get("exponent", 0.5)))
    raise ConfigError(f"unknown regime kind {sec.get('kind')!r}")


def _parse_n_list(value) -> tuple[int, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError("n_list must be a nonempty list of integers")
    if not all(isinstance(n, int) and n >= 2 for n in value):
        raise ConfigError("every n must be an integer >= 2")
    return tuple(value)


def _parse_s(sec: dict):
    if "fraction" in sec:
        xi = float(sec["fraction"])
        if not 0 < xi <= 1:
            raise ConfigError("s.fraction must lie in (0, 1]")
        return xi, None, None
    if "size" in sec:
        size = sec["size"]
        if not isinstance(size, int) or size < 2:
            raise ConfigError("s.size must be an integer >= 2")
        edges = sec.get("edges", [])
        if not isinstance(edges, list):
            raise ConfigError("s.edges must be a list of [l, k] pairs")
        parsed = []
        for e in edges:
            if not (isinstance(e, list) and len(e) == 2):
                raise ConfigError(f"bad edge {e!r}")
            i, j = int(e[0]) - 1, int(e[1]) - 1
            if not (0 <= i < size and 0 <= j < size) or i == j:
                raise ConfigError(f"edge {e!r} out of range for size {size}")
            parsed.append((min(i, j), max(i, j)))
        return None, size, tuple(sorted(set(parsed)))
    raise ConfigError("s must contain either 'fraction' or 'size'")


def _parse_matrix(sec: dict):
    rule = sec.get("rule")
    rho = float(sec.get("rho", 0.0))
    if rule == "metropolis":
        return "metropolis", rho, None
    if rule == "laplacian":
        if "lambda" not in sec:
            raise ConfigError("laplacian rule requires 'lambda'")
        return "laplacian", rho, float(sec["lambda"])
    raise ConfigError(f"unknown matrix rule {rule!r}")


def _parse_estimators(value) -> tuple[str, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError("estimators must be a nonempty list")
    kinds = tuple(str(k).replace("-", "_") for k in value)
    unknown = [k for k in kinds if k not in KINDS]
    if unknown:
        raise ConfigError(f"unknown estimator kinds: {unknown}")
    if len(set(kinds)) != len(kinds):
        raise ConfigError("duplicate estimator kinds")
    return kinds


def _parse_correlations(sec: dict):
    source = sec.get("source")
    if source == "analytic":
        return "analytic", None, None, "gaussian"
    if source == "empirical":
        t = sec.get("t")
        if not isinstance(t, int) or t < 3:
            raise ConfigError("empirical source requires integer t >= 3")
        burn_in = sec.get("burn_in")
        if burn_in is not None and (not isinstance(burn_in, int) or burn_in < 0):
            raise ConfigError("burn_in must be a nonnegative integer")
        noise = sec.get("noise", "gaussian")
        if noise not in ("gaussian", "detection", "social"):
            raise ConfigError(f"unknown noise kind {noise!r}")
        return "empirical", t, burn_in, noise
    raise ConfigError(f"unknown correlation source {source!r}")


def _parse_classifier(sec: dict):
    kind = sec.get("kind")
    if kind == "cluster":
        return "cluster", None
    if kind == "threshold":
        if "tau" not in sec:
            raise ConfigError("threshold classifier requires 'tau'")
        return "threshold", float(sec["tau"])
    raise ConfigError(f"unknown classifier kind {kind!r}")


def trial_seed(master_seed: int, n: int, trial: int) -> int:
    """Stable per-cell seed: first 8 bytes of sha256("master:n:trial")."""
    digest = sha256(f"{master_seed}:{n}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class TrialResult:
    """One CSV row: one (n, trial, estimator) cell.

    error is None on success; on failure it carries the exception message
    and the per-estimator fields are None. wall_time (seconds, per
    estimator) is kept out of the CSV so reruns are byte-identical.
    """

    n: int
    trial: int
    seed: int
    d_min: int | None
    d_max: int | None
    d_mean: float | None
    s_size: int | None
    xi: float | None
    estimator: str
    e0: float | None = None
    e1: float | None = None
    n_disconnected: int | None = None
    n_connected: int | None = None
    disc_lo: float | None = None
    disc_hi: float | None = None
    conn_lo: float | None = None
    conn_hi: float | None = None
    eta_hat: float | None = None
    gamma_hat: float | None = None
    theory_eta: float | None = None
    theory_gamma: float | None = None
    condition_number: float | None = None
    degenerate: bool | None = None
    error: str | None = None
    wall_time: float | None = None


def _noise_spec(noise: str) -> SourceSpec:
    if noise == "gaussian":
        return SourceSpec.gaussian()
    if noise == "detection":
        return SourceSpec.detection()
    return SourceSpec.social()


def _run_trial(config: ExperimentConfig, n: int, trial: int) -> list[TrialResult]:
    seed = trial_seed(config.master_seed, n, trial)
    p = regime_probability(config.regime, n)
    try:
        if config.s_edges is not None:
            sub = Graph.from_edges(config.s_size, config.s_edges)
            g, s = gen_partial_er(sub, n, p, seed)
        else:
            g = gen_er(n, p, seed)
            # round half up so the probed count grows monotonically with n
            m = max(2, int(config.s_fraction * n + 0.5))
            s = ObservationSet(tuple(range(m)), n)
        stats = degree_stats(g)
        if config.rule == "metropolis":
            c = build_metropolis(g, config.rho)
        else:
            c = build_laplacian(g, config.rho, config.lam)
        if config.source == "analytic":
            r0_s, r1_s = analytic_submatrices(c, s)
        else:
            # the trajectory stream gets its own seed next to the graph's
            traj = simulate(c, _noise_spec(config.noise), config.t,
                            seed=seed + 1, burn_in=config.burn_in)
            r0_s, r1_s = empirical_correlations(traj).restrict(s)
        idx = s.as_array()
        truth = g.adjacency[np.ix_(idx, idx)]
    except Exception as exc:  # noqa: BLE001 - flagged row, sweep continues
        return [TrialResult(n, trial, seed, None, None, None, None, None,
                            kind, error=str(exc)) for kind in config.estimators]

    rows = []
    for kind in config.estimators:
        start = time.perf_counter()
        try:
            est = estimate_from_pair(kind, r0_s, r1_s, source=config.source)
            if config.classifier == "cluster":
                decision, _ = cluster_classify(est, stats.d_mean)
            else:
                decision = classify_threshold(est, config.tau)
            rates = error_rates(decision, truth)
            marg = margins(est, truth, stats.d_mean)
            theory = theory_bias_gap(kind, config.rho, config.kappa,
                                     s.size / n, p)
            rows.append(TrialResult(
                n, trial, seed, stats.d_min, stats.d_max, stats.d_mean,
                s.size, s.size / n, kind,
                e0=rates.e0, e1=rates.e1,
                n_disconnected=rates.n_disconnected,
                n_connected=rates.n_connected,
                disc_lo=marg.disc_lo, disc_hi=marg.disc_hi,
                conn_lo=marg.conn_lo, conn_hi=marg.conn_hi,
                eta_hat=marg.eta_hat, gamma_hat=marg.gamma_hat,
                theory_eta=theory.eta, theory_gamma=theory.gamma,
                condition_number=est.condition_number,
                degenerate=decision.degenerate,
                wall_time=time.perf_counter() - start))
        except Exception as exc:  # noqa: BLE001 - flagged row, sweep continues
            rows.append(TrialResult(
                n, trial, seed, stats.d_min, stats.d_max, stats.d_mean,
                s.size, s.size / n, kind, error=str(exc),
                wall_time=time.perf_counter() - start))
    return rows


def _run_trial_star(args) -> list[TrialResult]:
    return _run_trial(*args)


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> list[TrialResult]:
    """Run the full sweep; rows come back sorted by (n, trial).

    workers defaults to the NETTOMO_WORKERS environment variable (serial
    when unset or < 2). Results are deterministic in the config alone:
    every cell reseeds itself, and rows are ordered by construction.
    """
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or "1")
    cells = [(config, n, trial)
             for n in config.n_list for trial in range(config.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_cell = list(pool.map(_run_trial_star, cells))
    else:
        per_cell = [_run_trial(*cell) for cell in cells]
    rows = [row for block in per_cell for row in block]
    rows.sort(key=lambda r: (r.n, r.trial))
    return rows


def _cell_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results(rows, path) -> None:
    """Write per-trial rows as CSV with the fixed column set."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_cell_text(getattr(row, col)) for col in CSV_COLUMNS])


def read_results(path) -> list[dict]:
    """Read a results CSV back into typed dicts (inverse of write_results)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(CSV_COLUMNS):
            raise ValueError(f"unexpected CSV columns: {reader.fieldnames}")
        for raw in reader:
            row = {}
            for col in CSV_COLUMNS:
                text = raw[col]
                if text == "":
                    row[col] = None
                elif col == "estimator":
                    row[col] = text
                elif col == "error":
                    row[col] = text
                elif col == "degenerate":
                    row[col] = text == "1"
                elif col in _INT_COLUMNS:
                    row[col] = int(text)
                else:
                    row[col] = float(text)
            out.append(row)
    return out


def summarize(rows, config: ExperimentConfig) -> dict:
    """Aggregate rows into per-(n, estimator) mean/std cells."""
    cells = []
    for n in config.n_list:
        for kind in config.estimators:
            group = [r for r in rows if r.n == n and r.estimator == kind]
            ok = [r for r in group if r.error is None]
            cell = {"n": n, "estimator": kind, "trials": len(group),
                    "failed": len(group) - len(ok)}
            for field in ("e0", "e1", "eta_hat", "gamma_hat", "d_mean"):
                values = [getattr(r, field) for r in ok
                          if getattr(r, field) is not None]
                cell[field] = None if not values else {
                    "mean": float(np.mean(values)),
                    "std": float(np.std(values))}
            theory = [(r.theory_eta, r.theory_gamma) for r in ok
                      if r.theory_eta is not None]
            cell["theory_eta"] = theory[0][0] if theory else None
            cell["theory_gamma"] = theory[0][1] if theory else None
            cells.append(cell)
    return {"schema_version": SCHEMA_VERSION, "config": config.to_dict(),
            "cells": cells}


def write_summary(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
