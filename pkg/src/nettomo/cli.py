"""Command-line front end.

Six subcommands cover the pipeline: generate a graph, build a combination
matrix, simulate the recursion to empirical correlations, estimate and
classify a probed submatrix, run a config-driven experiment sweep, and
reconstruct a subgraph from patch probes. Exit codes: 0 success, 1 usage
error or failed computation, 2 I/O error, 3 config-schema error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .combination import (CombinationMatrix, build_laplacian, build_metropolis,
                          check_class, doubly_stochastic_metropolis, read_matrix,
                          write_coordinate, write_matrix, read_coordinate)
from .dynamics import SourceSpec, analytic_submatrices, empirical_correlations, simulate
from .estimators import KINDS, write_estimate
from .experiment import (ConfigError, ExperimentConfig, run_experiment,
                         summarize, write_results, write_summary)
from .graphs import (Graph, ObservationSet, RegimeSpec, degree_stats, gen_er,
                     gen_partial_er, read_edge_list, regime_probability,
                     write_edge_list)
from .inference import (classify_threshold, cluster_classify, estimate_from_pair,
                        patch_reconstruct, write_decisions)


class UsageError(Exception):
    """Bad flags or flag combinations; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on errors; we want a testable return code
    def error(self, message):
        raise UsageError(message)


def _add_regime_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--regime", required=True,
                   choices=("dense", "log-sparse", "intermediate-sparse"))
    p.add_argument("--p", type=float, default=0.3,
                   help="dense connection probability (default 0.3)")
    p.add_argument("--c", type=float, default=2.0,
                   help="log-sparse constant (default 2.0)")
    p.add_argument("--exponent", type=float, default=0.5,
                   help="intermediate-sparse exponent (default 0.5)")


def _regime(args) -> RegimeSpec:
    return RegimeSpec(args.regime, dense_p=args.p, log_sparse_c=args.c,
                      intermediate_exponent=args.exponent)


def _parse_set(text: str, n: int) -> ObservationSet:
    try:
        ids = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"--set must be comma-separated integers: {exc}") from exc
    if not ids:
        raise UsageError("--set must name at least one node")
    if len(set(ids)) != len(ids):
        raise UsageError("--set contains duplicate nodes")
    if min(ids) < 1 or max(ids) > n:
        raise UsageError(f"--set nodes must lie in 1..{n}")
    return ObservationSet(tuple(sorted(i - 1 for i in ids)), n)


def _cmd_generate(args) -> int:
    regime = _regime(args)
    p = regime_probability(regime, args.n)
    if args.subgraph:
        sub = read_edge_list(args.subgraph)
        g, _ = gen_partial_er(sub, args.n, p, args.seed)
    else:
        g = gen_er(args.n, p, args.seed)
    write_edge_list(g, args.out)
    return 0


def _cmd_matrix(args) -> int:
    g = read_edge_list(args.graph)
    if args.rule == "metropolis":
        a = build_metropolis(g, args.rho)
    elif args.rule == "laplacian":
        if args.lam is None:
            raise UsageError("--rule laplacian requires --lam")
        a = build_laplacian(g, args.rho, args.lam)
    else:  # damped transpose of the doubly stochastic rule; still symmetric
        ds = doubly_stochastic_metropolis(g)
        a = CombinationMatrix((1.0 - args.mu) * ds.T, 1.0 - args.mu)
    write_matrix(a, args.out)
    if args.report_class:
        rep = check_class(a, g)
        print(f"in_c1={int(rep.in_c1)} tau={_opt(rep.tau)} "
              f"in_c2={int(rep.in_c2)} kappa={_opt(rep.kappa)}")
    return 0


def _opt(v) -> str:
    return "na" if v is None else f"{v:.17g}"


def _source_spec(args) -> SourceSpec:
    if args.source == "gaussian":
        return SourceSpec.gaussian()
    if args.source == "detection":
        return SourceSpec.detection(mu=args.mu)
    return SourceSpec.social()


def _cmd_simulate(args) -> int:
    a = read_matrix(args.matrix)
    stats = simulate(a, _source_spec(args), args.steps, seed=args.seed,
                     burn_in=args.burn_in, record=args.dump)
    pair = empirical_correlations(stats)
    write_coordinate(pair.r0, args.out_r0, lag=0, t=args.steps, seed=args.seed)
    write_coordinate(pair.r1, args.out_r1, lag=1, t=args.steps, seed=args.seed)
    return 0


def _cmd_estimate(args) -> int:
    r0, _ = read_coordinate(args.r0)
    r1, _ = read_coordinate(args.r1)
    if r0.shape != r1.shape:
        raise UsageError("--r0 and --r1 have mismatched sizes")
    s = _parse_set(args.set, r0.shape[0])
    idx = s.as_array()
    r0_s = r0[np.ix_(idx, idx)]
    r1_s = r1[np.ix_(idx, idx)]
    est = estimate_from_pair(args.kind, r0_s, r1_s, source="file")
    write_estimate(est, args.out)
    if args.classify:
        if args.decisions is None:
            raise UsageError("--classify requires --decisions")
        if args.classify == "cluster":
            decision, _ = cluster_classify(est, args.scale)
        else:
            if args.tau is None:
                raise UsageError("--classify threshold requires --tau")
            decision = classify_threshold(est, args.tau)
        write_decisions(decision, args.decisions)
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    rows = run_experiment(config, workers=args.workers)
    write_results(rows, args.out_csv)
    if args.out_json:
        write_summary(summarize(rows, config), args.out_json)
    return 0


def _cmd_patches(args) -> int:
    sub = read_edge_list(args.subgraph)
    if args.patches * args.patch_size != sub.n:
        raise UsageError(f"--patches * --patch-size must equal the subgraph "
                         f"size {sub.n}")
    regime = _regime(args)
    p = regime_probability(regime, args.n)
    g, s = gen_partial_er(sub, args.n, p, args.seed)
    c = build_metropolis(g, args.rho)
    s_n = degree_stats(g).d_mean
    blocks = [ObservationSet(tuple(range(i * args.patch_size,
                                         (i + 1) * args.patch_size)), args.n)
              for i in range(args.patches)]

    def provider(indices):
        return analytic_submatrices(c, indices)

    result = patch_reconstruct(provider, blocks, kind=args.kind,
                               classifier="cluster", s_n=s_n)
    write_decisions(result.adjacency, args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="nettomo",
                     description="VAR network tomography toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw a random graph, write an edge list")
    p.add_argument("--n", type=int, required=True)
    _add_regime_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--subgraph", help="edge list to plant on the first nodes")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("matrix", help="build a combination matrix from a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--rule", required=True,
                   choices=("metropolis", "laplacian", "doubly-stochastic"))
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--lam", type=float, help="laplacian step size")
    p.add_argument("--mu", type=float, default=0.1,
                   help="damping for the doubly-stochastic rule")
    p.add_argument("--report-class", action="store_true",
                   help="print class membership, threshold and witness")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_matrix)

    p = sub.add_parser("simulate",
                       help="run the recursion, write empirical correlations")
    p.add_argument("--matrix", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--burn-in", type=int, dest="burn_in")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--source", default="gaussian",
                   choices=("gaussian", "detection", "social"))
    p.add_argument("--mu", type=float, default=0.1,
                   help="detection step size")
    p.add_argument("--out-r0", required=True, dest="out_r0")
    p.add_argument("--out-r1", required=True, dest="out_r1")
    p.add_argument("--dump", help="also write the retained trajectory as CSV")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate",
                       help="estimate a probed submatrix, optionally classify")
    p.add_argument("--r0", required=True)
    p.add_argument("--r1", required=True)
    p.add_argument("--set", required=True,
                   help="probed nodes, comma-separated, 1-based")
    p.add_argument("--kind", default="granger",
                   choices=KINDS + ("one-lag",))
    p.add_argument("--out", required=True)
    p.add_argument("--classify", choices=("cluster", "threshold"))
    p.add_argument("--tau", type=float)
    p.add_argument("--scale", type=float, default=1.0,
                   help="entry scaling before clustering")
    p.add_argument("--decisions", help="where to write the adjacency decision")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("experiment", help="run a config-driven sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out-csv", required=True, dest="out_csv")
    p.add_argument("--out-json", dest="out_json")
    p.add_argument("--workers", type=int,
                   help="worker processes (default: NETTOMO_WORKERS or serial)")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("patches",
                       help="reconstruct a planted subgraph from patch probes")
    p.add_argument("--subgraph", required=True,
                   help="edge list of the true subgraph to plant")
    p.add_argument("--n", type=int, required=True)
    _add_regime_flags(p)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--patches", type=int, required=True)
    p.add_argument("--patch-size", type=int, required=True, dest="patch_size")
    p.add_argument("--kind", default="granger", choices=KINDS + ("one-lag",))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_patches)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "kind", None) == "one-lag":
            args.kind = "one_lag"
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - numerical/validation failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
