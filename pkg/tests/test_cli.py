"""Command-line surface: subcommand wiring, file chain, exit codes."""

import json

import numpy as np
import pytest

import nettomo as nt
from nettomo.cli import main
from nettomo.experiment import CSV_COLUMNS


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    """Shared artifact chain: graphs, matrices, analytic correlation files."""
    d = tmp_path_factory.mktemp("cli")
    assert main(["generate", "--n", "30", "--regime", "dense", "--p", "0.3",
                 "--seed", "4", "--out", str(d / "g.edges")]) == 0
    assert main(["matrix", "--graph", str(d / "g.edges"), "--rule",
                 "metropolis", "--rho", "0.5", "--out", str(d / "a.mat")]) == 0
    c8 = nt.build_metropolis(nt.gen_er(8, 0.5, 2), 0.5)
    pair = nt.analytic_correlations(c8).normalized()
    nt.write_coordinate(pair.r0, d / "r0.coord", lag=0)
    nt.write_coordinate(pair.r1, d / "r1.coord", lag=1)
    return d, pair


class TestTopLevel:
    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert nt.__version__ in capsys.readouterr().out

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "generate" in capsys.readouterr().out

    def test_no_subcommand_is_usage_error(self, capsys):
        assert main([]) == 1
        assert "usage error" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "usage error" in capsys.readouterr().err


class TestGenerate:
    def test_writes_the_seeded_graph(self, work):
        d, _ = work
        g = nt.read_edge_list(d / "g.edges")
        np.testing.assert_array_equal(g.adjacency,
                                      nt.gen_er(30, 0.3, 4).adjacency)

    def test_same_flags_same_bytes(self, work, tmp_path):
        d, _ = work
        out = tmp_path / "again.edges"
        assert main(["generate", "--n", "30", "--regime", "dense", "--p", "0.3",
                     "--seed", "4", "--out", str(out)]) == 0
        assert out.read_bytes() == (d / "g.edges").read_bytes()

    def test_planted_subgraph_block_is_kept(self, tmp_path):
        sub = nt.gen_er(6, 0.5, 3)
        nt.write_edge_list(sub, tmp_path / "sub.edges")
        out = tmp_path / "g.edges"
        assert main(["generate", "--n", "50", "--regime", "dense", "--p", "0.2",
                     "--seed", "8", "--subgraph", str(tmp_path / "sub.edges"),
                     "--out", str(out)]) == 0
        g = nt.read_edge_list(out)
        assert g.n == 50
        np.testing.assert_array_equal(g.adjacency[:6, :6], sub.adjacency)

    def test_missing_subgraph_file(self, tmp_path, capsys):
        assert main(["generate", "--n", "50", "--regime", "dense", "--seed",
                     "8", "--subgraph", str(tmp_path / "nope.edges"),
                     "--out", str(tmp_path / "g.edges")]) == 2
        assert "i/o error" in capsys.readouterr().err


class TestMatrix:
    def test_file_round_trips_exactly(self, work):
        d, _ = work
        a = nt.read_matrix(d / "a.mat")
        ref = nt.build_metropolis(nt.read_edge_list(d / "g.edges"), 0.5)
        np.testing.assert_array_equal(a.entries, ref.entries)
        assert a.rho == 0.5

    def test_report_class_line(self, work, tmp_path, capsys):
        d, _ = work
        assert main(["matrix", "--graph", str(d / "g.edges"), "--rule",
                     "metropolis", "--rho", "0.5", "--report-class",
                     "--out", str(tmp_path / "a.mat")]) == 0
        fields = dict(tok.split("=") for tok in
                      capsys.readouterr().out.split())
        assert fields["in_c1"] == "1" and fields["in_c2"] == "1"
        assert float(fields["tau"]) > 0
        assert float(fields["kappa"]) == 0.5

    def test_damped_doubly_stochastic_rule(self, work, tmp_path):
        d, _ = work
        out = tmp_path / "ds.mat"
        assert main(["matrix", "--graph", str(d / "g.edges"), "--rule",
                     "doubly-stochastic", "--mu", "0.1", "--out", str(out)]) == 0
        a = nt.read_matrix(out)
        assert a.rho == pytest.approx(0.9)
        np.testing.assert_allclose(a.entries.sum(axis=0), 0.9, atol=1e-12)

    def test_laplacian_needs_lam(self, work, tmp_path, capsys):
        d, _ = work
        assert main(["matrix", "--graph", str(d / "g.edges"), "--rule",
                     "laplacian", "--out", str(tmp_path / "a.mat")]) == 1
        assert "--lam" in capsys.readouterr().err

    def test_missing_graph_file(self, tmp_path, capsys):
        assert main(["matrix", "--graph", str(tmp_path / "nope.edges"),
                     "--rule", "metropolis",
                     "--out", str(tmp_path / "a.mat")]) == 2
        assert "i/o error" in capsys.readouterr().err


@pytest.fixture(scope="module")
def small_matrix(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    main(["generate", "--n", "8", "--regime", "dense", "--p", "0.5",
          "--seed", "2", "--out", str(d / "g8.edges")])
    main(["matrix", "--graph", str(d / "g8.edges"), "--rule", "metropolis",
          "--rho", "0.5", "--out", str(d / "a8.mat")])
    return d


class TestSimulate:
    def test_writes_tagged_correlations(self, small_matrix, tmp_path):
        d = small_matrix
        assert main(["simulate", "--matrix", str(d / "a8.mat"), "--steps",
                     "2000", "--seed", "9", "--out-r0", str(tmp_path / "r0"),
                     "--out-r1", str(tmp_path / "r1")]) == 0
        r0, meta = nt.read_coordinate(tmp_path / "r0")
        _, meta1 = nt.read_coordinate(tmp_path / "r1")
        assert (meta["lag"], meta["t"], meta["seed"]) == ("0", "2000", "9")
        assert meta1["lag"] == "1"
        np.testing.assert_allclose(np.diag(r0), 1.0, atol=1e-12)

    def test_same_seed_same_bytes(self, small_matrix, tmp_path):
        d = small_matrix
        for tag in ("x", "y"):
            assert main(["simulate", "--matrix", str(d / "a8.mat"), "--steps",
                         "1000", "--seed", "5",
                         "--out-r0", str(tmp_path / f"r0{tag}"),
                         "--out-r1", str(tmp_path / f"r1{tag}")]) == 0
        assert (tmp_path / "r0x").read_bytes() == (tmp_path / "r0y").read_bytes()
        assert (tmp_path / "r1x").read_bytes() == (tmp_path / "r1y").read_bytes()

    def test_dump_trajectory_layout(self, small_matrix, tmp_path):
        d = small_matrix
        assert main(["simulate", "--matrix", str(d / "a8.mat"), "--steps",
                     "100", "--seed", "9", "--out-r0", str(tmp_path / "r0"),
                     "--out-r1", str(tmp_path / "r1"),
                     "--dump", str(tmp_path / "traj.csv")]) == 0
        lines = (tmp_path / "traj.csv").read_text().splitlines()
        assert lines[0] == "time,agent,value"
        # default burn-in at rho 0.5 is 20 steps, so 80 retained rows per agent
        assert len(lines) == 1 + 80 * 8
        time0, agent0, _ = lines[1].split(",")
        assert (time0, agent0) == ("21", "1")

    def test_steps_must_exceed_burn_in(self, small_matrix, tmp_path, capsys):
        d = small_matrix
        assert main(["simulate", "--matrix", str(d / "a8.mat"), "--steps",
                     "10", "--burn-in", "50", "--seed", "1",
                     "--out-r0", str(tmp_path / "r0"),
                     "--out-r1", str(tmp_path / "r1")]) == 1
        assert "error" in capsys.readouterr().err


class TestEstimate:
    def estimate_args(self, work, out, **extra):
        d, _ = work
        args = ["estimate", "--r0", str(d / "r0.coord"),
                "--r1", str(d / "r1.coord"), "--set", "1,2,3,4",
                "--out", str(out)]
        for flag, value in extra.items():
            args += [f"--{flag}", value]
        return args

    def test_matches_direct_call(self, work, tmp_path):
        _, pair = work
        out = tmp_path / "est.mat"
        assert main(self.estimate_args(work, out, kind="granger")) == 0
        est = nt.read_estimate(out)
        idx = np.arange(4)
        direct = nt.estimate_from_pair("granger", pair.r0[np.ix_(idx, idx)],
                                       pair.r1[np.ix_(idx, idx)])
        np.testing.assert_array_equal(est.values, direct.values)
        assert est.kind == "granger"
        assert est.condition_number is not None

    def test_one_lag_spelling_alias(self, work, tmp_path):
        out = tmp_path / "est.mat"
        assert main(self.estimate_args(work, out, kind="one-lag")) == 0
        assert nt.read_estimate(out).kind == "one_lag"

    def test_classify_writes_decisions(self, work, tmp_path):
        _, pair = work
        out = tmp_path / "est.mat"
        dec_path = tmp_path / "dec.edges"
        args = self.estimate_args(work, out, classify="cluster", scale="4.0",
                                  decisions=str(dec_path))
        assert main(args) == 0
        idx = np.arange(4)
        direct = nt.estimate_from_pair("granger", pair.r0[np.ix_(idx, idx)],
                                       pair.r1[np.ix_(idx, idx)])
        ref, _ = nt.cluster_classify(direct, 4.0)
        back = nt.read_decisions(dec_path)
        np.testing.assert_array_equal(back.undirected, ref.undirected)

    def test_classify_requires_decisions_path(self, work, tmp_path, capsys):
        args = self.estimate_args(work, tmp_path / "est.mat",
                                  classify="cluster")
        assert main(args) == 1
        assert "--decisions" in capsys.readouterr().err

    def test_threshold_requires_tau(self, work, tmp_path, capsys):
        args = self.estimate_args(work, tmp_path / "est.mat",
                                  classify="threshold",
                                  decisions=str(tmp_path / "dec.edges"))
        assert main(args) == 1
        assert "--tau" in capsys.readouterr().err

    def test_mismatched_correlation_files(self, work, tmp_path, capsys):
        d, pair = work
        nt.write_coordinate(pair.r0[:3, :3], tmp_path / "small.coord", lag=0)
        assert main(["estimate", "--r0", str(tmp_path / "small.coord"),
                     "--r1", str(d / "r1.coord"), "--set", "1,2",
                     "--out", str(tmp_path / "est.mat")]) == 1
        assert "mismatched" in capsys.readouterr().err

    @pytest.mark.parametrize("bad_set", ["0,2", "2,2", "1,a", "", "1,99"])
    def test_bad_probe_sets(self, work, tmp_path, bad_set, capsys):
        d, _ = work
        assert main(["estimate", "--r0", str(d / "r0.coord"),
                     "--r1", str(d / "r1.coord"), "--set", bad_set,
                     "--out", str(tmp_path / "est.mat")]) == 1
        assert "--set" in capsys.readouterr().err


class TestExperiment:
    def config(self):
        return {"schema_version": 1,
                "regime": {"kind": "dense", "p": 0.3},
                "n_list": [30],
                "s": {"fraction": 0.2},
                "matrix": {"rule": "metropolis", "rho": 0.5},
                "estimators": ["granger"],
                "correlations": {"source": "analytic"},
                "classifier": {"kind": "cluster"},
                "trials": 2,
                "master_seed": 1}

    def test_writes_rows_and_summary(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(self.config()))
        csv_path = tmp_path / "rows.csv"
        json_path = tmp_path / "summary.json"
        assert main(["experiment", "--config", str(cfg_path),
                     "--out-csv", str(csv_path),
                     "--out-json", str(json_path)]) == 0
        assert csv_path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
        rows = nt.read_results(csv_path)
        assert len(rows) == 2 and all(r["error"] is None for r in rows)
        summary = json.loads(json_path.read_text())
        assert summary["cells"][0]["trials"] == 2

    def test_schema_violation_exits_3(self, tmp_path, capsys):
        cfg = dict(self.config(), schema_version=2)
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["experiment", "--config", str(cfg_path),
                     "--out-csv", str(tmp_path / "rows.csv")]) == 3
        assert "config error" in capsys.readouterr().err

    def test_missing_config_exits_2(self, tmp_path, capsys):
        assert main(["experiment", "--config", str(tmp_path / "nope.json"),
                     "--out-csv", str(tmp_path / "rows.csv")]) == 2
        assert "i/o error" in capsys.readouterr().err


class TestPatches:
    def test_rebuilds_planted_subgraph(self, tmp_path):
        sub = nt.gen_er(8, 0.4, 1)
        nt.write_edge_list(sub, tmp_path / "sub.edges")
        out = tmp_path / "dec.edges"
        assert main(["patches", "--subgraph", str(tmp_path / "sub.edges"),
                     "--n", "300", "--regime", "dense", "--p", "0.3",
                     "--rho", "0.5", "--patches", "2", "--patch-size", "4",
                     "--seed", "5", "--out", str(out)]) == 0
        back = nt.read_decisions(out)
        np.testing.assert_array_equal(back.undirected, sub.adjacency)

    def test_patch_grid_must_tile_subgraph(self, tmp_path, capsys):
        sub = nt.gen_er(8, 0.4, 1)
        nt.write_edge_list(sub, tmp_path / "sub.edges")
        assert main(["patches", "--subgraph", str(tmp_path / "sub.edges"),
                     "--n", "300", "--regime", "dense", "--patches", "3",
                     "--patch-size", "4", "--seed", "5",
                     "--out", str(tmp_path / "dec.edges")]) == 1
        assert "patch-size" in capsys.readouterr().err
