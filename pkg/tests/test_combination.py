"""Unit checks for combination-matrix construction, classes, and IO."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nettomo import (
    CombinationMatrix,
    Graph,
    SupportError,
    build_laplacian,
    build_metropolis,
    check_class,
    doubly_stochastic_metropolis,
    gen_er,
    read_coordinate,
    read_matrix,
    write_coordinate,
    write_matrix,
)

PATH3 = Graph.from_edges(3, [(0, 1), (1, 2)])


class TestCombinationMatrix:
    def test_rejects_bad_column_sums(self):
        with pytest.raises(ValueError, match="column sums"):
            CombinationMatrix(np.eye(2) * 0.5 + 0.1, 0.5)

    def test_rejects_negative_entries(self):
        m = np.array([[0.6, -0.1], [-0.1, 0.6]])
        with pytest.raises(ValueError, match="nonnegative"):
            CombinationMatrix(m, 0.5)

    def test_rejects_asymmetry(self):
        m = np.array([[0.4, 0.0], [0.1, 0.5]])
        with pytest.raises(ValueError, match="symmetric"):
            CombinationMatrix(m, 0.5)

    def test_rejects_rho_outside_open_interval(self):
        with pytest.raises(ValueError, match="rho"):
            CombinationMatrix(np.eye(2), 1.0)


class TestBuildMetropolis:
    def test_path_graph_hand_values(self):
        a = build_metropolis(PATH3, 0.5).entries
        expect = np.array([[1 / 3, 1 / 6, 0.0],
                           [1 / 6, 1 / 6, 1 / 6],
                           [0.0, 1 / 6, 1 / 3]])
        np.testing.assert_allclose(a, expect, atol=1e-15)

    def test_complete_graph_is_uniform(self):
        n, rho = 6, 0.4
        g = Graph(n, ~np.eye(n, dtype=bool))
        a = build_metropolis(g, rho).entries
        np.testing.assert_allclose(a, np.full((n, n), rho / n), atol=1e-15)

    def test_edgeless_graph_is_diagonal(self):
        g = Graph(4, np.zeros((4, 4), dtype=bool))
        a = build_metropolis(g, 0.7).entries
        np.testing.assert_allclose(a, 0.7 * np.eye(4), atol=1e-15)

    @given(st.integers(2, 30), st.floats(0.05, 0.95), st.integers(0, 10 ** 6),
           st.floats(0.05, 0.95))
    @settings(max_examples=30, deadline=None)
    def test_invariants_on_random_graphs(self, n, p, seed, rho):
        a = build_metropolis(gen_er(n, p, seed), rho).entries
        assert (a >= 0).all()
        assert np.array_equal(a, a.T)
        np.testing.assert_allclose(a.sum(axis=0), rho, atol=1e-12)
        # symmetric nonnegative with column sums rho: spectral radius <= rho
        assert np.abs(np.linalg.eigvalsh(a)).max() <= rho + 1e-12


class TestBuildLaplacian:
    def test_path_graph_hand_values(self):
        a = build_laplacian(PATH3, 0.5, 0.6).entries
        expect = np.array([[0.4, 0.1, 0.0],
                           [0.1, 0.3, 0.1],
                           [0.0, 0.1, 0.4]])
        np.testing.assert_allclose(a, expect, atol=1e-15)

    def test_lambda_one_on_regular_graph_matches_metropolis(self):
        ring = Graph.from_edges(6, [(k, (k + 1) % 6) for k in range(6)])
        lap = build_laplacian(ring, 0.5, 1.0).entries
        met = build_metropolis(ring, 0.5).entries
        np.testing.assert_allclose(lap, met, atol=1e-15)

    def test_edgeless_graph_is_diagonal(self):
        g = Graph(3, np.zeros((3, 3), dtype=bool))
        a = build_laplacian(g, 0.6, 0.8).entries
        np.testing.assert_allclose(a, 0.6 * np.eye(3), atol=1e-15)

    def test_rejects_lambda_outside_range(self):
        with pytest.raises(ValueError, match="lam"):
            build_laplacian(PATH3, 0.5, 0.0)


class TestDoublyStochastic:
    def test_rows_and_columns_sum_to_one(self):
        c = doubly_stochastic_metropolis(gen_er(15, 0.4, seed=2))
        np.testing.assert_allclose(c.sum(axis=0), 1.0, atol=1e-12)
        np.testing.assert_allclose(c.sum(axis=1), 1.0, atol=1e-12)
        assert (c >= 0).all()
        assert np.array_equal(c, c.T)


class TestCheckClass:
    def test_metropolis_is_c2_with_kappa_rho(self):
        g = gen_er(25, 0.3, seed=9)
        report = check_class(build_metropolis(g, 0.5), g)
        assert report.in_c2
        assert report.kappa == pytest.approx(0.5)
        assert report.in_c1 and report.tau > 0

    def test_laplacian_is_c2_with_kappa_rho_lambda(self):
        g = gen_er(25, 0.3, seed=9)
        report = check_class(build_laplacian(g, 0.5, 0.8), g)
        assert report.in_c2
        assert report.kappa == pytest.approx(0.4)

    def test_unbalanced_entry_breaks_c2(self):
        # shrink one connected entry to rho/d_max^2: the interval
        # [kappa/d_max, kappa/d_min] cannot hold both extremes
        rho, weak = 0.5, 0.5 / 9
        entries = np.array([[rho - weak, weak, 0.0],
                            [weak, rho - weak - 1 / 6, 1 / 6],
                            [0.0, 1 / 6, rho - 1 / 6]])
        report = check_class(CombinationMatrix(entries, rho), PATH3)
        assert not report.in_c2
        assert report.kappa is None

    def test_weight_off_support_rejected(self):
        uniform = np.full((3, 3), 0.1) + np.eye(3) * 0.2
        with pytest.raises(SupportError):
            check_class(CombinationMatrix(uniform, 0.5), PATH3)

    def test_edgeless_graph_is_vacuously_in_both(self):
        g = Graph(3, np.zeros((3, 3), dtype=bool))
        report = check_class(build_metropolis(g, 0.5), g)
        assert report.in_c1 and report.in_c2


class TestCoordinateIo:
    def test_matrix_round_trip_is_exact(self, tmp_path):
        a = build_metropolis(gen_er(12, 0.4, seed=6), 0.45)
        path = tmp_path / "a.mtx"
        write_matrix(a, path)
        back = read_matrix(path)
        assert back.rho == a.rho
        np.testing.assert_array_equal(back.entries, a.entries)

    def test_header_carries_metadata(self, tmp_path):
        path = tmp_path / "m.mtx"
        write_coordinate(np.eye(2), path, rho=0.5, lag=1)
        m, meta = read_coordinate(path)
        np.testing.assert_array_equal(m, np.eye(2))
        assert meta == {"rho": "0.5", "lag": "1"}

    def test_zero_entries_are_omitted(self, tmp_path):
        path = tmp_path / "m.mtx"
        write_coordinate(np.diag([1.0, 0.0, 2.0]), path)
        rows = path.read_text().splitlines()
        assert rows[0] == "n=3"
        assert rows[1:] == ["1 1 1", "3 3 2"]

    def test_missing_rho_rejected(self, tmp_path):
        path = tmp_path / "m.mtx"
        write_coordinate(np.eye(2) * 0.5, path)
        with pytest.raises(ValueError, match="rho"):
            read_matrix(path)
