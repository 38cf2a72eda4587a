"""Unit checks for the three submatrix estimators and their error oracles."""

import numpy as np
import pytest

from nettomo import (
    CombinationMatrix,
    Graph,
    IllConditionedError,
    analytic_correlations,
    analytic_submatrices,
    build_metropolis,
    error_oracle_granger,
    error_oracle_series,
    gen_er,
    granger,
    one_lag,
    read_estimate,
    residual,
    write_estimate,
)

SCALAR_HALF = CombinationMatrix([[0.5]], 0.5)


class TestEstimatorsOnWhiteNoise:
    # R0 = I, R1 = 0 is what the zero matrix produces
    def test_granger_is_zero(self):
        est = granger(np.eye(3), np.zeros((3, 3)))
        np.testing.assert_array_equal(est.values, np.zeros((3, 3)))
        assert est.condition_number == pytest.approx(1.0)

    def test_one_lag_is_zero(self):
        est = one_lag(np.zeros((3, 3)))
        np.testing.assert_array_equal(est.values, np.zeros((3, 3)))

    def test_residual_is_zero(self):
        est = residual(np.eye(3), np.zeros((3, 3)))
        np.testing.assert_array_equal(est.values, np.zeros((3, 3)))


class TestScalarHandValues:
    def test_granger_recovers_entry(self):
        pair = analytic_correlations(SCALAR_HALF)
        est = granger(pair.r0, pair.r1)
        assert est.values[0, 0] == pytest.approx(0.5, abs=1e-14)

    def test_one_lag_carries_series_bias(self):
        pair = analytic_correlations(SCALAR_HALF)
        est = one_lag(pair.r1)
        assert est.values[0, 0] == pytest.approx(2 / 3, abs=1e-14)

    def test_residual_carries_alternating_bias(self):
        pair = analytic_correlations(SCALAR_HALF)
        est = residual(pair.r0, pair.r1)
        assert est.values[0, 0] == pytest.approx(1 / 3, abs=1e-14)


class TestGranger:
    def test_full_observation_recovers_matrix(self):
        a = build_metropolis(gen_er(25, 0.4, seed=1), 0.55)
        pair = analytic_correlations(a)
        est = granger(pair.r0, pair.r1)
        assert np.abs(est.values - a.entries).max() < 1e-10
        assert est.kind == "granger" and est.source == "analytic"

    def test_singular_probe_block_rejected(self):
        r0 = np.ones((2, 2))
        with pytest.raises(IllConditionedError):
            granger(r0, np.zeros((2, 2)))

    def test_partial_observation_is_biased(self):
        a = build_metropolis(gen_er(30, 0.4, seed=7), 0.5)
        s = np.arange(10)
        est = granger(*analytic_submatrices(a, s))
        assert np.abs(est.values - a.entries[np.ix_(s, s)]).max() > 1e-6


class TestErrorOracleGranger:
    def test_full_set_has_zero_error(self):
        a = build_metropolis(gen_er(12, 0.5, seed=2), 0.5)
        np.testing.assert_array_equal(error_oracle_granger(a, np.arange(12)),
                                      np.zeros((12, 12)))

    def test_decoupled_latent_block_has_zero_error(self):
        # two complete components; S is the first, so A_{SS'} = 0
        adj = np.zeros((10, 10), dtype=bool)
        adj[:5, :5] = ~np.eye(5, dtype=bool)
        adj[5:, 5:] = ~np.eye(5, dtype=bool)
        a = build_metropolis(Graph(10, adj), 0.5)
        oracle = error_oracle_granger(a, np.arange(5))
        np.testing.assert_allclose(oracle, np.zeros((5, 5)), atol=1e-15)

    def test_matches_estimator_error(self):
        a = build_metropolis(gen_er(30, 0.4, seed=3), 0.5)
        s = np.arange(10)
        est = granger(*analytic_submatrices(a, s))
        actual = est.values - a.entries[np.ix_(s, s)]
        np.testing.assert_allclose(actual, error_oracle_granger(a, s),
                                   atol=1e-8)


class TestErrorOracleSeries:
    def test_scalar_one_lag_sum(self):
        oracle = error_oracle_series(SCALAR_HALF, [0], "one_lag", tol=1e-12)
        assert oracle.values[0, 0] == pytest.approx(1 / 6, abs=1e-11)
        assert oracle.tail_bound < 1e-12

    def test_scalar_residual_sum(self):
        oracle = error_oracle_series(SCALAR_HALF, [0], "residual", tol=1e-12)
        assert oracle.values[0, 0] == pytest.approx(-1 / 6, abs=1e-11)

    def test_matches_estimator_error(self):
        a = build_metropolis(gen_er(20, 0.4, seed=5), 0.5)
        s = np.arange(6)
        r0_s, r1_s = analytic_submatrices(a, s)
        truth = a.entries[np.ix_(s, s)]
        for est, kind in ((one_lag(r1_s), "one_lag"),
                          (residual(r0_s, r1_s), "residual")):
            oracle = error_oracle_series(a, s, kind, tol=1e-10)
            np.testing.assert_allclose(est.values - truth, oracle.values,
                                       atol=1e-8)

    def test_truncation_is_tol_stable(self):
        a = build_metropolis(gen_er(15, 0.5, seed=8), 0.6)
        coarse = error_oracle_series(a, np.arange(5), "one_lag", tol=1e-6)
        fine = error_oracle_series(a, np.arange(5), "one_lag", tol=1e-13)
        assert fine.terms > coarse.terms
        assert np.abs(fine.values - coarse.values).max() <= coarse.tail_bound

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            error_oracle_series(SCALAR_HALF, [0], "granger", tol=1e-10)

    def test_nonpositive_tol_rejected(self):
        with pytest.raises(ValueError, match="tol"):
            error_oracle_series(SCALAR_HALF, [0], "one_lag", tol=0.0)


class TestEstimateIo:
    def test_round_trip_with_condition_number(self, tmp_path):
        a = build_metropolis(gen_er(9, 0.5, seed=4), 0.5)
        est = granger(*analytic_submatrices(a, np.arange(4)))
        path = tmp_path / "est.mtx"
        write_estimate(est, path)
        back = read_estimate(path)
        np.testing.assert_array_equal(back.values, est.values)
        assert back.kind == "granger"
        assert back.source == "analytic"
        assert back.condition_number == est.condition_number

    def test_round_trip_without_condition_number(self, tmp_path):
        est = one_lag(np.array([[0.1, 0.2], [0.2, 0.1]]), source="empirical")
        path = tmp_path / "est.mtx"
        write_estimate(est, path)
        back = read_estimate(path)
        assert back.condition_number is None
        assert back.source == "empirical"
        np.testing.assert_array_equal(back.values, est.values)
