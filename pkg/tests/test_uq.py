"""Sampling, Monte Carlo, Morris, KS filtering, and sweep tests."""

import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from asmbench import (
    ASM1ParameterSet,
    BSM1Settings,
    DistributionSpec,
    ModelBinding,
    MonteCarloError,
    SampleMatrix,
    UQError,
    assemble_ode,
    bsm1_binding,
    bsm1_initial_state,
    bsm1_parameter_specs,
    build_bsm1,
    effluent_metrics,
    grid_sweep,
    ks_2sample,
    mc_filter,
    morris,
    run_monte_carlo,
    sample_lhs,
    sample_random,
    spearman,
    steady_state,
)
from asmbench.flowsheet import METRIC_NAMES
from asmbench.uq import resolve_workers


def unit_specs(k, prefix="p"):
    return tuple(DistributionSpec(f"{prefix}{j}", "uniform", 0.0, 1.0)
                 for j in range(k))


def tri_cdf(x, lo, md, hi):
    """Closed-form triangular CDF, the inverse of the sampler's ppf."""
    x = np.asarray(x, dtype=float)
    span = hi - lo
    left = (x - lo) ** 2 / (span * (md - lo))
    right = 1.0 - (hi - x) ** 2 / (span * (hi - md))
    return np.where(x < md, left, right)


def _sum_eval(row):
    return np.array([float(np.sum(row))]), True


class TestDistributionSpec:
    def test_uniform_ppf_endpoints(self):
        s = DistributionSpec("u", "uniform", 2.0, 6.0)
        assert s.ppf(0.0) == 2.0
        assert s.ppf(1.0) == 6.0
        assert s.ppf(0.5) == 4.0
        assert s.baseline == 4.0

    def test_triangular_ppf_hits_mode_at_branch_point(self):
        s = DistributionSpec("t", "triangular", 2.0, 11.0, mode=5.0)
        fc = (5.0 - 2.0) / (11.0 - 2.0)
        assert s.ppf(fc) == pytest.approx(5.0, abs=1e-12)
        assert s.ppf(0.0) == pytest.approx(2.0)
        assert s.ppf(1.0) == pytest.approx(11.0)
        assert s.baseline == 5.0

    def test_ppf_inverts_cdf(self):
        s = DistributionSpec("t", "triangular", 2.0, 11.0, mode=5.0)
        u = np.linspace(0.01, 0.99, 41)
        assert tri_cdf(s.ppf(u), 2.0, 5.0, 11.0) == pytest.approx(u, abs=1e-12)

    def test_vector_ppf_matches_scalar(self):
        s = DistributionSpec("t", "triangular", 0.0, 1.0, mode=0.25)
        u = np.array([0.0, 0.1, 0.25, 0.5, 0.9, 1.0])
        vec = s.ppf(u)
        assert vec == pytest.approx([s.ppf(float(x)) for x in u], abs=1e-15)

    def test_validation(self):
        with pytest.raises(UQError):
            DistributionSpec("x", "normal", 0.0, 1.0)
        with pytest.raises(UQError):
            DistributionSpec("x", "uniform", 1.0, 1.0)
        with pytest.raises(UQError):
            DistributionSpec("x", "triangular", 0.0, 1.0)
        with pytest.raises(UQError):
            DistributionSpec("x", "triangular", 0.0, 1.0, mode=1.5)
        with pytest.raises(UQError):
            DistributionSpec("x", "uniform", 0.0, 1.0, mode=0.5)
        with pytest.raises(UQError):
            DistributionSpec("x", "uniform", 0.0, 1.0, baseline=2.0)


class TestSampleRandom:
    def test_within_range(self):
        s = DistributionSpec("u", "uniform", 0.0, 1.0)
        m = sample_random([s], 500, seed=3)
        assert np.all(m.values >= 0.0) and np.all(m.values <= 1.0)
        assert m.method == "random" and m.n == 500

    def test_same_seed_identical(self):
        specs = unit_specs(4)
        a = sample_random(specs, 50, seed=11)
        b = sample_random(specs, 50, seed=11)
        assert np.array_equal(a.values, b.values)
        c = sample_random(specs, 50, seed=12)
        assert not np.array_equal(a.values, c.values)

    def test_triangular_mean_one_third(self):
        # mean of triangular(0, 0, 1) is 1/3, variance 1/18
        s = DistributionSpec("t", "triangular", 0.0, 1.0, mode=0.0)
        n = 20000
        m = sample_random([s], n, seed=7)
        se = math.sqrt(1.0 / 18.0 / n)
        assert abs(m.values.mean() - 1.0 / 3.0) < 3.0 * se

    def test_n_zero_rejected(self):
        with pytest.raises(UQError):
            sample_random(unit_specs(1), 0, seed=0)

    def test_column_lookup(self):
        specs = unit_specs(3)
        m = sample_random(specs, 10, seed=0)
        assert np.array_equal(m.column("p1"), m.values[:, 1])

    def test_matrix_shape_validation(self):
        with pytest.raises(UQError):
            SampleMatrix(("a", "b"), np.zeros((5, 3)), 0, "manual")


class TestSampleLhs:
    def test_one_sample_per_quartile(self):
        s = DistributionSpec("u", "uniform", 0.0, 1.0)
        m = sample_lhs([s], 4, seed=5)
        strata = np.floor(m.values[:, 0] * 4).astype(int)
        assert sorted(strata) == [0, 1, 2, 3]

    def test_single_draw_in_sole_stratum(self):
        s = DistributionSpec("t", "triangular", 2.0, 8.0, mode=3.0)
        m = sample_lhs([s], 1, seed=9)
        assert m.n == 1
        assert 2.0 <= m.values[0, 0] <= 8.0

    def test_stratification_every_parameter(self):
        # exactly one draw per equal-probability stratum, per column
        specs = (DistributionSpec("a", "uniform", -3.0, 9.0),
                 DistributionSpec("b", "triangular", 2.0, 11.0, mode=5.0))
        n = 64
        m = sample_lhs(specs, n, seed=17)
        u_a = (m.column("a") + 3.0) / 12.0
        u_b = tri_cdf(m.column("b"), 2.0, 5.0, 11.0)
        for u in (u_a, u_b):
            strata = np.floor(u * n).astype(int)
            assert sorted(strata) == list(range(n))

    def test_ecdf_within_one_over_n(self):
        s = DistributionSpec("u", "uniform", 0.0, 1.0)
        n = 1000
        m = sample_lhs([s], n, seed=2)
        v = np.sort(m.values[:, 0])
        bounds = np.arange(n + 1) / n
        ecdf = np.searchsorted(v, bounds, side="right") / n
        assert np.max(np.abs(ecdf - bounds)) <= 1.0 / n + 1e-12

    def test_same_seed_identical(self):
        specs = unit_specs(3)
        a = sample_lhs(specs, 20, seed=1)
        b = sample_lhs(specs, 20, seed=1)
        assert np.array_equal(a.values, b.values)


class TestRunMonteCarlo:
    def binding(self, k=3):
        return ModelBinding(unit_specs(k), ("total",), _sum_eval)

    def test_single_point_baseline(self):
        b = self.binding()
        samples = SampleMatrix(b.parameter_names,
                               b.baseline_values()[None, :], 0, "manual")
        res = run_monte_carlo(b, samples)
        row, _ = b.evaluate(b.baseline_values())
        assert np.array_equal(res.table[0], row)
        assert res.converged.all() and res.n_failed == 0

    def test_worker_count_does_not_change_result(self):
        b = self.binding(4)
        samples = sample_lhs(b.parameters, 40, seed=8)
        one = run_monte_carlo(b, samples, workers=1)
        three = run_monte_carlo(b, samples, workers=3)
        assert np.array_equal(one.table, three.table)
        assert np.array_equal(one.converged, three.converged)

    def test_failure_threshold_aborts_with_partial_result(self):
        def flaky(row):
            if row[0] > 0.8:
                return np.full(1, np.nan), False
            return np.array([row[0]]), True

        b = ModelBinding(unit_specs(1), ("m",), flaky)
        samples = sample_lhs(b.parameters, 20, seed=4)
        n_bad = int(np.sum(samples.values[:, 0] > 0.8))
        assert n_bad >= 2  # seed chosen so the 5% default trips
        with pytest.raises(MonteCarloError) as err:
            run_monte_carlo(b, samples)
        partial = err.value.result
        assert partial.n_failed == n_bad
        assert np.isnan(partial.table[~partial.converged]).all()
        # a looser threshold lets the same run through
        res = run_monte_carlo(b, samples, max_failure_rate=0.5)
        assert res.n_failed == n_bad

    def test_column_mismatch_rejected(self):
        b = self.binding(2)
        samples = sample_lhs(unit_specs(2, prefix="q"), 5, seed=0)
        with pytest.raises(UQError):
            run_monte_carlo(b, samples)

    def test_duplicate_parameter_names_rejected(self):
        s = DistributionSpec("same", "uniform", 0.0, 1.0)
        with pytest.raises(UQError):
            ModelBinding((s, s), ("m",), _sum_eval)


class TestResolveWorkers:
    def test_explicit_wins(self, monkeypatch):
        monkeypatch.setenv("ASMBENCH_WORKERS", "7")
        assert resolve_workers(2) == 2

    def test_env_fallback(self, monkeypatch):
        monkeypatch.setenv("ASMBENCH_WORKERS", "3")
        assert resolve_workers() == 3
        monkeypatch.setenv("ASMBENCH_WORKERS", "")
        assert resolve_workers() == 1
        monkeypatch.delenv("ASMBENCH_WORKERS")
        assert resolve_workers() == 1

    def test_invalid_rejected(self):
        with pytest.raises(UQError):
            resolve_workers(0)


class TestMorris:
    def test_simulation_count_is_r_times_k_plus_1(self):
        calls = []

        def count_eval(row):
            calls.append(1)
            return np.array([float(row[0])]), True

        b = ModelBinding(unit_specs(28), ("m",), count_eval)
        res = morris(b, n_trajectory=50, seed=0, workers=1)
        assert res.n_simulations == 1450
        assert len(calls) == 1450

    def test_simulation_count_large_parameter_space(self):
        b = ModelBinding(unit_specs(137), ("m",), _sum_eval)
        res = morris(b, n_trajectory=50, seed=1, workers=1)
        assert res.n_simulations == 6900

    def test_linear_model_exact_indices(self):
        specs = (DistributionSpec("x1", "uniform", 0.0, 1.0),
                 DistributionSpec("x2", "uniform", 2.0, 6.0),
                 DistributionSpec("x3", "uniform", 0.0, 1.0))

        def ev(row):
            return np.array([row[0], row[1]]), True

        b = ModelBinding(specs, ("first", "second"), ev)
        res = morris(b, n_trajectory=12, seed=3)
        # metric "first" responds to x1 alone with unit slope
        assert res.mu_star_norm[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert res.mu_star[1, 0] == 0.0 and res.mu_star[2, 0] == 0.0
        assert res.sigma[0, 0] <= 1e-10
        assert res.ci95[0, 0] <= 1e-10
        # metric "second": slope in unit coordinates is the range width
        assert res.mu_star[1, 1] == pytest.approx(4.0, abs=1e-12)
        assert res.mu_star_norm[1, 1] == pytest.approx(1.0, abs=1e-12)
        assert res.sigma[1, 1] <= 1e-10
        labels = res.classification()
        assert labels[0, 0] == "near-linear"
        assert labels[1, 1] == "near-linear"

    def test_trajectory_structure_on_four_level_grid(self):
        seen = []

        def record(row):
            seen.append(np.array(row, dtype=float))
            return np.array([0.0]), True

        k = 5
        b = ModelBinding(unit_specs(k), ("m",), record)
        morris(b, n_trajectory=7, levels=4, seed=21)
        pts = np.array(seen)
        assert pts.shape == (7 * (k + 1), k)
        assert np.all((pts >= 0.0) & (pts <= 1.0))
        # every coordinate sits on the 4-level grid {0, 1/3, 2/3, 1}
        assert np.allclose(pts * 3.0, np.round(pts * 3.0), atol=1e-12)
        delta = 4.0 / (2.0 * 3.0)
        for t in range(7):
            block = pts[t * (k + 1):(t + 1) * (k + 1)]
            moved = []
            for a, c in zip(block[:-1], block[1:]):
                diff = c - a
                (dim,) = np.nonzero(diff)[0].reshape(1)
                assert abs(abs(diff[dim]) - delta) < 1e-12
                moved.append(int(dim))
            assert sorted(moved) == list(range(k))

    def test_mu_star_bounds_mean_ee(self):
        def ev(row):
            return np.array([math.sin(3.0 * row[0]) + row[1] ** 2]), True

        b = ModelBinding(unit_specs(2), ("m",), ev)
        res = morris(b, n_trajectory=20, seed=5)
        assert np.all(res.mu_star >= -1e-15)
        assert np.all(res.mu_star_norm <= 1.0 + 1e-12)
        assert res.mu_star_norm.max(axis=0) == pytest.approx([1.0])

    def test_failed_points_degrade_to_nan_means(self):
        def flaky(row):
            if row[0] > 0.9:
                return np.array([np.nan]), False
            return np.array([row[0] + row[1]]), True

        b = ModelBinding(unit_specs(2), ("m",), flaky)
        res = morris(b, n_trajectory=10, seed=2)
        assert np.all(np.isfinite(res.mu_star))
        assert np.all(np.isfinite(res.ci95))

    def test_determinism(self):
        b = ModelBinding(unit_specs(3), ("m",), _sum_eval)
        a = morris(b, n_trajectory=6, seed=9)
        c = morris(b, n_trajectory=6, seed=9)
        assert np.array_equal(a.mu_star, c.mu_star)
        assert np.array_equal(a.ci95, c.ci95)

    def test_validation(self):
        b = ModelBinding(unit_specs(2), ("m",), _sum_eval)
        with pytest.raises(UQError):
            morris(b, n_trajectory=1)
        with pytest.raises(UQError):
            morris(b, levels=3)
        with pytest.raises(UQError):
            morris(b, specs=unit_specs(2, prefix="q"))
        empty = ModelBinding((), ("m",), _sum_eval)
        with pytest.raises(UQError):
            morris(empty)


def ks_brute(a, b):
    """Double-loop supremum of |ECDF difference| over all points."""
    d = 0.0
    for x in np.concatenate([a, b]):
        d = max(d, abs(np.mean(a <= x) - np.mean(b <= x)))
    return d


class TestKs2Sample:
    def test_hand_case_half(self):
        d, _ = ks_2sample([1.0, 2.0, 3.0, 4.0], [3.0, 4.0, 5.0, 6.0])
        assert d == pytest.approx(0.5, abs=1e-15)

    def test_identical_groups(self):
        d, p = ks_2sample([1.0, 2.0, 5.0], [1.0, 2.0, 5.0])
        assert d == 0.0 and p == 1.0

    def test_disjoint_supports(self):
        d, p = ks_2sample([0.0, 0.1, 0.2], [5.0, 6.0, 7.0])
        assert d == pytest.approx(1.0, abs=1e-15)
        assert p < 0.15

    @given(st.lists(st.integers(0, 12), min_size=1, max_size=60),
           st.lists(st.integers(0, 12), min_size=1, max_size=60))
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force(self, xs, ys):
        a = np.array(xs, dtype=float)
        b = np.array(ys, dtype=float)
        d, _ = ks_2sample(a, b)
        assert d == pytest.approx(ks_brute(a, b), abs=1e-12)

    def test_statistic_matches_scipy(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=80)
        b = rng.normal(0.5, size=120)
        d, p = ks_2sample(a, b)
        ref = scipy.stats.ks_2samp(a, b)
        assert d == pytest.approx(ref.statistic, abs=1e-15)
        # p pinned to the classic Kolmogorov series at effective n
        ne = 80 * 120 / 200
        assert p == pytest.approx(
            float(scipy.special.kolmogorov(math.sqrt(ne) * d)), abs=1e-10)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        a = rng.random(40)
        b = rng.random(25) + 0.2
        d0, _ = ks_2sample(a, b)
        d1, _ = ks_2sample(np.exp(a), np.exp(b))
        assert d0 == pytest.approx(d1, abs=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(UQError):
            ks_2sample([], [1.0])


class TestMcFilter:
    def matrix(self, values, names=None):
        values = np.asarray(values, dtype=float)
        names = names or tuple(f"p{j}" for j in range(values.shape[1]))
        return SampleMatrix(names, values, 0, "manual")

    def test_perfect_separator(self):
        x = np.linspace(0.0, 1.0, 40)[:, None]
        metric = x[:, 0] * 10.0
        res = mc_filter(self.matrix(x), metric, threshold=5.0, metric="m")
        assert res.d[0] == pytest.approx(1.0)
        assert res.p[0] < 1e-6
        assert res.n_above == 20 and res.n_below == 20
        assert not res.low_confidence

    def test_at_threshold_joins_below(self):
        x = np.arange(5, dtype=float)[:, None]
        metric = np.array([1.0, 2.0, 3.0, 3.0, 4.0])
        res = mc_filter(self.matrix(x), metric, threshold=3.0)
        assert res.n_above == 1 and res.n_below == 4
        assert res.low_confidence

    def test_nonconverged_rows_excluded(self):
        x = np.linspace(0.0, 1.0, 30)[:, None]
        metric = x[:, 0].copy()
        conv = np.ones(30, dtype=bool)
        conv[:10] = False
        res = mc_filter(self.matrix(x), metric, threshold=0.5, converged=conv)
        assert res.n_above + res.n_below == 20
        metric2 = metric.copy()
        metric2[:10] = np.nan
        res2 = mc_filter(self.matrix(x), metric2, threshold=0.5)
        assert res2.n_above + res2.n_below == 20

    def test_empty_group_rejected(self):
        x = np.ones((6, 1))
        with pytest.raises(UQError):
            mc_filter(self.matrix(x), np.arange(6.0), threshold=10.0)

    def test_d_and_p_in_unit_interval(self):
        rng = np.random.default_rng(11)
        x = rng.random((60, 4))
        metric = x @ np.array([3.0, 1.0, 0.0, -1.0])
        res = mc_filter(self.matrix(x), metric,
                        threshold=float(np.median(metric)))
        assert np.all((res.d >= 0.0) & (res.d <= 1.0))
        assert np.all((res.p >= 0.0) & (res.p <= 1.0))

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(12)
        x = rng.random((50, 2))
        metric = x[:, 0] + 0.1 * x[:, 1]
        base = mc_filter(self.matrix(x), metric, threshold=0.5)
        warped = mc_filter(self.matrix(np.exp(3.0 * x)), metric, threshold=0.5)
        assert base.d == pytest.approx(warped.d, abs=1e-15)

    def test_misaligned_metric_rejected(self):
        with pytest.raises(UQError):
            mc_filter(self.matrix(np.ones((4, 1))), np.ones(5), threshold=0.5)


class TestSpearman:
    def test_monotone_extremes(self):
        x = np.array([1.0, 2.0, 5.0, 9.0])
        rho, flagged = spearman(x, x ** 3)
        assert rho[0, 0] == pytest.approx(1.0)
        rho, _ = spearman(x, -x)
        assert rho[0, 0] == pytest.approx(-1.0)
        assert not flagged.any()

    def test_hand_ranked_case(self):
        # ranks equal values; Pearson of ranks gives 1 - 6*4/(5*24) = 0.8
        rho, _ = spearman([1.0, 2.0, 3.0, 4.0, 5.0],
                          [1.0, 3.0, 2.0, 5.0, 4.0])
        assert rho[0, 0] == pytest.approx(0.8, abs=1e-15)

    def test_matches_scipy_with_ties(self):
        rng = np.random.default_rng(23)
        x = rng.integers(0, 6, size=40).astype(float)
        y = x + rng.integers(0, 4, size=40)
        rho, _ = spearman(x, y)
        ref = scipy.stats.spearmanr(x, y).statistic
        assert rho[0, 0] == pytest.approx(ref, abs=1e-12)

    def test_matrix_shape(self):
        rng = np.random.default_rng(6)
        x = rng.random((30, 3))
        y = np.column_stack([x[:, 0], -x[:, 2]])
        rho, flagged = spearman(x, y)
        assert rho.shape == (3, 2) and flagged.shape == (3, 2)
        assert rho[0, 0] == pytest.approx(1.0)
        assert rho[2, 1] == pytest.approx(-1.0)

    def test_constant_column_flagged_zero(self):
        x = np.column_stack([np.ones(10), np.arange(10.0)])
        rho, flagged = spearman(x, np.arange(10.0))
        assert rho[0, 0] == 0.0 and flagged[0, 0]
        assert rho[1, 0] == pytest.approx(1.0) and not flagged[1, 0]

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(8)
        x = rng.random(25)
        y = rng.random(25)
        rho0, _ = spearman(x, y)
        rho1, _ = spearman(np.exp(5.0 * x), y)
        assert rho0[0, 0] == pytest.approx(rho1[0, 0], abs=1e-15)

    def test_converged_mask(self):
        x = np.arange(10.0)
        y = x.copy()
        y[7:] = -99.0
        keep = np.ones(10, dtype=bool)
        keep[7:] = False
        rho, _ = spearman(x, y, converged=keep)
        assert rho[0, 0] == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(UQError):
            spearman([1.0, 2.0], [1.0, 2.0])
        with pytest.raises(UQError):
            spearman(np.ones((4, 1)), np.ones(5))


class TestGridSweep:
    def binding(self):
        specs = (DistributionSpec("x", "uniform", 0.0, 10.0, baseline=2.0),
                 DistributionSpec("y", "uniform", 0.0, 10.0, baseline=3.0),
                 DistributionSpec("z", "uniform", 0.0, 10.0, baseline=5.0))

        def ev(row):
            if row[0] == 666.0:
                return np.full(2, np.nan), False
            return np.array([row[0] + 10.0 * row[1], row[2]]), True

        return ModelBinding(specs, ("combo", "passthrough"), ev)

    def test_single_point_equals_baseline(self):
        b = self.binding()
        res = grid_sweep(b, "x", "y", [2.0], [3.0])
        row, _ = b.evaluate(b.baseline_values())
        assert res.grids[:, 0, 0] == pytest.approx(row)
        assert not res.missing.any()

    def test_grid_values_and_baseline_hold(self):
        b = self.binding()
        xs = np.array([0.0, 1.0, 2.0])
        ys = np.array([5.0, 7.0])
        res = grid_sweep(b, "x", "y", xs, ys)
        assert res.grids.shape == (2, 2, 3)
        expect = xs[None, :] + 10.0 * ys[:, None]
        assert res.grids[0] == pytest.approx(expect)
        # the off-grid parameter stays at its baseline everywhere
        assert res.grids[1] == pytest.approx(np.full((2, 3), 5.0))

    def test_failed_point_marked_missing(self):
        b = self.binding()
        res = grid_sweep(b, "x", "y", [1.0, 666.0], [3.0])
        assert not res.missing[0, 0] and res.missing[0, 1]
        assert np.isnan(res.grids[:, 0, 1]).all()
        assert np.isfinite(res.grids[:, 0, 0]).all()

    def test_validation(self):
        b = self.binding()
        with pytest.raises(UQError):
            grid_sweep(b, "x", "x", [1.0], [2.0])
        with pytest.raises(UQError):
            grid_sweep(b, "nope", "y", [1.0], [2.0])


class TestBsm1Binding:
    def test_default_specs(self):
        specs = bsm1_parameter_specs()
        assert len(specs) == 28
        kinds = [s.kind for s in specs]
        assert kinds.count("triangular") == 20
        assert kinds.count("uniform") == 8
        for s in specs:
            assert s.name.startswith(("asm1.", "settings."))
            if s.kind == "triangular":
                assert s.baseline == s.mode
            assert s.min <= s.baseline <= s.max

    def test_flow_ranges_scale_with_influent(self):
        base = {s.name: s for s in bsm1_parameter_specs()}
        scaled = BSM1Settings(Q_in=2 * 18446.0, Q_RAS=2 * 18446.0,
                              Q_intr=6 * 18446.0)
        big = {s.name: s for s in bsm1_parameter_specs(scaled)}
        assert big["settings.Q_RAS"].max == 2 * base["settings.Q_RAS"].max
        assert big["settings.Q_intr"].min == 2 * base["settings.Q_intr"].min
        assert big["settings.Q_WAS"].max == base["settings.Q_WAS"].max

    def test_single_sample_reproduces_baseline_scenario(self):
        binding = bsm1_binding()
        assert len(binding.parameters) == 28
        assert binding.metrics == METRIC_NAMES
        samples = SampleMatrix(binding.parameter_names,
                               binding.baseline_values()[None, :], 0, "manual")
        res = run_monte_carlo(binding, samples)
        assert res.converged.all()
        # the MC wrapper adds nothing beyond the evaluator itself
        row, ok = binding.evaluate(binding.baseline_values())
        assert ok and np.array_equal(res.table[0], row)
        # and the evaluator reproduces a direct baseline solve
        problem = assemble_ode(build_bsm1(BSM1Settings(), ASM1ParameterSet()))
        ss = steady_state(problem, bsm1_initial_state(problem),
                          tol_ss=1e-3, t_max=150.0)
        direct = effluent_metrics(problem, ss)
        assert res.table[0] == pytest.approx(
            [direct[k] for k in METRIC_NAMES], rel=1e-5)
