"""Metric correctness: quadrature grids, error integrals, slopes, win rates."""

import numpy as np
import pytest

from sdkde import EvalGrid, kde, kl_divergence, loglog_slope, mise, preset, sample, silverman_bandwidth, win_rate
from sdkde.metrics import summarize
from conftest import adaptive_ise_1d


class TestEvalGrid:
    def test_weights_sum_to_window_measure(self):
        g1 = EvalGrid([(-2.0, 3.0, 251)])
        assert g1.weights.sum() == pytest.approx(5.0, rel=1e-12)
        g2 = EvalGrid.from_window([(-1.0, 1.0), (0.0, 4.0)], 41)
        assert g2.weights.sum() == pytest.approx(2.0 * 4.0, rel=1e-12)

    def test_spacing(self):
        g = EvalGrid([(0.0, 1.0, 5)])
        assert g.spacing[0] == pytest.approx(0.25)

    def test_nodes_are_row_major(self):
        g = EvalGrid([(0.0, 1.0, 2), (0.0, 1.0, 3)])
        expected = [(0, 0), (0, 0.5), (0, 1), (1, 0), (1, 0.5), (1, 1)]
        assert np.allclose(g.nodes, expected)

    def test_counts_must_be_at_least_two(self):
        with pytest.raises(ValueError):
            EvalGrid([(0.0, 1.0, 1)])

    def test_polynomial_integration_is_exact(self):
        # trapezoid integrates affine functions exactly
        g = EvalGrid([(0.0, 2.0, 9)])
        assert g.integrate(3.0 * g.nodes + 1.0) == pytest.approx(8.0, rel=1e-12)


class TestMise:
    def test_identity_is_zero(self, models):
        model = models["gauss-mix-1"]
        grid = EvalGrid.from_window(model.window(), 512)
        truth = model.pdf(grid.nodes)
        assert mise(truth, truth, grid) <= 1e-12

    def test_constant_offset(self):
        grid = EvalGrid([(0.0, 1.0, 101)])
        p = np.exp(-grid.nodes)
        c = 0.37
        assert mise(p + c, p, grid) == pytest.approx(c**2, rel=1e-12)

    def test_against_adaptive_quadrature_oracle(self, models):
        model = models["gauss-mix-1"]
        data = sample(model, 1000, seed=0)
        est = kde(data, silverman_bandwidth(data))
        grid = EvalGrid.from_window(model.window(), 2048)
        fixed = mise(est, model, grid)
        adaptive = adaptive_ise_1d(est, model, model.window())
        assert fixed == pytest.approx(adaptive, rel=1e-3)

    def test_dimension_mismatch_rejected(self, models):
        grid = EvalGrid.from_window(models["gauss-mix-1"].window(), 64)
        with pytest.raises(ValueError):
            mise(models["mog-2d"], models["mog-2d"], grid)

    @pytest.mark.parametrize("name", ["gauss-mix-1", "gauss-mix-2", "gauss-mix-3", "laplace-mix-1"])
    def test_grid_refinement_stability(self, models, name):
        model = models[name]
        data = sample(model, 1000, seed=1)
        est = kde(data, silverman_bandwidth(data))
        coarse = mise(est, model, EvalGrid.from_window(model.window(), 2048))
        fine = mise(est, model, EvalGrid.from_window(model.window(), 4096))
        assert abs(fine - coarse) / coarse < 0.005


class TestKlDivergence:
    def test_identity_is_zero(self, models):
        model = models["gauss-mix-2"]
        grid = EvalGrid.from_window(model.window(), 1024)
        truth = model.pdf(grid.nodes)
        assert abs(kl_divergence(truth, truth, grid)) <= 1e-10

    def test_shifted_gaussian_closed_form(self):
        from sdkde import GaussianMixture1D

        truth = GaussianMixture1D(0.5, 0.0, 1.0, 0.0, 1.0)
        shifted = GaussianMixture1D(0.5, 0.1, 1.0, 0.1, 1.0)
        grid = EvalGrid.from_window([(-8.0, 8.0)], 4097)
        kl = kl_divergence(truth.pdf(grid.nodes), shifted.pdf(grid.nodes), grid)
        assert kl == pytest.approx(0.005, abs=1e-4)

    def test_nonnegative_on_random_pairs(self, models):
        model = models["gauss-mix-3"]
        grid = EvalGrid.from_window(model.window(), 2048)
        for seed in range(5):
            data = sample(model, 300, seed=seed)
            est = kde(data, silverman_bandwidth(data))
            assert kl_divergence(model.pdf(grid.nodes), est.evaluate(grid.nodes), grid) >= 0.0

    def test_vanishing_estimate_with_mass_raises(self):
        grid = EvalGrid([(0.0, 1.0, 11)])
        p = np.full(11, 1.0)
        q = p.copy()
        q[3] = 0.0
        with pytest.raises(ValueError):
            kl_divergence(p, q, grid)


class TestLoglogSlope:
    def test_exact_power_law(self):
        ns = np.array([100, 200, 400, 800, 1600])
        slope, _ = loglog_slope(ns, 3.0 * ns ** (-0.8))
        assert slope == pytest.approx(-0.8, abs=1e-12)

    def test_theory_rate_power_law(self):
        ns = np.array([500, 1000, 2000, 5000])
        slope, _ = loglog_slope(ns, 0.2 * ns ** (-8.0 / 9.0))
        assert slope == pytest.approx(-8.0 / 9.0, abs=1e-12)

    def test_two_points_equals_log_ratio(self):
        slope, _ = loglog_slope([10, 1000], [1.0, 0.01])
        assert slope == pytest.approx(-1.0, abs=1e-12)

    def test_slope_invariant_under_error_rescaling(self):
        ns = [100, 400, 900]
        errs = np.array([0.5, 0.2, 0.11])
        s1, i1 = loglog_slope(ns, errs)
        s2, i2 = loglog_slope(ns, 7.0 * errs)
        assert s1 == pytest.approx(s2, abs=1e-12)
        assert i2 == pytest.approx(i1 + np.log10(7.0), abs=1e-12)

    def test_nonpositive_inputs_rejected(self):
        with pytest.raises(ValueError):
            loglog_slope([100, 200], [0.1, 0.0])
        with pytest.raises(ValueError):
            loglog_slope([100], [0.1])


class TestWinRate:
    def test_ties_do_not_count(self):
        a = np.ones(10)
        assert win_rate(a, a) == 0.0

    def test_uniform_winner(self):
        assert win_rate(np.zeros(8), np.ones(8)) == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            win_rate([1.0, 2.0], [1.0])

    def test_summary_win_count_bounded(self):
        s = summarize([1.0, 2.0, 3.0], [2.0, 2.0, 2.0], baseline_name="base")
        assert s.win_count == 1
        assert s.win_count <= len(s.values)
        assert s.baseline == "base"
