"""Target distributions: exact densities, scores, windows, and samplers."""

import math

import numpy as np
import pytest
from scipy import stats

from sdkde import EvalGrid, GaussianMixture1D, GaussianMixture2D, LaplaceMixture1D, preset
from sdkde.distributions import PRESET_NAMES, pdf, sample, sample_components, score
from conftest import ALL_PRESETS, LAPLACE_PRESETS, ONE_D_PRESETS, fd_log_density_grad

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class TestPdf:
    def test_degenerate_mixture_is_standard_normal(self):
        m = GaussianMixture1D(0.5, 0.0, 1.0, 0.0, 1.0)
        assert m.pdf(0.0) == pytest.approx(INV_SQRT_2PI, rel=1e-12)

    def test_mixture1_at_left_mode(self):
        # 0.4 * N(-2 | -2, 0.5^2) + 0.6 * N(-2 | 2, 1), high-precision reference
        m = preset("gauss-mix-1")
        assert m.pdf(-2.0) == pytest.approx(0.31923412245660507, rel=1e-12)

    def test_bivariate_standard_normal_mode(self):
        m = GaussianMixture2D([(1.0, (0.0, 0.0), np.eye(2))])
        assert m.pdf((0.0, 0.0)) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-12)

    def test_nonfinite_input_rejected(self, models):
        for name in ("gauss-mix-1", "laplace-mix-2"):
            with pytest.raises(ValueError):
                models[name].pdf(np.nan)
        with pytest.raises(ValueError):
            models["mog-2d"].pdf((np.inf, 0.0))

    @pytest.mark.parametrize("name", ALL_PRESETS)
    def test_nonnegative_and_normalized_on_window(self, models, name):
        model = models[name]
        nodes = 4096 if model.dim == 1 else 256
        grid = EvalGrid.from_window(model.window(), nodes)
        dens = model.pdf(grid.nodes)
        assert np.all(dens >= 0.0)
        total = grid.integrate(dens)
        assert 1.0 - 1e-3 <= total <= 1.0 + 1e-4


class TestScore:
    def test_single_gaussian_score_is_minus_x(self):
        m = GaussianMixture1D(0.5, 0.0, 1.0, 0.0, 1.0)
        x = np.linspace(-4, 4, 9)
        assert np.allclose(m.score(x), -x, rtol=0, atol=1e-13)

    def test_symmetric_mixture_score_vanishes_at_center(self):
        m = GaussianMixture1D(0.5, -1.3, 0.7, 1.3, 0.7)
        assert abs(m.score(0.0)) < 1e-14

    def test_mixture1_matches_finite_difference_at_zero(self):
        m = preset("gauss-mix-1")
        fd = fd_log_density_grad(m, 0.0)
        assert m.score(0.0) == pytest.approx(fd, rel=1e-6)

    @pytest.mark.parametrize("name", ALL_PRESETS)
    def test_score_matches_finite_difference_everywhere(self, models, name):
        model = models[name]
        pts = sample(model, 400, seed=1234)
        if model.dim == 1:
            if name in LAPLACE_PRESETS:
                # keep the FD stencil away from the non-differentiable kinks
                for loc in (model.loc1, model.loc2):
                    pts = pts[np.abs(pts - loc) > 1e-3]
            s = model.score(pts)
            keep = np.abs(s) > 0.05  # relative error is ill-posed near stationary points
            pts, s = pts[keep][:100], s[keep][:100]
            fd = fd_log_density_grad(model, pts)
            assert len(pts) == 100
            assert np.all(np.abs(fd - s) <= 1e-6 * np.abs(s))
        else:
            s = model.score(pts)
            keep = np.linalg.norm(s, axis=1) > 0.05
            pts, s = pts[keep][:100], s[keep][:100]
            fd = fd_log_density_grad(model, pts)
            assert len(pts) == 100
            err = np.linalg.norm(fd - s, axis=1) / np.linalg.norm(s, axis=1)
            assert np.all(err <= 1e-6)

    def test_score_undefined_where_density_underflows(self, models):
        # far enough out that the float64 density is exactly zero
        with pytest.raises(ValueError, match="underflows"):
            models["gauss-mix-1"].score(1e6)
        with pytest.raises(ValueError, match="underflows"):
            models["mog-2d"].score((1e6, 0.0))

    def test_laplace_kink_uses_one_sided_average(self):
        m = LaplaceMixture1D(0.5, 0.0, 1.0, 5.0, 1.0)
        # at the kink the first component's sign term drops out entirely
        logs = m._log_terms(np.array([0.0]))
        resp2 = float(np.exp(logs[1] - np.logaddexp(logs[0], logs[1]))[0])
        expected = resp2 * (1.0 / 1.0)  # second component pulls right, d = -sign(0-5)/1
        assert m.score(0.0) == pytest.approx(expected, rel=1e-12)
        eps = 1e-9
        one_sided_avg = (m.score(eps) + m.score(-eps)) / 2.0
        assert m.score(0.0) == pytest.approx(one_sided_avg, abs=1e-6)


class TestSampling:
    def test_fixed_seed_is_bitwise_reproducible(self, models):
        for name in ("gauss-mix-2", "laplace-mix-3", "mog-2d", "spiral"):
            a = sample(models[name], 100, seed=7)
            b = sample(models[name], 100, seed=7)
            assert np.array_equal(a, b)

    def test_sample_size_must_be_positive(self, models):
        with pytest.raises(ValueError):
            sample(models["gauss-mix-1"], 0, seed=1)

    def test_mixture1_mean_matches_theory(self):
        m = preset("gauss-mix-1")
        x = sample(m, 100_000, seed=11)
        true_mean = 0.4 * (-2.0) + 0.6 * 2.0
        true_var = 0.4 * (0.25 + 4.0) + 0.6 * (1.0 + 4.0) - true_mean**2
        se = math.sqrt(true_var / len(x))
        assert abs(x.mean() - true_mean) < 3 * se

    def test_laplace_component_fraction_concentrates(self):
        m = preset("laplace-mix-2")
        n = 100_000
        _, labels = sample_components(m, n, seed=3)
        frac = np.mean(labels == 0)
        assert abs(frac - 0.3) < 3 * math.sqrt(0.3 * 0.7 / n)

    @pytest.mark.parametrize("name", ONE_D_PRESETS)
    def test_kolmogorov_smirnov_against_analytic_cdf(self, models, name):
        x = sample(models[name], 100_000, seed=5)
        result = stats.kstest(x, models[name].cdf)
        assert result.statistic < 0.01

    def test_spiral_samples_lie_near_the_curve(self, models):
        pts = sample(models["spiral"], 5000, seed=9)
        radii = np.linalg.norm(pts, axis=1)
        # radius of the noiseless curve spans [0.1 pi, 0.5 pi]
        assert radii.min() > 0.1 * math.pi - 0.6
        assert radii.max() < 0.5 * math.pi + 0.6


class TestValidation:
    def test_weight_bounds(self):
        with pytest.raises(ValueError):
            GaussianMixture1D(0.0, 0.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            LaplaceMixture1D(1.0, 0.0, 1.0, 1.0, 1.0)

    def test_scale_positivity(self):
        with pytest.raises(ValueError):
            GaussianMixture1D(0.5, 0.0, -1.0, 1.0, 1.0)

    def test_mog_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            GaussianMixture2D([(0.5, (0, 0), np.eye(2)), (0.4, (1, 1), np.eye(2))])

    def test_mog_covariance_must_be_spd(self):
        with pytest.raises(ValueError):
            GaussianMixture2D([(1.0, (0, 0), [[1.0, 2.0], [2.0, 1.0]])])
        with pytest.raises(ValueError):
            GaussianMixture2D([(1.0, (0, 0), [[1.0, 0.5], [0.2, 1.0]])])

    def test_preset_registry(self):
        assert "gauss-mix-1" in PRESET_NAMES
        with pytest.raises(KeyError):
            preset("no-such-target")

    def test_custom_layouts_can_be_registered(self):
        from sdkde.distributions import preset_names, register_preset

        register_preset("test-wide-spiral", lambda: preset("spiral").__class__(growth=0.35))
        try:
            assert "test-wide-spiral" in preset_names()
            assert preset("test-wide-spiral").growth == 0.35
            with pytest.raises(ValueError):
                register_preset("gauss-mix-1", lambda: None)
        finally:
            from sdkde.distributions import _PRESETS

            _PRESETS.pop("test-wide-spiral", None)


def test_module_level_wrappers_delegate(models):
    m = models["gauss-mix-1"]
    assert pdf(m, 0.5) == m.pdf(0.5)
    assert score(m, 0.5) == m.score(0.5)
