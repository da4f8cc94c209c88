"""Spacing statistics, Brody fits, eta, ratio statistics and boundary scans."""

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import kstest

from dicke_chaos import (
    S0,
    brody_pdf,
    brody_scale,
    chaos_boundary,
    eta_indicator,
    fit_brody,
    goe_ratio_pdf,
    mean_ratio,
    poisson_pdf,
    poisson_ratio_pdf,
    spacing_ratios,
    split_degenerate,
    unfold,
    wigner_dyson_pdf,
)
from dicke_chaos.errors import (
    AllDegenerate,
    DegenerateFit,
    EmptyInput,
    NonRectangularGrid,
    TooFewLevels,
    TooFewSpacings,
)
from dicke_chaos.spectral_stats import ETA_DENOM


def sample_brody(rng, beta, size):
    """Inverse-CDF sampler: F(s) = 1 - exp(-b s^(beta+1))."""
    b = brody_scale(beta)
    u = rng.random(size)
    return (-np.log1p(-u) / b) ** (1.0 / (beta + 1.0))


class TestReferencePdfs:
    def test_poisson_at_zero(self):
        assert poisson_pdf(0.0) == 1.0

    def test_wigner_dyson_level_repulsion(self):
        assert wigner_dyson_pdf(0.0) == 0.0

    def test_wigner_dyson_at_one(self):
        expected = (np.pi / 2) * np.exp(-np.pi / 4)
        assert wigner_dyson_pdf(1.0) == pytest.approx(expected, abs=1e-15)
        assert wigner_dyson_pdf(1.0) == pytest.approx(0.7161859363405692, abs=1e-12)

    def test_first_intersection_constant(self):
        # the densities cross at ~0.4729; the module refines it to full precision
        assert 0.4729 < S0 < 0.4730
        assert abs(S0 - 0.4729129351811547) < 1e-13
        assert abs(wigner_dyson_pdf(S0) - poisson_pdf(S0)) < 1e-12

    def test_eta_denominator_against_quadrature(self):
        quad, _ = integrate.quad(lambda s: poisson_pdf(s) - wigner_dyson_pdf(s), 0.0, S0)
        assert ETA_DENOM == pytest.approx(quad, abs=1e-12)
        assert ETA_DENOM == pytest.approx(0.2157258290996982, abs=1e-12)


class TestBrody:
    def test_beta_zero_is_poisson(self):
        s = np.linspace(0.0, 10.0, 1000)
        assert np.max(np.abs(brody_pdf(s, 0.0) - poisson_pdf(s))) < 1e-12

    def test_beta_one_is_wigner_dyson(self):
        s = np.linspace(0.0, 10.0, 1000)
        assert np.max(np.abs(brody_pdf(s, 1.0) - wigner_dyson_pdf(s))) < 1e-12

    def test_scale_half(self):
        # Gamma(5/3) ** 1.5, computed independently via scipy
        from scipy.special import gamma

        assert brody_scale(0.5) == pytest.approx(gamma(5.0 / 3.0) ** 1.5, abs=1e-14)
        assert brody_scale(0.5) == pytest.approx(0.8577245662047805, abs=1e-12)

    def test_density_half_at_one(self):
        b = 0.8577245662047805
        assert brody_pdf(1.0, 0.5) == pytest.approx(b * 1.5 * np.exp(-b), abs=1e-12)
        assert brody_pdf(1.0, 0.5) == pytest.approx(0.5456750060130213, abs=1e-12)

    @pytest.mark.parametrize("beta", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_unit_normalization_and_mean(self, beta):
        norm, _ = integrate.quad(lambda s: brody_pdf(s, beta), 0.0, np.inf)
        mean, _ = integrate.quad(lambda s: s * brody_pdf(s, beta), 0.0, np.inf)
        assert norm == pytest.approx(1.0, abs=1e-6)
        assert mean == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("beta,lo,hi", [(0.0, 0.0, 0.05), (1.0, 0.95, 1.0), (0.5, 0.45, 0.55)])
    def test_mle_recovers_exponent(self, beta, lo, hi):
        rng = np.random.default_rng(42)
        s = sample_brody(rng, beta, 10_000)
        est, n_dropped = fit_brody(s)
        assert lo <= est <= hi
        assert n_dropped == 0

    def test_too_few_spacings(self):
        with pytest.raises(TooFewSpacings):
            fit_brody(np.ones(99))

    def test_all_degenerate(self):
        with pytest.raises(AllDegenerate):
            fit_brody(np.zeros(200))

    def test_degenerate_spacings_excluded_and_counted(self):
        rng = np.random.default_rng(3)
        s = np.concatenate([sample_brody(rng, 1.0, 5000), np.zeros(37)])
        est, n_dropped = fit_brody(s)
        assert n_dropped == 37
        assert est > 0.9


class TestEta:
    def test_wigner_dyson_sample_is_chaotic(self):
        rng = np.random.default_rng(11)
        u = rng.random(100_000)
        s = np.sqrt(-4.0 / np.pi * np.log1p(-u))
        assert eta_indicator(s) < 0.05

    def test_poisson_sample_is_integrable(self):
        rng = np.random.default_rng(12)
        s = -np.log1p(-rng.random(100_000))
        assert eta_indicator(s) == pytest.approx(1.0, abs=0.05)

    def test_clipped_to_unit_interval(self):
        # spacings piled far below S0 push the raw quotient beyond 1
        s = np.full(200, 1e-3)
        assert eta_indicator(s) == 1.0

    def test_monotone_in_brody_exponent(self):
        rng = np.random.default_rng(13)
        etas = []
        for beta in (0.0, 0.25, 0.5, 0.75, 1.0):
            etas.append(eta_indicator(sample_brody(rng, beta, 100_000)))
        diffs = np.diff(etas)
        assert np.all(diffs <= 0.03)
        assert etas[0] > 0.9 and etas[-1] < 0.1

    def test_too_few(self):
        with pytest.raises(TooFewSpacings):
            eta_indicator(np.ones(10))


class TestUnfold:
    def test_equally_spaced_gives_unit_spacings(self):
        for h in (0.1, 1.0, 17.3):
            levels = h * np.arange(200.0)
            out = unfold(levels, fit_degree=10)
            assert np.max(np.abs(out.spacings - 1.0)) < 1e-6

    def test_spacings_nonnegative_and_unit_mean(self):
        rng = np.random.default_rng(5)
        levels = np.sort(rng.normal(size=2000)) * 40.0
        out = unfold(levels)
        assert np.all(out.spacings >= 0)
        assert 0.9 < out.spacings.mean() < 1.1

    def test_poisson_process_unfolds_to_exponential(self):
        rng = np.random.default_rng(6)
        levels = np.cumsum(rng.exponential(1.0, 10_000))
        out = unfold(levels)
        stat = kstest(out.spacings, "expon").statistic
        assert stat < 0.02

    def test_affine_invariance(self):
        rng = np.random.default_rng(7)
        levels = np.sort(rng.uniform(0.0, 50.0, 500))
        base = unfold(levels).spacings
        moved = unfold(2.375 * levels - 11.0).spacings
        assert np.max(np.abs(base - moved)) < 1e-8

    def test_too_few_levels(self):
        with pytest.raises(TooFewLevels):
            unfold(np.arange(15.0), fit_degree=10)

    def test_degenerate_fit(self):
        with pytest.raises(DegenerateFit):
            unfold(np.zeros(100))

    def test_rejects_descending_input(self):
        with pytest.raises(ValueError):
            unfold(np.array([3.0, 2.0, 1.0] * 20))


class TestSpacingRatios:
    def test_picket_fence(self):
        ratios, dropped = spacing_ratios(np.array([0.0, 1.0, 2.0]))
        assert dropped == 0
        np.testing.assert_array_equal(ratios, [1.0])

    def test_hand_case(self):
        ratios, _ = spacing_ratios(np.array([0.0, 1.0, 3.0]))
        np.testing.assert_allclose(ratios, [0.5])

    def test_degenerate_pairs_dropped_and_counted(self):
        # spacings [0, 1, 1]: the pairs touching the zero spacing disappear
        ratios, dropped = spacing_ratios(np.array([0.0, 0.0, 1.0, 2.0]))
        np.testing.assert_allclose(ratios, [1.0])
        assert dropped == 1

    def test_affine_invariance_exact_arithmetic(self):
        # power-of-two scale and integer shift keep float arithmetic exact
        rng = np.random.default_rng(8)
        e = np.sort(rng.integers(0, 10_000, size=400)).astype(float)
        e = np.unique(e)
        r1, _ = spacing_ratios(e)
        r2, _ = spacing_ratios(2.0 * e + 7.0)
        np.testing.assert_array_equal(r1, r2)

    def test_affine_invariance_general(self):
        rng = np.random.default_rng(9)
        e = np.sort(rng.uniform(0.0, 100.0, 500))
        r1, _ = spacing_ratios(e)
        r2, _ = spacing_ratios(np.pi * e + np.e)
        np.testing.assert_allclose(r1, r2, rtol=1e-10)

    def test_poisson_process_ratio_distribution(self):
        rng = np.random.default_rng(10)
        levels = np.cumsum(rng.exponential(1.0, 100_000))
        ratios, _ = spacing_ratios(levels)
        # CDF of 2/(1+r)^2 on [0,1] is 2r/(1+r)
        stat = kstest(ratios, lambda r: 2.0 * r / (1.0 + r)).statistic
        assert stat < 0.01
        hist, edges = np.histogram(ratios, bins=50, range=(0.0, 1.0), density=True)
        assert hist[0] == pytest.approx(2.0, abs=0.15)

    def test_too_few_levels(self):
        with pytest.raises(TooFewLevels):
            spacing_ratios(np.array([0.0, 1.0]))


class TestRatioPdfs:
    def test_endpoint_values(self):
        assert goe_ratio_pdf(0.0) == 0.0
        assert goe_ratio_pdf(1.0) == pytest.approx(np.sqrt(3.0) / 2.0, abs=1e-14)
        assert poisson_ratio_pdf(1.0) == pytest.approx(0.5, abs=1e-15)

    def test_vanish_outside_unit_interval(self):
        r = np.array([-0.5, -1e-9, 1.0 + 1e-9, 2.0])
        assert np.all(goe_ratio_pdf(r) == 0.0)
        assert np.all(poisson_ratio_pdf(r) == 0.0)

    def test_normalization(self):
        n_goe, _ = integrate.quad(goe_ratio_pdf, 0.0, 1.0)
        n_poi, _ = integrate.quad(poisson_ratio_pdf, 0.0, 1.0)
        assert n_goe == pytest.approx(1.0, abs=1e-10)
        assert n_poi == pytest.approx(1.0, abs=1e-10)

    def test_reference_means(self):
        m_goe, _ = integrate.quad(lambda r: r * goe_ratio_pdf(r), 0.0, 1.0)
        m_poi, _ = integrate.quad(lambda r: r * poisson_ratio_pdf(r), 0.0, 1.0)
        assert m_goe == pytest.approx(4.0 - 2.0 * np.sqrt(3.0), abs=1e-8)
        assert m_poi == pytest.approx(2.0 * np.log(2.0) - 1.0, abs=1e-8)


class TestMeanRatio:
    def test_picket_fence_mean(self):
        assert mean_ratio(np.ones(50)) == 1.0

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            mean_ratio(np.array([]))


class TestSplitDegenerate:
    def test_zero_mean_drops_everything(self):
        clean, dropped = split_degenerate(np.zeros(10))
        assert clean.size == 0 and dropped == 10

    def test_relative_tolerance(self):
        s = np.array([1.0, 1.0, 1e-14])
        clean, dropped = split_degenerate(s)
        assert dropped == 1 and clean.size == 2


class TestChaosBoundary:
    def _grid(self, values_by_kappa, lams):
        triples = []
        for kappa, values in values_by_kappa.items():
            triples += [(kappa, lam, v) for lam, v in zip(lams, values)]
        return triples

    def test_monotone_column(self):
        triples = self._grid({0.0: [0.9, 0.5, 0.2, 0.1]}, [0.1, 0.3, 0.5, 0.7])
        (point,) = chaos_boundary(triples, "eta", 0.3)
        assert point.crossed and point.lambda_star == 0.5

    def test_never_crossing_column(self):
        triples = self._grid({0.0: [0.9, 0.8, 0.7, 0.6]}, [0.1, 0.3, 0.5, 0.7])
        (point,) = chaos_boundary(triples, "eta", 0.3)
        assert not point.crossed and point.lambda_star is None

    def test_persistence_skips_transient_dip(self):
        # a single early dip below threshold must not count as the boundary
        triples = self._grid({0.0: [0.2, 0.5, 0.1, 0.05]}, [0.1, 0.3, 0.5, 0.7])
        (point,) = chaos_boundary(triples, "eta", 0.3)
        assert point.lambda_star == 0.5

    def test_upward_indicator_direction(self):
        triples = self._grid({0.0: [0.39, 0.45, 0.49, 0.53]}, [0.1, 0.3, 0.5, 0.7])
        (point,) = chaos_boundary(triples, "mean_r", 0.48)
        assert point.lambda_star == 0.5

    def test_all_satisfying_means_first_lambda(self):
        triples = self._grid({0.0: [0.5, 0.52, 0.54, 0.55]}, [0.1, 0.3, 0.5, 0.7])
        (point,) = chaos_boundary(triples, "mean_r", 0.48)
        assert point.lambda_star == 0.1

    def test_kappa_columns_sorted_and_independent(self):
        triples = self._grid(
            {1.0: [0.39, 0.49, 0.50, 0.53], 0.0: [0.39, 0.40, 0.49, 0.53]},
            [0.1, 0.3, 0.5, 0.7],
        )
        points = chaos_boundary(triples, "mean_r", 0.48)
        assert [p.kappa for p in points] == [0.0, 1.0]
        assert points[0].lambda_star == 0.5
        assert points[1].lambda_star == 0.3

    def test_nan_never_satisfies(self):
        triples = self._grid({0.0: [0.5, np.nan, 0.55, 0.6]}, [0.1, 0.3, 0.5, 0.7])
        (point,) = chaos_boundary(triples, "mean_r", 0.48)
        assert point.lambda_star == 0.5

    def test_non_rectangular_raises(self):
        triples = [(0.0, 0.1, 1.0), (0.0, 0.3, 1.0), (1.0, 0.1, 1.0)]
        with pytest.raises(NonRectangularGrid):
            chaos_boundary(triples, "eta", 0.3)

    def test_duplicate_lambda_raises(self):
        triples = [(0.0, 0.1, 1.0), (0.0, 0.1, 0.9)]
        with pytest.raises(NonRectangularGrid):
            chaos_boundary(triples, "eta", 0.3)

    def test_unknown_indicator_rejected(self):
        with pytest.raises(ValueError):
            chaos_boundary([(0.0, 0.1, 1.0)], "zeta", 0.3)
