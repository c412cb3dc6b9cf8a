"""Seeded sampling layer: reproducibility contract and distributional
agreement with the analytic laws.

The gaussian-lobe pointing sampler and the gamma-transform fading sampler
are model-exact, so their KS distances against the closed-form CDFs are
pure sampling noise and must sit under 5/sqrt(n).  The exact-pattern
sampler is physics, not the model; only its qualitative side-lobe
behaviour is asserted here (the quantified desk-scale comparison lives in
the acceptance suite).
"""
import math

import numpy as np
import pytest

from thzlink.antenna import ArrayConfig, fit_lobe_model, normalization_g0
from thzlink.channel import (AlphaMuParams, ChannelModel, LinkBudget,
                             alpha_mu_cdf, channel_cdf, outage_probability)
from thzlink.errors import DomainError
from thzlink.montecarlo import (MAX_SAMPLES, MIN_SAMPLES, McConfig,
                                _orientation_angles, empirical_summary,
                                outage_empirical, sample_alpha_mu,
                                sample_channel, sample_pointing)
from thzlink.pointing import (JitterParams, PointingModel,
                              combine_orientation, orientation_azimuth,
                              pointing_cdf)

LOBE16 = fit_lobe_model(ArrayConfig(16))


def make_cm(beta=5.0, alpha=2.0, mu=1.0):
    pm = PointingModel(LOBE16, JitterParams(LOBE16.w_b / math.sqrt(beta)))
    link = LinkBudget(distance=100.0, carrier_frequency=275e9,
                      tx_power=1e-2, noise_power=1e-12)
    return ChannelModel(AlphaMuParams(alpha, mu), pm, link)


def ks_thinned(samples, cdf, max_evals=4000):
    """Conservative KS bound: exact on a stride subset plus stride/n
    slack for skipped order statistics (mirrors the CLI's estimator)."""
    x = np.sort(np.asarray(samples))
    n = x.size
    stride = max(1, n // max_evals)
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    worst = 0.0
    for i in idx:
        f = cdf(float(x[i]))
        worst = max(worst, abs(f - (i + 1) / n), abs(f - i / n))
    return worst + (stride - 1) / n


class TestConfig:
    def test_defaults(self):
        cfg = McConfig()
        assert cfg.n_samples == 1_000_000
        assert cfg.seed == 0
        assert cfg.pattern_mode == "gaussian-lobe"
        assert cfg.histogram_bins is None

    @pytest.mark.parametrize("kw", [
        {"n_samples": 999}, {"n_samples": MAX_SAMPLES + 1},
        {"n_samples": 1.5e5}, {"n_samples": True},
        {"seed": -1}, {"seed": 2 ** 64}, {"seed": 1.0},
        {"histogram_bins": 19}, {"histogram_bins": 30.0},
        {"pattern_mode": "dish"},
    ])
    def test_rejects_invalid(self, kw):
        with pytest.raises(DomainError):
            McConfig(**kw)

    def test_bounds_are_sane(self):
        assert MIN_SAMPLES == 1_000
        assert MAX_SAMPLES == 50_000_000


class TestReproducibility:
    # sizes straddle the 65536-sample block boundary with a remainder
    N_ODD = 2 * 65536 + 777

    def test_fading_worker_count_invariant(self):
        p = AlphaMuParams(1.7, 2.3, 0.9)
        cfg = McConfig(n_samples=self.N_ODD, seed=42)
        a = sample_alpha_mu(cfg, p, n_workers=1)
        b = sample_alpha_mu(cfg, p, n_workers=7)
        assert np.array_equal(a, b)

    def test_pointing_worker_count_invariant(self):
        cfg = McConfig(n_samples=self.N_ODD, seed=9)
        j = JitterParams(0.02)
        a = sample_pointing(cfg, ArrayConfig(16), j, lobe=LOBE16, n_workers=1)
        b = sample_pointing(cfg, ArrayConfig(16), j, lobe=LOBE16, n_workers=4)
        assert np.array_equal(a, b)

    def test_channel_worker_count_invariant_exact_mode(self):
        cm = make_cm()
        cfg = McConfig(n_samples=140_000, seed=3, pattern_mode="exact-array")
        a = sample_channel(cfg, cm, array=ArrayConfig(16), n_workers=1)
        b = sample_channel(cfg, cm, array=ArrayConfig(16), n_workers=3)
        assert np.array_equal(a, b)

    def test_same_seed_same_stream(self):
        p = AlphaMuParams(2.0, 1.0)
        cfg = McConfig(n_samples=10_000, seed=1234)
        assert np.array_equal(sample_alpha_mu(cfg, p), sample_alpha_mu(cfg, p))

    def test_distinct_seeds_differ(self):
        p = AlphaMuParams(2.0, 1.0)
        a = sample_alpha_mu(McConfig(n_samples=10_000, seed=0), p)
        b = sample_alpha_mu(McConfig(n_samples=10_000, seed=1), p)
        assert not np.array_equal(a, b)

    def test_prefix_stability(self):
        # block i depends only on (seed, i), so shrinking n keeps the
        # common prefix bit-identical
        p = AlphaMuParams(2.0, 1.0)
        long = sample_alpha_mu(McConfig(n_samples=65536 + 1000, seed=5), p)
        short = sample_alpha_mu(McConfig(n_samples=65536, seed=5), p)
        assert np.array_equal(long[:65536], short)

    def test_worker_count_validation(self):
        with pytest.raises(DomainError):
            sample_alpha_mu(McConfig(n_samples=1000), AlphaMuParams(2.0, 1.0),
                            n_workers=0)


class TestFadingSampler:
    N = 200_000

    def test_moments_and_ks(self):
        p = AlphaMuParams(alpha=1.6, mu=2.4, h_hat=1.1)
        x = sample_alpha_mu(McConfig(n_samples=self.N, seed=7), p)
        se = float(np.std(x)) / math.sqrt(self.N)
        assert abs(float(np.mean(x)) - p.moment(1)) < 4.0 * se
        sq = x * x
        se2 = float(np.std(sq)) / math.sqrt(self.N)
        assert abs(float(np.mean(sq)) - p.moment(2)) < 4.0 * se2
        # the gamma-transform sampler is exact, so KS is pure noise
        ks = ks_thinned(x, lambda v: alpha_mu_cdf(v, p))
        assert ks <= 5.0 / math.sqrt(self.N)

    def test_rayleigh_special_case(self):
        p = AlphaMuParams(2.0, 1.0)
        x = sample_alpha_mu(McConfig(n_samples=self.N, seed=11), p)
        ks = ks_thinned(x, lambda v: 1.0 - math.exp(-v * v))
        assert ks <= 5.0 / math.sqrt(self.N)
        assert np.all(x > 0.0)


class TestPointingSampler:
    N = 200_000

    def test_lobe_mode_matches_closed_cdf(self):
        j = JitterParams(LOBE16.w_b / 2.0)
        pm = PointingModel(LOBE16, j)
        x = sample_pointing(McConfig(n_samples=self.N, seed=0), ArrayConfig(16),
                            j, lobe=LOBE16)
        ks = ks_thinned(x, lambda v: pointing_cdf(v, pm))
        assert ks <= 5.0 / math.sqrt(self.N)
        assert np.all((x > 0.0) & (x <= LOBE16.g0))

    def test_exact_mode_small_jitter_pins_peak(self):
        cfg = McConfig(n_samples=2000, seed=1, pattern_mode="exact-array")
        x = sample_pointing(cfg, ArrayConfig(8), JitterParams(1e-9))
        g0 = normalization_g0(ArrayConfig(8))
        assert np.allclose(x, g0, rtol=1e-10)

    def test_exact_mode_side_lobe_gap_grows(self):
        # KS against the lobe-model CDF grows with jitter once side lobes
        # start collecting probability mass
        cfg = McConfig(n_samples=30_000, seed=2, pattern_mode="exact-array")
        gaps = []
        for frac in (0.25, 4.0):
            sigma = frac * LOBE16.w_b
            j = JitterParams(sigma)
            pm = PointingModel(LOBE16, j)
            x = sample_pointing(cfg, ArrayConfig(16), j)
            gaps.append(ks_thinned(x, lambda v: pointing_cdf(v, pm)))
        assert gaps[1] > gaps[0]


class TestChannelSampler:
    def test_lobe_mode_matches_closed_cdf(self):
        n = 100_000
        cm = make_cm(beta=5.0)
        x = sample_channel(McConfig(n_samples=n, seed=0), cm)
        ks = ks_thinned(x, lambda v: channel_cdf(v, cm))
        assert ks <= 5.0 / math.sqrt(n)

    def test_exact_mode_requires_array(self):
        cfg = McConfig(n_samples=1000, pattern_mode="exact-array")
        with pytest.raises(DomainError):
            sample_channel(cfg, make_cm())

    def test_scales_with_path_loss(self):
        cm = make_cm()
        cfg = McConfig(n_samples=5000, seed=4)
        x = sample_channel(cfg, cm)
        assert np.all(x > 0.0)
        assert float(np.max(x)) < cm.peak_gain * cm.path_gain * 20.0


class TestSummary:
    def test_uniform_synthetic_ks(self):
        rng = np.random.default_rng(0)
        n = 50_000
        u = rng.random(n)
        s = empirical_summary(u, McConfig(n_samples=n), cdf=lambda v: min(
            max(v, 0.0), 1.0))
        assert s.ks_distance <= 5.0 / math.sqrt(n)
        assert s.ecdf_probs[-1] == 1.0
        assert np.all(np.diff(s.sorted_samples) >= 0.0)

    def test_histogram_normalizes_and_moments_match(self):
        rng = np.random.default_rng(1)
        x = rng.normal(3.0, 0.5, 20_000)
        s = empirical_summary(x, McConfig(n_samples=1000))
        integral = float(np.sum(s.densities * np.diff(s.bin_edges)))
        assert integral == pytest.approx(1.0, abs=1e-12)
        assert s.sample_mean == pytest.approx(float(np.mean(x)), rel=1e-13)
        assert s.sample_variance == pytest.approx(float(np.var(x, ddof=1)),
                                                  rel=1e-12)
        assert s.ks_distance is None

    def test_bin_override(self):
        rng = np.random.default_rng(2)
        s = empirical_summary(rng.random(5000),
                              McConfig(n_samples=1000, histogram_bins=41))
        assert s.densities.size == 41

    def test_constant_samples(self):
        x = np.full(2000, 3.7)
        s = empirical_summary(x, McConfig(n_samples=1000))
        assert np.all(s.sorted_samples == 3.7)
        assert s.densities.size >= 20
        assert float(np.sum(s.densities * np.diff(s.bin_edges))) \
            == pytest.approx(1.0, abs=1e-12)

    def test_input_validation(self):
        cfg = McConfig(n_samples=1000)
        with pytest.raises(DomainError):
            empirical_summary(np.ones(999), cfg)
        with pytest.raises(DomainError):
            empirical_summary(np.array([1.0] * 999 + [math.nan]), cfg)


class TestOrientationRegression:
    def test_matches_scalar_maps(self):
        # the vectorized hot path must reproduce the validated scalar maps
        rng = np.random.default_rng(6)
        tx = rng.normal(0.0, 0.1, 300)
        ty = rng.normal(0.0, 0.1, 300)
        th, ph = _orientation_angles(tx, ty)
        assert np.allclose(th, combine_orientation(tx, ty), rtol=1e-13,
                           atol=1e-15)
        assert np.allclose(ph, orientation_azimuth(tx, ty), rtol=1e-13,
                           atol=1e-15)


class TestOutageEmpirical:
    def test_matches_analytic_in_lobe_mode(self):
        n = 100_000
        cm = make_cm(beta=5.0)
        scale = cm.peak_gain * cm.path_gain
        # threshold placed at 0.3x the channel scale: a mid-range outage
        gamma = cm.link.tx_power * (0.3 * scale) ** 2 / cm.link.noise_power
        pa = outage_probability(gamma, cm)
        assert 0.01 < pa < 0.9
        p_hat, se = outage_empirical(McConfig(n_samples=n, seed=0), cm, gamma)
        assert se == pytest.approx(math.sqrt(p_hat * (1 - p_hat) / n))
        assert abs(p_hat - pa) <= 4.0 * se + 5e-4

    def test_limits(self):
        cm = make_cm()
        cfg = McConfig(n_samples=20_000, seed=1)
        scale = cm.peak_gain * cm.path_gain
        tiny = cm.link.tx_power * (1e-6 * scale) ** 2 / cm.link.noise_power
        huge = cm.link.tx_power * (1e3 * scale) ** 2 / cm.link.noise_power
        assert outage_empirical(cfg, cm, tiny)[0] == 0.0
        assert outage_empirical(cfg, cm, huge)[0] == 1.0

    def test_threshold_validation(self):
        cm = make_cm()
        with pytest.raises(DomainError):
            outage_empirical(McConfig(n_samples=1000), cm, 0.0)
