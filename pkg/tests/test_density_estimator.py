# -*- coding: utf-8 -*-
import cmath
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.expdyn.certifier import CycleCertifier
from src.expdyn.data_models import (
    TAU, AnnulusSpec, DensitySweepConfig, ExpParameter, MisiurewiczCertificate, Verdict,
)
from src.expdyn.density_estimator import DensityEstimator, wilson_interval
from src.expdyn.exceptions import NoSuchN

TWO_PI_I = complex(0.0, TAU)


@pytest.fixture
def estimator(fast_config):
    return DensityEstimator(fast_config)


@pytest.fixture
def cert_2pi():
    return MisiurewiczCertificate(
        lam=ExpParameter(lam=TWO_PI_I), preperiod=1, period=1, residual=0.0,
        cycle_mult_log_mod=math.log(TAU), postsingular_bound=TAU,
    )


def annulus(center=TWO_PI_I, gamma=0.5, r=1e-3, sectors=8):
    return AnnulusSpec(center=ExpParameter(lam=center), gamma=gamma, r=r, sectors=sectors)


def test_wilson_known_value():
    lo, hi = wilson_interval(8, 10)
    assert lo == pytest.approx(0.4902, abs=1e-3)
    assert hi == pytest.approx(0.9433, abs=1e-3)


@pytest.mark.parametrize("k, n", [(0, 10), (10, 10), (0, 1), (1, 1), (37, 100)])
def test_wilson_contains_estimate(k, n):
    lo, hi = wilson_interval(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0


def test_wilson_coverage_on_simulated_coin():
    rng = np.random.default_rng(2024)
    p, n, trials = 0.3, 200, 1000
    covered = 0
    for k in rng.binomial(n, p, size=trials):
        lo, hi = wilson_interval(int(k), n)
        covered += lo <= p <= hi
    assert 0.93 <= covered / trials <= 0.97


def test_sample_annulus_bounds(estimator):
    spec = annulus(r=0.2)
    for param in estimator.sample_annulus(spec, 500, seed=3):
        d = abs(param.lam - TWO_PI_I)
        assert spec.inner * (1 - 1e-12) <= d <= spec.r * (1 + 1e-12)


def test_sample_annulus_is_deterministic(estimator):
    spec = annulus()
    assert estimator.sample_annulus(spec, 50, seed=11) == estimator.sample_annulus(spec, 50, seed=11)
    assert estimator.sample_annulus(spec, 50, seed=11) != estimator.sample_annulus(spec, 50, seed=12)


def test_sample_annulus_prefix_stable(estimator):
    spec = annulus()
    assert estimator.sample_annulus(spec, 10, seed=5) == estimator.sample_annulus(spec, 40, seed=5)[:10]


def test_sample_annulus_sector(estimator):
    spec = annulus(center=0.5 + 0j, r=0.1, sectors=4)
    for param in estimator.sample_annulus(spec, 200, seed=1, sector=2):
        theta = cmath.phase(param.lam - 0.5) % TAU
        assert math.pi - 1e-12 <= theta <= 1.5 * math.pi + 1e-12


def test_degenerate_annulus_second_moment(estimator):
    spec = annulus(center=1.0 + 0j, gamma=1e-9, r=1.0)
    samples = estimator.sample_annulus(spec, 20_000, seed=0)
    moment = np.mean([abs(p.lam - 1.0) ** 2 for p in samples])
    sigma = 1.0 / math.sqrt(12 * len(samples))
    assert abs(moment - 0.5) <= 4 * sigma


def test_density_sweep_contracting_ball(estimator):
    cfg = DensitySweepConfig(radii=[0.05], samples=100, seed=0, budget=4000, p_max=64)
    report = estimator.density_sweep(0.25, cfg)
    stats = report.per_radius[0]
    assert stats.fraction == 1.0
    assert stats.hyperbolic == 100
    assert stats.undecided == 0
    assert stats.wilson_hi == 1.0
    assert len(report.samples) == 100
    assert all(row.verdict is Verdict.HYPERBOLIC and row.period_or_n == 1 for row in report.samples)


def test_density_sweep_is_deterministic(estimator):
    cfg = DensitySweepConfig(radii=[0.5, 0.1], samples=20, seed=7, budget=2000, p_max=32)
    assert estimator.density_sweep(-1.0, cfg) == estimator.density_sweep(-1.0, cfg)


def test_density_sweep_independent_of_workers(fast_config):
    cfg = DensitySweepConfig(radii=[0.3], samples=12, seed=2, budget=1000, p_max=16)
    serial = DensityEstimator(fast_config, n_jobs=1).density_sweep(-1.0, cfg)
    parallel = DensityEstimator(fast_config, n_jobs=2).density_sweep(-1.0, cfg)
    assert serial == parallel


def test_density_sweep_annulus(estimator):
    template = annulus(center=0.25 + 0j, r=1.0)
    cfg = DensitySweepConfig(radii=[0.05, 0.01], samples=30, seed=1, budget=2000, p_max=32, annulus=template)
    report = estimator.density_sweep(0.25, cfg)
    assert report.annulus
    for stats, r in zip(report.per_radius, cfg.radii):
        assert stats.radius == r
        assert stats.hyperbolic + stats.escape_suspect + stats.undecided == 30
    for row in report.samples:
        r = cfg.radii[row.radius_index]
        assert 0.5 * r * (1 - 1e-12) <= abs(row.lam - 0.25) <= r * (1 + 1e-12)


def test_sweep_config_validation():
    with pytest.raises(ValidationError):
        DensitySweepConfig(radii=[0.1], samples=0, seed=0, budget=10, p_max=4)
    with pytest.raises(ValidationError):
        DensitySweepConfig(radii=[0.1, 0.2], samples=10, seed=0, budget=10, p_max=4)


def test_annulus_image_stats(estimator, cert_2pi):
    stats = estimator.annulus_image_stats(cert_2pi, 1e-6, 0.1, 8)
    assert stats.n >= 1
    assert 1.0 <= stats.distortion < 10.0
    assert stats.image_diam >= 0.1
    assert stats.min_dxi_times_r > 0


def test_annulus_image_stats_smaller_radius_needs_more_steps(estimator, cert_2pi):
    n_big = estimator.annulus_image_stats(cert_2pi, 1e-6, 0.1, 8).n
    n_small = estimator.annulus_image_stats(cert_2pi, 5e-7, 0.1, 8).n
    assert n_small >= n_big


def test_annulus_image_stats_single_point(estimator, cert_2pi):
    stats = estimator.annulus_image_stats(cert_2pi, 1e-6, 0.1, 1)
    assert stats.distortion == 1.0


def test_annulus_image_stats_no_such_n(estimator, cert_2pi):
    with pytest.raises(NoSuchN):
        estimator.annulus_image_stats(cert_2pi, 1e-6, 0.1, 8, n_max=2)


def test_find_hyperbolic_via_proof(estimator, cert_2pi):
    report = estimator.find_hyperbolic_via_proof(cert_2pi, annulus(), 20.0, 200, seed=0, budget=500)
    assert report.sampled == 200
    assert report.certified == len(report.hits) > 0
    assert report.certified <= report.screened <= report.sampled
    certifier = CycleCertifier(estimator.config)
    for cert in report.hits:
        assert certifier.reverify(cert)
        assert cert.P <= -20.0
        assert certifier.classify(cert.lam).verdict is Verdict.HYPERBOLIC
        assert abs(cert.lam.lam - TWO_PI_I) <= 1e-3 * (1 + 1e-12)


def test_find_hyperbolic_unreachable_depth(estimator, cert_2pi):
    report = estimator.find_hyperbolic_via_proof(cert_2pi, annulus(), 1e6, 20, seed=0, budget=200)
    assert report.hits == []
    assert report.screened == 0
