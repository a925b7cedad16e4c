"""Monte-Carlo oracle: sampler exactness, reproducibility, series agreement."""

import io
import math

import numpy as np
import pytest

from diffpath.mc import (
    McEstimate,
    estimate_pi_factor,
    estimate_v2,
    estimates_to_csv,
    mode_second_moment_reference,
    sample_truncated_gaussian,
)
from diffpath.oscillator import log_pi
from diffpath.paths import ModelParams
from diffpath.special import truncated_gaussian_ratio
from diffpath.velocity import v2_diff, v2_feynman

FIG2 = ModelParams(m=1.0, hbar=1.0, T=1.0, alpha=2.1, A=10.0)


def _rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


def test_sampler_support_and_symmetry():
    for b, big_b in [(2.0, 0.5), (0.1, 3.0), (50.0, 0.05)]:
        x = sample_truncated_gaussian(b, big_b, _rng(1), size=200_000)
        assert np.all(np.abs(x) <= big_b)
        stderr = x.std(ddof=1) / math.sqrt(x.size)
        assert abs(x.mean()) < 3.0 * stderr


def test_sampler_second_moment_both_branches():
    # (b, B) pairs chosen to hit the Gaussian-rejection and the
    # uniform-rejection branches respectively
    for b, big_b in [(1.0, 1.0), (1.0, 0.01)]:
        x = sample_truncated_gaussian(b, big_b, _rng(2), size=400_000)
        m2 = x**2
        ref = truncated_gaussian_ratio(b, big_b)
        stderr = m2.std(ddof=1) / math.sqrt(m2.size)
        assert abs(m2.mean() - ref) < 3.0 * stderr


def test_sampler_scalar_mode_and_domain():
    v = sample_truncated_gaussian(1.0, 1.0, _rng(3))
    assert isinstance(v, float) and abs(v) <= 1.0
    with pytest.raises(ValueError):
        sample_truncated_gaussian(0.0, 1.0, _rng(0))


def test_estimate_v2_reproducible_bitwise():
    a = estimate_v2(FIG2, 0.05, 0.0, 50, 2000, seed=99)
    b = estimate_v2(FIG2, 0.05, 0.0, 50, 2000, seed=99)
    assert a == b
    c = estimate_v2(FIG2, 0.05, 0.0, 50, 2000, seed=100)
    assert c.mean != a.mean


@pytest.mark.filterwarnings("ignore::diffpath.mc.ModeTruncationWarning")
def test_estimate_v2_matches_exact_three_mode_sum():
    # for fixed N_modes the estimator is unbiased for the truncated sum
    eps, t0 = 0.3, 0.1
    exact = 0.0
    for j in (1, 2, 3):
        ds = math.sin(j * math.pi * (t0 + eps)) - math.sin(j * math.pi * t0)
        exact += mode_second_moment_reference(FIG2, j) * ds**2 / eps**2
    est = estimate_v2(FIG2, eps, t0, 3, 200_000, seed=5)
    assert abs(est.mean - exact) < 3.0 * est.stderr


def test_estimate_v2_matches_analytic_series():
    est = estimate_v2(FIG2, 0.05, 0.0, 1000, 30_000, seed=11)
    ref = v2_diff(0.05, FIG2, 1e-9)
    assert abs(est.mean - ref) < 3.0 * est.stderr
    assert est.truncation_bias_bound < est.stderr


@pytest.mark.filterwarnings("ignore::diffpath.mc.ModeTruncationWarning")
def test_estimate_v2_feynman_limit():
    # with A huge every mode is free, so the omitted-mode bound is the
    # slowly-decaying free tail and the truncation warning is expected
    params = ModelParams(alpha=2.1, A=1e12)
    est = estimate_v2(params, 0.05, 0.0, 1000, 30_000, seed=21)
    ref = v2_feynman(0.05, params)
    # truncated to 1000 modes the estimator sits slightly below the full
    # series; allow the reported bias bound on top of the statistics
    assert abs(est.mean - ref) < 3.0 * est.stderr + est.truncation_bias_bound


def test_cross_mode_products_vanish():
    streams_params = [(1, 2), (2, 5)]
    for j, k in streams_params:
        rng_j, rng_k = _rng(7), _rng(8)
        bj = FIG2.m * FIG2.T * (j * math.pi / FIG2.T) ** 2 / (4 * FIG2.hbar)
        bk = FIG2.m * FIG2.T * (k * math.pi / FIG2.T) ** 2 / (4 * FIG2.hbar)
        aj = sample_truncated_gaussian(bj, FIG2.amplitude / j**FIG2.alpha, rng_j, 100_000)
        ak = sample_truncated_gaussian(bk, FIG2.amplitude / k**FIG2.alpha, rng_k, 100_000)
        prod = aj * ak
        stderr = prod.std(ddof=1) / math.sqrt(prod.size)
        assert abs(prod.mean()) < 3.0 * stderr


def test_stderr_scaling():
    small = estimate_v2(FIG2, 0.05, 0.0, 100, 20_000, seed=31)
    large = estimate_v2(FIG2, 0.05, 0.0, 100, 40_000, seed=31)
    ratio = large.stderr / small.stderr
    assert 0.6 <= ratio <= 0.85  # ~1/sqrt(2)


def test_bias_warning_when_modes_insufficient():
    with pytest.warns(UserWarning):
        estimate_v2(FIG2, 0.001, 0.0, 5, 1000, seed=1)


def test_estimate_pi_factor_against_log_pi():
    params = ModelParams(alpha=2.1, epsilon_D=0.1, omega=1.0)
    est = estimate_pi_factor(params, 1.0, 500, 30_000, seed=13)
    ref = math.exp(log_pi(1.0, params, n_terms=500).log_pi)
    assert abs(est.mean - ref) < 3.0 * est.stderr
    with pytest.raises(ValueError):
        estimate_pi_factor(ModelParams(alpha=2.1, A=10.0), 1.0, 10, 100, 0)


def test_csv_export():
    est = McEstimate(1.5, 0.1, 100, 7, "v2")
    buf = io.StringIO()
    estimates_to_csv([est], buf, {"eps": 0.05})
    text = buf.getvalue()
    assert "# rng = " in text and "# eps = 0.05" in text
    assert "quantity,mean,stderr,n_samples,seed" in text
    assert "v2,1.5,0.1,100,7" in text


def test_domain_errors():
    with pytest.raises(ValueError):
        estimate_v2(FIG2, 0.0, 0.0, 10, 100, 0)
    with pytest.raises(ValueError):
        estimate_v2(FIG2, 0.05, 0.0, 0, 100, 0)
