"""Path representation, restriction, sampling, twin, and scale relations."""

import io
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import zeta

from diffpath.paths import (
    FourierPath,
    ModelParams,
    coeffs_to_csv,
    differentiable_twin,
    eval_path,
    eval_velocity,
    sample_brownian,
    scale_relations,
    sup_bounds,
    trajectory_to_csv,
)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(A=10.0, epsilon_D=0.1)  # both given
    with pytest.raises(ValueError):
        ModelParams(A=None, epsilon_D=None)
    with pytest.raises(ValueError):
        ModelParams(A=-1.0)
    with pytest.raises(ValueError):
        ModelParams(A=1.0, T=0.0)


def test_single_mode_path_values():
    p = FourierPath(T=1.0, coeffs=np.array([1.0]))
    assert eval_path(p, 0.0) == 0.0
    assert eval_path(p, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert eval_path(p, 0.5) == pytest.approx(1.0, abs=1e-15)
    assert eval_velocity(p, 0.0) == pytest.approx(math.pi, abs=1e-15)


def test_eval_domain_error():
    p = FourierPath(T=1.0, coeffs=np.array([1.0]))
    with pytest.raises(ValueError):
        eval_path(p, -0.1)
    with pytest.raises(ValueError):
        eval_velocity(p, 1.5)


def test_sup_bounds():
    b = sup_bounds(ModelParams(alpha=1.5, A=1.0))
    assert b["x_bound"] == pytest.approx(float(zeta(1.5)), rel=1e-12)
    assert b["v_bound"] == math.inf
    b = sup_bounds(ModelParams(alpha=3.0, A=1.0, T=1.0))
    assert b["v_bound"] == pytest.approx(math.pi**3 / 6.0, rel=1e-12)
    b = sup_bounds(ModelParams(alpha=1.0, A=1.0))
    assert b["x_bound"] == math.inf and b["v_bound"] == math.inf


def test_sample_brownian_bounds_and_determinism():
    params = ModelParams(alpha=2.1, A=10.0)
    p1 = sample_brownian(params, 500, seed=42)
    p2 = sample_brownian(params, 500, seed=42)
    np.testing.assert_array_equal(p1.coeffs, p2.coeffs)
    j = np.arange(1, 501)
    assert np.all(np.abs(p1.coeffs) * j / params.sigma <= 1.0)
    assert not np.array_equal(p1.coeffs, sample_brownian(params, 500, seed=43).coeffs)


def test_sample_brownian_mean_zero():
    params = ModelParams(alpha=2.1, A=10.0)
    a1 = np.array([sample_brownian(params, 1, seed=s).coeffs[0] for s in range(3000)])
    stderr = a1.std(ddof=1) / math.sqrt(a1.size)
    assert abs(a1.mean()) < 3.0 * stderr


def test_twin_clamps_and_is_idempotent():
    params = ModelParams(alpha=2.1, A=10.0)
    p = sample_brownian(params, 400, seed=7)
    out = differentiable_twin(p, params)
    twin = out["twin"]
    assert twin.restriction_satisfied(params.amplitude, params.alpha)
    again = differentiable_twin(twin, params)["twin"]
    np.testing.assert_array_equal(twin.coeffs, again.coeffs)
    # low modes copied verbatim
    jd = out["j_D"]
    np.testing.assert_array_equal(twin.coeffs[:jd], p.coeffs[:jd])


def test_twin_identity_when_amplitude_huge():
    params = ModelParams(alpha=2.1, A=1e12)
    p = sample_brownian(params, 100, seed=1)
    out = differentiable_twin(p, params)
    np.testing.assert_array_equal(out["twin"].coeffs, p.coeffs)


def test_twin_j_d_example():
    # A/sigma = 10, alpha = 2 -> j_D = 10
    params = ModelParams(alpha=2.0, A=10.0, m=1.0, hbar=1.0, T=1.0)
    assert differentiable_twin(sample_brownian(params, 20, 0), params)["j_D"] == 10


def test_twin_requires_alpha_above_one():
    params = ModelParams(alpha=0.9, A=10.0)
    p = sample_brownian(params, 10, seed=0)
    with pytest.raises(ValueError):
        differentiable_twin(p, params)


def test_twin_coarse_grid_proximity():
    # pointwise |x - x_twin| below sum_{j>j_D} 2 A / j^alpha on a coarse grid
    params = ModelParams(alpha=2.1, A=10.0)
    jd = params.j_d
    p = sample_brownian(params, 2 * jd, seed=11)
    twin = differentiable_twin(p, params)["twin"]
    eps_d = params.eps_d
    grid = np.arange(0.0, params.T + 1e-12, 2.0 * eps_d)
    diff = np.abs(eval_path(p, grid) - eval_path(twin, grid))
    j = np.arange(jd + 1, 2 * jd + 1)
    bound = float(np.sum(2.0 * params.amplitude / j**params.alpha))
    assert np.all(diff < bound)


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(deadline=None, max_examples=20)
def test_restriction_implies_sup_bound(seed):
    params = ModelParams(alpha=2.1, A=2.0)
    p = sample_brownian(params, 50, seed=seed)
    twin = differentiable_twin(p, params)["twin"]
    grid = np.linspace(0.0, params.T, 1000)
    assert np.max(np.abs(eval_path(twin, grid))) <= params.amplitude * float(zeta(2.1))


def test_scale_relations_fig2_value():
    rel = scale_relations(ModelParams(alpha=2.1, A=10.0, T=1.0, m=1.0, hbar=1.0))
    # 50-digit solve of (T/eps)^(alpha-1) = A/sigma
    mp.mp.dps = 50
    ref = float(mp.mpf(10) ** (-1 / mp.mpf("1.1")))
    assert rel.epsilon_D == pytest.approx(ref, rel=1e-12)


def test_scale_relations_inverse_direction():
    rel = scale_relations(ModelParams(alpha=2.1, epsilon_D=0.1, T=1.0, m=1.0, hbar=1.0))
    assert rel.A_of_T == pytest.approx(10.0 ** 1.1, rel=1e-12)
    assert rel.A_of_T == pytest.approx(12.589, rel=1e-3)


@given(st.floats(min_value=0.5, max_value=1e6))
@settings(deadline=None, max_examples=60)
def test_scale_relations_round_trip(a):
    params = ModelParams(alpha=2.1, A=a)
    eps_d = scale_relations(params).epsilon_D
    back = scale_relations(ModelParams(alpha=2.1, epsilon_D=eps_d)).A_of_T
    assert abs(back - a) / a <= 1e-12


def test_scale_relations_feynman_limit():
    a1 = scale_relations(ModelParams(alpha=2.1, epsilon_D=1e-3)).A_of_T
    a2 = scale_relations(ModelParams(alpha=2.1, epsilon_D=1e-6)).A_of_T
    assert a2 > a1 > 0


def test_scale_relations_alpha_domain():
    with pytest.raises(ValueError):
        scale_relations(ModelParams(alpha=1.0, A=10.0))


def test_csv_exports():
    p = FourierPath(T=1.0, coeffs=np.array([0.5, -0.25]))
    buf = io.StringIO()
    coeffs_to_csv(p, buf, {"seed": 1})
    text = buf.getvalue()
    assert text.startswith("# seed = 1\n")
    assert "n,a_n" in text and "1,0.5" in text

    buf = io.StringIO()
    trajectory_to_csv(p, [0.0, 0.5, 1.0], buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "t,x"
    assert len(lines) == 4
