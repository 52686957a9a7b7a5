import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from schro_renorm import brownian, fk, kernels
from schro_renorm.brownian import BrownianPath, sample_path
from schro_renorm.constants import mean_X_exact
from schro_renorm.errors import GridAlignmentError, InvalidParameterError
from schro_renorm.fk import (CovMatrixA, MCEstimate, X_bound, compute_X_eps, compute_X_naive, estimate_A,
                             fk_wave_estimator, fluctuation_Y, gaussian_phase_mean, grid_for, lag_table,
                             mean_X_discrete, sample_functionals, sample_Y)
from schro_renorm.mollifier import INV_SQRT_2PI
from schro_renorm.parallel import map_shards
from schro_renorm.quadrature import integrate


def test_time_zero_is_trivial(R):
    assert fk_wave_estimator(1.3, 0.0, 0.5, 10, seed=1).value == 1.0
    assert mean_X_discrete(0.0, 0.5, R) == 0
    p = sample_path(0.0, 1.0, 0.01, 1)
    assert compute_X_eps(p, R, 0.5, 0.0) == 0


def test_flat_path_against_quadrature(R):
    T = 4.0
    p = BrownianPath(0.01, 0.0, T, np.zeros(401))
    want = INV_SQRT_2PI * integrate(lambda u: (T - u) * R(u), 0.0, 2.0, epsabs=1e-13)
    assert abs(compute_X_eps(p, R, 1.0, T) - want) < 1e-8


@pytest.mark.parametrize("eps", [1.0, 0.5])
def test_modulus_bound(R, eps):
    b = sample_functionals(1.0, eps, 2000, seed=3, R=R)
    assert np.all(np.abs(b.X) <= X_bound(R, eps, 1.0) * (1 + 1e-12))


@given(st.integers(0, 10_000), st.sampled_from([4, 50, 250, 401]), st.booleans())
def test_band_sum_matches_double_sum(R, sid, n, richardson):
    n += n % 2
    h = 0.01
    B = brownian.path_rows(9, [sid], n, h)[0]
    Rk = R.at_lags(h, n + 1)
    fast = kernels.functional(B, h, lag_table(R, h, n), richardson)
    slow = kernels.functional_naive(B, h, Rk, richardson)
    assert abs(fast - slow) <= 1e-12 * max(1.0, abs(slow))


def test_path_api_matches_naive(R):
    p = sample_path(0.0, 4.0, 0.01, 21, 3)
    assert abs(compute_X_eps(p, R, 1.0, 4.0) - compute_X_naive(p, R, 1.0, 4.0)) < 1e-12


def test_richardson_needs_even_steps(R):
    p = sample_path(0.0, 1.0, 0.01, 1)
    with pytest.raises(GridAlignmentError):
        compute_X_eps(p, R, 1.0, 0.99)


def test_functionals_deterministic(R):
    fk.clear_cache()
    a = sample_functionals(1.0, 0.5, 300, seed=4, R=R)
    fk.clear_cache()
    b = sample_functionals(1.0, 0.5, 300, seed=4, R=R)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.eps_B, b.eps_B)
    # a prefix request reuses the same streams
    assert np.array_equal(sample_functionals(1.0, 0.5, 100, seed=4, R=R).X, a.X[:100])


def test_worker_count_does_not_change_results(R):
    ids = np.arange(64)
    N, h = grid_for(1.0, 1.0)
    Rk = lag_table(R, h, N)
    serial = map_shards(fk._functional_shard, ids, 8, 3, N, h, Rk, 1.0, True, workers=1)
    pooled = map_shards(fk._functional_shard, ids, 8, 3, N, h, Rk, 1.0, True, workers=4)
    for a, b in zip(serial, pooled):
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_grid_for():
    assert grid_for(1.0, 0.5, 0.01) == (400, 0.01)
    N, h = grid_for(1.0, 0.35, 0.01)
    assert N % 2 == 0 and h <= 0.01 and abs(N * h - 1 / 0.35 ** 2) < 1e-12
    with pytest.raises(InvalidParameterError):
        grid_for(1.0, 0.0)


def test_gaussian_phase_mean_mc():
    rng = np.random.default_rng(0)
    n = 400_000
    for u in (0.5, 2.0):
        B = rng.normal(0.0, math.sqrt(u), n)
        est = MCEstimate.from_samples(np.exp(-0.5j * B * B))
        assert est.z_score(gaussian_phase_mean(u)) < 4


def test_discrete_mean_close_to_exact(R):
    for t, eps in [(1.0, 0.5), (1.0, 0.25), (0.1, 1.0)]:
        assert abs(mean_X_discrete(t, eps, R) - mean_X_exact(t, eps, R)) < 1e-8


def test_sample_mean_matches_discrete_mean(R):
    est = fk.estimate_mean_X(1.0, 0.5, 20_000, seed=2, R=R)
    assert est.z_score(mean_X_discrete(1.0, 0.5, R)) < 4


def test_mcestimate():
    e = MCEstimate.from_samples(np.array([1.0, 3.0]))
    assert e.value == 2 and e.n_samples == 2
    assert MCEstimate.exact(1.0).z_score(1.0) == 0.0
    assert MCEstimate.exact(1.0).z_score(2.0) == math.inf
    with pytest.raises(InvalidParameterError):
        MCEstimate.from_samples([])


# --- Y and A ---------------------------------------------------------------

def test_Y_flat_path_is_zero(R):
    p = BrownianPath(0.01, -2.0, 0.0, np.zeros(201))
    assert fluctuation_Y(p, R) == 0


def test_Y_mean_zero_and_bound(R):
    Y, bounds = sample_Y(20_000, seed=5, R=R)
    est = MCEstimate.from_samples(Y)
    assert est.z_score(0.0) < 4
    assert np.all(np.abs(Y) <= bounds * (1 + 1e-12))


def test_Y_path_api_matches_batch(R):
    p = sample_path(-2.0, 0.0, 0.01, 5, 7)
    Y, _ = sample_Y(8, seed=5, R=R)
    assert abs(fluctuation_Y(p, R) - Y[7]) < 1e-12


def test_Y_stationary(R):
    n = 20_000
    Y0 = CovMatrixA.from_samples(sample_Y(n, seed=6, R=R)[0])
    Y5 = CovMatrixA.from_samples(sample_Y(n, seed=6, R=R, base_point=5.0, stream_offset=n)[0])
    for a, b, s1, s2 in [(Y0.a11, Y5.a11, Y0.stderr[0, 0], Y5.stderr[0, 0]),
                         (Y0.a22, Y5.a22, Y0.stderr[1, 1], Y5.stderr[1, 1]),
                         (Y0.a12, Y5.a12, Y0.stderr[0, 1], Y5.stderr[0, 1])]:
        assert abs(a - b) < 4 * math.hypot(s1, s2)


def test_A_properties(R):
    A = estimate_A(20_000, seed=8, R=R)
    M = A.as_array()
    assert np.array_equal(M, M.T)
    assert np.trace(M) > 0
    assert A.eigenvalues().min() > -3 * A.stderr.max()


def test_A_stderr_scaling(R):
    a = estimate_A(5000, seed=10, R=R)
    b = estimate_A(20_000, seed=10, R=R)
    ratio = a.stderr[0, 0] / b.stderr[0, 0]
    assert 1.7 < ratio < 2.3


def test_A_requires_samples(R):
    with pytest.raises(InvalidParameterError):
        estimate_A(50, seed=1, R=R)


def test_exp_moment_stderr_includes_pilot(R):
    # with a small pilot the centring noise dominates the seed-to-seed spread
    ests = [fk.exp_moment_estimate(2.0, 1.0, 1.0, 2000, seed=s, R=R, pilot_paths=100) for s in range(40)]
    spread = np.std([e.value.real for e in ests], ddof=1)
    reported = np.mean([e.stderr_re for e in ests])
    assert 0.6 < spread / reported < 1.5
    assert fk.exp_moment_estimate(0.0, 1.0, 1.0, 10, seed=1, R=R).value == 1.0
