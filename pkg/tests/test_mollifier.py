import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from schro_renorm.errors import InvalidParameterError, ResolutionError
from schro_renorm.mollifier import (INV_SQRT_2PI, TemporalCovariance, build_R_eta, eval_q, eval_q_complex,
                                    eval_q_rotated, eval_R, eval_R_tilde, make_bump_eta)
from schro_renorm.quadrature import gauss_legendre, integrate


def test_bump_vanishes_outside_support(eta):
    assert eta(1.5) == 0.0
    assert eta(-1.0) == 0.0 and eta(1.0) == 0.0
    assert np.all(eta(np.linspace(-0.999, 0.999, 101)) > 0)


def test_bump_normalised(eta):
    assert abs(eta.integral() - 1.0) < 1e-10


def test_normaliser_against_fixed_rule(eta):
    # composite Gauss-Legendre on the raw bump, independent of the adaptive route
    mass = gauss_legendre(lambda t: np.exp(-1.0 / (1.0 - t * t)), -1.0, 1.0, panels=200, order=30)
    assert abs(eta.normalization - 1.0 / mass) / eta.normalization < 1e-12
    assert eta(0.0) == pytest.approx(eta.normalization * math.exp(-1.0), rel=1e-15)


@given(st.floats(max_value=0.0, allow_nan=False))
def test_nonpositive_half_width_rejected(a):
    with pytest.raises(InvalidParameterError):
        make_bump_eta(a)


def test_R_support_and_zero_beyond(R):
    assert R(2.5) == 0.0
    assert R(2.0) == 0.0 and R(-2.0) == 0.0
    assert np.all(R(np.array([2.0, 2.0 + 1e-12, 3.0, -7.0])) == 0.0)


def test_R_at_zero_matches_square_integral(eta, R):
    direct = integrate(lambda s: eta(s) ** 2, -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    assert abs(R(0.0) - direct) < 1e-9
    assert R(0.0) > 0


@pytest.mark.parametrize("t", [0.1, 0.7, 1.3])
def test_R_even(R, t):
    assert R(t) == R(-t)


def test_R_positive_definite_witness(R):
    # zero-padded DFT of the even extension approximates |eta_hat|^2 / step
    v = R.values
    even = np.concatenate((v, np.zeros(4 * v.size), v[:0:-1]))
    spec = np.fft.fft(even).real * R.grid_step
    assert spec.min() > -1e-8


def test_R_interpolation_between_nodes(eta, R):
    for t in (0.0123, 0.5077, 1.731):
        exact = integrate(lambda s: eta(s + t) * eta(s), -1.0, 1.0 - t, epsabs=1e-14)
        assert abs(R(t) - exact) < 1e-9


def test_resolution_guard(eta):
    with pytest.raises(ResolutionError):
        build_R_eta(eta, grid_step=0.1)


def test_zero_covariance_hook():
    Z = TemporalCovariance.zero()
    assert Z.is_zero and Z(0.3) == 0.0


def test_q_rotated_values():
    assert eval_q_rotated(0.0) == complex(INV_SQRT_2PI, 0.0)
    v = eval_q_rotated(math.sqrt(2 * math.pi))
    assert abs(v - (-INV_SQRT_2PI)) < 1e-15
    assert abs(abs(eval_q_rotated(3.7)) - INV_SQRT_2PI) < 1e-16


@given(st.floats(-50, 50, allow_nan=False))
def test_q_rotated_is_pure_phase(x):
    assert abs(abs(eval_q_rotated(x)) - INV_SQRT_2PI) < 1e-15
    assert abs(eval_q_rotated(x) - eval_q_complex(complex(x) * complex(math.cos(math.pi / 4), math.sin(math.pi / 4)))) < 1e-12


def test_q_normalised_and_even():
    assert integrate(lambda x: float(eval_q(x)), -40, 40) == pytest.approx(1.0, abs=1e-10)
    assert eval_q(1.3) == eval_q(-1.3)
    assert eval_q(0.0) == INV_SQRT_2PI


def test_R_tilde_values(eta):
    assert eval_R_tilde(0.0, 0.0, eta) == pytest.approx(1.0, abs=1e-12)
    assert abs(eval_R_tilde(0.0, 1.0, eta) / eval_R_tilde(0.0, 0.0, eta) - math.exp(-0.5)) < 1e-10
    grid = eval_R_tilde(np.linspace(0, 30, 31)[:, None], np.linspace(-4, 4, 9)[None, :], eta)
    assert np.all(grid >= 0)


def test_fourier_rules_agree(eta):
    for w in (0.0, 0.7, 3.0, 12.5, 40.0):
        assert abs(eta.fourier(w) - eta.fourier_quad(w)) < 1e-12


def test_transform_consistency(eta, R):
    # R is separable, so the 2D transform is a product of 1D quadratures
    rng = np.random.default_rng(5)
    for omega, xi in zip(rng.uniform(0, 4, 10), rng.uniform(-3, 3, 10)):
        ft = 2 * integrate(lambda t: R(t) * math.cos(omega * t), 0.0, 2.0, epsabs=1e-13)
        fx = 2 * integrate(lambda x: float(eval_q(x)) * math.cos(xi * x), 0.0, 40.0, epsabs=1e-13)
        want = eval_R_tilde(omega, xi, eta)
        assert abs(ft * fx - want) <= 1e-6 * abs(want)


def test_eval_R_complex_argument(R):
    z = complex(0.3, 0.8)
    assert eval_R(0.4, z, R) == pytest.approx(R(0.4) * INV_SQRT_2PI * np.exp(-z * z / 2))


def test_signed_mollifier_hook():
    e = make_bump_eta(1.0, signed_mix=3.0)
    assert abs(e.integral() - 1.0) < 1e-10
    assert e(0.9) < 0 < e(0.0)
    Rs = build_R_eta(e, 1 / 32)
    v = Rs.values
    spec = np.fft.fft(np.concatenate((v, np.zeros(4 * v.size), v[:0:-1]))).real * Rs.grid_step
    assert spec.min() > -1e-8


def test_kernels_are_pure(eta, R):
    a = R(np.linspace(0, 2, 17))
    b = R(np.linspace(0, 2, 17))
    assert np.array_equal(a, b)
    assert eval_R_tilde(1.1, 0.4, eta) == eval_R_tilde(1.1, 0.4, eta)
