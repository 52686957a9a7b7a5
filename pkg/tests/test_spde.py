import math

import numpy as np
import pytest

from schro_renorm.errors import DomainError, GridAlignmentError, ResolutionError
from schro_renorm.mollifier import INV_SQRT_2PI
from schro_renorm.spde import (InitialData, PotentialField, WaveField, default_initial_data, ensemble_mean_fourier,
                               self_convergence_orders, split_step_evolve, synthesize_potential)

L, N = 16.0, 256


@pytest.fixture(scope="module")
def wave0():
    return InitialData(L / 2, 2.0, 1.0).on_grid(L, N)


def test_free_evolution_is_exact(wave0):
    pot = PotentialField(L, 0.05, np.zeros((20, N)))
    out = split_step_evolve(wave0, pot, 1.0)
    want = wave0.fourier() * np.exp(-0.5j * wave0.wavenumbers ** 2)
    assert np.max(np.abs(out.fourier() - want)) < 1e-12


def test_constant_potential_is_a_phase(wave0):
    pot = PotentialField.from_function(lambda t, x: 0.7, L, N, 0.05, 1.0)
    out = split_step_evolve(wave0, pot, 1.0)
    want = wave0.fourier() * np.exp(-0.5j * wave0.wavenumbers ** 2 - 0.7j)
    assert np.max(np.abs(out.fourier() - want)) < 1e-12


def test_mass_conserved(eta, wave0):
    pot = synthesize_potential(wave0, eta, 1.0, 1 / 16, seed=3, t_end=1.0)
    out = split_step_evolve(wave0, pot, 1.0)
    assert abs(out.mass() - wave0.mass()) < 1e-12 * wave0.mass()


def test_strang_second_order():
    _, orders = self_convergence_orders()
    assert min(orders) >= 1.9


def test_evolution_errors(wave0):
    pot = PotentialField(L, 0.05, np.zeros((4, N)))
    with pytest.raises(DomainError):
        split_step_evolve(wave0, pot, 1.0)
    with pytest.raises(GridAlignmentError):
        split_step_evolve(wave0, pot, 0.07)


def test_resolution_guard(eta, wave0):
    with pytest.raises(ResolutionError):
        synthesize_potential(wave0, eta, 1.0, 0.5, seed=1, t_end=1.0)
    with pytest.raises(ResolutionError):
        synthesize_potential(WaveField(L, np.zeros(64)), eta, 1.0, 1 / 16, seed=1, t_end=1.0)


@pytest.fixture(scope="module")
def potentials(eta, wave0):
    return np.stack([synthesize_potential(wave0, eta, 1.0, 1 / 16, seed=9, t_end=6.0, stream_id=i).values
                     for i in range(200)])


def test_potential_variance(R, potentials):
    # points 4 apart in space and 2.5 apart in time are beyond the correlation range
    v = potentials[:, ::40, ::64].ravel()
    want = R(0.0) * INV_SQRT_2PI
    se = math.sqrt(2.0 / v.size) * want
    assert abs(v.var() - want) < 4 * se
    assert abs(v.mean()) < 4 * math.sqrt(want / v.size)


def test_potential_temporal_correlation(R, potentials):
    x = potentials[:, 0:40:40, ::64].ravel()
    near = potentials[:, 8:48:40, ::64].ravel()       # lag 0.5
    far = potentials[:, 40:80:40, ::64].ravel()       # lag 2.5, beyond support
    n = x.size
    assert abs(np.corrcoef(x, near)[0, 1] - R(0.5) / R(0.0)) < 4 / math.sqrt(n)
    assert abs(np.corrcoef(x, far)[0, 1]) < 4 / math.sqrt(n)


def test_potential_reproducible(eta, wave0):
    a = synthesize_potential(wave0, eta, 1.0, 1 / 16, seed=2, t_end=1.0, stream_id=5)
    b = synthesize_potential(wave0, eta, 1.0, 1 / 16, seed=2, t_end=1.0, stream_id=5)
    assert np.array_equal(a.values, b.values)


def test_ensemble_at_time_zero_is_exact():
    ests = ensemble_mean_fourier([0.0, 2 * np.pi / 16], 0.0, 1.0, 10, seed=1, n_points=2048)
    phi0 = default_initial_data(16.0)
    for e, xi in zip(ests, [0.0, 2 * np.pi / 16]):
        assert e.stderr == 0
        assert abs(e.value - phi0.fourier(xi)) < 1e-8


def test_initial_transform_on_grid():
    phi0 = default_initial_data(16.0)
    wave = phi0.on_grid(16.0, 2048)
    xi = 2 * np.pi / 16
    got = wave.fourier()[wave.probe_indices([xi])[0]]
    assert abs(got - phi0.fourier(xi)) < 1e-8
    assert abs(wave.mass() - 1.0) < 1e-8


def test_probe_alignment(wave0):
    with pytest.raises(GridAlignmentError):
        wave0.probe_indices([0.1])
    with pytest.raises(GridAlignmentError):
        wave0.probe_indices([2 * np.pi / L * N])


def test_stderr_scaling():
    _, s = ensemble_mean_fourier([0.0], 0.5, 1.0, 400, seed=4, n_points=512, return_samples=True)
    se_small = np.std(s[:100, 0].real, ddof=1) / 10
    se_big = np.std(s[:, 0].real, ddof=1) / 20
    assert 1.6 < se_small / se_big < 2.5


def test_domain_size_insensitive():
    a = ensemble_mean_fourier([0.0], 0.5, 1.0, 200, seed=6, domain_length=16.0, n_points=512)[0]
    b = ensemble_mean_fourier([0.0], 0.5, 1.0, 200, seed=6, domain_length=32.0, n_points=1024)[0]
    ra = a.value / default_initial_data(16.0).fourier(0.0)
    rb = b.value / default_initial_data(32.0).fourier(0.0)
    assert abs(ra - rb) < 4 * math.hypot(a.stderr, b.stderr) / abs(default_initial_data(16.0).fourier(0.0))


def test_initial_data_must_fit():
    with pytest.raises(DomainError):
        InitialData(0.1, 1.0).on_grid(16.0, 256)
