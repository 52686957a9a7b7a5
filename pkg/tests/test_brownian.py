import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from schro_renorm import brownian
from schro_renorm.brownian import increment, path_rows, sample_path
from schro_renorm.errors import CapacityError, DomainError, GridAlignmentError, InvalidParameterError


def test_degenerate_interval():
    p = sample_path(0.0, 0.0, 0.01, seed=1)
    assert p.values.tolist() == [0.0]


@given(st.integers(0, 2 ** 63), st.integers(0, 2 ** 40))
def test_reproducible_and_pinned_at_origin(seed, sid):
    a = sample_path(-0.5, 1.0, 0.05, seed, sid)
    b = sample_path(-0.5, 1.0, 0.05, seed, sid)
    assert np.array_equal(a.values, b.values)
    assert a.values[a.origin_index] == 0.0
    assert a(0.0) == 0.0


def test_streams_differ():
    a = sample_path(0.0, 1.0, 0.01, 3, 0)
    b = sample_path(0.0, 1.0, 0.01, 3, 1)
    assert not np.array_equal(a.values, b.values)


def test_B1_moments():
    n = 1_000_000
    B1 = path_rows(7, np.arange(n), 100, 0.01)[:, -1]
    assert abs(B1.mean()) < 3e-3
    assert abs(B1.var() - 1.0) < 0.005


@given(st.floats(-1.0, 2.0), st.floats(-1.0, 2.0))
def test_increment_antisymmetric(s, u):
    p = sample_path(-1.0, 2.0, 0.01, 11)
    assert increment(p, s, s, tol=0.005) == 0.0
    assert increment(p, s, u, tol=0.005) == -increment(p, u, s, tol=0.005)


def test_increment_variance():
    n = 100_000
    rows = path_rows(13, np.arange(n), 100, 0.01)
    d = rows[:, 80] - rows[:, 30]
    se = math.sqrt(2.0) * 0.5 / math.sqrt(n)
    assert abs(d.var() - 0.5) < 3 * se


def test_increment_matches_path_api():
    p = sample_path(-0.3, 0.5, 0.01, 2, 5)
    assert increment(p, 0.5, -0.3) == p.values[-1] - p.values[0]


def test_grid_alignment_and_domain_errors():
    p = sample_path(0.0, 1.0, 0.1, 1)
    with pytest.raises(GridAlignmentError):
        p.index(0.25, tol=0.01)
    with pytest.raises(DomainError):
        p.index(1.5)


def test_invalid_and_capacity():
    with pytest.raises(InvalidParameterError):
        sample_path(0.1, 1.0, 0.01, 1)
    with pytest.raises(InvalidParameterError):
        sample_path(0.0, 1.0, 0.0, 1)
    with pytest.raises(CapacityError):
        sample_path(0.0, 10.0, 1e-3, 1, max_points=1000)


def test_independent_streams_uncorrelated():
    n = 100_000
    a = path_rows(17, np.arange(n), 100, 0.01)[:, -1]
    b = path_rows(17, np.arange(n, 2 * n), 100, 0.01)[:, -1]
    assert abs(np.corrcoef(a, b)[0, 1]) < 3 / math.sqrt(n)


def test_branches_independent():
    n = 50_000
    pos = path_rows(19, np.arange(n), 50, 0.02)[:, -1]
    neg = path_rows(19, np.arange(n), 50, 0.02, branch=1)[:, -1]
    assert abs(np.corrcoef(pos, neg)[0, 1]) < 3 / math.sqrt(n)


def test_two_sided_path_layout():
    p = sample_path(-0.2, 0.3, 0.1, 4, 9)
    neg = np.cumsum(brownian.increments(4, 9, 2, 0.1, 1))
    assert np.allclose(p.values[:2], neg[::-1])
    assert np.allclose(p.backward_increments(0.0, 0.2), -np.concatenate(([0.0], neg)))


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.25])
def test_diffusive_scaling(eps):
    n, t = 20_000, 1.0
    steps = int(round(t / eps ** 2 / 0.01))
    B = eps * path_rows(23, np.arange(n), steps, 0.01)[:, -1]
    se = math.sqrt(2.0) * t / math.sqrt(n)
    assert abs(B.var() - t) < 3 * se
