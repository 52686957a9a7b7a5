"""Truncated Dyson/Wick series for E_B[exp(i sqrt(i) xi B_t - X_t)] at eps = 1.

The n-pair term is

    F_n = (-1)^n (2 pi)^-n  sum over pairings  int_{t > s_1 > ... > s_2n > 0}
          prod_{(k,l)} R_eta(s_k - s_l)  int dp  prod exp(-p_k^2/2)  exp(-i/2 sum_j l_j |xi - P_j|^2)

where l_j = s_j - s_{j+1} (s_0 = t, s_{2n+1} = 0) and P_j is the running
momentum after the j-th vertex. The momentum integral is Gaussian and is
done in closed form; the ordered time simplex uses collapsed Gauss-Legendre
coordinates s_1 = t x_1, s_{j+1} = s_j x_{j+1}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError, RangeError
from .mollifier import INV_SQRT_2PI, TemporalCovariance, default_covariance
from .quadrature import integrate, legendre_nodes

DEFAULT_TOL = 1e-6
DEFAULT_ORDER = 14


def pairings(m: int) -> list[tuple[tuple[int, int], ...]]:
    """All perfect matchings of {0, ..., m-1} as sorted pairs."""
    return _pairings_of(list(range(m)))


def _pairings_of(items):
    if not items:
        return [()]
    first, rest = items[0], items[1:]
    out = []
    for j in rest:
        remaining = [r for r in rest if r != j]
        for sub in _pairings_of(remaining):
            out.append(((first, j),) + sub)
    return out


def momentum_pattern(pairing, m: int) -> np.ndarray:
    """Rows a_j with P_j = a_j . v for j = 0..m (segment j follows vertex j)."""
    n = len(pairing)
    p = np.zeros((m, n))
    for k, (i, j) in enumerate(pairing):
        p[i, k] = 1.0
        p[j, k] = -1.0
    a = np.zeros((m + 1, n))
    a[1:] = np.cumsum(p, axis=0)
    return a


@lru_cache(maxsize=8)
def _simplex_rule(dim: int, order: int):
    """Nodes x in [0,1]^dim and weights for the ordered simplex 1 > s_1 > ... > s_dim > 0."""
    x, w = legendre_nodes(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    s = np.empty((x.size ** dim, dim))
    weight = np.ones(x.size ** dim)
    cur = np.ones(x.size ** dim)
    for d in range(dim):
        xd = grids[d].ravel()
        weight *= wgrids[d].ravel() * cur
        cur = cur * xd
        s[:, d] = cur
    return s, weight


def _momentum_integral(lengths: np.ndarray, a: np.ndarray, xi: float) -> np.ndarray:
    """int_{R^n} exp(-|v|^2/2 - (i/2) sum_j l_j |xi - a_j.v|^2) dv for each node.

    M = I + i S with S = sum_j l_j a_j a_j^T real PSD, so det and inverse
    follow from the eigen-decomposition of S with principal square roots.
    """
    n = a.shape[1]
    S = np.einsum("qj,jk,jl->qkl", lengths, a, a)
    c = lengths @ a
    lam, U = np.linalg.eigh(S)
    den = 1.0 + 1j * lam
    proj = np.einsum("qkl,qk->ql", U, c)
    quad = np.sum(proj * proj / den, axis=1)
    tot = lengths.sum(axis=1)
    phase = -0.5j * xi * xi * tot - 0.5 * xi * xi * quad
    return (2 * math.pi) ** (n / 2) * np.prod(den ** -0.5, axis=1) * np.exp(phase)


def dyson_term(n: int, xi: float, t: float, R: TemporalCovariance | None = None,
               order: int = DEFAULT_ORDER) -> complex:
    """The n-pair term F_n by simplex quadrature."""
    if n == 0:
        return complex(np.exp(-0.5j * xi * xi * t))
    if t == 0:
        return 0j
    R = default_covariance() if R is None else R
    m = 2 * n
    x, w = _simplex_rule(m, order)
    s = t * x
    w = w * t ** m
    edges = np.hstack((np.full((s.shape[0], 1), t), s, np.zeros((s.shape[0], 1))))
    lengths = edges[:, :-1] - edges[:, 1:]
    total = 0j
    for pr in pairings(m):
        weight = np.ones(s.shape[0])
        for i, j in pr:
            weight = weight * R(s[:, i] - s[:, j])
        total += np.sum(w * weight * _momentum_integral(lengths, momentum_pattern(pr, m), xi))
    return complex((-1) ** n * (2 * math.pi) ** -n * total)


def one_pair_closed_form(xi: float, t: float, R: TemporalCovariance | None = None) -> complex:
    """F_1 reduced to one adaptive integral over the lag tau.

    F_1 = -(2 pi)^(-1/2) int_0^t (t - tau) R_eta(tau) (1 + i tau)^(-1/2)
          exp(-i xi^2 (t - tau)/2 - i tau xi^2 / (2 (1 + i tau))) dtau
    """
    R = default_covariance() if R is None else R
    top = min(t, R.support_radius)

    def f(tau):
        g = 1.0 + 1j * tau
        return (t - tau) * R(tau) * g ** -0.5 * np.exp(-0.5j * xi * xi * (t - tau) - 0.5j * tau * xi * xi / g)

    return -INV_SQRT_2PI * integrate(f, 0.0, top, epsabs=1e-13, complex_valued=True)


def truncation_bound(xi: float, t: float, max_pairs: int, R: TemporalCovariance | None = None) -> float:
    """Bound on the series tail beyond ``max_pairs`` pairs.

    |exp(i sqrt(i) xi B_t)| = exp(-xi B_t / sqrt 2) has mean exp(xi^2 t / 4) and
    |X_t| <= Q/2 with Q = (2 pi)^(-1/2) int int_{[0,t]^2} |R_eta(s - u)|, so the
    tail is at most exp(xi^2 t/4) (exp(Q/2) - sum_{n <= max_pairs} (Q/2)^n / n!).
    """
    R = default_covariance() if R is None else R
    top = min(t, R.support_radius)
    Q = 2 * INV_SQRT_2PI * integrate(lambda u: (t - u) * abs(R(u)), 0.0, top, epsabs=1e-14)
    h = 0.5 * Q
    # direct tail sum avoids cancellation in exp(h) - partial sum
    tail, k, term = 0.0, max_pairs + 1, h ** (max_pairs + 1) / math.factorial(max_pairs + 1)
    while term > 1e-18 * tail and k < max_pairs + 60:
        tail += term
        k += 1
        term *= h / k
    return math.exp(0.25 * xi * xi * t) * tail


@dataclass(frozen=True)
class DysonResult:
    value: complex
    truncation_bound: float
    terms: tuple


def dyson_truncated_mean(xi: float, t: float, max_pairs: int = 2, R: TemporalCovariance | None = None,
                         tol: float = DEFAULT_TOL, order: int = DEFAULT_ORDER) -> DysonResult:
    """Sum of the first ``max_pairs`` + 1 pairing terms with its tail bound.

    Raises RangeError when the tail bound exceeds ``tol``.
    """
    if not 0 <= max_pairs <= 2:
        raise InvalidParameterError("max_pairs must be 0, 1 or 2")
    if t < 0:
        raise InvalidParameterError("t must be nonnegative")
    R = default_covariance() if R is None else R
    bound = truncation_bound(xi, t, max_pairs, R) if t > 0 else 0.0
    if bound > tol:
        raise RangeError(f"truncation bound {bound:.3g} exceeds tol {tol:.3g}; use a smaller t")
    terms = tuple(dyson_term(n, xi, t, R, order) for n in range(max_pairs + 1))
    return DysonResult(complex(sum(terms)), bound, terms)
