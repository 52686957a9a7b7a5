"""Scalar quadrature helpers.

`integrate` is the adaptive Gauss-Kronrod route (QUADPACK via scipy) used by
every kernel-level integral. `gauss_legendre` is a separate composite rule
kept as an independent oracle; the two never share nodes or error control.
"""
from __future__ import annotations

import warnings
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate as _spi

ABS_TOL = 1e-10


def integrate(f: Callable[[float], complex], a: float, b: float, *,
              epsabs: float = ABS_TOL, epsrel: float = 1e-12,
              complex_valued: bool = False, points=None, limit: int = 500) -> complex:
    """Adaptive quadrature of ``f`` over ``[a, b]``.

    Complex integrands are split into real and imaginary parts, each
    refined to ``epsabs``.
    """
    if a == b:
        return 0j if complex_valued else 0.0
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=limit)
    if points is not None:
        kw["points"] = points
    with warnings.catch_warnings():
        # Tolerances sit near machine precision; QUADPACK's roundoff notice is expected.
        warnings.simplefilter("ignore", _spi.IntegrationWarning)
        if complex_valued:
            val, _ = _spi.quad(f, a, b, complex_func=True, **kw)
            return complex(val)
        val, _ = _spi.quad(f, a, b, **kw)
    return float(val)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def legendre_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        _GL_CACHE[order] = leggauss(order)
    return _GL_CACHE[order]


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                   panels: int = 64, order: int = 20):
    """Composite Gauss-Legendre rule; ``f`` must accept arrays."""
    x, w = legendre_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return np.sum(weights * f(nodes))
