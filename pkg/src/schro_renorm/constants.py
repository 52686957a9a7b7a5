"""Renormalisation constants z1, z2, the cross-section identity and the limit profile."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fk import CovMatrixA
from .mollifier import INV_SQRT_2PI, MollifierSpec, TemporalCovariance, default_covariance
from .quadrature import gauss_legendre, integrate

Z1_TOL = 1e-10
GAUSS_TAIL = 1e-16


def _knots(R: TemporalCovariance, upper: float, every: int = 16):
    k = np.arange(every, R.values.size - 1, every) * R.grid_step
    return k[k < upper] if k.size else None


def compute_z1(R: TemporalCovariance | None = None, epsabs: float = Z1_TOL) -> complex:
    """z1 = int_0^M R_eta(u) / sqrt(2 pi (1 + i u)) du, principal branch."""
    R = default_covariance() if R is None else R
    if R.is_zero:
        return 0j
    M = R.support_radius
    return integrate(lambda u: R(u) * INV_SQRT_2PI * (1.0 + 1j * u) ** -0.5, 0.0, M,
                     epsabs=epsabs, epsrel=1e-12, complex_valued=True, points=_knots(R, M))


def z1_gauss_legendre(R: TemporalCovariance | None = None, panels: int | None = None,
                      order: int = 24) -> complex:
    """Independent fixed-rule evaluation of z1 (composite Gauss-Legendre)."""
    R = default_covariance() if R is None else R
    panels = 2 * (R.values.size - 1) if panels is None else panels
    return complex(gauss_legendre(lambda u: R(u) * INV_SQRT_2PI * (1.0 + 1j * u) ** -0.5,
                                  0.0, R.support_radius, panels=panels, order=order))


def bias_constant(R: TemporalCovariance | None = None) -> complex:
    """c' = int_0^M u R_eta(u) / sqrt(2 pi (1 + i u)) du.

    For t/eps^2 >= M the functional mean is exactly z1 t/eps - eps c'.
    """
    R = default_covariance() if R is None else R
    if R.is_zero:
        return 0j
    M = R.support_radius
    return integrate(lambda u: u * R(u) * INV_SQRT_2PI * (1.0 + 1j * u) ** -0.5, 0.0, M,
                     epsabs=Z1_TOL, epsrel=1e-12, complex_valued=True, points=_knots(R, M))


def mean_X_exact(t: float, eps: float, R: TemporalCovariance | None = None) -> complex:
    """E_B[X_t^eps] = eps (2 pi)^(-1/2) int_0^min(T, M) (T - u) R_eta(u) (1 + i u)^(-1/2) du."""
    R = default_covariance() if R is None else R
    T = t / eps ** 2
    if T == 0 or R.is_zero:
        return 0j
    top = min(T, R.support_radius)
    val = integrate(lambda u: (T - u) * R(u) * INV_SQRT_2PI * (1.0 + 1j * u) ** -0.5, 0.0, top,
                    epsabs=Z1_TOL, epsrel=1e-12, complex_valued=True, points=_knots(R, top))
    return eps * val


def cross_section(spec: MollifierSpec) -> float:
    """int R~(p^2/2, p) dp / (2 pi) = int |eta_hat(p^2/2)|^2 exp(-p^2/2) dp / (2 pi).

    The range is cut where exp(-p^2/2) drops below 1e-16.
    """
    p_max = math.sqrt(-2.0 * math.log(GAUSS_TAIL))

    def f(p):
        e = float(spec.fourier(0.5 * p * p))
        return e * e * math.exp(-0.5 * p * p)

    return 2.0 * integrate(f, 0.0, p_max, epsabs=1e-13, epsrel=1e-12) / (2.0 * math.pi)


@dataclass(frozen=True)
class Z2Estimate:
    """z2 with componentwise standard errors.

    ``stderr_*`` propagate the full 3x3 estimator covariance of (a11, a12, a22);
    ``stderr_*_independent`` use 0.5 sqrt(se11^2 + se22^2) and se12, which
    ignores the correlation between the a11 and a22 estimators.
    """
    value: complex
    stderr_re: float
    stderr_im: float
    stderr_re_independent: float
    stderr_im_independent: float

    @property
    def stderr(self) -> float:
        return math.hypot(self.stderr_re, self.stderr_im)


def compute_z2(A: CovMatrixA) -> Z2Estimate:
    """z2 = (a11 - a22)/2 + i a12 with propagated errors."""
    value = complex(0.5 * (A.a11 - A.a22), A.a12)
    se = np.asarray(A.stderr, dtype=float)
    re_ind = 0.5 * math.hypot(se[0, 0], se[1, 1])
    im_ind = float(se[0, 1])
    if A.estimator_cov is not None:
        C = np.asarray(A.estimator_cov)
        g = np.array([0.5, 0.0, -0.5])
        re = math.sqrt(max(float(g @ C @ g), 0.0))
        im = math.sqrt(max(float(C[1, 1]), 0.0))
    else:
        re, im = re_ind, im_ind
    return Z2Estimate(value, re, im, re_ind, im_ind)


def limit_profile(xi, t, z2: complex, phi0_hat=1.0):
    """phi0_hat(xi) exp(-i xi^2 t / 2 + z2 t)."""
    xi = np.asarray(xi, dtype=float)
    val = phi0_hat * np.exp(-0.5j * xi * xi * t + z2 * t)
    return complex(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class RenormConstants:
    z1: complex
    z2: Z2Estimate
    A: CovMatrixA
    cross_section: float
    provenance: dict = field(default_factory=dict)

    @property
    def identity_residual(self) -> float:
        """|2 Re z1 - sigma| / sigma."""
        if self.cross_section == 0:
            return 0.0 if self.z1 == 0 else math.inf
        return abs(2 * self.z1.real - self.cross_section) / self.cross_section
