"""Temporal mollifier, its autocorrelation, and the Gaussian spatial kernel.

The noise covariance factorises as R(t, x) = R_eta(t) * q(x) with
R_eta the autocorrelation of a compactly supported time profile eta and
q the standard Gaussian density.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidParameterError, ResolutionError
from .quadrature import integrate, legendre_nodes

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
SQRT_I = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))


def _bump_profile(t, a: float, signed_mix: float):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < a
    ti = t[inside]
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[inside] = np.exp(-a * a / (a * a - ti * ti)) * (1.0 - signed_mix * (ti / a) ** 2)
    return out


@dataclass(frozen=True)
class MollifierSpec:
    """Normalised bump eta(t) = c exp(-a^2/(a^2-t^2)) on (-a, a).

    ``signed_mix`` multiplies the bump by (1 - k (t/a)^2); values above 1
    give a sign-changing profile. ``amplitude`` scales eta after
    normalisation and exists as a test hook (0 switches the noise off).
    """
    half_width: float
    normalization: float
    eval_points: int = 400
    signed_mix: float = 0.0
    amplitude: float = 1.0

    @property
    def support_radius(self) -> float:
        """Support radius M = 2a of R_eta."""
        return 2.0 * self.half_width

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        val = self.amplitude * self.normalization * _bump_profile(t, self.half_width, self.signed_mix)
        return float(val) if scalar else val

    def integral(self) -> float:
        a = self.half_width
        return integrate(lambda s: self(s), -a, a, epsabs=1e-14, epsrel=1e-14)

    def fourier(self, omega):
        """eta_hat(omega) = int eta(t) exp(-i omega t) dt (real: eta is even).

        Fixed-order Gauss-Legendre over [-a, a]; vectorised in omega.
        """
        x, w = legendre_nodes(self.eval_points)
        a = self.half_width
        t = a * x
        vals = self(t) * w * a
        omega = np.asarray(omega, dtype=float)
        return np.cos(np.multiply.outer(omega, t)) @ vals

    def fourier_quad(self, omega: float) -> float:
        """Adaptive (QAWO) evaluation of eta_hat at a single frequency."""
        from scipy.integrate import quad
        a = self.half_width
        val, _ = quad(lambda s: self(s), 0.0, a, weight="cos", wvar=float(omega),
                      epsabs=1e-14, epsrel=1e-13, limit=400)
        return 2.0 * val


def make_bump_eta(half_width: float, *, signed_mix: float = 0.0, amplitude: float = 1.0,
                  eval_points: int = 400) -> MollifierSpec:
    if not half_width > 0:
        raise InvalidParameterError(f"half_width must be positive, got {half_width!r}")
    a = float(half_width)
    mass = integrate(lambda s: float(_bump_profile(s, a, signed_mix)), -a, a,
                     epsabs=1e-15, epsrel=1e-14)
    if not mass > 0:
        raise InvalidParameterError(f"signed_mix={signed_mix} leaves a profile with non-positive mass")
    return MollifierSpec(half_width=a, normalization=1.0 / mass, eval_points=eval_points,
                         signed_mix=float(signed_mix), amplitude=float(amplitude))


@dataclass(frozen=True, eq=False)
class TemporalCovariance:
    """R_eta tabulated on [0, M] and read back by cubic interpolation.

    Evaluation is even in t and returns exactly 0.0 for |t| >= M.
    """
    support_radius: float
    grid_step: float
    values: np.ndarray = field(repr=False)
    interp_order: int = 3
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        grid = np.linspace(0.0, self.support_radius, vals.size)
        # Even at 0 and flat at the support edge.
        spline = CubicSpline(grid, vals, bc_type=((1, 0.0), (1, 0.0)))
        object.__setattr__(self, "_spline", spline)

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        at = np.abs(np.asarray(t, dtype=float))
        out = np.where(at < self.support_radius, self._spline(np.minimum(at, self.support_radius)), 0.0)
        return float(out) if scalar else out

    def at_lags(self, step: float, count: int) -> np.ndarray:
        """R_eta(k * step) for k = 0 .. count-1."""
        return np.ascontiguousarray(self(step * np.arange(count)))

    def integral_abs(self) -> float:
        """int_R |R_eta(t)| dt."""
        M = self.support_radius
        knots = np.linspace(0.0, M, self.values.size)
        return 2.0 * integrate(lambda s: abs(self(s)), 0.0, M, epsabs=1e-12,
                               points=knots[1:-1][:: max(1, knots.size // 64)])

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha256(self.values.tobytes())
        h.update(repr((self.support_radius, self.grid_step)).encode())
        return h.hexdigest()[:16]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    @classmethod
    def zero(cls, support_radius: float = 2.0, grid_step: float = 1 / 128) -> "TemporalCovariance":
        n = int(round(support_radius / grid_step)) + 1
        return cls(support_radius, support_radius / (n - 1), np.zeros(n))


def _autocorrelation(eta: MollifierSpec, t: float) -> float:
    a = eta.half_width
    if t >= 2 * a:
        return 0.0
    return integrate(lambda s: eta(s + t) * eta(s), -a, a - t, epsabs=1e-14, epsrel=1e-13)


@lru_cache(maxsize=32)
def build_R_eta(eta: MollifierSpec, grid_step: float | None = None) -> TemporalCovariance:
    """Tabulate R_eta(t) = int eta(t+s) eta(s) ds on [0, 2a]."""
    a = eta.half_width
    if grid_step is None:
        grid_step = a / 256
    if not 0 < grid_step <= a / 16:
        raise ResolutionError(f"grid_step={grid_step} must lie in (0, half_width/16 = {a / 16}]")
    M = 2 * a
    n = int(math.ceil(M / grid_step - 1e-9))
    grid = np.linspace(0.0, M, n + 1)
    vals = np.array([_autocorrelation(eta, t) for t in grid])
    vals[-1] = 0.0
    return TemporalCovariance(M, M / n, vals)


def eval_q(x):
    """Spatial Gaussian q(x) = exp(-x^2/2)/sqrt(2 pi)."""
    return INV_SQRT_2PI * np.exp(-0.5 * np.square(x))


def eval_q_complex(z):
    """Entire extension q(z) = exp(-z^2/2)/sqrt(2 pi) for complex z."""
    z = np.asarray(z, dtype=complex)
    return INV_SQRT_2PI * np.exp(-0.5 * z * z)


def eval_q_rotated(x):
    """q(sqrt(i) x) = exp(-i x^2/2)/sqrt(2 pi) with sqrt(i) = exp(i pi/4)."""
    x = np.asarray(x, dtype=float)
    val = INV_SQRT_2PI * np.exp(-0.5j * x * x)
    return complex(val) if val.ndim == 0 else val


def eval_R(t, x, R_eta: TemporalCovariance):
    """Space-time covariance R(t, x) = R_eta(t) q(x); x may be complex."""
    if np.iscomplexobj(x):
        return R_eta(t) * eval_q_complex(x)
    return R_eta(t) * eval_q(x)


def eval_R_tilde(omega, xi, eta: MollifierSpec):
    """Space-time Fourier transform |eta_hat(omega)|^2 exp(-xi^2/2)."""
    eh = eta.fourier(omega)
    val = eh * eh * np.exp(-0.5 * np.square(xi))
    return float(val) if np.ndim(val) == 0 else val


@lru_cache(maxsize=1)
def default_mollifier() -> MollifierSpec:
    return make_bump_eta(1.0)


def default_covariance() -> TemporalCovariance:
    return build_R_eta(default_mollifier())
