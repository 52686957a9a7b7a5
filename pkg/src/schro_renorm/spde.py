"""Split-step simulation of i d_t phi + (1/2) phi_xx - V_eps phi = 0 on a periodic box.

V_eps is the law-equivalent potential

    V_eps(t, x) = int eps^-3 rho((t - s)/eps^2, (x - y)/eps) dW(s, y),
    rho(t, x) = eta(t) exp(-x^2) / sqrt(pi),

synthesised from white-noise cells on the space-time grid. The Fourier
transform is phi_hat(xi) = int phi(x) exp(-i xi x) dx, approximated on the
grid by dx * fft.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, GridAlignmentError, InvalidParameterError, ResolutionError
from .fk import MCEstimate
from .mollifier import MollifierSpec, default_mollifier
from .parallel import map_shards
from .quadrature import integrate

DEFAULT_L = 16.0
DEFAULT_POINTS = 2048
DEFAULT_DT = 1.0 / 64


def _check_grid(L: float, n: int):
    if not L > 0:
        raise InvalidParameterError("domain length must be positive")
    if n < 2 or n & (n - 1):
        raise InvalidParameterError(f"n_points must be a power of two, got {n}")


@dataclass(frozen=True, eq=False)
class WaveField:
    domain_length: float
    amplitudes: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        _check_grid(self.domain_length, a.size)
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def n_points(self) -> int:
        return self.amplitudes.size

    @property
    def dx(self) -> float:
        return self.domain_length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def mass(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.dx)

    def fourier(self) -> np.ndarray:
        """phi_hat at the grid wavenumbers (fft ordering)."""
        return self.dx * np.fft.fft(self.amplitudes)

    def probe_indices(self, xi_probes) -> np.ndarray:
        """fft indices of probe frequencies; they must be multiples of 2 pi / L."""
        xi = np.atleast_1d(np.asarray(xi_probes, dtype=float))
        k = np.rint(xi * self.domain_length / (2 * np.pi))
        if np.any(np.abs(k * 2 * np.pi / self.domain_length - xi) > 1e-9 * np.maximum(1.0, np.abs(xi))):
            raise GridAlignmentError("probe frequencies must be grid frequencies 2 pi k / L")
        if np.any(np.abs(k) >= self.n_points // 2):
            raise GridAlignmentError("probe frequency beyond the Nyquist limit")
        return (k.astype(int) % self.n_points)


@dataclass(frozen=True, eq=False)
class PotentialField:
    """Real potential on slices [t0 + j dt, t0 + (j+1) dt), one row per slice."""
    domain_length: float
    time_step: float
    values: np.ndarray = field(repr=False)
    t0: float = 0.0
    seed: int | None = None
    eps: float | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise InvalidParameterError("potential values must be (n_slices, n_points)")
        _check_grid(self.domain_length, v.shape[1])
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_points(self) -> int:
        return self.values.shape[1]

    @property
    def t_end(self) -> float:
        return self.t0 + self.time_step * self.values.shape[0]

    def slice_index(self, t: float) -> int:
        j = int(round((t - self.t0) / self.time_step))
        if abs(self.t0 + j * self.time_step - t) > 1e-9 * max(1.0, abs(t)):
            raise GridAlignmentError(f"time {t} is not on the potential slice grid")
        return j

    @classmethod
    def from_function(cls, fn: Callable[[float, np.ndarray], np.ndarray], domain_length: float,
                      n_points: int, time_step: float, t_end: float, t0: float = 0.0) -> "PotentialField":
        """Sample a deterministic V(t, x) at slice midpoints."""
        n_slices = int(round((t_end - t0) / time_step))
        x = domain_length / n_points * np.arange(n_points)
        mids = t0 + time_step * (np.arange(n_slices) + 0.5)
        vals = np.array([np.broadcast_to(fn(tm, x), x.shape) for tm in mids], dtype=float)
        return cls(domain_length, time_step, vals.reshape(n_slices, n_points), t0)


@dataclass(frozen=True)
class InitialData:
    """Bump phi0(x) = amplitude * exp(-w^2 / (w^2 - (x - center)^2)) with w = width/2."""
    center: float
    width: float = 1.0
    amplitude: float = 1.0

    @property
    def half_width(self) -> float:
        return 0.5 * self.width

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        w = self.half_width
        y = x - self.center
        out = np.zeros_like(x)
        inside = np.abs(y) < w
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            out[inside] = self.amplitude * np.exp(-w * w / (w * w - y[inside] ** 2))
        return out

    def fourier(self, xi: float) -> complex:
        """phi0_hat(xi) by adaptive quadrature over the support."""
        w = self.half_width
        lo, hi = self.center - w, self.center + w
        return integrate(lambda x: float(self(x)) * np.exp(-1j * xi * x), lo, hi,
                         epsabs=1e-14, epsrel=1e-13, complex_valued=True)

    def on_grid(self, domain_length: float, n_points: int) -> WaveField:
        if not (0 < self.center - self.half_width and self.center + self.half_width < domain_length):
            raise DomainError("initial bump must lie strictly inside the periodic box")
        x = domain_length / n_points * np.arange(n_points)
        return WaveField(domain_length, self(x).astype(complex), 0.0)


def default_initial_data(domain_length: float = DEFAULT_L, width: float = 1.0) -> InitialData:
    """Unit-width bump at L/2 normalised to unit L^2 mass."""
    raw = InitialData(0.5 * domain_length, width, 1.0)
    w = raw.half_width
    mass = integrate(lambda x: float(raw(x)) ** 2, raw.center - w, raw.center + w, epsabs=1e-15)
    return InitialData(raw.center, width, 1.0 / math.sqrt(mass))


def check_resolution(spec: MollifierSpec, eps: float, dt: float, dx: float):
    need_dt = eps * eps * spec.half_width / 8
    need_dx = eps / 8
    if dt > need_dt * (1 + 1e-12) or dx > need_dx * (1 + 1e-12):
        raise ResolutionError(f"need dt <= {need_dt:.6g} and dx <= {need_dx:.6g}; got dt={dt:.6g}, dx={dx:.6g}")


def _noise_generator(seed: int, stream_id: int) -> np.random.Generator:
    # counter block (0, 0, 1, 0) is disjoint from both Brownian branches of the same key
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2 ** 64 - 1), int(stream_id) & (2 ** 64 - 1)],
                                                counter=[0, 0, 1, 0]))


def synthesize_potential(geometry: WaveField, spec: MollifierSpec | None, eps: float, dt: float, seed: int,
                         t_end: float, t0: float = 0.0, stream_id: int = 0) -> PotentialField:
    """One realisation of V_eps on slices covering [t0, t_end].

    Noise cells of size dt x dx carry iid N(0, 1/(dt dx)) values. Each
    slice value is the convolution evaluated at the slice midpoint: space
    by FFT against the periodised Gaussian (its transform exp(-k^2 eps^2/4)),
    time by a direct sum over the eta taps.
    """
    spec = default_mollifier() if spec is None else spec
    L, n = geometry.domain_length, geometry.n_points
    dx = L / n
    check_resolution(spec, eps, dt, dx)
    n_out = int(round((t_end - t0) / dt))
    if n_out < 0 or abs(t0 + n_out * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise GridAlignmentError("t_end - t0 must be a nonnegative multiple of dt")
    e2 = eps * eps
    m_max = int(math.floor(spec.half_width * e2 / dt))
    taps = spec(np.arange(-m_max, m_max + 1) * dt / e2) / e2 * dt
    n_cells = n_out + 2 * m_max
    rng = _noise_generator(seed, stream_id)
    cells = rng.standard_normal((n_cells, n)) / math.sqrt(dt * dx)
    k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    spatial = np.fft.ifft(np.fft.fft(cells, axis=1) * np.exp(-0.25 * k * k * e2), axis=1).real
    out = np.zeros((n_out, n))
    for j, c in enumerate(taps):
        # output slice i sits at offset m_max in cell index; tap j = m + m_max
        out += c * spatial[2 * m_max - j: 2 * m_max - j + n_out]
    return PotentialField(L, dt, out, t0, seed, eps)


def split_step_evolve(wave: WaveField, potential: PotentialField, t_end: float) -> WaveField:
    """Strang splitting: half potential phase, full kinetic step, half potential phase."""
    if potential.n_points != wave.n_points or potential.domain_length != wave.domain_length:
        raise InvalidParameterError("wave and potential grids differ")
    if t_end < wave.time - 1e-12:
        raise DomainError("t_end precedes the current time")
    dt = potential.time_step
    i0 = potential.slice_index(wave.time)
    n_steps = int(round((t_end - wave.time) / dt))
    if abs(wave.time + n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise GridAlignmentError("t_end - time must be a multiple of the potential time step")
    if i0 < 0 or i0 + n_steps > potential.values.shape[0]:
        raise DomainError(f"potential covers [{potential.t0}, {potential.t_end}], needs [{wave.time}, {t_end}]")
    kin = np.exp(-0.5j * wave.wavenumbers ** 2 * dt)
    phi = np.array(wave.amplitudes)
    for j in range(i0, i0 + n_steps):
        half = np.exp(-0.5j * dt * potential.values[j])
        phi = half * np.fft.ifft(kin * np.fft.fft(half * phi))
    return WaveField(wave.domain_length, phi, t_end)


def _realisation_shard(ids, xi_idx, t, eps, dt, seed, spec, wave0):
    out = np.empty((ids.size, xi_idx.size), dtype=complex)
    for r, sid in enumerate(ids):
        pot = synthesize_potential(wave0, spec, eps, dt, seed, t, stream_id=int(sid))
        final = split_step_evolve(wave0, pot, t)
        out[r] = final.fourier()[xi_idx]
    return out


def ensemble_mean_fourier(xi_probes, t: float, eps: float, n_realizations: int, seed: int,
                          spec: MollifierSpec | None = None, domain_length: float = DEFAULT_L,
                          n_points: int = DEFAULT_POINTS, dt: float | None = None,
                          initial: InitialData | None = None, return_samples: bool = False):
    """MC estimates of E[phi_hat_eps(t, xi)] over independent potential realisations."""
    spec = default_mollifier() if spec is None else spec
    initial = default_initial_data(domain_length) if initial is None else initial
    wave0 = initial.on_grid(domain_length, n_points)
    idx = wave0.probe_indices(xi_probes)
    if n_realizations < 1:
        raise InvalidParameterError("n_realizations must be >= 1")
    if t == 0:
        f0 = wave0.fourier()[idx]
        ests = [MCEstimate.exact(v, n_realizations) for v in f0]
        return (ests, np.tile(f0, (n_realizations, 1))) if return_samples else ests
    dt = min(DEFAULT_DT, eps * eps * spec.half_width / 8) if dt is None else dt
    parts = map_shards(_realisation_shard, np.arange(n_realizations), 64,
                       idx, t, eps, dt, seed, spec, wave0)
    samples = np.concatenate(parts)
    ests = [MCEstimate.from_samples(samples[:, j]) for j in range(idx.size)]
    return (ests, samples) if return_samples else ests


def self_convergence_orders(t_end: float = 1.0, dt: float = 0.05, domain_length: float = 8 * np.pi,
                            n_points: int = 256, potential: Callable | None = None):
    """Observed orders from runs at dt, dt/2, dt/4 against a dt/16 reference.

    Uses the smooth deterministic potential cos(x) cos(t) by default.
    Returns (errors, orders).
    """
    potential = (lambda t, x: np.cos(x) * np.cos(t)) if potential is None else potential
    init = InitialData(0.5 * domain_length, 2.0, 1.0)
    wave0 = init.on_grid(domain_length, n_points)

    def run(step):
        pot = PotentialField.from_function(potential, domain_length, n_points, step, t_end)
        return split_step_evolve(wave0, pot, t_end).amplitudes

    ref = run(dt / 16)
    dx = domain_length / n_points
    errs = [math.sqrt(np.sum(np.abs(run(dt / 2 ** k) - ref) ** 2) * dx) for k in range(3)]
    orders = [math.log2(errs[k] / errs[k + 1]) for k in range(2)]
    return errs, orders
