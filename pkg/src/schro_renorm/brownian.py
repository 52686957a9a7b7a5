"""Seekable Brownian paths on a uniform grid.

Every path is a pure function of (seed, stream_id, step, t_min, t_max).
Increments come from a Philox4x64 counter generator whose 128-bit key is
(seed, stream_id); the negative-time branch reads a disjoint counter block
of the same key, so the two branches are independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError, GridAlignmentError, InvalidParameterError

MAX_POINTS = 50_000_000
_MASK64 = (1 << 64) - 1
_POS_COUNTER = (0, 0, 0, 0)
_NEG_COUNTER = (0, 0, 0, 1)


def generator(seed: int, stream_id: int, branch: int = 0) -> np.random.Generator:
    counter = _NEG_COUNTER if branch else _POS_COUNTER
    bitgen = np.random.Philox(key=[int(seed) & _MASK64, int(stream_id) & _MASK64], counter=list(counter))
    return np.random.Generator(bitgen)


def increments(seed: int, stream_id: int, n_steps: int, step: float, branch: int = 0) -> np.ndarray:
    """The first ``n_steps`` N(0, step) increments of a keyed stream."""
    if n_steps == 0:
        return np.zeros(0)
    return generator(seed, stream_id, branch).standard_normal(n_steps) * math.sqrt(step)


def _n_steps(span: float, step: float) -> int:
    return int(math.ceil(span / step - 1e-9)) if span > 0 else 0


@dataclass(frozen=True, eq=False)
class BrownianPath:
    step: float
    t_min: float
    t_max: float
    values: np.ndarray = field(repr=False)
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def origin_index(self) -> int:
        return int(round(-self.t_min / self.step))

    @property
    def times(self) -> np.ndarray:
        return self.t_min + self.step * np.arange(self.values.size)

    def index(self, s: float, tol: float | None = None) -> int:
        """Nearest grid node to ``s``; raises if ``s`` is farther than ``tol``."""
        tol = 0.5 * self.step if tol is None else tol
        if s < self.t_min - tol or s > self.t_max + tol:
            raise DomainError(f"time {s} outside path domain [{self.t_min}, {self.t_max}]")
        k = int(round((s - self.t_min) / self.step))
        k = min(max(k, 0), self.values.size - 1)
        if abs(self.t_min + k * self.step - s) > tol + 1e-12 * max(1.0, abs(s)):
            raise GridAlignmentError(f"time {s} is off-grid by more than {tol}")
        return k

    def __call__(self, s: float) -> float:
        return float(self.values[self.index(s)])

    def backward_increments(self, r: float, span: float) -> np.ndarray:
        """b[j] = B_r - B_{r - j step} for j*step in [0, span]."""
        i = self.index(r)
        n = _n_steps(span, self.step)
        if i - n < 0:
            raise DomainError(f"path does not cover [{r - span}, {r}]")
        seg = self.values[i - n:i + 1]
        return self.values[i] - seg[::-1]


def sample_path(t_min: float, t_max: float, step: float, seed: int, stream_id: int = 0,
                max_points: int = MAX_POINTS) -> BrownianPath:
    if not step > 0:
        raise InvalidParameterError("step must be positive")
    if not t_min <= 0 <= t_max:
        raise InvalidParameterError(f"need t_min <= 0 <= t_max, got [{t_min}, {t_max}]")
    n_pos = _n_steps(t_max, step)
    n_neg = _n_steps(-t_min, step)
    if n_pos + n_neg + 1 > max_points:
        raise CapacityError(f"path needs {n_pos + n_neg + 1} points, cap is {max_points}")
    pos = np.concatenate(([0.0], np.cumsum(increments(seed, stream_id, n_pos, step, 0))))
    neg = np.cumsum(increments(seed, stream_id, n_neg, step, 1))
    values = np.concatenate((neg[::-1], pos))
    return BrownianPath(step, -n_neg * step, n_pos * step, values, seed, stream_id)


def increment(path: BrownianPath, s: float, u: float, tol: float | None = None) -> float:
    """B_s - B_u at grid-snapped times."""
    return float(path.values[path.index(s, tol)] - path.values[path.index(u, tol)])


def path_rows(seed: int, stream_ids, n_steps: int, step: float, branch: int = 0) -> np.ndarray:
    """Forward paths (B_0 = 0) for many streams, one row per stream id."""
    ids = np.asarray(stream_ids)
    out = np.zeros((ids.size, n_steps + 1))
    for r, sid in enumerate(ids):
        np.cumsum(increments(seed, int(sid), n_steps, step, branch), out=out[r, 1:])
    return out
