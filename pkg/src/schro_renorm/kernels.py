"""Compiled inner loops for the Brownian functionals.

All sums use trapezoid weights on the path grid. The covariance enters
only through ``Rk[k] = R_eta(k h)``; lags at or beyond ``len(Rk)`` are zero.
"""
import math

import numba
import numpy as np

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@numba.njit(cache=True)
def band_sum(B, h, Rk):
    """Half the trapezoid double sum of R_eta(s-u) q(sqrt(i)(B_s-B_u)).

    Only lags k < len(Rk) are visited, so the cost is O(N * len(Rk)).
    """
    N = B.shape[0] - 1
    if N <= 0:
        return 0j
    h2 = h * h
    re = Rk[0] * h2 * (N - 0.5)
    im = 0.0
    K = min(Rk.shape[0] - 1, N)
    for k in range(1, K + 1):
        r = Rk[k]
        if r == 0.0:
            continue
        sr = 0.0
        si = 0.0
        for j in range(N - k + 1):
            d = B[j + k] - B[j]
            ph = 0.5 * d * d
            sr += math.cos(ph)
            si -= math.sin(ph)
        # trapezoid end corrections
        d0 = B[k] - B[0]
        dN = B[N] - B[N - k]
        c0r, c0i = math.cos(0.5 * d0 * d0), -math.sin(0.5 * d0 * d0)
        cNr, cNi = math.cos(0.5 * dN * dN), -math.sin(0.5 * dN * dN)
        sr -= 0.5 * (c0r + cNr)
        si -= 0.5 * (c0i + cNi)
        if k == N:
            sr += 0.25 * c0r
            si += 0.25 * c0i
        re += 2.0 * r * h2 * sr
        im += 2.0 * r * h2 * si
    return 0.5 * INV_SQRT_2PI * complex(re, im)


@numba.njit(cache=True)
def naive_sum(B, h, Rk):
    """Same discrete functional as `band_sum` by the full O(N^2) double loop."""
    N = B.shape[0] - 1
    if N <= 0:
        return 0j
    L = Rk.shape[0]
    acc = 0j
    for j in range(N + 1):
        wj = 0.5 * h if (j == 0 or j == N) else h
        for l in range(N + 1):
            wl = 0.5 * h if (l == 0 or l == N) else h
            k = abs(j - l)
            r = Rk[k] if k < L else 0.0
            d = B[j] - B[l]
            acc += wj * wl * r * complex(math.cos(0.5 * d * d), -math.sin(0.5 * d * d))
    return 0.5 * INV_SQRT_2PI * acc


@numba.njit(cache=True)
def _richardson_sum(B, h, Rk):
    """(4 S_h - S_2h) / 3 in one sweep; the S_2h terms are the even-j, even-k subset."""
    N = B.shape[0] - 1
    if N <= 0:
        return 0j
    N2 = N // 2
    h2 = h * h
    H2 = 4.0 * h2
    fre = Rk[0] * h2 * (N - 0.5)
    fim = 0.0
    cre = Rk[0] * H2 * (N2 - 0.5)
    cim = 0.0
    K = min(Rk.shape[0] - 1, N)
    for k in range(1, K + 1):
        r = Rk[k]
        if r == 0.0:
            continue
        even = (k & 1) == 0
        sr = 0.0
        si = 0.0
        er = 0.0
        ei = 0.0
        for j in range(N - k + 1):
            d = B[j + k] - B[j]
            ph = 0.5 * d * d
            c = math.cos(ph)
            sn = math.sin(ph)
            sr += c
            si -= sn
            if even and (j & 1) == 0:
                er += c
                ei -= sn
        d0 = B[k] - B[0]
        dN = B[N] - B[N - k]
        c0r, c0i = math.cos(0.5 * d0 * d0), -math.sin(0.5 * d0 * d0)
        cNr, cNi = math.cos(0.5 * dN * dN), -math.sin(0.5 * dN * dN)
        sr -= 0.5 * (c0r + cNr)
        si -= 0.5 * (c0i + cNi)
        if k == N:
            sr += 0.25 * c0r
            si += 0.25 * c0i
        fre += 2.0 * r * h2 * sr
        fim += 2.0 * r * h2 * si
        if even:
            er -= 0.5 * (c0r + cNr)
            ei -= 0.5 * (c0i + cNi)
            if k == N:
                er += 0.25 * c0r
                ei += 0.25 * c0i
            cre += 2.0 * r * H2 * er
            cim += 2.0 * r * H2 * ei
    return 0.5 * INV_SQRT_2PI * complex((4.0 * fre - cre) / 3.0, (4.0 * fim - cim) / 3.0)


@numba.njit(cache=True)
def functional(B, h, Rk, richardson):
    """Discrete X (before the eps prefactor), optionally extrapolated.

    With ``richardson`` the half-resolution sum on the even nodes removes the
    O(h^2) trapezoid error: (4 S_h - S_2h) / 3. Needs an even number of steps.
    """
    if richardson:
        return _richardson_sum(B, h, Rk)
    return band_sum(B, h, Rk)


@numba.njit(cache=True)
def functional_naive(B, h, Rk, richardson):
    s = naive_sum(B, h, Rk)
    if not richardson:
        return s
    s2 = naive_sum(B[::2], 2.0 * h, Rk[::2])
    return (4.0 * s - s2) / 3.0


@numba.njit(cache=True)
def functional_rows(paths, h, Rk, richardson, out):
    for p in range(paths.shape[0]):
        out[p] = functional(paths[p], h, Rk, richardson)


@numba.njit(cache=True)
def y_sum(b, h, Rk):
    """Stationary fluctuation Y from back-increments b[j] = B_r - B_{r - j h}.

    Returns (Y, bound) where bound is the termwise triangle-inequality bound.
    """
    K = b.shape[0] - 1
    L = Rk.shape[0]
    acc = 0j
    bound = 0.0
    for i in range(K + 1):
        s = i * h
        ws = 0.5 * h if (i == 0 or i == K) else h
        den = complex(1.0, s)
        pre = den ** -1.5
        apre = (1.0 + s * s) ** -0.75
        decay = s / (2.0 * (1.0 + s * s))
        inv = 1.0 / (2.0 * den)
        for j in range(K + 1):
            if i + j >= L:
                break
            r = Rk[i + j]
            if r == 0.0:
                continue
            wu = 0.5 * h if (j == 0 or j == K) else h
            bj = b[j]
            w = ws * wu * r
            acc += w * pre * np.exp(-1j * bj * bj * inv) * bj
            bound += abs(w) * apre * abs(bj) * math.exp(-bj * bj * decay)
    return -1j * INV_SQRT_2PI * acc, INV_SQRT_2PI * bound


@numba.njit(cache=True)
def y_rows(backs, h, Rk, out, bounds):
    for p in range(backs.shape[0]):
        y, bd = y_sum(backs[p], h, Rk)
        out[p] = y
        bounds[p] = bd
