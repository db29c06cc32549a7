"""The modified Bessel function I_0 and derivatives of f = log I_0.

Three regimes, all vectorised over ``u``:

* ``u <= 0.5``: Taylor series of ``f`` around 0 (coefficients from the Riccati
  equation below), differentiated termwise.
* ``0.5 < u <= U_SEAM``: power series. Writing ``f^(m) = N_m / I_0^m`` gives
  ``N_1 = I_1`` and ``N_{m+1} = N_m' I_0 - m N_m I_1``; the Taylor coefficients
  of ``N_2`` and ``N_3`` have a single sign (``N_4`` only its constant term
  differs), so the numerators sum without cancellation.
* ``u > U_SEAM``: the asymptotic expansion ``rho = 1 + sum_k c_k u^-k``,
  summed below its smallest term (about e^{-2u}).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = ["U_SEAM", "i0", "log_i0", "log_i0_deriv", "log_i0_derivs", "asymptotic_rho_coeffs"]

U_SMALL = 0.5
U_SEAM = 20.0
_N_SERIES = 64
_N_TAYLOR = 24
_N_ASYM = 36


def _taylor_coeffs(n: int) -> np.ndarray:
    """rho(u) = sum_k g_k u^(2k+1); from rho' = 1 - rho/u - rho^2."""
    g: list[Fraction] = []
    for k in range(n):
        acc = Fraction(1 if k == 0 else 0)
        for i in range(k):
            acc -= g[i] * g[k - 1 - i]
        g.append(acc / (2 * k + 2))
    return np.array([float(x) for x in g])


def asymptotic_rho_coeffs(n: int) -> np.ndarray:
    """c_1..c_n of rho(u) ~ 1 + sum_k c_k u^-k as u -> oo (index 0 holds 1)."""
    c = [Fraction(1), Fraction(-1, 2)]
    for k in range(2, n + 1):
        acc = (k - 2) * c[k - 1]
        for i in range(1, k):
            acc -= c[i] * c[k - i]
        c.append(acc / 2)
    return np.array([float(x) for x in c])


_G = _taylor_coeffs(_N_TAYLOR)
_C = asymptotic_rho_coeffs(_N_ASYM)


def _as_array(u) -> tuple[np.ndarray, bool]:
    arr = np.asarray(u, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("Bessel argument must be nonnegative")
    return np.atleast_1d(arr), arr.ndim == 0


def _series(u: np.ndarray):
    """Return (I_0 - 1, I_0, I_1 / u) by the power series (positive terms)."""
    x = (0.5 * u) ** 2
    t0 = np.ones_like(u)
    t1 = np.full_like(u, 0.5)  # (u/2)^(2n+1) / (n!(n+1)!) divided by u
    s0 = np.zeros_like(u)
    s1 = t1.copy()
    for n in range(1, _N_SERIES):
        t0 = t0 * x / (n * n)
        t1 = t1 * x / (n * (n + 1))
        s0 += t0
        s1 += t1
    return s0, 1.0 + s0, s1


def _taylor_f(u: np.ndarray, m: int) -> np.ndarray:
    """m-th derivative of f from its even Taylor series, exact termwise."""
    acc = np.zeros_like(u)
    u2 = u * u
    for k in range(_N_TAYLOR - 1, -1, -1):
        e = 2 * k + 2
        coef = _G[k] / e * math.perm(e, m) if e >= m else 0.0
        acc = acc * u2 + coef
    # acc = sum_k coef_k u^(2k); actual power is e - m = 2k + 2 - m
    shift = 2 - m
    if shift >= 0:
        return acc * u**shift
    # m = 3 or 4: the k=0 coefficient is zero, divide out analytically
    acc = np.zeros_like(u)
    for k in range(_N_TAYLOR - 1, 0, -1):
        e = 2 * k + 2
        acc = acc * u2 + _G[k] / e * math.perm(e, m)
    return acc * u ** (4 - m)


_N_DEG = 160


@lru_cache(maxsize=1)
def _numerator_coeffs() -> list[np.ndarray]:
    """Coefficients in u of N_1..N_4, exact rationals rounded once."""
    deg = _N_DEG
    i0c = [Fraction(0)] * (deg + 1)
    i1c = [Fraction(0)] * (deg + 1)
    for k in range(deg // 2 + 1):
        i0c[2 * k] = Fraction(1, math.factorial(k) ** 2 * 4**k)
        if 2 * k + 1 <= deg:
            i1c[2 * k + 1] = Fraction(1, math.factorial(k) * math.factorial(k + 1) * 2 ** (2 * k + 1))

    def mul(p, q):
        r = [Fraction(0)] * (deg + 1)
        for i, a in enumerate(p):
            if a:
                for j in range(deg + 1 - i):
                    if q[j]:
                        r[i + j] += a * q[j]
        return r

    out = []
    n = i1c
    for m in range(1, 5):
        out.append(np.array([float(c) for c in n]))
        dn = [i * n[i] for i in range(1, deg + 1)] + [Fraction(0)]
        n = [a - m * b for a, b in zip(mul(dn, i0c), mul(n, i1c))]
    return out


def _poly_parity(c: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate a polynomial with only even or only odd powers by Horner in u^2."""
    odd = c[1] != 0
    cc = c[1::2] if odd else c[0::2]
    u2 = u * u
    acc = np.zeros_like(u)
    for v in cc[::-1]:
        acc = acc * u2 + v
    return acc * u if odd else acc


def _asym_derivs(u: np.ndarray, mmax: int) -> list[np.ndarray]:
    """f and its derivatives from rho = 1 + sum_k c_k u^-k (k >= 1)."""
    w = 1.0 / u
    out = []
    # f = u - log(2 pi u)/2 + sum_{k>=2} c_k u^(1-k)/(1-k)
    acc = np.zeros_like(u)
    for k in range(_N_ASYM, 1, -1):
        acc = (acc + _C[k] / (1 - k)) * w
    out.append(u - 0.5 * np.log(2.0 * np.pi * u) + acc)
    for m in range(1, mmax + 1):
        # f^(m) = d^(m-1) rho = sum_k c_k (-k)(-k-1)...(-k-m+2) u^(-k-m+1)
        acc = np.zeros_like(u)
        for k in range(_N_ASYM, 0, -1):
            fall = 1.0
            for i in range(m - 1):
                fall *= -(k + i)
            acc = (acc + _C[k] * fall) * w
        # acc carries u^-k; shift by u^-(m-1)
        val = acc * w ** (m - 1)
        if m == 1:
            val = 1.0 + val
        out.append(val)
    return out


def log_i0_derivs(u, mmax: int = 4) -> list[np.ndarray]:
    """``[f(u), f'(u), ..., f^(mmax)(u)]`` for ``f = log I_0``, as arrays."""
    if not 0 <= mmax <= 4:
        raise ValueError("derivative order must lie in 0..4")
    arr, _ = _as_array(u)
    out = [np.empty_like(arr) for _ in range(mmax + 1)]
    small = arr <= U_SMALL
    mid = (arr > U_SMALL) & (arr <= U_SEAM)
    big = arr > U_SEAM
    if small.any():
        us = arr[small]
        for m in range(mmax + 1):
            out[m][small] = _taylor_f(us, m)
    if mid.any():
        um = arr[mid]
        s0, i0v, _ = _series(um)
        out[0][mid] = np.log1p(s0)
        if mmax >= 1:
            nc = _numerator_coeffs()
            for m in range(1, mmax + 1):
                out[m][mid] = _poly_parity(nc[m - 1], um) / i0v**m
    if big.any():
        d = _asym_derivs(arr[big], mmax)
        for m in range(mmax + 1):
            out[m][big] = d[m]
    return out


def log_i0_deriv(m: int, u):
    """f^(m)(u) for ``f = log I_0`` and ``0 <= m <= 4``; scalar in, scalar out."""
    if not isinstance(m, (int, np.integer)) or not 0 <= m <= 4:
        raise ValueError("derivative order must be an integer in 0..4")
    arr = np.asarray(u, dtype=np.float64)
    val = log_i0_derivs(arr, m)[m]
    return float(val[0]) if arr.ndim == 0 else val.reshape(arr.shape)


def log_i0(u):
    return log_i0_deriv(0, u)


def i0(u):
    """I_0(u); overflows to inf beyond u ~ 713 (use :func:`log_i0` there)."""
    arr, scalar = _as_array(u)
    out = np.empty_like(arr)
    lo = arr <= U_SEAM
    if lo.any():
        out[lo] = _series(arr[lo])[1]
    if (~lo).any():
        with np.errstate(over="ignore"):
            out[~lo] = np.exp(_asym_derivs(arr[~lo], 0)[0])
    return float(out[0]) if scalar else out.reshape(np.shape(u))
