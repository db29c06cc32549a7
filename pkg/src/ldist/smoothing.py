"""Smoothed rectangle indicators built from the weight G and Fejer factors.

For a rectangle ``a1 < x < a2, b1 < y < b2`` the kernel ``W_{T,R}`` is a double
integral over ``[0, T]^2`` whose integrand factorises in ``u`` and ``v``. After
taking the real part it collapses to a product of one-dimensional smoothed
indicators::

    W_{T,R}(x + iy) = S_T(x; a1, a2) * S_T(y; b1, b2)
    S_T(x; c1, c2) = int_0^T G(u/T) [sin 2 pi u (x - c1) - sin 2 pi u (x - c2)] / (2u) du
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Rectangle", "g_weight", "f_ab", "fejer_i", "smoothed_interval", "w_indicator", "fejer_envelope"]


@dataclass(frozen=True)
class Rectangle:
    a1: float
    a2: float
    b1: float
    b2: float

    def __post_init__(self):
        if not (self.a1 < self.a2 and self.b1 < self.b2):
            raise ValueError(f"degenerate rectangle {self}")

    def reflect(self) -> "Rectangle":
        """Mirror image under complex conjugation."""
        return Rectangle(self.a1, self.a2, -self.b2, -self.b1)

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        return (self.a1 < z.real) & (z.real < self.a2) & (self.b1 < z.imag) & (z.imag < self.b2)


def g_weight(u):
    """G(u) = 2u/pi + 2u(1-u) cot(pi u) on [0, 1], continuous at both ends."""
    arr = np.asarray(u, dtype=np.float64)
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("G is defined on [0, 1]")
    lo = arr <= 0.5
    # u/sin(pi u) = 1/(pi sinc u) and (1-u)/sin(pi u) = 1/(pi sinc(1-u))
    with np.errstate(divide="ignore", invalid="ignore"):
        cot_part = np.where(
            lo,
            2.0 * (1.0 - arr) * np.cos(np.pi * arr) / (np.pi * np.sinc(arr)),
            2.0 * arr * np.cos(np.pi * arr) / (np.pi * np.sinc(1.0 - arr)),
        )
    out = 2.0 * arr / np.pi + cot_part
    return float(out) if out.ndim == 0 else out


def f_ab(a: float, b: float, u):
    """(e^{-2 pi i a u} - e^{-2 pi i b u}) / 2."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u < 0):
        raise ValueError("u must be nonnegative")
    out = 0.5 * (np.exp(-2j * np.pi * a * u) - np.exp(-2j * np.pi * b * u))
    return complex(out) if out.ndim == 0 else out


def fejer_i(x):
    """I(x) = sin^2(pi x) / (pi x)^2."""
    out = np.sinc(np.asarray(x, dtype=np.float64)) ** 2
    return float(out) if out.ndim == 0 else out


def _panels(T: float, freq: float, order: int = 16):
    x, w = np.polynomial.legendre.leggauss(order)
    width = min(T, 0.5, 14.0 / (2.0 * math.pi * freq + 1.0))
    npan = max(1, int(math.ceil(T / width)))
    edges = np.linspace(0.0, T, npan + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def smoothed_interval(x, c1: float, c2: float, T: float, refine: int = 1) -> np.ndarray:
    """S_T(x; c1, c2), the smoothed indicator of (c1, c2), for an array of x."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    freq = float(np.max(np.abs(np.concatenate([x - c1, x - c2])))) if x.size else 0.0
    u, w = _panels(T, freq * refine + 1.0)
    gw = w * g_weight(u / T)
    # sin(2 pi u d)/u = 2 pi d sinc(2 u d): no singularity at u = 0
    d1 = (x - c1)[:, None]
    d2 = (x - c2)[:, None]
    integrand = np.pi * (d1 * np.sinc(2 * u * d1) - d2 * np.sinc(2 * u * d2))
    return integrand @ gw


def w_indicator(r: Rectangle, T: float, z):
    """W_{T,R}(z); scalar or array ``z``."""
    if T <= 0:
        raise ValueError("T must be positive")
    z = np.asarray(z, dtype=np.complex128)
    flat = np.atleast_1d(z).ravel()
    out = smoothed_interval(flat.real, r.a1, r.a2, T) * smoothed_interval(flat.imag, r.b1, r.b2, T)
    return float(out[0]) if z.ndim == 0 else out.reshape(z.shape)


def fejer_envelope(r: Rectangle, T: float, z):
    """Sum of I(T * edge distance) over the four edges."""
    z = np.asarray(z, dtype=np.complex128)
    x, y = z.real, z.imag
    out = (
        fejer_i(T * (x - r.a1)) + fejer_i(T * (x - r.a2)) + fejer_i(T * (y - r.b1)) + fejer_i(T * (y - r.b2))
    )
    return out
