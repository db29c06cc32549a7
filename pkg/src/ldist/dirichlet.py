"""Truncated logarithms R_y(sigma, chi) for all characters mod q, and L(sigma, chi).

``R_y(sigma, chi) = sum_{p^n <= y} chi(p)^n / (n p^{n sigma})``. The weights are
binned by discrete log of ``p^n mod q`` and one DFT gives every character.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .primes import BinnedWeights, CharacterTable, char_sums_all, sieve

__all__ = [
    "EulerTruncation",
    "LogLSamples",
    "truncation",
    "default_y",
    "r_y_all",
    "r_y_naive",
    "l_value_direct",
]


@dataclass(frozen=True)
class EulerTruncation:
    sigma: float
    y: float
    q: int
    p: np.ndarray
    n: np.ndarray
    weight: np.ndarray
    residue: np.ndarray

    def __len__(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class LogLSamples:
    """Values R_y(sigma, chi_j) for j = 0..q-2 (j = 0 is the principal character)."""

    q: int
    sigma: float
    y: float
    values: np.ndarray

    @property
    def nonprincipal(self) -> np.ndarray:
        return self.values[1:]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "re", "im"])
        for j, z in enumerate(self.values):
            w.writerow([j, f"{z.real:.17g}", f"{z.imag:.17g}"])
        return buf.getvalue()


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not 0.5 < sigma <= 1.0:
        raise ValueError(f"sigma must lie in (1/2, 1], got {sigma}")
    return sigma


def default_y(sigma: float, q: int) -> float:
    """max((log q)^{6/(2 sigma - 1)}, 1e3), capped at 1e7 and at q - 1."""
    y = max(math.log(q) ** (6.0 / (2.0 * sigma - 1.0)), 1e3)
    return float(min(y, 1e7, q - 1))


def truncation(sigma: float, y: float, q: int) -> EulerTruncation:
    """All prime powers ``p^n <= y`` with weight ``1/(n p^{n sigma})``."""
    sigma = _check_sigma(sigma)
    y = float(y)
    q = int(q)
    if y < 2:
        raise ValueError(f"cutoff y must be >= 2, got {y}")
    if y >= q:
        raise ValueError(f"cutoff y={y} must be below the modulus q={q}")
    ps = sieve(int(y)).primes
    p_list, n_list = [], []
    pk = ps.astype(np.float64)
    n = 1
    while len(ps):
        p_list.append(ps)
        n_list.append(np.full(len(ps), n, dtype=np.int64))
        n += 1
        keep = pk * ps <= y
        ps, pk = ps[keep], (pk * ps)[keep]
    p = np.concatenate(p_list)
    nn = np.concatenate(n_list)
    weight = 1.0 / (nn * p.astype(np.float64) ** (nn * sigma))
    residue = np.array([pow(int(a), int(b), q) for a, b in zip(p, nn)], dtype=np.int64)
    return EulerTruncation(sigma, y, q, p, nn, weight, residue)


def r_y_all(t: CharacterTable, tr: EulerTruncation) -> LogLSamples:
    """R_y(sigma, chi_j) for every j via one length-(q-1) DFT."""
    if t.q != tr.q:
        raise ValueError(f"truncation built for q={tr.q}, table for q={t.q}")
    w = np.zeros(t.q - 1, dtype=np.complex128)
    np.add.at(w, t.ind[tr.residue], tr.weight)
    vals = char_sums_all(t, BinnedWeights(t.q, w))
    # exact symmetries: chi_0 real, chi_{q-1-j} = conj(chi_j)
    vals[0] = vals[0].real
    n = t.q - 1
    if n > 1:
        j = np.arange(1, n)
        half = j[j < n - j]
        vals[n - half] = np.conj(vals[half])
        if n % 2 == 0:
            vals[n // 2] = vals[n // 2].real
    return LogLSamples(t.q, tr.sigma, tr.y, vals)


def r_y_naive(t: CharacterTable, tr: EulerTruncation, js) -> np.ndarray:
    """Direct evaluation at selected character indices (test oracle)."""
    js = np.atleast_1d(np.asarray(js, dtype=np.int64))
    k = np.outer(js, t.ind[tr.residue]) % (t.q - 1)
    return np.exp(2j * np.pi * k / (t.q - 1)) @ tr.weight


_BLOCKS = 8
_TAYLOR = 40


def l_value_direct(t: CharacterTable, j: int, sigma: float) -> complex:
    """L(sigma, chi_j) for a non-principal character.

    Whole periods of the series are summed in closed form: with ``x_a = a/q``,
    ``sum_{k >= K} sum_a chi(a) (kq + a)^-s = q^-s sum_{i>=1} C(-s, i) m_i zeta(s+i, K)``
    where ``m_i = sum_a chi(a) x_a^i`` (the ``i = 0`` term vanishes because the
    character sums to zero over a period). The first ``K`` periods are summed
    directly.
    """
    sigma = _check_sigma(sigma)
    q = t.q
    if not 1 <= j <= q - 2:
        raise ValueError("l_value_direct needs a non-principal character index 1..q-2")
    if q > 10**5:
        raise ValueError("l_value_direct is limited to q <= 1e5")
    a = np.arange(1, q, dtype=np.int64)
    chi = np.exp(2j * np.pi * ((j * t.ind[a]) % (q - 1)) / (q - 1))
    head = 0.0 + 0.0j
    for k in range(_BLOCKS):
        n = (k * q + a).astype(np.float64)
        head += np.sum(chi * n**-sigma)
    x = a / q
    tail = 0.0 + 0.0j
    xi = np.ones_like(x)
    c = 1.0
    for i in range(1, _TAYLOR):
        xi = xi * x
        c *= (-sigma - (i - 1)) / i  # binomial coefficient C(-sigma, i)
        tail += c * np.sum(chi * xi) * zeta(sigma + i, _BLOCKS)
    return complex(head + q**-sigma * tail)
