"""Primes, the character group modulo a prime, and all-character sums.

Characters modulo a prime ``q`` are indexed by ``j in {0, ..., q-2}``::

    chi_j(n) = e(j * ind(n) / (q - 1)),   e(x) = exp(2 pi i x)

where ``ind`` is the discrete logarithm to the smallest primitive root ``g``.
A weighted sum ``sum_n w(n) chi_j(n)`` only depends on the weights binned by
``ind(n)``, so all ``q - 1`` sums come out of one DFT of length ``q - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "NotPrime",
    "PrimeList",
    "CharacterTable",
    "BinnedWeights",
    "sieve",
    "is_prime",
    "build_table",
    "char_value",
    "char_sums_all",
    "prime_zeta",
    "prime_zeta_tail",
]

MAX_BOUND = 2**31
_SEGMENT = 1 << 20


class NotPrime(ValueError):
    """Raised when a modulus that must be prime is composite."""


@dataclass(frozen=True)
class PrimeList:
    bound: int
    primes: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)


@dataclass(frozen=True)
class CharacterTable:
    """Discrete-log table for the cyclic group (Z/qZ)^*.

    ``ind[n]`` is defined for ``1 <= n <= q-1``; ``ind[0]`` is a sentinel -1.
    """

    q: int
    g: int
    ind: np.ndarray = field(repr=False)

    @property
    def n_chars(self) -> int:
        return self.q - 1


@dataclass(frozen=True)
class BinnedWeights:
    q: int
    w: np.ndarray

    def __post_init__(self):
        if len(self.w) != self.q - 1:
            raise ValueError(f"weights have length {len(self.w)}, expected {self.q - 1}")


def _small_primes(n: int) -> np.ndarray:
    """Plain sieve of Eratosthenes up to n inclusive."""
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


def sieve(bound: int) -> PrimeList:
    """All primes ``<= bound`` by a segmented odd-only sieve."""
    bound = int(bound)
    if not 2 <= bound <= MAX_BOUND:
        raise ValueError(f"sieve bound must lie in [2, 2^31], got {bound}")
    return PrimeList(bound, _sieve_cached(bound))


@lru_cache(maxsize=8)
def _sieve_cached(bound: int) -> np.ndarray:
    if bound < 3:
        return np.array([2], dtype=np.int64)
    base = _small_primes(math.isqrt(bound) + 1)[1:]  # odd base primes
    chunks = [np.array([2], dtype=np.int64)]
    # segment holds the odd numbers lo, lo+2, ..., lo + 2*(len-1)
    lo = 3
    while lo <= bound:
        hi = min(lo + 2 * _SEGMENT, bound + 1)
        n = (hi - lo + 1) // 2
        flags = np.ones(n, dtype=bool)
        for p in base:
            pp = p * p
            if pp >= hi:
                break
            start = max(pp, ((lo + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            flags[(start - lo) // 2 :: p] = False
        chunks.append(lo + 2 * np.flatnonzero(flags).astype(np.int64))
        lo += 2 * n
    out = np.concatenate(chunks)
    out = out[out <= bound]
    out.flags.writeable = False
    return out


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _primitive_root(q: int) -> int:
    if q == 2:
        return 1
    rs = _prime_factors(q - 1)
    for g in range(2, q):
        if all(pow(g, (q - 1) // r, q) != 1 for r in rs):
            return g
    raise RuntimeError(f"no primitive root found for {q}")


def build_table(q: int) -> CharacterTable:
    """Discrete-log table modulo the prime ``q`` (``3 <= q <= 2^31``)."""
    q = int(q)
    if q < 3 or q > MAX_BOUND:
        raise ValueError(f"modulus must lie in [3, 2^31], got {q}")
    if not is_prime(q):
        raise NotPrime(f"q={q} is not prime")
    return _build_table_cached(q)


@lru_cache(maxsize=16)
def _build_table_cached(q: int) -> CharacterTable:
    g = _primitive_root(q)
    n = q - 1
    # powers g^k for k < n, filled blockwise: block b holds g^(bB) * g^(0..B-1)
    block = min(n, 4096)
    head = np.empty(block, dtype=np.int64)
    x = 1
    for k in range(block):
        head[k] = x
        x = x * g % q
    step = pow(g, block, q)
    pw = np.empty(n, dtype=np.int64)
    lead = 1
    for b0 in range(0, n, block):
        m = min(block, n - b0)
        pw[b0 : b0 + m] = (head[:m] * lead) % q
        lead = lead * step % q
    ind = np.full(q, -1, dtype=np.int64)
    ind[pw] = np.arange(n, dtype=np.int64)
    ind.flags.writeable = False
    return CharacterTable(q=q, g=g, ind=ind)


def char_value(t: CharacterTable, j: int, n: int) -> complex:
    """``chi_j(n) = e(j ind(n) / (q-1))``."""
    if not 0 <= j <= t.q - 2:
        raise ValueError(f"character index {j} outside [0, {t.q - 2}]")
    r = int(n) % t.q
    if r == 0:
        raise ValueError(f"n={n} is divisible by q={t.q}")
    k = (j * int(t.ind[r])) % (t.q - 1)
    return complex(np.exp(2j * np.pi * k / (t.q - 1)))


def char_sums_all(t: CharacterTable, w: BinnedWeights) -> np.ndarray:
    """``S(j) = sum_a w(a) e(j a / (q-1))`` for every ``j``.

    numpy's pocketfft backend switches to Bluestein's algorithm for lengths with
    large prime factors, so the cost is O(q log q) for every prime q.
    """
    if w.q != t.q:
        raise ValueError(f"weights built for q={w.q}, table for q={t.q}")
    n = t.q - 1
    return np.fft.ifft(np.asarray(w.w, dtype=np.complex128)) * n


def _mobius_upto(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in _small_primes(n):
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def prime_zeta(s: float) -> float:
    """``P(s) = sum_p p^-s`` for real ``s > 1`` via ``sum_k mu(k)/k log zeta(ks)``."""
    from scipy.special import zetac

    s = float(s)
    if s <= 1.0:
        raise ValueError("prime zeta needs s > 1")
    kmax = max(4, int(60.0 / (s * math.log(2.0))) + 2)  # 2^{-ks} below 1e-18
    mu = _mobius_upto(kmax)
    total = 0.0
    for k in range(1, kmax + 1):
        if mu[k]:
            total += mu[k] / k * math.log1p(zetac(k * s))
    return total


def prime_zeta_tail(s: float, bound: int) -> float:
    """``sum_{p > bound} p^-s`` for real ``s > 1``."""
    ps = sieve(int(bound)).primes.astype(np.float64)
    head = math.fsum(np.sort(ps**-s))
    return prime_zeta(s) - head
