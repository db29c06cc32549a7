"""The random Euler product L(sigma, X) = prod_{p <= y} (1 - X(p) p^-sigma)^-1.

Sampling uses a stateless counter hash: the angle of X(p) in sample ``k`` is a
function of ``(seed, k, p)`` only, so any sample can be regenerated in isolation
and results do not depend on how work is split across threads.

The characteristic function of ``log L`` is a product of per-prime factors, each
a periodic integral over the angle evaluated by the trapezoid rule.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numba as nb
import numpy as np

from .primes import prime_zeta_tail, sieve
from .smoothing import Rectangle, g_weight

__all__ = [
    "RandomEulerConfig",
    "TailEstimate",
    "tail_sd",
    "sample_batch",
    "sample_log_l",
    "mc_tail",
    "tails_to_csv",
    "char_fn",
    "model_tail",
    "char_fn_points",
    "effective_cutoff",
    "support_radius",
    "CharFnGrid",
    "char_fn_grid",
    "rect_table",
    "psi_rect",
    "RectProbability",
]

EULER_GAMMA = 0.57721566490153286061

_BLOCK = 1024
_SERIES_R = 0.1  # primes with p^-sigma below this use the log series


@dataclass(frozen=True)
class RandomEulerConfig:
    """Monte Carlo configuration.

    ``tail_eps`` bounds the standard deviation of the discarded primes
    ``sqrt(sum_{p>y} sum_n p^{-2 n sigma} / (2 n^2))``; pass ``None`` to skip the
    check (the value is still available as :func:`tail_sd`).
    """

    sigma: float
    y: float
    samples: int
    seed: int = 0
    tail_eps: float | None = 1e-3

    def __post_init__(self):
        if not 0.5 < self.sigma <= 1.0:
            raise ValueError(f"sigma must lie in (1/2, 1], got {self.sigma}")
        if self.y < 2:
            raise ValueError(f"cutoff y must be >= 2, got {self.y}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.tail_eps is not None:
            sd = tail_sd(self.sigma, self.y)
            if sd > self.tail_eps:
                raise ValueError(
                    f"cutoff y={self.y:g} leaves tail standard deviation {sd:.3g} > tail_eps={self.tail_eps:g}"
                )


@dataclass(frozen=True)
class TailEstimate:
    tau: float
    prob: float
    std_err: float


@lru_cache(maxsize=64)
def tail_sd(sigma: float, y: float) -> float:
    """Standard deviation of Re (or Im) of the primes beyond ``y``."""
    bound = max(int(y), 2)
    total = 0.0
    for n in (1, 2, 3, 4):
        total += prime_zeta_tail(2 * n * sigma, bound) / (n * n)
    return math.sqrt(max(total, 0.0) / 2.0)


# ---------------------------------------------------------------------------
# counter-based sampling kernel

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_PMUL = np.uint64(0xD1B54A32D192ED03)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TURN = 2.0 * math.pi / 2.0**53


@nb.njit(inline="always", cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def _angles(key, k, ps):
    """Angles 2 pi * U[0,1) for one sample; reference implementation for tests."""
    base = _mix(key ^ (np.uint64(k) * _GOLD))
    out = np.empty(ps.shape[0])
    for i in range(ps.shape[0]):
        z = _mix(base + np.uint64(ps[i]) * _PMUL)
        out[i] = np.float64(z >> _S11) * _TURN
    return out


@nb.njit(fastmath={"contract", "arcp", "nsz"}, parallel=True, cache=True)
def _sample_kernel(key, start, count, ps, rs, nterms, out_re, out_im):
    nblocks = (count + _BLOCK - 1) // _BLOCK
    for blk in nb.prange(nblocks):
        k0 = blk * _BLOCK
        nb_ = min(_BLOCK, count - k0)
        bases = np.empty(_BLOCK, np.uint64)
        c = np.empty(_BLOCK)
        s = np.empty(_BLOCK)
        hr = np.empty(_BLOCK)
        hi = np.empty(_BLOCK)
        are = np.zeros(_BLOCK)
        aim = np.zeros(_BLOCK)
        for t in range(nb_):
            bases[t] = _mix(key ^ (np.uint64(start + k0 + t) * _GOLD))
        for i in range(ps.shape[0]):
            off = np.uint64(ps[i]) * _PMUL
            for t in range(nb_):
                z = _mix(bases[t] + off)
                w = np.int64(z >> _S11)  # 53-bit integer angle
                qd = (w + (1 << 50)) >> 51  # nearest quarter turn
                f = np.float64(w - (qd << 51)) * _TURN  # |f| <= pi/4
                f2 = f * f
                cs = 1.0 + f2 * (-0.5 + f2 * (1 / 24.0 + f2 * (-1 / 720.0 + f2 * (1 / 40320.0 + f2 * (
                    -1 / 3628800.0 + f2 * (1 / 479001600.0 + f2 * (-1 / 87178291200.0 + f2 * (1 / 20922789888000.0))))))))
                sn = f * (1.0 + f2 * (-1 / 6.0 + f2 * (1 / 120.0 + f2 * (-1 / 5040.0 + f2 * (1 / 362880.0 + f2 * (
                    -1 / 39916800.0 + f2 * (1 / 6227020800.0 + f2 * (-1 / 1307674368000.0 + f2 * (1 / 355687428096000.0)))))))))
                b0 = np.float64(qd & 1)
                sg = 1.0 - 2.0 * np.float64((qd >> 1) & 1)
                c[t] = sg * (cs * (1.0 - b0) - sn * b0)
                s[t] = sg * (sn * (1.0 - b0) + cs * b0)
            r = rs[i]
            kk = nterms[i]
            if kk == 0:
                for t in range(nb_):
                    a = 1.0 - r * c[t]
                    b = -r * s[t]
                    are[t] -= 0.5 * math.log(a * a + b * b)
                    aim[t] -= math.atan2(b, a)
            else:
                # -log(1 - z) = sum_{m=1}^{kk} z^m / m by complex Horner, z = r e^{i theta}
                for t in range(nb_):
                    c[t] *= r
                    s[t] *= r
                    hr[t] = 1.0 / kk
                    hi[t] = 0.0
                for m in range(kk - 1, 0, -1):
                    im = 1.0 / m
                    for t in range(nb_):
                        tt = hr[t] * c[t] - hi[t] * s[t]
                        hi[t] = hr[t] * s[t] + hi[t] * c[t]
                        hr[t] = tt + im
                for t in range(nb_):
                    are[t] += hr[t] * c[t] - hi[t] * s[t]
                    aim[t] += hr[t] * s[t] + hi[t] * c[t]
        for t in range(nb_):
            out_re[k0 + t] = are[t]
            out_im[k0 + t] = aim[t]


@lru_cache(maxsize=16)
def _prime_setup(sigma: float, y: float):
    ps = sieve(max(int(y), 2)).primes
    rs = ps.astype(np.float64) ** -sigma
    nterms = np.zeros(len(ps), dtype=np.int64)
    for i, r in enumerate(rs):
        if r < _SERIES_R:
            k = 1
            while r ** (k + 1) / (k + 1) > 1e-17 * r:
                k += 1
            nterms[i] = k
    return ps, rs, nterms


def _key(seed: int) -> np.uint64:
    z = (int(seed) + 0x9E3779B97F4A7C15) % 2**64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % 2**64
    return np.uint64(z ^ (z >> 31))


def set_threads(n: int | None) -> None:
    """Set the numba thread count (``None`` reads ``LDIST_THREADS``)."""
    if n is None:
        env = os.environ.get("LDIST_THREADS")
        n = int(env) if env else None
    if n:
        nb.set_num_threads(max(1, min(int(n), nb.config.NUMBA_NUM_THREADS)))


def sample_batch(cfg: RandomEulerConfig, start: int = 0, count: int | None = None) -> np.ndarray:
    """Samples ``start .. start+count-1`` of ``log L(sigma, X)`` as complex numbers.

    Blocks are aligned to multiples of the kernel block size from sample 0, so a
    sample's value does not depend on which batch produced it.
    """
    if count is None:
        count = cfg.samples - start
    if start < 0 or count < 0 or start + count > cfg.samples:
        raise ValueError("sample range outside [0, samples)")
    ps, rs, nterms = _prime_setup(float(cfg.sigma), float(cfg.y))
    lo = (start // _BLOCK) * _BLOCK
    n = start + count - lo
    re = np.empty(n)
    im = np.empty(n)
    _sample_kernel(_key(cfg.seed), lo, n, ps, rs, nterms, re, im)
    out = re + 1j * im
    return out[start - lo :]


def sample_log_l(cfg: RandomEulerConfig, k: int) -> complex:
    """Sample ``k`` of ``log L(sigma, X)``."""
    if not 0 <= k < cfg.samples:
        raise ValueError("sample index out of range")
    return complex(sample_batch(cfg, k, 1)[0])


def _tail_threshold(tau: np.ndarray, mode: str) -> np.ndarray:
    if mode == "log-modulus":
        return tau
    if mode == "modulus-over-e^gamma":
        with np.errstate(divide="ignore"):
            return np.where(tau > 0, EULER_GAMMA + np.log(np.where(tau > 0, tau, 1.0)), -np.inf)
    raise ValueError(f"unknown tail mode {mode!r}")


def mc_tail(cfg: RandomEulerConfig, taus, mode: str | None = None, samples: np.ndarray | None = None,
            chunk: int = 1 << 20) -> list[TailEstimate]:
    """Monte Carlo estimates of P(log|L| > tau) or P(|L| > e^gamma tau).

    ``samples`` may hold precomputed values of :func:`sample_batch`.
    """
    taus = np.asarray(taus, dtype=np.float64)
    if taus.size == 0:
        raise ValueError("taus must be nonempty")
    if np.any(np.diff(taus) < 0):
        raise ValueError("taus must be ascending")
    if mode is None:
        mode = "modulus-over-e^gamma" if cfg.sigma == 1.0 else "log-modulus"
    thr = _tail_threshold(taus, mode)
    counts = np.zeros(len(taus), dtype=np.int64)
    n = cfg.samples
    for k0 in range(0, n, chunk):
        m = min(chunk, n - k0)
        x = samples[k0 : k0 + m].real if samples is not None else sample_batch(cfg, k0, m).real
        xs = np.sort(x)
        counts += m - np.searchsorted(xs, thr, side="right")
    p = counts / n
    se = np.sqrt(p * (1 - p) / n)
    return [TailEstimate(float(t), float(pp), float(s)) for t, pp, s in zip(taus, p, se)]


def tails_to_csv(tails: list[TailEstimate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "prob", "std_err"])
    for t in tails:
        w.writerow([f"{t.tau:.17g}", f"{t.prob:.17g}", f"{t.std_err:.17g}"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# characteristic function


def _trapezoid_nodes(r: np.ndarray, zsum: float, tol: float = 1e-16) -> np.ndarray:
    """Node counts (powers of two) for the per-prime trapezoid rule.

    ``exp(i(u Re w + v Im w))`` continues analytically to the strip |Im theta| < eta
    with modulus below ``exp(zsum * W(eta))``, ``W = -log(1 - r e^eta)`` and
    ``zsum = |u| + |v|``; the N-point rule then errs by at most
    ``2 exp(zsum W) e^{-N eta} / (1 - e^{-N eta})``.
    """
    r = np.asarray(r, dtype=np.float64)
    out = np.full(r.shape, 16, dtype=np.int64)
    frac = np.linspace(0.02, 0.98, 49)
    for i, rr in enumerate(r):
        etas = frac * math.log(1.0 / rr)
        wmax = -np.log1p(-rr * np.exp(etas))
        n = 16
        while n < 1 << 16:
            lb = math.log(2.0) + zsum * wmax - n * etas - np.log1p(-np.exp(-n * etas))
            if lb.min() < math.log(tol):
                break
            n *= 2
        out[i] = n
    return out


def _prime_points(r: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    th = 2.0 * np.pi * np.arange(n) / n
    w = -np.log1p(-r * np.exp(1j * th))
    return w.real, w.imag


def char_fn_points(sigma: float, us, vs, y: float) -> np.ndarray:
    """E exp(i u Re log L + i v Im log L) at the points (us[k], vs[k])."""
    if y < 2:
        raise ValueError("cutoff y must be >= 2")
    us = np.atleast_1d(np.asarray(us, dtype=np.float64))
    vs = np.atleast_1d(np.asarray(vs, dtype=np.float64))
    ps = sieve(int(y)).primes
    rs = ps.astype(np.float64) ** -float(sigma)
    zsum = float(np.max(np.abs(us) + np.abs(vs)))
    out = np.ones(len(us), dtype=np.complex128)
    if zsum == 0.0:
        return out
    # far primes: second cumulant, log phi_p = -(u^2+v^2) Li2(r^2) / 4
    far = rs * float(np.max(np.hypot(us, vs))) <= 1e-3
    out *= np.exp(-(us * us + vs * vs) / 4.0 * np.sum(rs[far] ** 2 * (1 + rs[far] ** 2 / 4.0)))
    near = rs[~far]
    for r, n in zip(near, _trapezoid_nodes(near, zsum)):
        a, b = _prime_points(r, int(n))
        out *= np.exp(1j * (np.outer(us, a) + np.outer(vs, b))).mean(axis=1)
    return out


def model_tail(sigma: float, taus, y: float, mode: str | None = None) -> np.ndarray:
    """P(log|L| > tau) (or P(|L| > e^gamma tau)) by Fourier inversion of the marginal.

    Gil-Pelaez: ``P(X > t) = 1/2 + (1/pi) int_0^oo Im(e^{-i xi t} phi(xi)) / xi dxi``
    with ``phi`` the characteristic function of ``X = Re log L``. Deterministic,
    so it serves as a noise-free model value where Monte Carlo error would
    dominate a comparison.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=np.float64))
    if mode is None:
        mode = "modulus-over-e^gamma" if sigma == 1.0 else "log-modulus"
    thr = _tail_threshold(taus, mode)
    U = effective_cutoff(float(sigma), float(y), 64.0)
    finite = np.isfinite(thr)
    tmax = float(np.max(np.abs(thr[finite]), initial=0.0))
    xi, w = _gl_panels(0.0, 2 * np.pi * U, min(1.0, 3.0 / (1.0 + tmax)))
    phi = char_fn_points(sigma, xi, np.zeros_like(xi), y)
    out = np.ones(len(taus))
    for k in np.flatnonzero(finite):
        integrand = np.imag(np.exp(-1j * xi * thr[k]) * phi) / xi
        out[k] = 0.5 + float(w @ integrand) / np.pi
    return np.clip(out, 0.0, 1.0)


def char_fn(sigma: float, u: float, v: float, y: float) -> complex:
    """E exp(i u Re log L + i v Im log L) over the primes ``p <= y``."""
    return complex(char_fn_points(sigma, [u], [v], y)[0])


def _gl_panels(lo: float, hi: float, width: float, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [lo, hi] with panels <= width."""
    x, w = np.polynomial.legendre.leggauss(order)
    npan = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, npan + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@lru_cache(maxsize=16)
def effective_cutoff(sigma: float, y: float, limit: float, tol: float = 1e-14, step: float = 0.05) -> float:
    """Frequency beyond which |phi(2 pi u, 2 pi v)| < tol along the axes and diagonals.

    Probes the rays on doubling ranges and stops once the last probe above
    ``tol`` lies in the first half of the range scanned so far.
    """
    dirs = np.array([(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)])
    hi = min(1.0, limit)
    lo = 0.0
    last = 0.0
    while True:
        t = np.arange(lo + step, hi + step / 2, step)
        us = np.concatenate([2 * np.pi * t * d[0] for d in dirs])
        vs = np.concatenate([2 * np.pi * t * d[1] for d in dirs])
        mags = np.abs(char_fn_points(sigma, us, vs, y)).reshape(len(dirs), len(t))
        big = np.flatnonzero(np.any(mags >= tol, axis=0))
        if big.size:
            last = t[big[-1]]
        if hi >= limit:
            return float(limit) if last >= limit - step else float(min(limit, 1.1 * last + step))
        if last <= 0.5 * hi:
            return float(min(limit, 1.1 * last + step))
        lo, hi = hi, min(2.0 * hi, limit)


def support_radius(sigma: float, y: float) -> float:
    """Box half-width outside which log L carries negligible mass (< 1e-15).

    Tails of Re and Im log L decay faster than Gaussian for sigma > 1/2, so
    eight standard deviations plus a margin is conservative.
    """
    ps = sieve(int(y)).primes.astype(np.float64)
    r2 = ps ** (-2.0 * sigma)
    sd = math.sqrt(0.5 * np.sum(r2 * (1 + r2 / 4 + r2 * r2 / 9)))
    return float(8.0 * sd + 4.0)


@dataclass
class CharFnGrid:
    """phi(2 pi u_i, 2 pi v_j) on Gauss-Legendre nodes of [0, U]^2 (both >= 0).

    The model is symmetric under conjugation, so phi(xi, -eta) = phi(xi, eta) and
    nonnegative v suffice.
    """

    sigma: float
    y: float
    T: float
    U: float
    nodes: np.ndarray
    weights: np.ndarray
    phi: np.ndarray = field(repr=False)
    marg_u: np.ndarray = field(repr=False)  # phi(2 pi u, 0)
    marg_v: np.ndarray = field(repr=False)  # phi(0, 2 pi v)


def _grid_product(rs: np.ndarray, un: np.ndarray, vn: np.ndarray, zsum: float) -> np.ndarray:
    out = np.ones((len(un), len(vn)), dtype=np.complex128)
    far = rs * 2 * np.pi * math.hypot(un.max(initial=0), vn.max(initial=0)) <= 1e-3
    if far.any():
        s2 = np.sum(rs[far] ** 2 * (1 + rs[far] ** 2 / 4.0))
        uu = (2 * np.pi * un) ** 2
        vv = (2 * np.pi * vn) ** 2
        out *= np.exp(-(uu[:, None] + vv[None, :]) * s2 / 4.0)
    near = rs[~far]
    ns = _trapezoid_nodes(near, zsum)
    for r, n in zip(near, ns):
        a, b = _prime_points(r, int(n))
        eu = np.exp(1j * 2 * np.pi * np.outer(un, a))
        ev = np.exp(1j * 2 * np.pi * np.outer(b, vn))
        out *= (eu @ ev) / n
    return out


@lru_cache(maxsize=8)
def char_fn_grid(sigma: float, y: float, T: float, amax: float, order: int = 16) -> CharFnGrid:
    """Tensor grid of the characteristic function for corners with |corner| <= amax."""
    U = effective_cutoff(float(sigma), float(y), float(T))
    omega = 2 * np.pi * (amax + 1.0) + 2.0
    nodes, weights = _gl_panels(0.0, U, min(0.5, 14.0 / omega, U), order)
    ps = sieve(int(y)).primes
    rs = ps.astype(np.float64) ** -float(sigma)
    zsum = 2 * np.pi * 2 * U
    phi = _grid_product(rs, nodes, nodes, zsum)
    zero = np.zeros(1)
    marg_u = _grid_product(rs, nodes, zero, zsum)[:, 0]
    marg_v = _grid_product(rs, zero, nodes, zsum)[0, :]
    return CharFnGrid(float(sigma), float(y), float(T), U, nodes, weights, phi, marg_u, marg_v)


def _corner_vectors(grid: CharFnGrid, corners: np.ndarray, imag_part: bool) -> np.ndarray:
    u = grid.nodes
    gw = grid.weights * g_weight(np.clip(u / grid.T, 0.0, 1.0)) / u
    c = np.asarray(corners, dtype=np.float64)[:, None]
    if imag_part:
        return -np.sin(2 * np.pi * c * u[None, :]) * gw[None, :]
    return np.expm1(-2j * np.pi * c * u[None, :]) * gw[None, :]


def rect_table(grid: CharFnGrid, acorners, bcorners) -> np.ndarray:
    """K(a, b) for all corner pairs; Psi(R) is the signed sum over R's corners."""
    A = _corner_vectors(grid, acorners, imag_part=False)
    B = _corner_vectors(grid, bcorners, imag_part=True)
    return 0.25 * np.imag(A @ grid.phi @ B.T)


def fejer_expectation(grid: CharFnGrid, c: float, axis: int) -> float:
    """E I(T (X - c)) for X = Re log L (axis 0) or Im log L (axis 1)."""
    T = grid.T
    eta = grid.nodes
    marg = grid.marg_u if axis == 0 else grid.marg_v
    lam = np.clip(1.0 - eta / T, 0.0, 1.0)
    val = np.sum(grid.weights * lam * marg * np.exp(-2j * np.pi * eta * c))
    return float(2.0 / T * val.real)


@dataclass(frozen=True)
class RectProbability:
    value: float
    kernel_error: float
    kernel_constant: float


C_KERNEL = 4.0


def psi_rect(sigma: float, r: Rectangle, T: float, y: float) -> RectProbability:
    """Model probability that log L lies in ``r``, via the smoothed indicator.

    ``kernel_error`` is ``C_KERNEL`` times the expected Fejer envelope at the four
    edges, the checkable form of the smoothing error bound.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    # corners far outside the support change the probability by < 1e-15; clipping
    # them keeps the quadrature grid coarse, and the clipped edges still enter
    # the Fejer envelope below
    box = support_radius(float(sigma), float(y))
    a1, a2, b1, b2 = (float(np.clip(c, -box, box)) for c in (r.a1, r.a2, r.b1, r.b2))
    if a1 >= a2 or b1 >= b2:
        return RectProbability(0.0, 0.0, 0.0)
    amax = max(abs(a1), abs(a2), abs(b1), abs(b2))
    grid = char_fn_grid(float(sigma), float(y), float(T), float(math.ceil(amax)))
    K = rect_table(grid, [a1, a2], [b1, b2])
    val = K[0, 0] - K[0, 1] - K[1, 0] + K[1, 1]
    env = sum(fejer_expectation(grid, c, 0) for c in (a1, a2))
    env += sum(fejer_expectation(grid, c, 1) for c in (b1, b2))
    eps = C_KERNEL * env
    return RectProbability(float(val), float(eps), float(eps * T))
