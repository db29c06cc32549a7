"""The log-moment function M(z) = log E|L(sigma, X)|^z and its derivatives.

M splits over primes: ``M(z) = sum_p M_p(z)`` with
``M_p(z) = log E|1 - X p^-sigma|^{-z}``. Three evaluators cover the primes:

* small ``r = p^-sigma`` and ``x = kappa r``: the power series
  ``M_p = sum_n c_n(z) r^{2n}``, where ``c_n`` are the log-coefficients of
  ``2F1(z/2, z/2; 1; r^2)``. Power sums of ``r^2`` over all larger sieved
  primes are tabulated once per sigma, so the whole series set costs O(J).
* everything else below the sieve limit: the periodic integral over theta,
  after the substitution ``theta = 2 atan(beta tan(phi/2))`` that spreads the
  peak at theta = 0 when kappa r is large. Trapezoid nodes double until the
  cumulants settle.
* primes beyond the sieve limit: a prime-number-theorem density integral,
  either of the power series (moderate kappa) or of the Bessel surrogate
  ``f(kappa t^-sigma)`` with ``f = log I0`` (large kappa).

The module also evaluates the coefficient integrals ``a_n^(m)(sigma)`` and
``A_n^(m)`` by two independent quadrature routes.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numba as nb
import numpy as np
from scipy import integrate

from . import bessel
from .primes import prime_zeta_tail, sieve
from .quadrature import gauss_kronrod, tanh_sinh

__all__ = [
    "SIEVE_BOUND",
    "KAPPA_MAX",
    "EULER_GAMMA",
    "MomentProfile",
    "ExpansionCoeffs",
    "mp_deriv",
    "moment_profile",
    "m_global",
    "coeff_a",
    "coeff_A",
    "coeff_a_routes",
    "coeff_A_routes",
    "expansion_coeffs",
]

SIEVE_BOUND = 10**7
KAPPA_MAX = 1e12
EULER_GAMMA = 0.57721566490153286061

_J = 40  # series length in r^2
_X_SERIES = 1.2  # kappa r at most this for the series (radius ~2.405)
_R2_SERIES = 0.05  # and r^2 at most this
_BLOCK = 512  # checkpoint spacing for the tabulated power sums
_QUAD_TOL = 1e-13


@dataclass(frozen=True)
class MomentProfile:
    """M and its first three derivatives at one exponent.

    For complex exponents only ``m0`` is computed (its imaginary part is
    defined modulo 2 pi); ``m1..m3`` are then None.
    """

    sigma: float
    exponent: complex | float
    m0: complex | float
    m1: float | None
    m2: float | None
    m3: float | None
    err: tuple

    def entry(self, m: int):
        return (self.m0, self.m1, self.m2, self.m3)[m]


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not 0.5 < sigma <= 1.0:
        raise ValueError(f"sigma must lie in (1/2, 1], got {sigma}")
    return sigma


def _check_m(m: int, mmax: int = 3) -> int:
    if int(m) != m or not 0 <= m <= mmax:
        raise ValueError(f"derivative order must be an integer in 0..{mmax}, got {m}")
    return int(m)


# --------------------------------------------------------------------------
# series coefficients c_n(z) with z-jets

def _series_jets(z: complex, scale: float, nterms: int = _J) -> np.ndarray:
    """Scaled coefficients ``c_n(z) / scale^(2n)`` and their z-derivatives.

    Returns an array of shape (nterms + 1, 4): row n holds
    ``d^m/dz^m c_n / scale^(2n)`` for m = 0..3 (row 0 is zero). Complex z gives
    a complex array.
    """
    dtype = np.complex128 if isinstance(z, complex) else np.float64
    deg = 4

    def mul(a, b):
        out = np.zeros(deg, dtype=dtype)
        for i in range(deg):
            out[i:] += a[i] * b[: deg - i]
        return out

    # b_n = prod_{k<n} ((z/2 + k) / ((k+1) scale))^2 as truncated Taylor jets in z
    b = np.zeros((nterms + 1, deg), dtype=dtype)
    b[0, 0] = 1.0
    prod = b[0].copy()
    for k in range(nterms):
        fac = np.zeros(deg, dtype=dtype)
        fac[0] = (z / 2 + k) / ((k + 1) * scale)
        fac[1] = 0.5 / ((k + 1) * scale)
        prod = mul(mul(prod, fac), fac)
        b[k + 1] = prod
    c = np.zeros_like(b)
    for n in range(1, nterms + 1):
        acc = b[n].copy()
        for k in range(1, n):
            acc -= (k / n) * mul(c[k], b[n - k])
        c[n] = acc
    return c * np.array([1.0, 1.0, 2.0, 6.0])  # Taylor coefficients to derivatives


# --------------------------------------------------------------------------
# per-prime quadrature

@nb.njit(cache=True)
def _quad_moments(r, kappa, out):
    """Cumulants of d = h - h0 under the kappa-tilted angle measure.

    ``out`` receives (log mean weight, mean, variance, third central moment,
    error estimate of the mean). Returns the number of nodes used.
    """
    h0 = -math.log1p(-r)
    omr2 = (1.0 - r) * (1.0 - r)
    x = kappa * r
    beta = 1.0
    if x > 1.0:
        beta = min(1.0, 2.0 * (1.0 - r) / math.sqrt(x))
    prev0 = prev1 = prev2 = prev3 = 0.0
    n = 8
    while True:
        ds = np.empty(n + 1)
        ws = np.empty(n + 1)
        for k in range(n + 1):
            if k == n:
                d = -2.0 * math.atanh(r)
                lw = kappa * d - math.log(beta)
            else:
                t = math.tan(0.5 * math.pi * k / n)
                bt = beta * t
                s2 = bt * bt / (1.0 + bt * bt)
                d = -0.5 * math.log1p(4.0 * r * s2 / omr2)
                lw = kappa * d + math.log(beta * (1.0 + t * t) / (1.0 + bt * bt))
            ds[k] = d
            ws[k] = math.exp(lw)
        ws[0] *= 0.5
        ws[n] *= 0.5
        s0 = 0.0
        s1 = 0.0
        for k in range(n + 1):
            s0 += ws[k]
            s1 += ws[k] * ds[k]
        mu = s1 / s0
        s2c = 0.0
        s3c = 0.0
        for k in range(n + 1):
            e = ds[k] - mu
            s2c += ws[k] * e * e
            s3c += ws[k] * e * e * e
        v0 = math.log(s0 / n)
        v2 = s2c / s0
        v3 = s3c / s0
        if n > 8:
            ok = (
                abs(v0 - prev0) <= 1e-14 * (1.0 + abs(v0))
                and abs(mu - prev1) <= 1e-13 * abs(mu)
                and abs(v2 - prev2) <= 1e-12 * v2
                and abs(v3 - prev3) <= 1e-10 * (abs(v3) + v2 ** 1.5)
            )
            if ok or n >= 1 << 18:
                out[0] = v0
                out[1] = mu
                out[2] = v2
                out[3] = v3
                out[4] = abs(mu - prev1) + abs(v0 - prev0) / max(kappa, 1.0)
                return n
        prev0, prev1, prev2, prev3 = v0, mu, v2, v3
        n *= 2


@nb.njit(parallel=True, cache=True)
def _quad_all(rs, kappa, res):
    for i in nb.prange(len(rs)):
        _quad_moments(rs[i], kappa, res[i])


def _quad_real(rs: np.ndarray, kappa: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-prime (M_p, M_p', M_p'', M_p''') rows and error rows for real kappa."""
    res = np.empty((len(rs), 5))
    if len(rs):
        _quad_all(rs, float(kappa), res)
    h0 = -np.log1p(-rs)
    vals = np.column_stack([kappa * h0 + res[:, 0], h0 + res[:, 1], res[:, 2], res[:, 3]])
    errs = np.column_stack([
        _QUAD_TOL * (1 + np.abs(vals[:, 0])), res[:, 4], 1e-12 * res[:, 2] + 1e-300,
        1e-10 * (np.abs(res[:, 3]) + res[:, 2] ** 1.5),
    ])
    return vals, errs


def _quad_complex(r: float, z: complex) -> tuple[complex, float]:
    """M_p(z) for complex z by the same substitution, nodes grown with |Im z|."""
    kappa, t_im = z.real, z.imag
    h0 = -math.log1p(-r)
    x = kappa * r
    beta = min(1.0, 2.0 * (1.0 - r) / math.sqrt(x)) if x > 1.0 else 1.0
    n = 16 * max(1, 2 ** math.ceil(math.log2(max(1.0, math.sqrt(abs(t_im) * r) + 1))))
    prev = None
    while True:
        t = np.tan(0.5 * np.pi * np.arange(n) / n)  # the node phi = pi is appended below
        bt2 = (beta * t) ** 2 / (1 + (beta * t) ** 2)
        d = np.append(-0.5 * np.log1p(4 * r * bt2 / (1 - r) ** 2), -2.0 * math.atanh(r))
        jac = np.append(beta * (1 + t * t) / (1 + (beta * t) ** 2), 1.0 / beta)
        w = np.exp(z * d) * jac
        w[0] *= 0.5
        w[-1] *= 0.5
        val = z * h0 + np.log(np.sum(w) / n)
        if prev is not None and abs(val - prev) <= 1e-13 * (1 + abs(val)):
            return complex(val), abs(val - prev)
        if n >= 1 << 20:
            raise ArithmeticError(f"complex moment quadrature did not converge at p^-sigma={r}, z={z}")
        prev = val
        n *= 2


def _series_ok(r: float, kappa_abs: float) -> bool:
    return r * r <= _R2_SERIES and kappa_abs * r <= _X_SERIES


def mp_deriv(sigma: float, p: int, exponent, m: int):
    """M_p^(m)(z), the m-th z-derivative of log E|1 - X p^-sigma|^{-z}.

    Real exponents allow m = 0..3; complex exponents only m = 0.
    """
    sigma = _check_sigma(sigma)
    m = _check_m(m)
    z = exponent
    is_complex = isinstance(z, complex) or np.iscomplexobj(z)
    if is_complex:
        z = complex(z)
        if m != 0:
            raise ValueError("complex exponents support m = 0 only")
        if z.real < 0:
            raise ValueError("exponent must have nonnegative real part")
    else:
        z = float(z)
        if z < 0:
            raise ValueError("exponent must be nonnegative")
    if int(p) < 2:
        raise ValueError("p must be a prime")
    r = float(p) ** -sigma
    if _series_ok(r, abs(z)):
        scale = max(abs(z), 1.0)
        jets = _series_jets(z, scale)
        powers = (scale * r) ** (2 * np.arange(_J + 1))
        return jets[:, m] @ powers
    if is_complex:
        return _quad_complex(r, z)[0]
    vals, _ = _quad_real(np.array([r]), z)
    return float(vals[0, m])


# --------------------------------------------------------------------------
# tabulated power sums over the sieve

@dataclass(frozen=True)
class _SieveSums:
    r: np.ndarray  # p^-sigma for all sieved primes, decreasing
    suffix: np.ndarray  # suffix[n, b] = sum_{i >= b*B} (r_i / r_{b*B})^{2n}
    bound: int


@lru_cache(maxsize=8)
def _sieve_sums(sigma: float, bound: int = SIEVE_BOUND) -> _SieveSums:
    ps = sieve(bound).primes.astype(np.float64)
    r = ps**-sigma
    nblk = (len(r) + _BLOCK - 1) // _BLOCK
    starts = np.arange(nblk) * _BLOCK
    x2 = r * r
    # block sums of x2^n relative to each block's first element, then rescaled suffixes
    suffix = np.zeros((_J + 1, nblk))
    lead = x2[starts]
    rel = x2 / np.repeat(lead, _BLOCK)[: len(r)]
    ratio = lead[1:] / lead[:-1]  # <= 1
    powrel = np.ones_like(rel)
    powratio = np.ones_like(ratio)
    for n in range(_J + 1):
        blk = np.add.reduceat(powrel, starts)
        acc = np.empty(nblk)
        acc[-1] = blk[-1]
        for b in range(nblk - 2, -1, -1):
            acc[b] = blk[b] + powratio[b] * acc[b + 1]
        suffix[n] = acc
        powrel = powrel * rel
        powratio = powratio * ratio
    suffix.flags.writeable = False
    r.flags.writeable = False
    return _SieveSums(r, suffix, bound)


def _exp1_scaled(y: float) -> float:
    """e^y E_1(y) for y >= 1 by backward evaluation of its continued fraction."""
    acc = 0.0
    for k in range(80, 0, -1):
        acc = k * k / (y + 2 * k + 1 - acc)
    return 1.0 / (y + 1 - acc)


def _bessel_tail(sigma: float, kappa: float, bound: int) -> tuple[np.ndarray, np.ndarray]:
    """Density integral of p^{-m sigma} f^(m)(kappa p^-sigma) over p > bound, m = 0..3."""
    up = kappa * bound**-sigma
    lk = math.log(kappa)
    vals = np.empty(4)
    errs = np.empty(4)
    for m in range(4):
        expo = m - 1.0 / sigma - 1.0

        def integrand(u, m=m, expo=expo):
            return float(bessel.log_i0_deriv(m, u)) * u**expo / (lk - math.log(u))

        pts = [p for p in (0.5, 1.0, 20.0) if p < up]
        v, e = integrate.quad(integrand, 0.0, up, points=pts or None, epsabs=0.0, epsrel=1e-12, limit=400)
        vals[m] = kappa ** (1.0 / sigma - m) * v
        errs[m] = kappa ** (1.0 / sigma - m) * e
    # surrogate error O(r) relative plus the density approximation
    errs += np.abs(vals) * (bound**-sigma + 1e-3 * math.sqrt(bound) * math.log(bound) / bound)
    return vals, errs


def _series_tail(sigma: float, jets: np.ndarray, scale: float, bound: int) -> tuple[np.ndarray, np.ndarray]:
    """Series contribution of the primes beyond the sieve."""
    logp = math.log(bound)
    rb = bound**-sigma
    vals = jets[1] * (scale * rb) ** 2 * (prime_zeta_tail(2 * sigma, bound) / rb**2)
    errs = np.abs(vals) * 1e-14
    for n in range(2, _J + 1):
        y = (2 * n * sigma - 1) * logp
        # s^{2n} int_P^oo t^{-2n sigma} dt / log t = (s r_P)^{2n} P e^y E1(y)
        term = jets[n] * (scale * rb) ** (2 * n) * bound * _exp1_scaled(y)
        vals = vals + term
        errs = errs + np.abs(term) * 2e-3
    return vals, errs


_PROFILE_CACHE: dict = {}


def moment_profile(sigma: float, exponent, bound: int = SIEVE_BOUND) -> MomentProfile:
    """M(z), M'(z), M''(z), M'''(z) summed over all primes, with error estimates."""
    sigma = _check_sigma(sigma)
    is_complex = isinstance(exponent, complex) or np.iscomplexobj(exponent)
    z = complex(exponent) if is_complex else float(exponent)
    kappa = z.real if is_complex else z
    if not 0.0 <= kappa <= KAPPA_MAX:
        raise ValueError(f"exponent real part must lie in [0, {KAPPA_MAX:g}], got {kappa}")
    key = (sigma, z, bound)
    hit = _PROFILE_CACHE.get(key)
    if hit is not None:
        return hit

    ss = _sieve_sums(sigma, bound)
    r = ss.r
    za = abs(z)
    # first index where the series applies; r decreases with the index
    i0 = int(np.searchsorted(-r, -min(math.sqrt(_R2_SERIES), _X_SERIES / za if za > 0 else np.inf), side="left"))
    scale = max(za, 1.0)
    jets = _series_jets(z, scale)
    ncol = 1 if is_complex else 4
    total = np.zeros(ncol, dtype=np.complex128 if is_complex else np.float64)
    err = np.zeros(ncol)

    # quadrature head
    if i0 > 0:
        if is_complex:
            for ri in r[:i0]:
                v, e = _quad_complex(float(ri), z)
                total[0] += v
                err[0] += e
        else:
            vals, errs = _quad_real(np.asarray(r[:i0]), kappa)
            total += vals.sum(axis=0)
            err += errs.sum(axis=0) + 1e-16 * np.abs(vals).sum(axis=0)

    # series over the sieved primes from i0 on
    if i0 < len(r):
        cp = min(len(r), ((i0 + _BLOCK - 1) // _BLOCK) * _BLOCK)
        n = np.arange(_J + 1)
        part = np.zeros(_J + 1)
        if cp > i0:
            part += ((scale * r[i0:cp, None]) ** (2 * n)).sum(axis=0)
        if cp < len(r):
            b = cp // _BLOCK
            part += (scale * r[cp]) ** (2 * n) * ss.suffix[:, b]
        part[0] = 0.0
        contrib = jets[:, :ncol].T @ part
        total += contrib
        lastterm = np.abs(jets[_J, :ncol]) * part[_J] + np.abs(jets[_J - 1, :ncol]) * part[_J - 1]
        err += lastterm + 1e-15 * np.abs(jets[:, :ncol].T) @ part

    # beyond the sieve
    xb = za * bound**-sigma
    if xb <= _X_SERIES:
        tv, te = _series_tail(sigma, jets[:, :ncol], scale, bound)
        total += tv
        err += te
    else:
        if is_complex:
            raise ValueError("complex exponents are limited to |z| p^-sigma <= 1.2 at the sieve bound")
        tv, te = _bessel_tail(sigma, kappa, bound)
        total += tv
        err += te

    if is_complex:
        prof = MomentProfile(sigma, z, complex(total[0]), None, None, None, (float(err[0]),))
    else:
        prof = MomentProfile(sigma, z, *(float(v) for v in total), tuple(float(e) for e in err))
    if len(_PROFILE_CACHE) > 4096:
        _PROFILE_CACHE.clear()
    _PROFILE_CACHE[key] = prof
    return prof


def m_global(sigma: float, exponent, m: int):
    """M^(m)(z) over all primes; see ``moment_profile`` for the error estimate."""
    m = _check_m(m)
    prof = moment_profile(sigma, exponent)
    val = prof.entry(m)
    if val is None:
        raise ValueError("complex exponents support m = 0 only")
    return val


# --------------------------------------------------------------------------
# coefficient integrals

_U_CUT = bessel.U_SEAM
_NASYM = 36
_CK = bessel.asymptotic_rho_coeffs(_NASYM)


def _upper_gamma_int(n: int, x: float) -> float:
    """Gamma(n+1, x) for integer n >= 0."""
    term = 1.0
    acc = 1.0
    for k in range(1, n + 1):
        term *= x / k
        acc += term
    return math.factorial(n) * math.exp(-x) * acc


def _power_log_tail(alpha: float, n: int, cut: float = _U_CUT) -> float:
    """int_cut^oo u^-alpha (log u)^n du for alpha > 1."""
    b = alpha - 1.0
    return _upper_gamma_int(n, b * math.log(cut)) / b ** (n + 1)


def _f_asym_terms(m: int):
    """(coefficient, power k, extra log power) triples with f^(m)(u) ~ sum coef u^-k (log u)^e."""
    c = _CK
    out = []
    if m == 0:
        out += [(1.0, -1, 0), (-0.5 * math.log(2 * math.pi), 0, 0), (-0.5, 0, 1)]
        out += [(c[k] / (1 - k), k - 1, 0) for k in range(2, _NASYM + 1)]
    elif m == 1:
        out += [(1.0, 0, 0)] + [(c[k], k, 0) for k in range(1, _NASYM + 1)]
    else:
        out += [(-k * c[k], k + 1, 0) for k in range(1, _NASYM + 1)]
    return out


def _tail_integral(m: int, n: int, weight_power: float, drop_leading: bool) -> float:
    """int_cut^oo f^(m)(u) u^weight_power (log u)^n du from the asymptotic series.

    ``drop_leading`` removes the growing term (u for f, 1 for f'), which gives
    the regularised integrands at sigma = 1.
    """
    total = 0.0
    for coef, k, e in _f_asym_terms(m):
        if drop_leading and ((m == 0 and k == -1) or (m == 1 and k == 0)):
            continue
        alpha = k - weight_power
        if alpha <= 1.0:
            raise ValueError("divergent coefficient integral")
        total += coef * _power_log_tail(alpha, n + e)
    return total


def _fm(m: int, u):
    return bessel.log_i0_deriv(m, u)


def _weighted(fm: np.ndarray, u: np.ndarray, n: int, wp: float) -> np.ndarray:
    """fm * (log u)^n * u^wp, formed in log space so tiny and huge u stay finite."""
    lu = np.log(u)
    with np.errstate(divide="ignore", under="ignore"):
        mag = np.exp(np.log(np.abs(fm)) + wp * lu)
    return np.sign(fm) * mag * lu**n


def _check_a_args(sigma: float, n: int, m: int) -> None:
    if not 0.5 < sigma < 1.0:
        raise ValueError(f"a_n^(m) needs 1/2 < sigma < 1, got {sigma}")
    if int(n) != n or not 0 <= n <= 4:
        raise ValueError(f"n must be an integer in 0..4, got {n}")
    _check_m(m, 2)


def _a_pieces(sigma: float, n: int, m: int):
    wp = m - 1.0 - 1.0 / sigma

    def g(u):
        u = np.asarray(u, dtype=np.float64)
        return _weighted(_fm(m, u), u, n, wp)

    return g, wp


def _route_gk(g, tail: float, head_lo: float = 0.0) -> float:
    scalar = lambda u: float(g(np.array([u]))[0])  # noqa: E731
    v1 = gauss_kronrod(scalar, head_lo, 1.0, tol=1e-13).value
    v2 = gauss_kronrod(scalar, 1.0, _U_CUT, tol=1e-13, points=[2.0, 5.0, 10.0]).value
    return v1 + v2 + tail


def _route_ts(g, gtail) -> float:
    """tanh-sinh on [0,1], [1,cut] and, via u = cut/w, on the tail."""
    v1 = tanh_sinh(g, 0.0, 1.0).value
    v2 = tanh_sinh(g, 1.0, _U_CUT).value

    def mapped(w):
        w = np.asarray(w, dtype=np.float64)
        out = np.zeros_like(w)
        ok = w > 1e-298
        u = _U_CUT / w[ok]
        # cut / w^2 = u * (u / cut), grouped so that nothing overflows
        out[ok] = (gtail(u) * u) * (u / _U_CUT)
        return out

    v3 = tanh_sinh(mapped, 0.0, 1.0).value
    return v1 + v2 + v3


def coeff_a_routes(sigma: float, n: int, m: int) -> tuple[float, float]:
    """a_n^(m)(sigma) by Gauss-Kronrod plus asymptotic tail, and by tanh-sinh throughout."""
    sigma = float(sigma)
    _check_a_args(sigma, n, m)
    g, wp = _a_pieces(sigma, n, m)
    ra = _route_gk(g, _tail_integral(m, n, wp, drop_leading=False))
    rb = _route_ts(g, g)
    return ra, rb


@lru_cache(maxsize=256)
def coeff_a(sigma: float, n: int, m: int) -> float:
    """a_n^(m)(sigma) = int_0^oo f^(m)(u) (log u)^n u^{m-1-1/sigma} du."""
    return coeff_a_routes(sigma, n, m)[0]


def coeff_A_routes(n: int, m: int) -> tuple[float, float]:
    """A_n^(m) by the two quadrature routes."""
    if int(n) != n or not 0 <= n <= 4:
        raise ValueError(f"n must be an integer in 0..4, got {n}")
    m = _check_m(m, 2)
    wp = m - 2.0

    def head(u):
        u = np.asarray(u, dtype=np.float64)
        return _weighted(_fm(m, u), u, n, wp)

    def reg(u):
        u = np.asarray(u, dtype=np.float64)
        fm = _fm(m, u)
        if m == 0:
            fm = fm - u
        elif m == 1:
            fm = fm - 1.0
        return _weighted(fm, u, n, wp)

    tail = _tail_integral(m, n, wp, drop_leading=True)
    scal_h = lambda u: float(head(np.array([u]))[0])  # noqa: E731
    scal_r = lambda u: float(reg(np.array([u]))[0])  # noqa: E731
    ra = (
        gauss_kronrod(scal_h, 0.0, 1.0, tol=1e-13).value
        + gauss_kronrod(scal_r, 1.0, _U_CUT, tol=1e-13, points=[2.0, 5.0, 10.0]).value
        + tail
    )

    def mapped(w):
        w = np.asarray(w, dtype=np.float64)
        out = np.zeros_like(w)
        ok = w > 1e-298
        u = _U_CUT / w[ok]
        out[ok] = (reg(u) * u) * (u / _U_CUT)
        return out

    rb = tanh_sinh(head, 0.0, 1.0).value + tanh_sinh(reg, 1.0, _U_CUT).value + tanh_sinh(mapped, 0.0, 1.0).value
    return ra, rb


@lru_cache(maxsize=64)
def coeff_A(n: int, m: int) -> float:
    """A_n^(m): the sigma = 1 coefficient integrals, regularised at infinity for m < 2."""
    return coeff_A_routes(n, m)[0]


# --------------------------------------------------------------------------
# expansion coefficients

@dataclass(frozen=True)
class ExpansionCoeffs:
    sigma: float
    a: np.ndarray  # a[n, m] = a_n^(m)
    A: np.ndarray | None  # A[n, m] = A_n^(m)
    gsigma: float | None
    frak_a0: float | None
    frak_a1_slope: float | None
    frak_a1_const: float | None
    A0: float
    gamma_euler: float = EULER_GAMMA
    a_alt: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> str:
        """Serialise with the tables keyed by "sigma,n,m"; floats as %.17g strings."""
        d = asdict(self)
        d.pop("a_alt")
        fmt = lambda v: None if v is None else f"{float(v):.17g}"  # noqa: E731
        out = {k: fmt(v) for k, v in d.items() if k not in ("a", "A")}
        for name, tab in (("a", self.a), ("A", self.A)):
            if tab is None:
                out[name] = None
                continue
            sig = self.sigma if name == "a" else 1.0
            out[name] = {f"{sig:g},{n},{m}": fmt(tab[n, m]) for n in range(tab.shape[0]) for m in range(tab.shape[1])}
        return json.dumps(out, indent=2, sort_keys=True)


def expansion_coeffs(sigma: float, nmax: int = 2) -> ExpansionCoeffs:
    """Coefficient tables and the derived constants g, frak a0, frak a1, A0."""
    sigma = _check_sigma(sigma)
    A = np.array([[coeff_A(n, m) for m in range(3)] for n in range(nmax + 1)])
    A0 = float(A[0, 0])
    if sigma == 1.0:
        return ExpansionCoeffs(sigma, np.full((nmax + 1, 3), np.nan), A, None, None, None, None, A0)
    a = np.array([[coeff_a(sigma, n, m) for m in range(3)] for n in range(nmax + 1)])
    e = sigma / (1 - sigma)
    g = (e / a[0, 1]) ** e
    frak_a0 = g * (1 - a[0, 0] / a[0, 1])
    slope = g * sigma
    const = g * (1 - sigma) * (math.log(g) - a[1, 0] / a[0, 0])
    return ExpansionCoeffs(sigma, a, A, g, frak_a0, slope, const, A0)
