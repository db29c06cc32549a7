"""Saddle point kappa(tau) and the model tail Psi(tau).

For 1/2 < sigma < 1 the saddle point solves ``M'(kappa) = tau`` and::

    Psi(tau) ~ E|L|^kappa e^{-tau kappa} / (kappa sqrt(2 pi M''(kappa)))

At sigma = 1 the tail is measured against ``e^gamma tau``, so the equation
becomes ``M'(kappa) = log tau + gamma`` and ``e^{-tau kappa}`` turns into
``(e^gamma tau)^{-kappa}``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .moments import EULER_GAMMA, KAPPA_MAX, expansion_coeffs, moment_profile

__all__ = [
    "ConvergenceError",
    "SaddleResult",
    "ExpansionEstimate",
    "solve_kappa",
    "psi_saddle",
    "kappa_expansion",
    "psi_expansion",
    "curve_to_csv",
]

_MAX_ITER = 200


class ConvergenceError(ArithmeticError):
    """The saddle-point solver failed to converge; carries the last bracket."""

    def __init__(self, msg: str, bracket: tuple[float, float]):
        super().__init__(f"{msg} (bracket [{bracket[0]:.17g}, {bracket[1]:.17g}])")
        self.bracket = bracket


@dataclass(frozen=True)
class SaddleResult:
    sigma: float
    tau: float
    kappa: float
    psi: float
    log_psi: float
    parts: dict = field(default_factory=dict)
    method: str = "saddle"


@dataclass(frozen=True)
class ExpansionEstimate:
    """Closed-form tail with the size of the first omitted term on the log scale."""

    sigma: float
    tau: float
    psi: float
    log_psi: float
    log_uncertainty: float


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not 0.5 < sigma <= 1.0:
        raise ValueError(f"sigma must lie in (1/2, 1], got {sigma}")
    return sigma


def _target(sigma: float, tau: float) -> float:
    if sigma == 1.0:
        if tau < 1.0:
            raise ValueError(f"at sigma = 1 tau must be >= 1, got {tau}")
        return math.log(tau) + EULER_GAMMA
    if tau < 0.0:
        raise ValueError(f"tau must be >= 0 (M'(0) = 0), got {tau}")
    return tau


def _warm_start(sigma: float, tau: float) -> float:
    if sigma == 1.0:
        # Mertens: M'(kappa) ~ log log kappa + gamma + A_0^(1) / log kappa
        a01 = expansion_coeffs(1.0, 0).A[0, 1]
        return min(math.exp(min(tau - a01, math.log(KAPPA_MAX))), KAPPA_MAX)
    guess = kappa_expansion(sigma, tau) if tau >= 3.0 else 0.0
    # the two-term expansion can go negative at small tau
    return min(guess, KAPPA_MAX) if guess > 1.0 else max(1.0, 4.0 * tau)


def solve_kappa(sigma: float, tau: float) -> float:
    """Solve M'(kappa) = tau (sigma < 1) or M'(kappa) = log tau + gamma (sigma = 1)."""
    sigma = _check_sigma(sigma)
    tau = float(tau)
    target = _target(sigma, tau)
    if target == 0.0:
        return 0.0
    tol = 1e-10 * max(1.0, abs(target))
    lo, hi = 0.0, _warm_start(sigma, tau)
    while moment_profile(sigma, hi).m1 < target:
        if hi >= KAPPA_MAX:
            raise ConvergenceError(f"M' stays below {target} up to the exponent cap", (lo, hi))
        lo, hi = hi, min(2.0 * hi, KAPPA_MAX)
    x = hi
    for _ in range(_MAX_ITER):
        prof = moment_profile(sigma, x)
        resid = prof.m1 - target
        if abs(resid) <= tol:
            return x
        if resid > 0:
            hi = x
        else:
            lo = x
        # Newton in log kappa once kappa > 1, where M' grows like a power of kappa
        if x > 1.0:
            step = resid / (x * prof.m2)
            cand = x * math.exp(-max(min(step, 5.0), -5.0))
        else:
            cand = x - resid / prof.m2
        if not lo < cand < hi:
            cand = math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
        if cand == x:
            return x
        x = cand
    raise ConvergenceError(f"no convergence after {_MAX_ITER} iterations", (lo, hi))


def psi_saddle(sigma: float, tau: float) -> SaddleResult:
    """Saddle-point tail; ``log_psi`` stays finite when ``psi`` underflows."""
    sigma = _check_sigma(sigma)
    tau = float(tau)
    if tau < 1.0:
        raise ValueError(f"the saddle formula needs tau >= 1, got {tau}")
    kappa = solve_kappa(sigma, tau)
    prof = moment_profile(sigma, kappa)
    slope = tau if sigma < 1.0 else math.log(tau) + EULER_GAMMA
    exponent = prof.m0 - slope * kappa
    log_psi = exponent - math.log(kappa) - 0.5 * math.log(2.0 * math.pi * prof.m2)
    parts = {"M": prof.m0, "M2": prof.m2, "exponent": exponent}
    return SaddleResult(sigma, tau, kappa, math.exp(log_psi), log_psi, parts, "saddle")


def kappa_expansion(sigma: float, tau: float) -> float:
    """Two-term expansion of the saddle point for 1/2 < sigma < 1 and tau >= 3."""
    sigma = _check_sigma(sigma)
    tau = float(tau)
    if sigma == 1.0:
        raise ValueError("the kappa expansion is stated for sigma < 1")
    if tau < 3.0:
        raise ValueError(f"kappa_expansion needs tau >= 3, got {tau}")
    c = expansion_coeffs(sigma, 1)
    e = sigma / (1.0 - sigma)
    L = math.log(tau)
    f1 = e * math.log(L) + math.log(c.gsigma) - c.a[1, 1] / c.a[0, 1]
    return c.gsigma * (tau * L) ** e * (1.0 + f1 / L)


def psi_expansion(sigma: float, tau: float) -> ExpansionEstimate:
    """Leading closed-form tail: two terms for sigma < 1, the leading term at sigma = 1."""
    sigma = _check_sigma(sigma)
    tau = float(tau)
    if tau < 3.0:
        raise ValueError(f"psi_expansion needs tau >= 3, got {tau}")
    L = math.log(tau)
    if sigma == 1.0:
        A0 = expansion_coeffs(1.0, 0).A0
        log_psi = -math.exp(tau - A0 - 1.0) / tau
        unc = abs(log_psi) / tau
    else:
        c = expansion_coeffs(sigma, 1)
        ll = math.log(L)
        scale = (tau * L**sigma) ** (1.0 / (1.0 - sigma))
        log_psi = -scale * (c.frak_a0 + (c.frak_a1_slope * ll + c.frak_a1_const) / L)
        unc = scale * c.frak_a0 * (ll / L) ** 2
    return ExpansionEstimate(sigma, tau, math.exp(log_psi), log_psi, unc)


def curve_to_csv(results: list[SaddleResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "kappa", "psi", "log_psi", "method"])
    for r in results:
        w.writerow([f"{r.tau:.17g}", f"{r.kappa:.17g}", f"{r.psi:.17g}", f"{r.log_psi:.17g}", r.method])
    return buf.getvalue()
