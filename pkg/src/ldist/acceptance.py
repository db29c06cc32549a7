"""The acceptance suite: eleven end-to-end checks, each against an independent oracle.

Each ``criterion_N`` returns a :class:`CriterionResult`; ``run_all`` runs them in
order. Both ``ldist selftest`` and the test suite call these functions, so the
two always check the same thing at the same tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np
from scipy.special import zeta

if TYPE_CHECKING:
    from .smoothing import Rectangle

__all__ = ["CriterionResult", "KernelTrial", "CRITERIA", "MC_SEED", "kernel_trials", "run_all", "format_line"]

ACCEPT_QS = (1009, 10007, 100003)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float


def format_line(r: CriterionResult) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] {r.number:2d} {r.title}: {r.detail} ({r.seconds:.1f}s)"


def _timed(fn: Callable[[], tuple[bool, str]]) -> tuple[bool, str, float]:
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


def _direct_prime_power_sum(sigma: float, y: int) -> float:
    """sum over p^n <= y of 1 / (n^2 p^{2 n sigma}), by trial division."""
    total = 0.0
    for p in range(2, y + 1):
        if all(p % d for d in range(2, int(p**0.5) + 1)):
            n, pk = 1, p
            while pk <= y:
                total += 1.0 / (n * n * pk ** (2 * sigma))
                n += 1
                pk *= p
    return total


def criterion_1() -> CriterionResult:
    from .dirichlet import r_y_all, truncation
    from .primes import build_table

    def body():
        q, sigma, y = 1009, 0.75, 10
        vals = r_y_all(build_table(q), truncation(sigma, y, q)).values
        lhs = float(np.mean(np.abs(vals) ** 2))  # average over all q - 1 characters
        rhs = _direct_prime_power_sum(sigma, y)
        return abs(lhs - rhs) <= 1e-10, f"mean |R|^2 = {lhs:.16f}, direct sum = {rhs:.16f}"

    ok, detail, secs = _timed(body)
    return CriterionResult(1, "moment identity", ok and secs < 1.0, detail, secs)


def criterion_2() -> CriterionResult:
    from .moments import coeff_a_routes

    def body():
        worst_id = worst_route = 0.0
        for sigma in (0.6, 0.75, 0.9):
            a00 = coeff_a_routes(sigma, 0, 0)
            a01 = coeff_a_routes(sigma, 0, 1)
            for k in range(2):
                worst_id = max(worst_id, abs(sigma * a01[k] - a00[k]))
            worst_route = max(worst_route, abs(a00[0] - a00[1]), abs(a01[0] - a01[1]))
        ok = worst_id <= 1e-6 and worst_route <= 1e-6
        return ok, f"max |sigma a0(1) - a0(0)| = {worst_id:.2e}, max route gap = {worst_route:.2e}"

    ok, detail, secs = _timed(body)
    return CriterionResult(2, "coefficient identity", ok and secs < 10.0, detail, secs)


def criterion_3() -> CriterionResult:
    from .moments import moment_profile

    def body():
        worst = 0.0
        for sigma in (0.6, 0.75, 0.9, 1.0):
            lz2 = math.log(zeta(2 * sigma))
            lz4 = math.log(zeta(4 * sigma))
            worst = max(worst, abs(moment_profile(sigma, 2.0).m0 - lz2))
            worst = max(worst, abs(moment_profile(sigma, 4.0).m0 - (4 * lz2 - lz4)))
        return worst <= 1e-8, f"max deviation from zeta closed forms = {worst:.2e}"

    ok, detail, secs = _timed(body)
    return CriterionResult(3, "closed-form moments", ok and secs < 30.0, detail, secs)


def criterion_4() -> CriterionResult:
    from .moments import mp_deriv

    def body():
        worst = 0.0
        for sigma in (0.6, 0.75, 0.9, 1.0):
            for p in (2, 3, 5):
                worst = max(worst, abs(mp_deriv(sigma, p, 2.0, 0) + math.log1p(-(p ** (-2 * sigma)))))
        return worst <= 1e-10, f"max deviation from -log(1 - p^-2sigma) = {worst:.2e}"

    ok, detail, secs = _timed(body)
    return CriterionResult(4, "Poisson-kernel factors", ok, detail, secs)


def criterion_5() -> CriterionResult:
    from .moments import mp_deriv

    def body():
        ref = -math.log1p(-(2**-0.75))
        val = mp_deriv(0.75, 2, 1e4, 1)
        rel = abs(val / ref - 1)
        return rel <= 0.01, f"M_2'(1e4) = {val:.10f}, -log(1-2^-0.75) = {ref:.10f}, rel = {rel:.2e}"

    ok, detail, secs = _timed(body)
    return CriterionResult(5, "large-exponent regime", ok, detail, secs)


MC_SEED = 20240601


def criterion_6(samples: int = 10**7, seed: int = MC_SEED, draws: dict | None = None) -> CriterionResult:
    """``draws`` may map sigma to precomputed ``sample_batch`` output for this seed."""
    from .random_model import RandomEulerConfig, mc_tail
    from .saddle import psi_saddle

    def body():
        parts = []
        ok = True
        for sigma, taus in ((0.75, (1.0, 1.5)), (1.0, (1.5, 2.0))):
            cfg = RandomEulerConfig(sigma, 1e4, samples, seed=seed, tail_eps=None)
            pre = None if draws is None else draws.get(sigma)
            for est in mc_tail(cfg, taus, samples=pre):
                lp_mc = math.log(est.prob)
                se_log = est.std_err / est.prob
                lp_sd = psi_saddle(sigma, est.tau).log_psi
                tol = max(3 * se_log, 0.05 * abs(lp_mc))
                good = abs(lp_sd - lp_mc) <= tol
                ok &= good
                parts.append(f"s={sigma:g} t={est.tau:g}: |{lp_sd:.4f} - ({lp_mc:.4f})| "
                             f"{'<=' if good else '>'} {tol:.4f}")
        return ok, "; ".join(parts)

    ok, detail, secs = _timed(body)
    return CriterionResult(6, "saddle vs Monte Carlo", ok and secs < 300.0, detail, secs)


def criterion_7() -> CriterionResult:
    from .moments import expansion_coeffs
    from .saddle import psi_expansion, psi_saddle

    def body():
        dev = {}
        for tau in (20.0, 50.0):
            dev[tau] = abs(psi_expansion(0.75, tau).log_psi / psi_saddle(0.75, tau).log_psi - 1)
        ok_a = dev[20.0] <= 0.15 and dev[50.0] < dev[20.0]
        A0 = expansion_coeffs(1.0, 0).A0
        worst = 0.0
        for tau in np.linspace(2.0, 4.0, 9):
            lhs = math.log(-psi_saddle(1.0, float(tau)).log_psi)
            rhs = tau - A0 - 1 - math.log(tau)
            worst = max(worst, abs(lhs / rhs - 1))
        ok_b = worst <= 0.05
        detail = (f"sigma=0.75 log-ratio deviation {dev[20.0]:.3f} (tau=20), {dev[50.0]:.3f} (tau=50); "
                  f"sigma=1 max rel. deviation of log(-log Psi_1) on [2,4] = {worst:.3f}")
        return ok_a and ok_b, detail

    ok, detail, secs = _timed(body)
    return CriterionResult(7, "leading-order expansion shape", ok, detail, secs)


def criterion_8() -> CriterionResult:
    from .empirical import character_samples, phi_tail
    from .random_model import model_tail

    def body():
        psi = float(model_tail(0.75, [1.0], 1e4)[0])
        devs, times = [], []
        for q in ACCEPT_QS:
            t0 = time.perf_counter()
            phi = float(phi_tail(character_samples(q, 0.75), [1.0]).probs[0])
            times.append(time.perf_counter() - t0)
            devs.append(abs(phi / psi - 1))
        ok = all(b < a for a, b in zip(devs, devs[1:])) and max(times) < 120.0
        return ok, f"|Phi/Psi - 1| = {', '.join(f'{d:.4f}' for d in devs)} (Psi = {psi:.6f})"

    ok, detail, secs = _timed(body)
    return CriterionResult(8, "tail ratio trend", ok, detail, secs)


def criterion_9() -> CriterionResult:
    from .dirichlet import LogLSamples
    from .empirical import character_samples, discrepancy
    from .random_model import RandomEulerConfig, sample_batch

    def body():
        d, nulls = [], []
        ok = True
        for q in ACCEPT_QS:
            d.append(discrepancy(character_samples(q, 0.75), 0.75).d_hat)
            cfg = RandomEulerConfig(0.75, 1e4, q - 2, seed=q, tail_eps=None)
            fake = LogLSamples(q, 0.75, 1e4, np.concatenate([[0.0 + 0.0j], sample_batch(cfg)]))
            dn = discrepancy(fake, 0.75).d_hat
            bound = 3 * math.sqrt(math.log(q) / q)
            ok &= dn <= bound
            nulls.append(f"{dn:.4f}<={bound:.4f}")
        ok &= all(b <= a for a, b in zip(d, d[1:]))
        return ok, f"d_hat = {', '.join(f'{x:.4f}' for x in d)}; null {', '.join(nulls)}"

    ok, detail, secs = _timed(body)
    return CriterionResult(9, "discrepancy trend and null", ok, detail, secs)


@dataclass(frozen=True)
class KernelTrial:
    rect: "Rectangle"
    T: float
    z: complex
    indicator: float
    smoothed: float
    envelope: float

    @property
    def slack(self) -> float:
        """4 * envelope - |1_R - W|; the bound holds when this is >= -1e-6."""
        return 4.0 * self.envelope - abs(self.indicator - self.smoothed)


def kernel_trials(n: int = 1000, seed: int = 7, t_range: tuple[float, float] = (5.0, 50.0)) -> list[KernelTrial]:
    """Random (rectangle, point, T) triples for the smoothing-kernel bound."""
    from .smoothing import Rectangle, fejer_envelope, w_indicator

    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        a = np.sort(rng.uniform(-3, 3, 2))
        b = np.sort(rng.uniform(-3, 3, 2))
        r = Rectangle(a[0], a[1], b[0], b[1])
        T = rng.uniform(*t_range)
        if k % 2:
            # half the points sit within 1/T of an edge, where the bound is tight
            z = complex(rng.choice(a) + rng.uniform(-1, 1) / T, rng.uniform(-4, 4))
        else:
            z = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        out.append(KernelTrial(r, float(T), z, float(r.contains(z)), float(w_indicator(r, T, z)),
                               float(fejer_envelope(r, T, z))))
    return out


def criterion_10(n: int = 1000, seed: int = 7) -> CriterionResult:
    def body():
        worst = max(-t.slack for t in kernel_trials(n, seed))
        return worst <= 1e-6, f"max(|1_R - W| - 4 sum I) over {n} triples = {worst:.3e}"

    ok, detail, secs = _timed(body)
    return CriterionResult(10, "smoothing kernel bound", ok, detail, secs)


def criterion_11() -> CriterionResult:
    from .bessel import log_i0_derivs

    def body():
        fails = []
        u = np.linspace(1e-4, 0.5, 5000)
        f = log_i0_derivs(u, 0)[0]
        if np.any(np.abs(f - u * u / 4) > u**4):
            fails.append("small-u envelope")
        u = np.logspace(-6, 5, 20000)
        f, f1, f2 = log_i0_derivs(u, 2)[:3]
        if np.any(f1 < 0) or np.any(f1 >= 1) or np.any(np.diff(f1) <= 0):
            fails.append("f' range/monotonicity")
        if abs(f1[-1] - 1) > 1e-4:
            fails.append("f' limit")
        if np.any(f2[u <= 100] <= 0):
            fails.append("f'' positivity")
        big = u >= 50
        if np.any(np.abs(f2[big] - 0.5 / u[big] ** 2) > 5 / u[big] ** 3):
            fails.append("f'' large-u envelope")
        if np.any(f > u):
            fails.append("f <= u")
        mid = u >= 10
        if np.any(np.abs(f[mid] - u[mid]) > 2 * np.log(u[mid])):
            fails.append("f - u envelope")
        return not fails, "all invariants hold" if not fails else "failed: " + ", ".join(fails)

    ok, detail, secs = _timed(body)
    return CriterionResult(11, "Bessel invariants", ok and secs < 5.0, detail, secs)


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_all(selected=None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    out = []
    for k in selected or sorted(CRITERIA):
        res = CRITERIA[k]()
        if echo is not None:
            echo(format_line(res))
        out.append(res)
    return out
