"""Empirical distributions of R_y(sigma, chi) over the characters modulo q.

Counting conventions: the principal character is never counted, and every
frequency is normalised by ``q`` (not by the ``q - 2`` characters counted), so
the whole-plane frequency is ``(q - 2) / q``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dirichlet import LogLSamples, default_y, r_y_all, truncation
from .primes import build_table
from .random_model import (
    C_KERNEL,
    EULER_GAMMA,
    char_fn_grid,
    fejer_expectation,
    model_tail,
    rect_table,
    support_radius,
)
from .smoothing import Rectangle

__all__ = [
    "DistributionCurve",
    "DiscrepancyReport",
    "RatioRow",
    "character_samples",
    "phi_tail",
    "phi1_tail",
    "phi_rect",
    "exceptional_threshold",
    "exceptional_census",
    "ratio_experiment",
    "discrepancy",
    "default_discrepancy_T",
]


@dataclass(frozen=True)
class DistributionCurve:
    taus: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if len(self.taus) != len(self.probs):
            raise ValueError("taus and probs differ in length")

    def to_csv(self, psi=None) -> str:
        """Columns tau, phi, psi, ratio; psi and ratio are blank without a model curve."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", "phi", "psi", "ratio"])
        for k, (t, p) in enumerate(zip(self.taus, self.probs)):
            if psi is None:
                w.writerow([f"{t:.17g}", f"{p:.17g}", "", ""])
            else:
                m = float(psi[k])
                ratio = p / m if m > 0 else float("nan")
                w.writerow([f"{t:.17g}", f"{p:.17g}", f"{m:.17g}", f"{ratio:.17g}"])
        return buf.getvalue()


@dataclass(frozen=True)
class RatioRow:
    q: int
    phi: float
    psi: float

    @property
    def deviation(self) -> float:
        return abs(self.phi / self.psi - 1.0)


@dataclass(frozen=True)
class DiscrepancyReport:
    q: int
    sigma: float
    m: int
    d_hat: float
    argmax: Rectangle | None
    phi_at_argmax: float
    psi_at_argmax: float
    kernel_budget_at_argmax: float
    kernel_budget_max: float
    cell_mass: float
    T: float
    y_model: float
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = {
            "q": self.q,
            "sigma": f"{self.sigma:.17g}",
            "m": self.m,
            "d_hat": f"{self.d_hat:.17g}",
            "argmax": None if self.argmax is None else [f"{c:.17g}" for c in
                                                       (self.argmax.a1, self.argmax.a2, self.argmax.b1, self.argmax.b2)],
            "phi_at_argmax": f"{self.phi_at_argmax:.17g}",
            "psi_at_argmax": f"{self.psi_at_argmax:.17g}",
            "kernel_budget_at_argmax": f"{self.kernel_budget_at_argmax:.17g}",
            "kernel_budget_max": f"{self.kernel_budget_max:.17g}",
            "cell_mass": f"{self.cell_mass:.17g}",
            "T": f"{self.T:.17g}",
            "y_model": f"{self.y_model:.17g}",
            "metadata": self.metadata,
        }
        return json.dumps(d, indent=2, sort_keys=True)


def character_samples(q: int, sigma: float, y: float | None = None) -> LogLSamples:
    """R_y(sigma, chi) for all characters mod the prime q (default cutoff if y is None)."""
    if y is None:
        y = default_y(sigma, q)
    return r_y_all(build_table(q), truncation(sigma, y, q))


def _taus(taus) -> np.ndarray:
    t = np.atleast_1d(np.asarray(taus, dtype=np.float64))
    if t.size == 0:
        raise ValueError("taus must be nonempty")
    if np.any(np.diff(t) < 0):
        raise ValueError("taus must be ascending")
    return t


def _count_above(x: np.ndarray, thr: np.ndarray) -> np.ndarray:
    xs = np.sort(x)
    return len(xs) - np.searchsorted(xs, thr, side="right")


def phi_tail(samples: LogLSamples, taus) -> DistributionCurve:
    """#{j >= 1 : Re R(j) > tau} / q."""
    t = _taus(taus)
    counts = _count_above(samples.nonprincipal.real, t)
    return DistributionCurve(t, counts / samples.q)


def phi1_tail(samples: LogLSamples, taus) -> DistributionCurve:
    """#{j >= 1 : |exp R(j)| > e^gamma tau} / q; every character counts when tau <= 0."""
    if samples.sigma != 1.0:
        raise ValueError("phi1_tail needs samples at sigma = 1")
    t = _taus(taus)
    with np.errstate(divide="ignore"):
        thr = np.where(t > 0, EULER_GAMMA + np.log(np.where(t > 0, t, 1.0)), -np.inf)
    counts = _count_above(samples.nonprincipal.real, thr)
    return DistributionCurve(t, counts / samples.q)


def phi_rect(samples: LogLSamples, r: Rectangle) -> float:
    """Fraction (over q) of non-principal characters with R in the open rectangle."""
    return float(np.count_nonzero(r.contains(samples.nonprincipal))) / samples.q


def exceptional_threshold(q: int, sigma: float) -> float:
    """(log q)^{1 - sigma} / log log q."""
    lq = math.log(q)
    return lq ** (1.0 - sigma) / math.log(lq)


def exceptional_census(samples: LogLSamples, sigma: float, threshold: float | None = None) -> float:
    """Fraction (over q) of non-principal characters with |R| at or above the threshold.

    ``threshold`` overrides the default (debug hook for the trivial limits).
    """
    if not 0.5 < sigma < 1.0:
        raise ValueError("the exceptional-set census is defined for 1/2 < sigma < 1")
    thr = exceptional_threshold(samples.q, sigma) if threshold is None else float(threshold)
    return float(np.count_nonzero(np.abs(samples.nonprincipal) >= thr)) / samples.q


def ratio_experiment(sigma: float, tau: float, qs, psi: float | None = None, y: float | None = None,
                     y_model: float = 1e4) -> list[RatioRow]:
    """Phi_q(tau) against the model tail for each q in ``qs``.

    Without ``psi`` the model value comes from Fourier inversion at cutoff
    ``y_model``, which carries no sampling noise.
    """
    if psi is None:
        psi = float(model_tail(sigma, [tau], y_model)[0])
    if psi <= 0:
        raise ValueError("model tail must be positive")
    rows = []
    for q in qs:
        s = character_samples(int(q), sigma, y)
        rows.append(RatioRow(int(q), float(phi_tail(s, [tau]).probs[0]), float(psi)))
    return rows


def default_discrepancy_T(sigma: float, q: int) -> float:
    """32 for sigma < 1; (log q) / (50 (log log q)^2) at sigma = 1."""
    if sigma < 1.0:
        return 32.0
    lq = math.log(q)
    return lq / (50.0 * math.log(lq) ** 2)


def _positions(x: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Doubled grid position: 2i between grid[i-1] and grid[i], 2i+1 on grid[i]."""
    left = np.searchsorted(grid, x, side="left")
    right = np.searchsorted(grid, x, side="right")
    return np.where(right > left, 2 * left + 1, 2 * left)


def _rect_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=1)
    return i, j


def discrepancy(samples: LogLSamples, sigma: float, m: int = 32, T: float | None = None,
                y_model: float = 1e4) -> DiscrepancyReport:
    """max |Phi_q(R) - Psi(R)| over rectangles with corners on an m-quantile grid per axis.

    Corner coordinates are the empirical quantiles at levels k/m, k = 0..m, of
    the real and imaginary parts separately; grids for m and 2m nest.
    """
    if int(m) != m or m < 8:
        raise ValueError(f"grid size m must be an integer >= 8, got {m}")
    m = int(m)
    if T is None:
        T = default_discrepancy_T(sigma, samples.q)
    z = samples.nonprincipal
    levels = np.arange(m + 1) / m
    ga = np.quantile(z.real, levels)
    gb = np.quantile(z.imag, levels)
    q = samples.q

    # empirical counts on open rectangles through doubled positions
    n2 = 2 * (m + 1) + 1
    px = _positions(z.real, ga)
    py = _positions(z.imag, gb)
    hist = np.zeros((n2, n2), dtype=np.int64)
    np.add.at(hist, (px, py), 1)
    cum = hist.cumsum(0).cumsum(1)  # cum[a, b] = #{pos_x <= a, pos_y <= b}
    hi = 2 * np.arange(m + 1)  # open upper edge at grid[j]: pos <= 2j
    lo = 2 * np.arange(m + 1) + 1  # open lower edge at grid[i]: pos > 2i + 1

    # model side: K on the clipped grid, one table for all rectangles
    box = support_radius(float(sigma), float(y_model))
    ca = np.clip(ga, -box, box)
    cb = np.clip(gb, -box, box)
    amax = float(math.ceil(max(np.abs(ca).max(), np.abs(cb).max())))
    grid = char_fn_grid(float(sigma), float(y_model), float(T), amax)
    K = rect_table(grid, ca, cb)
    ea = np.array([fejer_expectation(grid, c, 0) for c in ca])
    eb = np.array([fejer_expectation(grid, c, 1) for c in cb])

    ai, aj = _rect_pairs(m + 1)
    bk, bl = _rect_pairs(m + 1)
    best = -1.0
    best_idx = (0, 1, 0, 1)
    budget_max = 0.0
    chunk = max(1, 2_000_000 // len(bk))
    for s in range(0, len(ai), chunk):
        i, j = ai[s : s + chunk, None], aj[s : s + chunk, None]
        k, l = bk[None, :], bl[None, :]
        counts = (cum[hi[j], hi[l]] - cum[lo[i], hi[l]] - cum[hi[j], lo[k]] + cum[lo[i], lo[k]])
        model = K[j, l] - K[i, l] - K[j, k] + K[i, k]
        diff = np.abs(counts / q - model)
        # degenerate rectangles (repeated quantiles) carry no mass on either side
        degenerate = (ga[j] <= ga[i]) | (gb[l] <= gb[k])
        diff = np.where(degenerate, 0.0, diff)
        budget = C_KERNEL * (ea[i] + ea[j] + eb[k] + eb[l])
        budget_max = max(budget_max, float(np.max(np.where(degenerate, 0.0, budget))))
        flat = int(np.argmax(diff))
        if diff.flat[flat] > best:
            best = float(diff.flat[flat])
            r0, c0 = np.unravel_index(flat, diff.shape)
            best_idx = (int(ai[s + r0]), int(aj[s + r0]), int(bk[c0]), int(bl[c0]))
    i, j, k, l = best_idx
    rect = Rectangle(ga[i], ga[j], gb[k], gb[l]) if ga[i] < ga[j] and gb[k] < gb[l] else None
    phi_v = phi_rect(samples, rect) if rect is not None else 0.0
    psi_v = float(K[j, l] - K[i, l] - K[j, k] + K[i, k])
    meta = {
        "principal_character": "excluded",
        "denominator": "q",
        "quantile_levels": "k/m, k = 0..m",
        "rectangles": "open",
    }
    return DiscrepancyReport(
        q=q, sigma=float(sigma), m=m, d_hat=max(best, 0.0), argmax=rect, phi_at_argmax=phi_v,
        psi_at_argmax=psi_v, kernel_budget_at_argmax=float(C_KERNEL * (ea[i] + ea[j] + eb[k] + eb[l])),
        kernel_budget_max=budget_max, cell_mass=2.0 / m, T=float(T), y_model=float(y_model), metadata=meta,
    )
