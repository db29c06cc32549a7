"""Quadrature helpers: a self-contained tanh-sinh rule and a Gauss-Kronrod wrapper.

The two rules share no code, which is what makes agreement between them a
meaningful check on an integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

__all__ = ["QuadResult", "tanh_sinh", "gauss_kronrod"]


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evaluations: int


def _ts_nodes(h: float, tmax: float):
    """Abscissae as distances to the nearer endpoint of [-1, 1], with weights."""
    t = np.arange(0.0, tmax + h / 2, h)
    s = 0.5 * math.pi * np.sinh(t)
    # 1 - tanh(s) = 2 / (1 + e^{2s}), computed without cancellation
    comp = 2.0 / (1.0 + np.exp(2.0 * s))
    x = 1.0 - comp
    w = 0.5 * math.pi * np.cosh(t) / np.cosh(s) ** 2
    return t, x, comp, w


def tanh_sinh(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, tol: float = 1e-13,
              max_level: int = 9) -> QuadResult:
    """Integrate ``f`` over [a, b] by the tanh-sinh rule with level halving.

    ``f`` is called with arrays. Endpoint singularities of integrable type are
    fine: nodes are placed via their distance to the endpoint, so they never
    land on it.
    """
    if b <= a:
        raise ValueError("need a < b")
    half = 0.5 * (b - a)
    tmax = 6.1  # 1 - x reaches ~1e-300 near here
    prev = math.nan
    err = math.inf
    evals = 0
    h = 0.5
    total = 0.0  # weighted sum over every node at the current spacing
    for level in range(max_level + 1):
        with np.errstate(over="ignore"):
            t, _, comp, w = _ts_nodes(h, tmax)
        sl = slice(None) if level == 0 else slice(1, None, 2)  # new nodes only
        ti, ci, wi = t[sl], comp[sl], w[sl]
        keep = (ci > 0) & (wi > 0)
        ti, ci, wi = ti[keep], ci[keep], wi[keep]
        vr = np.asarray(f(b - half * ci), dtype=np.float64)
        vl = np.asarray(f(a + half * ci), dtype=np.float64)
        evals += 2 * len(ti)
        contrib = np.where(ti == 0, wi * vr, wi * (vr + vl))
        total += float(np.sum(contrib))
        est = half * h * total
        if level > 0:
            err = abs(est - prev)
            if level >= 2 and err <= tol * max(1.0, abs(est)):
                return QuadResult(est, err, evals)
        prev = est
        h *= 0.5
    return QuadResult(prev, err, evals)


def gauss_kronrod(f: Callable[[float], float], a: float, b: float, tol: float = 1e-13,
                  points=None) -> QuadResult:
    """Adaptive Gauss-Kronrod (QUADPACK) with relative tolerance ``tol``."""
    info = integrate.quad(f, a, b, epsabs=tol * 1e-3, epsrel=tol, limit=500, points=points, full_output=1)
    val, err = info[0], info[1]
    return QuadResult(float(val), float(err), int(info[2]["neval"]))
