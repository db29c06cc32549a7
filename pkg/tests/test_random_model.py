import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ldist.primes import sieve
from ldist.random_model import (
    RandomEulerConfig,
    char_fn,
    char_fn_points,
    mc_tail,
    model_tail,
    psi_rect,
    sample_batch,
    sample_log_l,
    set_threads,
    tail_sd,
    tails_to_csv,
)
from ldist.smoothing import Rectangle


def _cfg(sigma=0.75, y=1e3, n=10**6, seed=11):
    return RandomEulerConfig(sigma, y, n, seed=seed, tail_eps=None)


def test_sample_determinism():
    cfg = _cfg()
    assert sample_log_l(cfg, 12345) == sample_log_l(cfg, 12345)
    assert sample_log_l(cfg, 12345) != sample_log_l(_cfg(seed=12), 12345)


def test_batches_are_schedule_independent():
    cfg = _cfg(n=5000)
    full = sample_batch(cfg)
    assert np.array_equal(sample_batch(cfg, 1000, 1500), full[1000:2500])
    assert sample_log_l(cfg, 4321) == full[4321]


def test_thread_count_does_not_change_samples():
    import numba

    cfg = _cfg(n=20000)
    set_threads(1)
    one = sample_batch(cfg)
    set_threads(numba.config.NUMBA_NUM_THREADS)
    assert np.array_equal(one, sample_batch(cfg))


def test_mean_and_second_moment():
    sigma, y = 0.75, 1e3
    z = sample_batch(_cfg(sigma, y))
    n = len(z)
    assert abs(z.real.mean()) <= 3 * z.real.std() / math.sqrt(n)
    # E|log L|^2 = sum_p Li_2(p^{-2 sigma}) for independent uniform angles
    ref = math.fsum(float(mp.polylog(2, mp.mpf(int(p)) ** (-2 * sigma))) for p in sieve(int(y)).primes)
    a2 = np.abs(z) ** 2
    assert abs(a2.mean() - ref) <= 3 * a2.std() / math.sqrt(n)


def test_mc_tail_extremes_and_shape():
    cfg = _cfg(n=100000)
    taus = np.linspace(-3, 3, 61)
    est = mc_tail(cfg, np.concatenate([[-1e6], taus, [1e6]]))
    probs = np.array([e.prob for e in est])
    assert probs[0] == 1.0 and probs[-1] == 0.0
    assert np.all(np.diff(probs) <= 0) and np.all((probs >= 0) & (probs <= 1))


def test_mc_tail_rejects_unsorted():
    with pytest.raises(ValueError):
        mc_tail(_cfg(n=10), [1.0, 0.0])


def test_config_validation():
    with pytest.raises(ValueError):
        RandomEulerConfig(0.75, 1e4, 10)  # tail standard deviation above the default 1e-3
    with pytest.raises(ValueError):
        RandomEulerConfig(0.5, 1e3, 10, tail_eps=None)
    with pytest.raises(ValueError):
        RandomEulerConfig(0.75, 1e3, 0, tail_eps=None)
    assert RandomEulerConfig(1.0, 1e7, 10).samples == 10
    assert tail_sd(0.75, 1e4) == pytest.approx(0.0302, abs=5e-4)


def test_char_fn_trivial_and_conjugate():
    assert char_fn(0.75, 0, 0, 1e3) == 1
    for u, v in ((1.3, -0.4), (5.0, 2.0)):
        assert abs(char_fn(0.75, -u, -v, 1e3) - np.conj(char_fn(0.75, u, v, 1e3))) < 1e-14


def test_char_fn_bounded_and_continuous():
    g = np.linspace(-20, 20, 81)
    uu, vv = np.meshgrid(g, g)
    phi = char_fn_points(0.75, uu.ravel(), vv.ravel(), 1e3).reshape(uu.shape)
    assert np.all(np.abs(phi) <= 1 + 1e-14)
    fine = char_fn_points(0.75, [3.0, 3.0 + 1e-6], [1.0, 1.0], 1e3)
    assert abs(fine[1] - fine[0]) < 1e-5


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@settings(max_examples=20, deadline=None)
@given(st.floats(-6, 6), st.floats(-6, 6))
def test_char_fn_per_prime_quadrature(u, v):
    # product over p <= 10 of (1/2pi) int exp(i(u Re w + v Im w)) dtheta, w = -log(1 - p^-s e^{i theta})
    sigma = 0.8
    ref = 1.0 + 0j
    for p in (2, 3, 5, 7):
        r = p**-sigma

        def part(th, fn):
            w = -np.log(1 - r * np.exp(1j * th))
            return fn(np.exp(1j * (u * w.real + v * w.imag)))

        re = quad(lambda t: part(t, np.real), 0, 2 * np.pi, limit=200, epsabs=1e-14)[0]
        im = quad(lambda t: part(t, np.imag), 0, 2 * np.pi, limit=200, epsabs=1e-14)[0]
        ref *= (re + 1j * im) / (2 * np.pi)
    assert abs(char_fn(sigma, u, v, 10) - ref) < 1e-11


def test_char_fn_matches_monte_carlo(mc_draws):
    x = mc_draws[0][0.75][: 10**6].real
    vals = np.exp(1j * x)
    se = math.sqrt(np.var(vals.real) / len(x))
    assert abs(char_fn(0.75, 1.0, 0.0, 1e4) - vals.mean()) <= 3 * max(se, math.sqrt(np.var(vals.imag) / len(x)))


def test_psi_rect_whole_plane():
    r = psi_rect(0.75, Rectangle(-50, 50, -50, 50), 32.0, 1e4)
    assert abs(r.value - 1) <= r.kernel_error + 1e-9


def test_psi_rect_reflection():
    r = Rectangle(-0.3, 0.9, 0.1, 0.7)
    a = psi_rect(0.75, r, 32.0, 1e4).value
    b = psi_rect(0.75, r.reflect(), 32.0, 1e4).value
    assert a == pytest.approx(b, abs=1e-12)


def test_psi_rect_matches_monte_carlo(mc_draws):
    z = mc_draws[0][0.75]
    r = Rectangle(0.0, 1.0, -1.0, 1.0)
    freq = np.count_nonzero(r.contains(z)) / len(z)
    se = math.sqrt(freq * (1 - freq) / len(z))
    T = 32.0
    assert abs(psi_rect(0.75, r, T, 1e4).value - freq) <= max(3 * se, 2 / T)


@pytest.mark.parametrize("sigma, taus", [(0.75, [-0.5, 0.0, 1.0, 1.5]), (1.0, [0.5, 1.2, 1.5, 2.0])])
def test_model_tail_matches_monte_carlo(mc_draws, sigma, taus):
    z = mc_draws[0][sigma]
    cfg = RandomEulerConfig(sigma, 1e4, len(z), tail_eps=None)
    mc = mc_tail(cfg, taus, samples=z)
    exact = model_tail(sigma, taus, 1e4)
    for e, m in zip(mc, exact):
        assert abs(e.prob - m) <= 3 * e.std_err + 1e-12


def test_model_tail_limits():
    p = model_tail(0.75, [-50.0, 50.0], 1e3)
    assert p[0] == pytest.approx(1, abs=1e-9) and p[1] == pytest.approx(0, abs=1e-9)
    assert model_tail(1.0, [0.0], 1e3)[0] == 1.0  # every |L| exceeds 0


def test_tails_csv():
    text = tails_to_csv(mc_tail(_cfg(n=100), [0.0]))
    assert text.splitlines()[0] == "tau,prob,std_err"
