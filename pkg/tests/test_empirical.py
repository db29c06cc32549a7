import json
import math

import numpy as np
import pytest

from ldist.dirichlet import LogLSamples
from ldist.empirical import (
    DistributionCurve,
    default_discrepancy_T,
    discrepancy,
    exceptional_census,
    exceptional_threshold,
    phi1_tail,
    phi_rect,
    phi_tail,
    ratio_experiment,
)
from ldist.random_model import RandomEulerConfig, psi_rect, sample_batch
from ldist.saddle import psi_saddle
from ldist.smoothing import Rectangle

QS = (1009, 10007, 100003)


def test_phi_tail_extremes(char_samples):
    s = char_samples(1009, 0.75)
    c = phi_tail(s, [-1e3, 0.0, 1e3])
    assert c.probs[0] == pytest.approx(1007 / 1009, abs=0) and c.probs[-1] == 0


@pytest.mark.parametrize("q", QS)
def test_curves_bounded_and_monotone(char_samples, q):
    s = char_samples(q, 0.75)
    p = phi_tail(s, np.linspace(-3, 3, 121)).probs
    assert np.all((p >= 0) & (p <= 1)) and np.all(np.diff(p) <= 0)


def test_phi_tail_near_model(char_samples):
    phi = phi_tail(char_samples(100003, 0.75), [1.0]).probs[0]
    assert 0.5 <= phi / psi_saddle(0.75, 1.0).psi <= 2


def test_phi1_tail(char_samples):
    s = char_samples(100003, 1.0)
    c = phi1_tail(s, [-1.0, 0.0, 0.5, 1.2, 2.0, 3.0])
    assert c.probs[0] == c.probs[1] == pytest.approx(100001 / 100003, abs=0)
    assert np.all(np.diff(c.probs) <= 0)
    assert 0.5 <= c.probs[3] / psi_saddle(1.0, 1.2).psi <= 2
    with pytest.raises(ValueError):
        phi1_tail(char_samples(1009, 0.75), [1.0])


def test_phi_rect_whole_plane_and_reflection(char_samples):
    s = char_samples(10007, 0.75)
    assert phi_rect(s, Rectangle(-50, 50, -50, 50)) == 10005 / 10007
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = np.sort(rng.uniform(-2, 2, 2))
        b = np.sort(rng.uniform(-2, 2, 2))
        r = Rectangle(a[0], a[1], b[0], b[1])
        assert phi_rect(s, r) == phi_rect(s, r.reflect())


def test_phi_rect_additive(char_samples):
    s = char_samples(10007, 0.75)
    r = Rectangle(-1.0, 1.5, -0.7, 0.9)
    cut = 0.123456789
    assert not np.any(s.nonprincipal.real == cut)
    left, right = Rectangle(r.a1, cut, r.b1, r.b2), Rectangle(cut, r.a2, r.b1, r.b2)
    assert phi_rect(s, left) + phi_rect(s, right) == pytest.approx(phi_rect(s, r), abs=1e-15)


def test_census_limits(char_samples):
    s = char_samples(1009, 0.75)
    assert exceptional_census(s, 0.75, threshold=math.inf) == 0
    assert exceptional_census(s, 0.75, threshold=0.0) == 1007 / 1009
    assert exceptional_threshold(1009, 0.75) == pytest.approx(math.log(1009) ** 0.25 / math.log(math.log(1009)))
    with pytest.raises(ValueError):
        exceptional_census(s, 1.0)


@pytest.mark.xfail(strict=True, reason="threshold (log q)^{1-s}/log log q falls faster than |R| spreads at desk q")
def test_census_trend(char_samples):
    fr = [exceptional_census(char_samples(q, 0.75), 0.75) for q in QS]
    assert all(b <= a for a, b in zip(fr, fr[1:]))


def test_ratio_experiment_rows():
    rows = ratio_experiment(0.75, 1.0, [1009], psi=0.08)
    assert rows[0].q == 1009 and rows[0].deviation == pytest.approx(abs(rows[0].phi / 0.08 - 1))
    with pytest.raises(ValueError):
        ratio_experiment(0.75, 1.0, [1009], psi=0.0)


def test_discrepancy_refinement(char_samples):
    s = char_samples(10007, 0.75)
    coarse = discrepancy(s, 0.75, m=16)
    fine = discrepancy(s, 0.75, m=32)
    assert coarse.d_hat <= fine.d_hat + 1e-12


def test_discrepancy_report(char_samples):
    s = char_samples(10007, 0.75)
    rep = discrepancy(s, 0.75, m=16)
    assert rep.cell_mass == 2 / 16 and rep.T == 32.0
    assert abs(rep.phi_at_argmax - rep.psi_at_argmax) == pytest.approx(rep.d_hat, abs=1e-12)
    assert rep.phi_at_argmax == phi_rect(s, rep.argmax)
    # the table-based model value agrees with the standalone rectangle inversion
    assert rep.psi_at_argmax == pytest.approx(psi_rect(0.75, rep.argmax, rep.T, rep.y_model).value, abs=1e-10)
    d = json.loads(rep.to_json())
    assert d["metadata"]["denominator"] == "q" and isinstance(d["d_hat"], str)
    with pytest.raises(ValueError):
        discrepancy(s, 0.75, m=4)


@pytest.mark.parametrize("q", QS)
def test_discrepancy_null(q):
    cfg = RandomEulerConfig(0.75, 1e4, q - 2, seed=q, tail_eps=None)
    fake = LogLSamples(q, 0.75, 1e4, np.concatenate([[0j], sample_batch(cfg)]))
    assert discrepancy(fake, 0.75).d_hat <= 3 * math.sqrt(math.log(q) / q)


def test_discrepancy_sigma_one_T():
    q = 100003
    assert default_discrepancy_T(1.0, q) == pytest.approx(math.log(q) / (50 * math.log(math.log(q)) ** 2))
    assert default_discrepancy_T(0.9, q) == 32.0


def test_curve_csv():
    c = DistributionCurve(np.array([0.5, 1.0]), np.array([0.25, 0.125]))
    lines = c.to_csv(psi=[0.5, 0.25]).splitlines()
    assert lines == ["tau,phi,psi,ratio", "0.5,0.25,0.5,0.5", "1,0.125,0.25,0.5"]
    with pytest.raises(ValueError):
        DistributionCurve(np.zeros(2), np.zeros(3))
