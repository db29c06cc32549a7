import time

import pytest

from ldist.acceptance import MC_SEED, format_line

_ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(result) -> None:
    line = format_line(result)
    _ACCEPTANCE_LINES[result.number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def record():
    return record_acceptance


@pytest.fixture(scope="session")
def mc_draws():
    """10^7 model draws per sigma at y = 1e4, shared by every Monte Carlo oracle."""
    from ldist.random_model import RandomEulerConfig, sample_batch

    t0 = time.perf_counter()
    draws = {}
    for sigma in (0.75, 1.0):
        draws[sigma] = sample_batch(RandomEulerConfig(sigma, 1e4, 10**7, seed=MC_SEED, tail_eps=None))
    return draws, time.perf_counter() - t0


@pytest.fixture(scope="session")
def char_samples():
    """Cached character samples keyed by (q, sigma) at the default cutoff."""
    from ldist.empirical import character_samples

    cache = {}

    def get(q, sigma):
        if (q, sigma) not in cache:
            cache[q, sigma] = character_samples(q, sigma)
        return cache[q, sigma]

    return get
