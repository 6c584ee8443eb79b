import functools

import numpy as np
import pytest

from g2kleinian.cpoly import CPoly
from g2kleinian.kleinian import build_context


def random_sextic(rng, scale=1.0):
    """Complex Gaussian coefficients; admissible with probability one."""
    return CPoly(scale * (rng.standard_normal(7) + 1j * rng.standard_normal(7)))


def random_quad(rng, size=3):
    return rng.uniform(-1, 1, size) + 1j * rng.uniform(-1, 1, size)


def random_points(rng, n, radius=1.0):
    """``n`` points of the bidisc of the given radius."""
    r = radius * np.sqrt(rng.uniform(size=(n, 2)))
    return r * np.exp(2j * np.pi * rng.uniform(size=(n, 2)))


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


@functools.lru_cache(maxsize=None)
def context_for(seed: int):
    """Evaluation context of the sextic drawn from ``seed`` (cached across tests)."""
    f = random_sextic(np.random.default_rng(seed))
    return build_context(f)


WEIERSTRASS_QUINTIC = CPoly([0.3, -1.0, 0.2j, 0.7, 0.5, 4.0])


@functools.lru_cache(maxsize=None)
def quintic_context():
    return build_context(WEIERSTRASS_QUINTIC)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def ctx():
    return context_for(101)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
