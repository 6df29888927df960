import numpy as np
import pytest

from nosig.ensemble import Ensemble
from nosig.hilbert import SQRT_HALF, X_MINUS, X_PLUS, Z_MINUS, Z_PLUS

ACCEPTANCE_LINES: list[str] = []


def random_hermitian(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def phase_align(v):
    """Rotate ``v`` so its first sizeable component is real positive."""
    idx = np.flatnonzero(np.abs(v) > 1e-8)
    if idx.size == 0:
        return v
    c = v[idx[0]]
    return v * (abs(c) / c)


@pytest.fixture
def zpm():
    return Ensemble(SQRT_HALF * np.array([Z_PLUS, Z_MINUS]))


@pytest.fixture
def xpm():
    return Ensemble(SQRT_HALF * np.array([X_PLUS, X_MINUS]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    line = f"{'PASS' if rep.passed else 'FAIL'}  {marker.args[0]}"
    ACCEPTANCE_LINES.append(f"{line}  [{detail}]" if detail else line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
