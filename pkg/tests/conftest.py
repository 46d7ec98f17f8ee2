import numpy as np
import pytest

from ballcomp import lfm
from ballcomp.space import SpaceSpec

SQRT8_3 = np.sqrt(8.0) / 3.0


@pytest.fixture
def psi13():
    return lfm.make_lfm(np.diag([1.0, SQRT8_3]), [1 / 3, 0], [1 / 3, 0], 1.0)


@pytest.fixture
def psi12():
    return lfm.shift_automorphism(2, 0.5)


@pytest.fixture
def half():
    return lfm.dilation(2, 0.5)


@pytest.fixture
def third():
    return lfm.dilation(2, 1 / 3)


@pytest.fixture
def hardy2():
    return SpaceSpec.hardy(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def ball_points(rng, n, count, radius=1.0):
    """Random points of the ball with ``|z| < radius``, uniform in direction."""
    z = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z * (radius * rng.random(count) ** (1 / (2 * n)))[:, None]


def sphere_points(rng, n, count):
    z = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict_line():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
