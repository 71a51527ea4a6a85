import numpy as np
import pytest

from wpcurves.grid import GridFunction, make_grid

ACCEPTANCE_LINES = []


def bandlimited(grid, band, rng, mean_zero=True, real=False):
    c = np.zeros(grid.n, dtype=complex)
    ks = np.arange(1 if mean_zero else 0, band + 1)
    ks = np.concatenate([ks, -ks[ks > 0]])
    c[ks % grid.n] = rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)
    v = np.fft.ifft(c) * grid.n
    return GridFunction(grid, v.real if real else v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def grid256():
    return make_grid(256)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
