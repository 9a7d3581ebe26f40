import numpy as np
import pytest

ACCEPTANCE_LINES = {}


def random_generic(rng, p, q, spread=0.9, imag=0.3, gap=0.05):
    """Random (a, b) with all pairwise differences at least ``gap`` from the integers."""
    from stokes_atlas.hyperfun import HyperParams
    from stokes_atlas.numerics import distance_to_integer

    while True:
        a = rng.uniform(-spread, spread, p) + 1j * rng.uniform(-imag, imag, p)
        b = rng.uniform(-spread, spread, q) + 1j * rng.uniform(-imag, imag, q)
        vals = list(a) + list(b)
        ok = all(distance_to_integer(u - v) > gap for i, u in enumerate(vals) for v in vals[i + 1:])
        if ok:
            return HyperParams(a, b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
