import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from zfcheck.boundary import BoundaryContext
from zfcheck.fock import FockSpace, FockState, SpectralGrid
from zfcheck.rmatrix import identity_b, phase_diagonal_b, rational_r
from zfcheck.vertex import VertexContext

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance-gate verdict lines collected by test_acceptance."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

GRID = (-3.0, -2.0, -1.0, 1.0, 2.0, 3.0)


@pytest.fixture(scope="session")
def grid():
    return SpectralGrid(GRID)


@pytest.fixture(scope="session")
def rspec():
    return rational_r(2, 0.7)


@pytest.fixture(scope="session")
def space(grid, rspec):
    return FockSpace(grid, rspec, n_max=3)


@pytest.fixture(scope="session")
def space4(grid, rspec):
    # One extra unit of particle headroom, for double-creation relations
    # measured on two-particle samples.
    return FockSpace(grid, rspec, n_max=4)


@pytest.fixture(scope="session")
def bspec_identity():
    return identity_b(2)


@pytest.fixture(scope="session")
def bspec_phase():
    return phase_diagonal_b(2, 1.0, [1, -1])


@pytest.fixture(scope="session")
def vctx(space, bspec_phase):
    return VertexContext(space, bspec_phase)


@pytest.fixture(scope="session")
def vctx_id(space, bspec_identity):
    return VertexContext(space, bspec_identity)


@pytest.fixture(scope="session")
def vctx4(space4, bspec_phase):
    return VertexContext(space4, bspec_phase)


@pytest.fixture(scope="session")
def bctx(vctx):
    return BoundaryContext(vctx)


@pytest.fixture(scope="session")
def bctx_id(vctx_id):
    return BoundaryContext(vctx_id)


@pytest.fixture(scope="session")
def bctx4(vctx4):
    return BoundaryContext(vctx4)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260816)


def random_state(rng, space, n, terms=2):
    """Random n-particle state with distinct momenta, peak amplitude 1."""
    words = []
    while len(words) < terms:
        gs = sorted(int(x) for x in rng.choice(len(space.grid), size=n, replace=False))
        cs = [int(c) for c in rng.integers(0, space.N, size=n)]
        w = tuple(zip(gs, cs))
        if w not in words:
            words.append(w)
    s = FockState(
        {w: complex(rng.standard_normal(), rng.standard_normal()) for w in words}
    )
    return s.scaled(1.0 / s.maxamp())
