import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from coeffalg import Algebra, AlgebraMap  # noqa: E402

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_unitary(rng, d):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@st.composite
def block_maps(draw, injective=None, max_blocks=4):
    """(dims, assignment, unitary seed) for delta(x)_i = u_i x_{s(i)} u_i^*.

    injective=True forces distinct sources (hereditary range), None lets
    hypothesis choose."""
    k = draw(st.integers(1, max_blocks))
    dims = tuple(draw(st.lists(st.sampled_from([1, 2]), min_size=k, max_size=k)))
    assignment = []
    used = set()
    for i, d in enumerate(dims):
        choices = [s for s in range(k) if dims[s] == d]
        if injective:
            choices = [s for s in choices if s not in used]
        src = draw(st.sampled_from(choices + [None]))
        if src is not None:
            used.add(src)
        assignment.append(src)
    seed = draw(st.integers(0, 2**16))
    return dims, tuple(assignment), seed


def make_block_map(dims, assignment, seed, twist=True):
    alg = Algebra(dims)
    rng = np.random.default_rng(seed)
    unitaries = [random_unitary(rng, d) if twist else None for d in dims]
    return alg, AlgebraMap.from_block_assignment(alg, assignment, unitaries)
