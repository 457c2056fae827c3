import numpy as np
import pytest

from xorrigidity.strategies import Strategy, maximally_entangled
from xorrigidity.games import chsh_bob_labels
from xorrigidity.tensor import BipartiteState

ACCEPTANCE_LINES = []


def random_state(rng, da, db):
    v = rng.normal(size=da * db) + 1j * rng.normal(size=da * db)
    return BipartiteState(da, db, v / np.linalg.norm(v))


def random_matrix(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_observable(rng, d):
    x = random_matrix(rng, d, d)
    q, _ = np.linalg.qr(x)
    signs = rng.choice([-1.0, 1.0], size=d)
    return (q * signs) @ q.conj().T


def constant_strategy(n, alice_op, bob_op, state=None):
    """Every Alice observable equals ``alice_op``, every Bob observable ``bob_op``."""
    d = alice_op.shape[0]
    state = state or maximally_entangled(d)
    return Strategy(
        {i: alice_op for i in range(1, n + 1)},
        {lab: bob_op for lab in chsh_bob_labels(n)},
        state,
    )


def random_chsh_strategy(rng, n, d):
    return Strategy(
        {i: random_observable(rng, d) for i in range(1, n + 1)},
        {lab: random_observable(rng, d) for lab in chsh_bob_labels(n)},
        random_state(rng, d, d),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
