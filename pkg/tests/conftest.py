import itertools
import os

import numpy as np
import pytest
import scipy.linalg
from hypothesis import settings

from qaoa_transfer.graph import Graph, generate_erdos_renyi

settings.register_profile("ci", deadline=None, max_examples=40)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def on_qubit(op, q, n):
    """Embed a one-qubit operator; qubit q is bit q of the basis index (little-endian)."""
    mats = [op if k == q else I2 for k in range(n)]
    out = np.array([[1.0 + 0j]])
    for m in mats:  # kron(m_{n-1}, ..., m_0): last factor acts on the lowest bit
        out = np.kron(m, out)
    return out


def dense_cost(g: Graph) -> np.ndarray:
    n = g.n_nodes
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for u, v, w in g.edges:
        h += w * on_qubit(Z, u, n) @ on_qubit(Z, v, n)
    return h


def dense_mixer(n: int) -> np.ndarray:
    return sum(on_qubit(X, q, n) for q in range(n))


def dense_ansatz(g: Graph, gammas, betas) -> np.ndarray:
    """Reference state built from explicit 2^n x 2^n matrix exponentials."""
    n = g.n_nodes
    hc, hm = dense_cost(g), dense_mixer(n)
    state = np.ones(1 << n, dtype=complex) / np.sqrt(1 << n)
    for gm, b in zip(gammas, betas):
        state = scipy.linalg.expm(-1j * gm * hc) @ state
        state = scipy.linalg.expm(-1j * b * hm) @ state
    return state


def enumerate_energies(g: Graph) -> np.ndarray:
    """E(z) by looping over bitstrings, spins s_i = +1 for bit 0 and -1 for bit 1."""
    n = g.n_nodes
    out = np.zeros(1 << n)
    for z in range(1 << n):
        s = [1 - 2 * ((z >> i) & 1) for i in range(n)]
        out[z] = sum(w * s[u] * s[v] for u, v, w in g.edges)
    return out


def all_connected_graphs(n: int):
    pairs = list(itertools.combinations(range(n), 2))
    from qaoa_transfer.graph import is_connected

    for mask in range(1, 1 << len(pairs)):
        g = Graph.from_edges(n, [pairs[i] for i in range(len(pairs)) if mask >> i & 1])
        if is_connected(g):
            yield g


@pytest.fixture
def single_edge():
    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def k4():
    return Graph.from_edges(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])


@pytest.fixture
def er6():
    return generate_erdos_renyi(6, 0.6, 11)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
