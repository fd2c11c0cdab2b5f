"""Exact statevector simulation of the QAOA ansatz.

States are plain complex128 numpy arrays of length ``2**n``. The cost layer is a
diagonal phase built from a precomputed energy table. The mixer layer applies
the single-qubit rotation exp(-i beta X) to every qubit, a few qubits at a time,
without ever forming the full 2**n x 2**n operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graph import MAX_NODES, Graph

MAXCUT = "maxcut"
PAPER_LITERAL = "paper-literal"
CONVENTIONS = (MAXCUT, PAPER_LITERAL)


@dataclass(frozen=True, eq=False)
class EnergyTable:
    """Classical energy E(z) of the cost operator for every basis index z."""

    n_qubits: int
    energies: np.ndarray
    convention: str = MAXCUT

    def __post_init__(self):
        e = np.ascontiguousarray(self.energies, dtype=np.float64)
        if e.shape != (1 << self.n_qubits,):
            raise ValueError(f"energy table needs {1 << self.n_qubits} entries, got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)
        levels, inverse = np.unique(e, return_inverse=True)
        # few distinct levels (unweighted graphs): exponentiate levels, then gather
        if levels.size <= e.size // 8:
            object.__setattr__(self, "_levels", (levels, inverse.astype(np.intp)))
        else:
            object.__setattr__(self, "_levels", None)

    def phases(self, gamma: float) -> np.ndarray:
        """exp(-i gamma E(z)) for every z."""
        if self._levels is None:
            return np.exp(-1j * gamma * self.energies)
        levels, inverse = self._levels
        return np.exp(-1j * gamma * levels)[inverse]

    @property
    def min_energy(self) -> float:
        return float(self.energies.min())


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(x) for x in self.gammas)
        b = tuple(float(x) for x in self.betas)
        if len(g) != len(b):
            raise ValueError(f"got {len(g)} gammas but {len(b)} betas")
        if not g:
            raise ValueError("need at least one layer")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self) -> int:
        return len(self.gammas)

    @classmethod
    def zeros(cls, p: int) -> QaoaParams:
        return cls((0.0,) * p, (0.0,) * p)

    def to_vector(self) -> np.ndarray:
        """Flat ``[gamma_1..gamma_p, beta_1..beta_p]``."""
        return np.array(self.gammas + self.betas)

    @classmethod
    def from_vector(cls, vec) -> QaoaParams:
        vec = np.asarray(vec, dtype=np.float64)
        p = vec.size // 2
        return cls(tuple(vec[:p].tolist()), tuple(vec[p:].tolist()))

    def to_dict(self) -> dict:
        return {"gammas": list(self.gammas), "betas": list(self.betas)}

    @classmethod
    def from_dict(cls, data: dict) -> QaoaParams:
        return cls(tuple(data["gammas"]), tuple(data["betas"]))


def _check_size(n: int) -> None:
    if not 1 <= n <= MAX_NODES:
        raise ValueError(f"qubit count {n} outside [1, {MAX_NODES}]")


def build_energy_table(g: Graph, convention: str = MAXCUT) -> EnergyTable:
    """E(z) = sum_ij J_ij s_i s_j with s_i = +1 for bit i of z clear, -1 if set.

    ``convention="paper-literal"`` negates the table, which makes the uncut
    configuration the ground state.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    _check_size(g.n_nodes)
    z = np.arange(1 << g.n_nodes, dtype=np.int64)
    energies = np.zeros(z.size)
    for u, v, w in g.edges:
        # s_u s_v = 1 - 2 * (bit_u xor bit_v)
        energies += w * (1.0 - 2.0 * (((z >> u) ^ (z >> v)) & 1))
    if convention == PAPER_LITERAL:
        energies = -energies
    return EnergyTable(g.n_nodes, energies, convention)


def plus_state(n: int) -> np.ndarray:
    _check_size(n)
    dim = 1 << n
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)


def _n_qubits(state: np.ndarray) -> int:
    n = state.size.bit_length() - 1
    if state.ndim != 1 or state.size != 1 << n:
        raise ValueError(f"state length {state.size} is not a power of two")
    return n


def _match(state: np.ndarray, table: EnergyTable) -> None:
    if state.shape != table.energies.shape:
        raise ValueError(
            f"state of length {state.size} does not match {table.n_qubits}-qubit energy table"
        )


def apply_cost_layer(state: np.ndarray, table: EnergyTable, gamma: float) -> np.ndarray:
    """Multiply amplitude z by exp(-i gamma E(z)) in place; returns ``state``."""
    _match(state, table)
    state *= table.phases(gamma)
    return state


# Qubits are processed in contiguous blocks of at most _MAX_BLOCK; a block of c
# qubits applies one dense 2**c x 2**c matrix.
_MAX_BLOCK = 5


@lru_cache(maxsize=None)
def _blocks(n: int) -> tuple[tuple[int, int], ...]:
    count = -(-n // _MAX_BLOCK)
    sizes = [n // count + (1 if i < n % count else 0) for i in range(count)]
    starts = np.cumsum([0] + sizes[:-1]).tolist()
    return tuple(zip(starts, sizes))


@lru_cache(maxsize=None)
def _hamming(c: int) -> np.ndarray:
    idx = np.arange(1 << c)
    x = idx[:, None] ^ idx[None, :]
    return np.array([[int(v).bit_count() for v in row] for row in x])


def _block_rotation(beta: float, c: int) -> np.ndarray:
    # entry (i, j) of the c-fold tensor power is cos^(c-h) (-i sin)^h, h = popcount(i ^ j)
    h = np.arange(c + 1)
    vals = np.cos(beta) ** (c - h) * (-1j * np.sin(beta)) ** h
    return vals[_hamming(c)]


@lru_cache(maxsize=None)
def _block_generator(c: int) -> np.ndarray:
    """Dense sum of X over ``c`` qubits: ones where indices differ in one bit."""
    return (_hamming(c) == 1).astype(np.float64)


def _apply_block(matrix: np.ndarray, state: np.ndarray, q: int, c: int) -> np.ndarray:
    if q == 0:
        return state.reshape(-1, 1 << c) @ matrix.T
    return matrix @ state.reshape(-1, 1 << c, 1 << q)


def apply_mixer_layer(state: np.ndarray, beta: float) -> np.ndarray:
    """Apply [[cos b, -i sin b], [-i sin b, cos b]] to every qubit in place."""
    n = _n_qubits(state)
    for q, c in _blocks(n):
        state[:] = _apply_block(_block_rotation(beta, c), state, q, c).reshape(-1)
    return state


def apply_mixer_generator(state: np.ndarray) -> np.ndarray:
    """Return sum_q X_q |state> as a new array."""
    n = _n_qubits(state)
    out = np.zeros_like(state)
    for q, c in _blocks(n):
        out += _apply_block(_block_generator(c), state, q, c).reshape(-1)
    return out


def run_ansatz(table: EnergyTable, params: QaoaParams) -> np.ndarray:
    state = plus_state(table.n_qubits)
    for gamma, beta in zip(params.gammas, params.betas):
        apply_cost_layer(state, table, gamma)
        apply_mixer_layer(state, beta)
    return state


def expectation(state: np.ndarray, table: EnergyTable) -> float:
    _match(state, table)
    probs = state.real**2 + state.imag**2
    return float(probs @ table.energies)


def energy(table: EnergyTable, params: QaoaParams) -> float:
    """Cost expectation of the ansatz state at ``params``."""
    return expectation(run_ansatz(table, params), table)


def approximation_ratio(energy: float, e_min: float) -> float:
    if not e_min < 0:
        raise ValueError(f"approximation ratio needs e_min < 0, got {e_min}")
    return energy / e_min


def ground_energy(g: Graph, convention: str = MAXCUT) -> float:
    """E_min under ``convention``; the Max-Cut value comes from the exact solver."""
    from .graph import brute_force_maxcut

    if convention == PAPER_LITERAL:
        return -g.total_weight
    return brute_force_maxcut(g).e_min
