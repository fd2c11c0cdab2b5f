"""Max-Cut instances: Erdos-Renyi generation, validation, JSON I/O and an exact solver.

Node ``i`` maps to bit ``i`` of a basis index (little-endian, bit 0 least
significant). A bitstring written as text lists node 0 first.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAX_NODES = 24
MAX_RESAMPLE_ATTEMPTS = 10_000

# spawn keys for the two independent generator streams
_TOPOLOGY_STREAM = 0
_WEIGHT_STREAM = 1


class GraphValidationError(ValueError):
    """A graph or graph file violates an invariant; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class Graph:
    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]
    weighted: bool = False

    def __post_init__(self):
        edges = tuple((int(u), int(v), float(w)) for u, v, w in self.edges)
        object.__setattr__(self, "edges", edges)
        validate(self)

    @classmethod
    def from_edges(cls, n_nodes, edges, weighted=False) -> Graph:
        """Build from ``(u, v)`` or ``(u, v, w)`` items in any order or orientation."""
        norm = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if u > v:
                u, v = v, u
            norm.append((u, v, w))
        return cls(n_nodes, tuple(sorted(norm)), weighted)

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def relabel(self, perm) -> Graph:
        """Return the graph with node ``i`` renamed ``perm[i]``."""
        perm = [int(x) for x in perm]
        if sorted(perm) != list(range(self.n_nodes)):
            raise ValueError("perm must be a permutation of range(n_nodes)")
        return Graph.from_edges(
            self.n_nodes, [(perm[u], perm[v], w) for u, v, w in self.edges], self.weighted
        )

    def to_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "weighted": self.weighted,
            "edges": [[u, v, w] for u, v, w in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Graph:
        if not isinstance(data, dict):
            raise GraphValidationError("<root>", "expected a JSON object")
        for key in ("n_nodes", "weighted", "edges"):
            if key not in data:
                raise GraphValidationError(key, "missing")
        n = data["n_nodes"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise GraphValidationError("n_nodes", f"expected int, got {n!r}")
        if not isinstance(data["weighted"], bool):
            raise GraphValidationError("weighted", f"expected bool, got {data['weighted']!r}")
        raw = data["edges"]
        if not isinstance(raw, list):
            raise GraphValidationError("edges", "expected a list")
        edges = []
        for i, e in enumerate(raw):
            if not isinstance(e, list) or len(e) != 3:
                raise GraphValidationError(f"edges[{i}]", f"expected [u, v, weight], got {e!r}")
            u, v, w = e
            if isinstance(u, bool) or isinstance(v, bool) or not isinstance(u, int) or not isinstance(v, int):
                raise GraphValidationError(f"edges[{i}]", "node indices must be integers")
            if isinstance(w, bool) or not isinstance(w, (int, float)):
                raise GraphValidationError(f"edges[{i}]", "weight must be a number")
            edges.append((u, v, float(w)))
        return cls(n, tuple(edges), data["weighted"])


def validate(g: Graph) -> None:
    if g.n_nodes < 1:
        raise GraphValidationError("n_nodes", f"must be positive, got {g.n_nodes}")
    if g.n_nodes > MAX_NODES:
        raise GraphValidationError("n_nodes", f"{g.n_nodes} exceeds the limit of {MAX_NODES}")
    seen = set()
    for i, (u, v, w) in enumerate(g.edges):
        field = f"edges[{i}]"
        if u == v:
            raise GraphValidationError(field, f"self-loop on node {u}")
        if not 0 <= u < v < g.n_nodes:
            raise GraphValidationError(field, f"need 0 <= u < v < n_nodes, got ({u}, {v})")
        if (u, v) in seen:
            raise GraphValidationError(field, f"duplicate edge ({u}, {v})")
        seen.add((u, v))
        if not np.isfinite(w):
            raise GraphValidationError(field, f"non-finite weight {w}")
        if g.weighted:
            if not 0.0 < w <= 1.0:
                raise GraphValidationError(field, f"weight {w} outside (0, 1]")
        elif w != 1.0:
            raise GraphValidationError(field, f"unweighted graph has weight {w}")


def _stream(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


def generate_erdos_renyi(n: int, edge_prob: float, seed: int, weighted: bool = False) -> Graph:
    """Seeded G(n, p) sample, rejection-resampled until connected.

    Attempt ``a`` draws its topology from sub-seed ``seed + 2**32 * a``. Weights
    come from a separate stream keyed on ``seed`` alone, so a weighted graph has
    the same topology as its unweighted twin.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if n > MAX_NODES:
        raise ValueError(f"n={n} exceeds the limit of {MAX_NODES}")
    if not 0.0 < edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in (0, 1], got {edge_prob}")
    iu, ju = np.triu_indices(n, k=1)
    for attempt in range(MAX_RESAMPLE_ATTEMPTS):
        rng = _stream(seed + (attempt << 32), _TOPOLOGY_STREAM)
        keep = rng.random(iu.size) < edge_prob
        pairs = list(zip(iu[keep].tolist(), ju[keep].tolist()))
        if _connected(n, pairs):
            break
    else:
        raise RuntimeError(
            f"no connected sample after {MAX_RESAMPLE_ATTEMPTS} attempts "
            f"(n={n}, edge_prob={edge_prob}); edge_prob is too low"
        )
    if weighted:
        # 1 - U[0, 1) lies in (0, 1], so zero weights never occur
        weights = 1.0 - _stream(seed, _WEIGHT_STREAM).random(len(pairs))
    else:
        weights = np.ones(len(pairs))
    return Graph(n, tuple((u, v, float(w)) for (u, v), w in zip(pairs, weights)), weighted)


def _connected(n: int, pairs) -> bool:
    adj = [[] for _ in range(n)]
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        for nb in adj[queue.popleft()]:
            if not seen[nb]:
                seen[nb] = True
                count += 1
                queue.append(nb)
    return count == n


def is_connected(g: Graph) -> bool:
    return _connected(g.n_nodes, [(u, v) for u, v, _ in g.edges])


@dataclass(frozen=True)
class CutResult:
    best_assignment: str
    max_cut_value: float
    e_min: float
    total_weight: float


def cut_value(g: Graph, assignment: str) -> float:
    return float(sum(w for u, v, w in g.edges if assignment[u] != assignment[v]))


def brute_force_maxcut(g: Graph) -> CutResult:
    """Exact Max-Cut by enumerating the 2**(n-1) assignments with node 0 on side 0.

    Ties go to the lexicographically smallest bitstring (node 0 first).
    """
    n = g.n_nodes
    if n > MAX_NODES:
        raise ValueError(f"n_nodes={n} exceeds the limit of {MAX_NODES}")
    # index bits 0..n-2 encode nodes 1..n-1; node 0 stays 0
    half = np.arange(1 << (n - 1), dtype=np.int64) << 1
    cut = np.zeros(half.size)
    for u, v, w in g.edges:
        cut += w * (((half >> u) ^ (half >> v)) & 1)
    best = cut.max()
    # lexicographic order reads node 0 first, i.e. bit-reversed index order
    ties = half[cut == best]
    strings = ["".join("1" if (z >> i) & 1 else "0" for i in range(n)) for z in ties.tolist()]
    assignment = min(strings)
    total = g.total_weight
    max_cut = cut_value(g, assignment)
    return CutResult(assignment, max_cut, total - 2.0 * max_cut, total)


def save_graph(g: Graph, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(g.to_dict(), indent=1) + "\n")


def load_graph(path) -> Graph:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphValidationError("<file>", f"malformed JSON in {path}: {exc}") from exc
    return Graph.from_dict(data)


def graph_filename(g_or_n, seed: int) -> str:
    n = g_or_n.n_nodes if isinstance(g_or_n, Graph) else int(g_or_n)
    return f"{n}_{seed}.json"
