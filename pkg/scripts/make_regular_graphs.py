"""Write the 3-regular fixture graphs used by the p=1 acceptance check.

    python scripts/make_regular_graphs.py tests/data/regular3
"""

import sys
from pathlib import Path

import networkx as nx

from qaoa_transfer.graph import Graph, is_connected, save_graph

SIZES = [8, 8, 8, 10, 10, 10, 12, 12, 12, 12]


def main(out: Path) -> None:
    seed = 0
    kept = []
    for i, n in enumerate(SIZES):
        while True:
            nxg = nx.random_regular_graph(3, n, seed=seed)
            seed += 1
            g = Graph.from_edges(n, list(nxg.edges()))
            # connected and pairwise non-isomorphic
            if is_connected(g) and not any(nx.is_isomorphic(nxg, h) for h in kept):
                kept.append(nxg)
                break
        save_graph(g, out / f"regular3_{i:02d}_n{n}.json")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data/regular3"))
