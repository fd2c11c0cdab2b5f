"""Count how often each layer's (gamma, beta) plane holds the lowest grid minimum of <H_c>.

    python scripts/grid_search_layers.py --n 12 --seeds 10 --resolution 32
"""

import argparse

import numpy as np

from qaoa_transfer.experiments import ExperimentConfig, layer_minima, train_donor
from qaoa_transfer.graph import generate_erdos_renyi
from qaoa_transfer.simulator import build_energy_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--resolution", type=int, default=32)
    args = ap.parse_args()

    cfg = ExperimentConfig()
    for donor in cfg.donors:
        params, _ = train_donor(generate_erdos_renyi(donor.n_nodes, donor.edge_prob, donor.seed),
                                cfg.p, donor.init_seed)
        minima = np.array([
            layer_minima(build_energy_table(generate_erdos_renyi(args.n, 0.6, seed)), params, args.resolution)
            for seed in range(args.seeds)
        ])
        wins = np.bincount(minima.argmin(axis=1), minlength=cfg.p)
        print(f"donor seed {donor.seed}: mean minimum per layer {np.round(minima.mean(axis=0), 3).tolist()}")
        print(f"  lowest-minimum counts per layer {wins.tolist()} over {args.seeds} acceptors")


if __name__ == "__main__":
    main()
