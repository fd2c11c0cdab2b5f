"""Run one batch config, write tables and figures, and print the summary.

    python scripts/run_experiment.py configs/desk.json runs/desk --workers 4
"""

import argparse
from pathlib import Path

from qaoa_transfer.experiments import load_config, run_batch
from qaoa_transfer.reporting import aggregate


def _cell(x) -> str:
    return "-" if x is None else f"{x:.4g}"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", type=Path)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    records = run_batch(load_config(args.config), args.out_dir, workers=args.workers)
    print(f"{'scheme':<16}{'n':>4}{'mean r':>10}{'mean tau':>10}{'dr/tau':>12}{'count':>7}")
    for s in aggregate(records):
        print(f"{s.label:<16}{s.n_nodes:>4}{_cell(s.mean_r):>10}{_cell(s.mean_tau):>10}"
              f"{_cell(s.mean_dr_over_tau):>12}{s.n_instances:>7}")


if __name__ == "__main__":
    main()
