"""Command line entry point: ``qaoa-transfer <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import graph as G
from .experiments import grid_search_layer, load_config, run_batch, train_donor
from .optimizer import OptimizerConfig
from .reporting import report
from .simulator import CONVENTIONS, MAXCUT, QaoaParams, build_energy_table, ground_energy

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("qaoa_transfer")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seeds(text: str) -> list[int]:
    """``0..19``, ``3`` or ``1,4,9``."""
    out = []
    for part in text.split(","):
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qaoa-transfer", description=__doc__.splitlines()[0])
    ap.add_argument("--seed-offset", type=int, default=0, help="added to every acceptor/graph seed")
    ap.add_argument("--convention", choices=CONVENTIONS, default=MAXCUT,
                    help="cost sign: maxcut (+sum J ZZ) or paper-literal (-sum J ZZ)")
    ap.add_argument("--max-qubits", type=int, default=G.MAX_NODES, help="refuse graphs larger than this")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-graphs", help="sample seeded Erdos-Renyi graphs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--edge-prob", type=float, default=0.6)
    p.add_argument("--seeds", type=_seeds, default=list(range(20)), help="e.g. 0..19 or 1,5,7")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--out", type=Path, required=True, help="directory; files are <n>_<seed>.json")

    p = sub.add_parser("train-donor", help="self-optimize a donor graph from random parameters")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--p", type=int, default=5)
    p.add_argument("--init-seed", type=int, default=0)
    p.add_argument("--learning-rate", type=float, default=OptimizerConfig.learning_rate)
    p.add_argument("--max-iterations", type=int, default=OptimizerConfig.max_iterations)
    p.add_argument("--out", type=Path, required=True, help="params JSON")

    p = sub.add_parser("run", help="run a batch experiment from a JSON config")
    p.add_argument("config", type=Path)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-resume", dest="resume", action="store_false",
                   help="discard existing records instead of skipping completed cells")

    p = sub.add_parser("grid-search", help="scan <H_c> over one layer's (gamma, beta) plane")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--params", type=Path, required=True, help="JSON with gammas and betas")
    p.add_argument("--layer", type=int, required=True)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--out", type=Path, required=True, help="result JSON")

    p = sub.add_parser("report", help="rebuild CSV tables and SVG figures for a run directory")
    p.add_argument("run_dir", type=Path)
    p.add_argument("--out-dir", type=Path, default=None)
    return ap


def _load_graph(path: Path, max_qubits: int) -> G.Graph:
    g = G.load_graph(path)
    if g.n_nodes > max_qubits:
        raise G.GraphValidationError("n_nodes", f"{g.n_nodes} exceeds --max-qubits={max_qubits}")
    return g


def _gen_graphs(args) -> None:
    if args.n > args.max_qubits:
        raise UsageError(f"--n {args.n} exceeds --max-qubits={args.max_qubits}")
    for seed in args.seeds:
        seed += args.seed_offset
        g = G.generate_erdos_renyi(args.n, args.edge_prob, seed, args.weighted)
        path = args.out / G.graph_filename(g, seed)
        G.save_graph(g, path)
        print(path)


def _train_donor(args) -> None:
    g = _load_graph(args.graph, args.max_qubits)
    cfg = OptimizerConfig(learning_rate=args.learning_rate, max_iterations=args.max_iterations)
    params, trace = train_donor(g, args.p, args.init_seed, cfg, args.convention)
    e_min = ground_energy(g, args.convention)
    payload = {
        **params.to_dict(),
        "r": trace.costs[-1] / e_min,
        "tau": trace.tau,
        "converged": trace.converged,
        "init_seed": args.init_seed,
        "convention": args.convention,
        "optimizer": cfg.to_dict(),
    }
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(payload, indent=1) + "\n")
    print(f"r={payload['r']:.6f} tau={trace.tau} converged={trace.converged}")


def _run(args) -> None:
    cfg = load_config(args.config).with_seed_offset(args.seed_offset)
    if args.convention != MAXCUT:
        from dataclasses import replace

        cfg = replace(cfg, convention=args.convention)
    too_big = [n for n in cfg.acceptor.node_counts + tuple(d.n_nodes for d in cfg.donors) if n > args.max_qubits]
    if too_big:
        raise UsageError(f"node counts {too_big} exceed --max-qubits={args.max_qubits}")
    records = run_batch(cfg, args.out_dir, workers=args.workers, resume=args.resume)
    print(f"{len(records)} records in {args.out_dir}")


def _grid_search(args) -> None:
    g = _load_graph(args.graph, args.max_qubits)
    params = QaoaParams.from_dict(json.loads(args.params.read_text()))
    result = grid_search_layer(build_energy_table(g, args.convention), params, args.layer, args.resolution)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps({"layer": args.layer, **result.to_dict()}) + "\n")
    print(f"min <H_c> = {result.min_value:.6f} at gamma={result.argmin[0]:.6f}, beta={result.argmin[1]:.6f}")


def _report(args) -> None:
    for path in report(args.run_dir, args.out_dir):
        print(path)


COMMANDS = {
    "gen-graphs": _gen_graphs,
    "train-donor": _train_donor,
    "run": _run,
    "grid-search": _grid_search,
    "report": _report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (G.GraphValidationError, ValueError, KeyError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        log.exception("run failed")
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
