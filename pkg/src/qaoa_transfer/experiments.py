"""Donor training, parameter transfer, layer-selective fine-tuning and batch sweeps."""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import graph as G
from .optimizer import LayerMask, OptimizerConfig, OptTrace, optimize
from .simulator import (
    CONVENTIONS,
    MAXCUT,
    EnergyTable,
    QaoaParams,
    apply_cost_layer,
    apply_mixer_layer,
    build_energy_table,
    energy,
    expectation,
    ground_energy,
    plus_state,
)

log = logging.getLogger(__name__)

SELF_OPT = "self_opt"
FULL_TRANSFER = "full_transfer"
K_LAYER = "k_layer"
ALL_LAYER = "all_layer"
SCHEME_KINDS = (SELF_OPT, FULL_TRANSFER, K_LAYER, ALL_LAYER)

_INIT_STREAM = 2


# ---------------------------------------------------------------- schemes


@dataclass(frozen=True)
class SchemeSpec:
    kind: str
    free_layers: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        object.__setattr__(self, "free_layers", frozenset(int(i) for i in self.free_layers))
        if self.kind == K_LAYER and not self.free_layers:
            raise ValueError("k_layer scheme needs free_layers")
        if self.kind != K_LAYER and self.free_layers:
            object.__setattr__(self, "free_layers", frozenset())

    def validate(self, p: int) -> None:
        if self.kind == K_LAYER:
            # freeing every layer is allowed and reproduces all_layer
            LayerMask(self.free_layers, p)

    def layers(self, p: int) -> tuple[int, ...]:
        """Free layers as a sorted tuple; empty for full transfer."""
        if self.kind == FULL_TRANSFER:
            return ()
        if self.kind == K_LAYER:
            return tuple(sorted(self.free_layers))
        return tuple(range(1, p + 1))

    @property
    def label(self) -> str:
        if self.kind == K_LAYER:
            return "layers-" + "-".join(map(str, sorted(self.free_layers)))
        return self.kind

    @classmethod
    def parse(cls, text) -> SchemeSpec:
        """Accept ``full_transfer``, ``all_layer``, ``self_opt``, ``layers-1-2`` or a dict."""
        if isinstance(text, dict):
            return cls(text["kind"], frozenset(text.get("free_layers", ())))
        if text.startswith("layers-"):
            return cls(K_LAYER, frozenset(int(x) for x in text[len("layers-"):].split("-")))
        return cls(text)

    def to_json(self):
        return self.label


def format_layers(layers) -> str:
    return "-".join(map(str, layers))


# ---------------------------------------------------------------- records


@dataclass
class RunRecord:
    acceptor_n: int
    acceptor_seed: int | None
    donor_seed: int | None
    scheme: str
    free_layers: tuple[int, ...]
    r_initial: float
    r_final: float
    tau: int
    delta_r: float
    converged: bool
    wall_time_seconds: float
    final_params: QaoaParams
    e_min: float = math.nan
    costs: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.free_layers)

    @property
    def scheme_label(self) -> str:
        if self.scheme == K_LAYER:
            return "layers-" + format_layers(self.free_layers)
        return self.scheme

    @property
    def key(self) -> tuple:
        return (_sort_int(self.donor_seed), self.acceptor_n, _sort_int(self.acceptor_seed), self.scheme, self.free_layers)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["free_layers"] = list(self.free_layers)
        d["final_params"] = self.final_params.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunRecord:
        d = dict(d)
        d["free_layers"] = tuple(d["free_layers"])
        d["final_params"] = QaoaParams.from_dict(d["final_params"])
        return cls(**d)


def _sort_int(x):
    return -1 if x is None else x


# ---------------------------------------------------------------- core ops


def random_params(p: int, seed) -> QaoaParams:
    """gamma_i ~ U(-pi, pi), beta_i ~ U(-pi/2, pi/2) from a seeded PCG64 stream.

    ``seed`` may be an int or a sequence of ints (mixed into one SeedSequence).
    """
    entropy = [int(s) for s in (seed if isinstance(seed, (list, tuple)) else [seed])]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy + [_INIT_STREAM])))
    gammas = rng.uniform(-math.pi, math.pi, p)
    betas = rng.uniform(-math.pi / 2, math.pi / 2, p)
    return QaoaParams(tuple(gammas.tolist()), tuple(betas.tolist()))


def train_donor(donor: G.Graph, p: int, init_seed: int, cfg: OptimizerConfig = OptimizerConfig(),
                convention: str = MAXCUT) -> tuple[QaoaParams, OptTrace]:
    """Self-optimize all layers of ``donor`` from a random start.

    Non-convergence is not an error; check ``trace.converged``.
    """
    if not G.is_connected(donor):
        raise ValueError("donor graph must be connected")
    table = build_energy_table(donor, convention)
    params, trace = optimize(table, random_params(p, init_seed), LayerMask.all(p), cfg)
    if not trace.converged:
        log.warning("donor training hit max_iterations=%d without converging", cfg.max_iterations)
    return params, trace


def run_scheme(acceptor: G.Graph, donor_params: QaoaParams, scheme: SchemeSpec,
               cfg: OptimizerConfig = OptimizerConfig(), *, convention: str = MAXCUT,
               table: EnergyTable | None = None, e_min: float | None = None,
               acceptor_seed: int | None = None, donor_seed: int | None = None,
               init_seed=0) -> RunRecord:
    """Apply one scheme to one acceptor, starting from the transferred parameters.

    ``self_opt`` ignores the donor and starts from ``random_params(p, init_seed)``;
    its ``r_initial`` is still the full-transfer ratio so ``delta_r`` is
    comparable across schemes.
    """
    p = donor_params.p
    scheme.validate(p)
    if table is None:
        table = build_energy_table(acceptor, convention)
    if e_min is None:
        e_min = ground_energy(acceptor, table.convention)
    start = time.perf_counter()
    r_initial = energy(table, donor_params) / e_min
    layers = scheme.layers(p)
    if scheme.kind == FULL_TRANSFER:
        final = donor_params
        costs = [r_initial * e_min]
        converged = True
    else:
        init = random_params(p, init_seed) if scheme.kind == SELF_OPT else donor_params
        final, trace = optimize(table, init, LayerMask(frozenset(layers), p), cfg)
        costs, converged = trace.costs, trace.converged
    r_final = costs[-1] / e_min if scheme.kind != FULL_TRANSFER else r_initial
    return RunRecord(
        acceptor_n=acceptor.n_nodes,
        acceptor_seed=acceptor_seed,
        donor_seed=donor_seed,
        scheme=scheme.kind,
        free_layers=layers,
        r_initial=r_initial,
        r_final=r_final,
        tau=len(costs) - 1,
        delta_r=r_final - r_initial,
        converged=converged,
        wall_time_seconds=time.perf_counter() - start,
        final_params=final,
        e_min=e_min,
        costs=list(costs),
    )


@dataclass
class GridResult:
    surface: np.ndarray  # surface[i, j] = <H_c> at (gammas[i], betas[j])
    gammas: np.ndarray
    betas: np.ndarray
    argmin: tuple[float, float]
    min_value: float

    def to_dict(self) -> dict:
        return {
            "gammas": self.gammas.tolist(),
            "betas": self.betas.tolist(),
            "surface": self.surface.tolist(),
            "argmin": list(self.argmin),
            "min_value": self.min_value,
        }


def grid_axes(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """gamma over [-pi, pi) and beta over [-pi/2, pi/2), ``resolution`` points each."""
    k = np.arange(resolution)
    return -math.pi + 2 * math.pi * k / resolution, -math.pi / 2 + math.pi * k / resolution


def grid_search_layer(table: EnergyTable, params: QaoaParams, layer: int, resolution: int = 64) -> GridResult:
    """Scan <H_c> over the (gamma, beta) plane of one layer, other layers held at ``params``."""
    p = params.p
    if not 1 <= layer <= p:
        raise ValueError(f"layer {layer} outside [1, {p}]")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    gammas, betas = grid_axes(resolution)
    prefix = plus_state(table.n_qubits)
    for gg, bb in zip(params.gammas[: layer - 1], params.betas[: layer - 1]):
        apply_cost_layer(prefix, table, gg)
        apply_mixer_layer(prefix, bb)
    surface = np.empty((resolution, resolution))
    for i, g in enumerate(gammas):
        after_cost = apply_cost_layer(prefix.copy(), table, g)
        for j, b in enumerate(betas):
            state = apply_mixer_layer(after_cost.copy(), b)
            for gg, bb in zip(params.gammas[layer:], params.betas[layer:]):
                apply_cost_layer(state, table, gg)
                apply_mixer_layer(state, bb)
            surface[i, j] = expectation(state, table)
    i, j = np.unravel_index(np.argmin(surface), surface.shape)
    return GridResult(surface, gammas, betas, (float(gammas[i]), float(betas[j])), float(surface[i, j]))


def layer_minima(table: EnergyTable, params: QaoaParams, resolution: int = 64) -> list[float]:
    """Grid minimum of <H_c> for each layer in turn, index 0 holding layer 1."""
    return [grid_search_layer(table, params, layer, resolution).min_value for layer in range(1, params.p + 1)]


# ---------------------------------------------------------------- batch config


@dataclass(frozen=True)
class DonorConfig:
    seed: int
    init_seed: int = 0
    n_nodes: int = 8
    edge_prob: float = 0.6


@dataclass(frozen=True)
class AcceptorConfig:
    node_counts: tuple[int, ...] = (12,)
    seeds: tuple[int, ...] = tuple(range(20))
    edge_prob: float = 0.6
    weighted: bool = False


DEFAULT_SCHEMES = ("full_transfer", "layers-2", "layers-1-2", "layers-1-2-3", "all_layer")


@dataclass(frozen=True)
class ExperimentConfig:
    p: int = 5
    donors: tuple[DonorConfig, ...] = (DonorConfig(seed=5, init_seed=3), DonorConfig(seed=4, init_seed=6))
    acceptor: AcceptorConfig = AcceptorConfig()
    schemes: tuple[SchemeSpec, ...] = tuple(SchemeSpec.parse(s) for s in DEFAULT_SCHEMES)
    optimizer: OptimizerConfig = OptimizerConfig()
    convention: str = MAXCUT

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        if not self.donors:
            raise ValueError("need at least one donor")
        if not self.schemes:
            raise ValueError("need at least one scheme")
        for s in self.schemes:
            s.validate(self.p)
        if len({s.label for s in self.schemes}) != len(self.schemes):
            raise ValueError("duplicate schemes in config")
        if len({d.seed for d in self.donors}) != len(self.donors):
            raise ValueError("donor seeds must be distinct")
        for n in self.acceptor.node_counts + tuple(d.n_nodes for d in self.donors):
            if not 2 <= n <= G.MAX_NODES:
                raise ValueError(f"node count {n} outside [2, {G.MAX_NODES}]")

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        unknown = set(d) - {"p", "donors", "acceptor", "schemes", "optimizer", "convention"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        if "p" in d:
            kw["p"] = int(d["p"])
        if "donors" in d:
            kw["donors"] = tuple(DonorConfig(**x) for x in d["donors"])
        if "acceptor" in d:
            a = dict(d["acceptor"])
            for key in ("node_counts", "seeds"):
                if key in a:
                    a[key] = tuple(int(x) for x in a[key])
            kw["acceptor"] = AcceptorConfig(**a)
        if "schemes" in d:
            kw["schemes"] = tuple(SchemeSpec.parse(s) for s in d["schemes"])
        if "optimizer" in d:
            kw["optimizer"] = OptimizerConfig(**d["optimizer"])
        if "convention" in d:
            kw["convention"] = d["convention"]
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "donors": [asdict(x) for x in self.donors],
            "acceptor": {
                "node_counts": list(self.acceptor.node_counts),
                "seeds": list(self.acceptor.seeds),
                "edge_prob": self.acceptor.edge_prob,
                "weighted": self.acceptor.weighted,
            },
            "schemes": [s.label for s in self.schemes],
            "optimizer": self.optimizer.to_dict(),
            "convention": self.convention,
        }

    def with_seed_offset(self, offset: int) -> ExperimentConfig:
        if not offset:
            return self
        acc = replace(self.acceptor, seeds=tuple(s + offset for s in self.acceptor.seeds))
        return replace(self, acceptor=acc)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------- batch runner


def self_opt_seed(acceptor_n: int, acceptor_seed: int) -> list[int]:
    return [acceptor_n, acceptor_seed]


def _donor_graph(d: DonorConfig, weighted: bool) -> G.Graph:
    return G.generate_erdos_renyi(d.n_nodes, d.edge_prob, d.seed, weighted)


def _run_cell(config: ExperimentConfig, donor_seed: int, donor_params: QaoaParams,
              n: int, seed: int, schemes: list[SchemeSpec]):
    """All pending schemes for one (donor, acceptor) pair; returns (records, failures)."""
    acc = config.acceptor
    g = G.generate_erdos_renyi(n, acc.edge_prob, seed, acc.weighted)
    table = build_energy_table(g, config.convention)
    e_min = ground_energy(g, config.convention)
    records, failures = [], []
    for scheme in schemes:
        try:
            records.append(run_scheme(
                g, donor_params, scheme, config.optimizer, table=table, e_min=e_min,
                acceptor_seed=seed, donor_seed=donor_seed, init_seed=self_opt_seed(n, seed),
            ))
        except Exception as exc:  # recorded, never fatal for the batch
            failures.append({"donor_seed": donor_seed, "acceptor_n": n, "acceptor_seed": seed,
                             "scheme": scheme.label, "error": f"{type(exc).__name__}: {exc}"})
    return records, failures


def _load_records(path: Path) -> list[RunRecord]:
    if not path.exists():
        return []
    out = []
    for line in path.read_text().splitlines():
        if line.strip():
            out.append(RunRecord.from_dict(json.loads(line)))
    return out


def _dump(record: RunRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True)


def _record_id(donor_seed, n, seed, label) -> tuple:
    return (donor_seed, n, seed, label)


def train_donors(config: ExperimentConfig, output_dir) -> dict[int, QaoaParams]:
    """Train (or reload) every donor, caching params under ``donors/<seed>.json``."""
    out = Path(output_dir)
    result = {}
    for d in config.donors:
        path = out / "donors" / f"{d.seed}.json"
        g = _donor_graph(d, config.acceptor.weighted)
        G.save_graph(g, out / "graphs" / G.graph_filename(g, d.seed))
        if path.exists():
            result[d.seed] = QaoaParams.from_dict(json.loads(path.read_text())["params"])
            continue
        params, trace = train_donor(g, config.p, d.init_seed, config.optimizer, config.convention)
        e_min = ground_energy(g, config.convention)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({
            "donor": asdict(d),
            "params": params.to_dict(),
            "r": trace.costs[-1] / e_min,
            "r_initial": trace.costs[0] / e_min,
            "tau": trace.tau,
            "converged": trace.converged,
            "costs": trace.costs,
        }, indent=1) + "\n")
        result[d.seed] = params
    return result


def run_batch(config: ExperimentConfig, output_dir, workers: int = 1, resume: bool = True) -> list[RunRecord]:
    """Run every (donor, acceptor, scheme) cell and persist the results.

    Writes ``config.json``, ``graphs/``, ``donors/``, ``records.jsonl`` (sorted
    by key once the batch finishes), ``failures.jsonl`` when anything failed,
    the CSV tables and the SVG figures. With ``resume`` the cells already in ``records.jsonl``
    are skipped.
    """
    from .reporting import aggregate, render_figures, write_csv

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "config.json"
    cfg_text = json.dumps(config.to_dict(), indent=1) + "\n"
    if resume and cfg_path.exists() and cfg_path.read_text() != cfg_text:
        raise ValueError(f"{cfg_path} holds a different config; use a fresh directory or resume=False")
    if not resume:
        for stale in ("records.jsonl", "failures.jsonl"):
            (out / stale).unlink(missing_ok=True)
        if (out / "donors").exists():
            for f in (out / "donors").glob("*.json"):
                f.unlink()
    cfg_path.write_text(cfg_text)

    rec_path = out / "records.jsonl"
    existing = _load_records(rec_path) if resume else []
    done = {_record_id(r.donor_seed, r.acceptor_n, r.acceptor_seed, r.scheme_label) for r in existing}

    acc = config.acceptor
    for n in acc.node_counts:
        for seed in acc.seeds:
            g = G.generate_erdos_renyi(n, acc.edge_prob, seed, acc.weighted)
            G.save_graph(g, out / "graphs" / G.graph_filename(g, seed))

    cells = []
    for d in config.donors:
        for n in acc.node_counts:
            for seed in acc.seeds:
                todo = [s for s in config.schemes if _record_id(d.seed, n, seed, s.label) not in done]
                if todo:
                    cells.append((d.seed, n, seed, todo))
    log.info("%d cells pending (%d records already present)", len(cells), len(existing))

    records = list(existing)
    failures = []
    if cells:
        donors = train_donors(config, out)
        with rec_path.open("a") as fh:
            def sink(result):
                new, bad = result
                for r in new:
                    fh.write(_dump(r) + "\n")
                fh.flush()
                records.extend(new)
                failures.extend(bad)

            if workers <= 1:
                for ds, n, seed, todo in cells:
                    sink(_run_cell(config, ds, donors[ds], n, seed, todo))
            else:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    futures = [pool.submit(_run_cell, config, ds, donors[ds], n, seed, todo)
                               for ds, n, seed, todo in cells]
                    for fut in as_completed(futures):
                        sink(fut.result())
    elif not (out / "donors").exists():
        train_donors(config, out)

    records.sort(key=lambda r: r.key)
    rec_path.write_text("".join(_dump(r) + "\n" for r in records))
    if failures:
        failures.sort(key=lambda f: (f["donor_seed"], f["acceptor_n"], f["acceptor_seed"], f["scheme"]))
        with (out / "failures.jsonl").open("a") as fh:
            for f in failures:
                log.error("run failed: %s", f)
                fh.write(json.dumps(f, sort_keys=True) + "\n")
    if records:
        summaries = aggregate(records)
        write_csv(summaries, records, out)
        render_figures(summaries, records, out)
    return records


def load_run(run_dir) -> list[RunRecord]:
    return sorted(_load_records(Path(run_dir) / "records.jsonl"), key=lambda r: r.key)
