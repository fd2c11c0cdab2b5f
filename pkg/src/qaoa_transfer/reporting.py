"""Aggregate run records into CSV tables and static SVG figures."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .experiments import ALL_LAYER, FULL_TRANSFER, K_LAYER, SELF_OPT, RunRecord, format_layers

log = logging.getLogger(__name__)

RECORD_FIELDS = [
    "donor_seed", "acceptor_n", "acceptor_seed", "scheme", "free_layers",
    "r_initial", "r_final", "tau", "delta_r", "converged",
]
SUMMARY_FIELDS = [
    "scheme", "free_layers", "n_nodes", "mean_r", "std_r", "mean_tau", "std_tau",
    "mean_dr_over_tau", "std_dr_over_tau", "n_instances",
]


@dataclass(frozen=True)
class SchemeSummary:
    scheme: str
    free_layers: tuple[int, ...]
    n_nodes: int
    mean_r: float
    std_r: float
    mean_tau: float
    std_tau: float
    mean_dr_over_tau: float | None
    std_dr_over_tau: float | None
    n_instances: int

    @property
    def label(self) -> str:
        return scheme_label(self.scheme, self.free_layers)

    @property
    def key(self) -> tuple:
        return (self.scheme, self.free_layers, self.n_nodes)


def scheme_label(scheme: str, free_layers) -> str:
    if scheme == K_LAYER:
        return "layers-" + format_layers(free_layers)
    return scheme


def _mean_std(values) -> tuple[float, float]:
    a = np.asarray(values, dtype=np.float64)
    std = float(a.std(ddof=1)) if a.size > 1 else 0.0
    return float(a.mean()), std


def aggregate(records) -> list[SchemeSummary]:
    """Group by (scheme, free_layers, n_nodes); sample std; tau=0 runs skip the dr/tau mean."""
    records = list(records)
    if not records:
        raise ValueError("nothing to aggregate")
    groups = defaultdict(list)
    for r in records:
        groups[(r.scheme, tuple(r.free_layers), r.acceptor_n)].append(r)
    out = []
    for (scheme, layers, n), rs in sorted(groups.items()):
        mean_r, std_r = _mean_std([r.r_final for r in rs])
        mean_tau, std_tau = _mean_std([r.tau for r in rs])
        ratios = [r.delta_r / r.tau for r in rs if r.tau > 0]
        if ratios:
            mean_q, std_q = _mean_std(ratios)
        else:
            mean_q = std_q = None
        out.append(SchemeSummary(scheme, layers, n, mean_r, std_r, mean_tau, std_tau, mean_q, std_q, len(rs)))
    return out


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in sorted(records, key=lambda r: r.key):
        w.writerow([
            _fmt(r.donor_seed), r.acceptor_n, _fmt(r.acceptor_seed), r.scheme, format_layers(r.free_layers),
            _fmt(r.r_initial), _fmt(r.r_final), r.tau, _fmt(r.delta_r), _fmt(bool(r.converged)),
        ])
    return buf.getvalue()


def summary_csv(summaries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for s in sorted(summaries, key=lambda s: s.key):
        w.writerow([
            s.scheme, format_layers(s.free_layers), s.n_nodes, _fmt(s.mean_r), _fmt(s.std_r),
            _fmt(s.mean_tau), _fmt(s.std_tau), _fmt(s.mean_dr_over_tau), _fmt(s.std_dr_over_tau),
            s.n_instances,
        ])
    return buf.getvalue()


def write_csv(summaries, records, output_dir) -> tuple[Path, Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rec_path, sum_path = out / "records.csv", out / "summary.csv"
    rec_path.write_text(records_csv(records))
    sum_path.write_text(summary_csv(summaries))
    return rec_path, sum_path


def read_records_csv(path) -> list[dict]:
    """Parse records.csv back into typed rows (no params or traces)."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "donor_seed": int(row["donor_seed"]) if row["donor_seed"] else None,
                "acceptor_n": int(row["acceptor_n"]),
                "acceptor_seed": int(row["acceptor_seed"]) if row["acceptor_seed"] else None,
                "scheme": row["scheme"],
                "free_layers": tuple(int(x) for x in row["free_layers"].split("-") if x),
                "r_initial": float(row["r_initial"]),
                "r_final": float(row["r_final"]),
                "tau": int(row["tau"]),
                "delta_r": float(row["delta_r"]),
                "converged": row["converged"] == "true",
            })
    return rows


def read_summary_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {"scheme": row["scheme"],
                      "free_layers": tuple(int(x) for x in row["free_layers"].split("-") if x),
                      "n_nodes": int(row["n_nodes"]), "n_instances": int(row["n_instances"])}
            for k in ("mean_r", "std_r", "mean_tau", "std_tau", "mean_dr_over_tau", "std_dr_over_tau"):
                parsed[k] = float(row[k]) if row[k] else None
            rows.append(parsed)
    return rows


# ---------------------------------------------------------------- figures

_DISPLAY = {FULL_TRANSFER: "full transfer", ALL_LAYER: "all layers", SELF_OPT: "self-optimization"}


def display_name(label: str) -> str:
    if label.startswith("layers-"):
        layers = label[len("layers-"):].split("-")
        return ("layer " if len(layers) == 1 else "layers ") + ",".join(layers)
    return _DISPLAY.get(label, label)


def series_id(label: str) -> str:
    return f"series-{label}"


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "qaoa-transfer"
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def _ordered_labels(labels):
    rank = {FULL_TRANSFER: 0, SELF_OPT: 3, ALL_LAYER: 2}
    return sorted(set(labels), key=lambda lab: (rank.get(lab, 1), len(lab), lab))


def per_seed_figure(records, title: str = ""):
    """Grouped bars of r_final per acceptor seed, one series per scheme."""
    plt = _pyplot()
    records = list(records)
    seeds = sorted({r.acceptor_seed for r in records}, key=lambda s: -1 if s is None else s)
    labels = _ordered_labels(r.scheme_label for r in records)
    by = {(r.scheme_label, r.acceptor_seed): r.r_final for r in records}
    fig, ax = plt.subplots(figsize=(max(6.0, 0.55 * len(seeds) * max(1, len(labels)) / 2), 3.6))
    width = 0.8 / len(labels)
    x = np.arange(len(seeds))
    values = []
    for i, lab in enumerate(labels):
        ys = [by.get((lab, s), np.nan) for s in seeds]
        missing = sum(np.isnan(ys))
        if missing:
            log.info("series %s lacks %d of %d seeds", lab, missing, len(seeds))
        bars = ax.bar(x - 0.4 + width * (i + 0.5), np.nan_to_num(ys), width, label=display_name(lab))
        for k, patch in enumerate(bars.patches):
            patch.set_gid(f"{series_id(lab)}-{k}")
        values.extend(y for y in ys if not np.isnan(y))
    ax.set_xticks(x, [str(s) for s in seeds])
    ax.set_xlabel("acceptor seed")
    ax.set_ylabel("approximation ratio r")
    lo, hi = min(values + [0.0]), max(values + [1.0])
    pad = 0.05 * (hi - lo)
    ax.set_ylim(lo - pad, hi + pad)
    if title:
        ax.set_title(title)
    ax.legend(fontsize="small", ncol=min(len(labels), 5), loc="lower right")
    fig.tight_layout()
    return fig


_METRICS = (
    ("mean_r", "std_r", "mean r"),
    ("mean_tau", "std_tau", "mean iterations tau"),
    ("mean_dr_over_tau", "std_dr_over_tau", "mean dr/tau"),
)


def trend_figure(summaries, title: str = ""):
    """Mean r, mean tau and mean dr/tau against node count, with sample-std error bars."""
    plt = _pyplot()
    summaries = list(summaries)
    labels = _ordered_labels(s.label for s in summaries)
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.8))
    for ax, (mean_key, std_key, ylabel) in zip(axes, _METRICS):
        lo, hi = math.inf, -math.inf
        for lab in labels:
            pts = sorted((s.n_nodes, getattr(s, mean_key), getattr(s, std_key)) for s in summaries
                         if s.label == lab and getattr(s, mean_key) is not None)
            if not pts:
                continue
            ns, ms, sd = (np.array(v, dtype=float) for v in zip(*pts))
            cont = ax.errorbar(ns, ms, yerr=sd, marker="o", capsize=3, label=display_name(lab))
            for k, artist in enumerate(cont.get_children()):
                artist.set_gid(f"{series_id(lab)}-{k}")
            lo, hi = min(lo, (ms - sd).min()), max(hi, (ms + sd).max())
        if math.isfinite(lo):
            pad = 0.05 * (hi - lo) or 0.05 * max(abs(hi), 1e-12)
            ax.set_ylim(lo - pad, hi + pad)
        ax.set_xlabel("number of nodes")
        ax.set_ylabel(ylabel)
    axes[0].legend(fontsize="small")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig


def _save(fig, path: Path) -> Path:
    import matplotlib.pyplot as plt

    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def render_figures(summaries, records, output_dir) -> list[Path]:
    """Write ``fig_r_per_seed_donor<d>_n<n>.svg`` per (donor, n) and ``fig_tradeoff.svg``."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = list(records)
    written = []
    cells = defaultdict(list)
    for r in records:
        cells[(r.donor_seed, r.acceptor_n)].append(r)
    for (donor, n), rs in sorted(cells.items(), key=lambda kv: (-1 if kv[0][0] is None else kv[0][0], kv[0][1])):
        fig = per_seed_figure(rs, title=f"donor seed {donor}, {n}-node acceptors")
        written.append(_save(fig, out / f"fig_r_per_seed_donor{donor}_n{n}.svg"))
    summaries = list(summaries)
    if summaries:
        written.append(_save(trend_figure(summaries), out / "fig_tradeoff.svg"))
    return written


def report(run_dir, output_dir=None) -> list[Path]:
    """Recompute CSV tables and figures from a finished run directory."""
    from .experiments import load_run

    records = load_run(run_dir)
    if not records:
        raise ValueError(f"no records in {run_dir}")
    out = Path(output_dir) if output_dir is not None else Path(run_dir)
    summaries = aggregate(records)
    paths = list(write_csv(summaries, records, out))
    paths += render_figures(summaries, records, out)
    return paths


def recompute_summary_from_csv(path) -> list[SchemeSummary]:
    """Aggregate straight from records.csv rows (used to cross-check summary.csv)."""
    rows = [RunRecord(
        acceptor_n=r["acceptor_n"], acceptor_seed=r["acceptor_seed"], donor_seed=r["donor_seed"],
        scheme=r["scheme"], free_layers=r["free_layers"], r_initial=r["r_initial"], r_final=r["r_final"],
        tau=r["tau"], delta_r=r["delta_r"], converged=r["converged"], wall_time_seconds=0.0,
        final_params=None,
    ) for r in read_records_csv(path)]
    return aggregate(rows)
