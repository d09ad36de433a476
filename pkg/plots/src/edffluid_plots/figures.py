"""Figure builders over the harness CSV schemas.

Four kinds:
  paths_overlay     sample normalized queue/loss paths per n over the fluid curve
  error_vs_n        median and p90 sup-distances vs n, log-log
  frontier_overlay  first-positive-atom samples vs the analytic frontier
  mginf_overlay     normalized in-service paths vs the infinite-server curve

Output is deterministic byte-for-byte: fixed style, salted SVG ids, no
timestamps in the metadata.
"""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

KINDS = ("paths_overlay", "error_vs_n", "frontier_overlay", "mginf_overlay")

_STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "svg.hashsalt": "edffluid-plots",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}

_N_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]


class PlotError(RuntimeError):
    """Input directory does not carry what the figure needs."""


@dataclass(frozen=True)
class FigureSpec:
    input_dir: Path
    kind: str
    out_path: Path

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def _read_csv(path: Path) -> tuple[list[str], list[dict]]:
    if not path.exists():
        raise PlotError(f"missing file {path.name} in {path.parent}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def _need(columns: list[str], wanted: list[str], fname: str) -> None:
    for col in wanted:
        if col not in columns:
            raise PlotError(f"missing column {col!r} in {fname}")


def _meta(input_dir: Path) -> dict:
    p = input_dir / "meta.json"
    if not p.exists():
        raise PlotError(f"missing file meta.json in {input_dir}")
    return json.loads(p.read_text())


def _fluid(input_dir: Path, wanted: list[str]) -> dict[str, list[float]]:
    cols, rows = _read_csv(input_dir / "fluid.csv")
    _need(cols, wanted, "fluid.csv")
    return {c: [float(r[c]) for r in rows] for c in wanted}


def _paths_by_rep(
    input_dir: Path, n: int, max_reps: int = 3
) -> dict[int, dict[str, list[float]]]:
    fname = input_dir / f"paths_n{n}.csv"
    cols, rows = _read_csv(fname)
    _need(cols, ["t", "rep", "Qbar", "Pbar", "t1bar"], fname.name)
    out: dict[int, dict[str, list[float]]] = defaultdict(lambda: {"t": [], "Qbar": [], "Pbar": [], "t1bar": []})
    for r in rows:
        rep = int(r["rep"])
        if rep >= max_reps:
            continue
        slot = out[rep]
        slot["t"].append(float(r["t"]))
        slot["Qbar"].append(float(r["Qbar"]))
        slot["Pbar"].append(float(r["Pbar"]))
        slot["t1bar"].append(float(r["t1bar"]))
    return dict(out)


def _save(fig, out_path: Path) -> Path:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    suffix = out_path.suffix.lower()
    if suffix == ".svg":
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    elif suffix == ".png":
        fig.savefig(out_path, format="png", metadata={"Software": None})
    else:
        raise PlotError(f"unsupported image format {suffix!r} (use .svg or .png)")
    plt.close(fig)
    return out_path


def _ns_with_paths(input_dir: Path, meta: dict) -> list[int]:
    return [n for n in meta.get("n_list", []) if (input_dir / f"paths_n{n}.csv").exists()]


def _plot_paths_overlay(spec: FigureSpec, meta: dict):
    mginf = meta.get("kind") == "mginf"
    if mginf:
        fluid = _fluid(spec.input_dir, ["t", "congestion", "served"])
        q_ref, p_ref = fluid["congestion"], fluid["served"]
        q_label, p_label = "in service", "departed"
    else:
        fluid = _fluid(spec.input_dir, ["t", "Q_fluid", "P_fluid"])
        q_ref, p_ref = fluid["Q_fluid"], fluid["P_fluid"]
        q_label, p_label = "queue", "losses"

    fig, (ax_q, ax_p) = plt.subplots(1, 2, sharex=True)
    for axis, ref, label in ((ax_q, q_ref, q_label), (ax_p, p_ref, p_label)):
        axis.plot(fluid["t"], ref, color="black", lw=2.0, ls="--", label="fluid")
        axis.set_xlabel("t (scaled)")
        axis.set_title(label)
    for i, n in enumerate(_ns_with_paths(spec.input_dir, meta)):
        color = _N_COLORS[i % len(_N_COLORS)]
        for rep, path in sorted(_paths_by_rep(spec.input_dir, n).items()):
            kw = {"label": f"n={n}"} if rep == 0 else {}
            ax_q.plot(path["t"], path["Qbar"], color=color, lw=0.7, alpha=0.8, **kw)
            ax_p.plot(path["t"], path["Pbar"], color=color, lw=0.7, alpha=0.8)
    ax_q.legend(loc="best", fontsize=8)
    fig.suptitle("normalized paths vs fluid limit")
    return fig


def _plot_error_vs_n(spec: FigureSpec, meta: dict):
    fname = spec.input_dir / "summary.csv"
    cols, rows = _read_csv(fname)
    _need(cols, ["n", "metric", "median", "p90"], "summary.csv")
    series: dict[str, list[tuple[int, float, float]]] = defaultdict(list)
    for r in rows:
        series[r["metric"]].append((int(r["n"]), float(r["median"]), float(r["p90"])))
    fig, ax = plt.subplots()
    for i, metric in enumerate(sorted(series)):
        pts = sorted(series[metric])
        ns = [p[0] for p in pts]
        med = [max(p[1], 1e-12) for p in pts]
        p90 = [max(p[2], 1e-12) for p in pts]
        color = _N_COLORS[i % len(_N_COLORS)]
        ax.plot(ns, med, marker="o", color=color, label=f"{metric} median")
        ax.plot(ns, p90, marker="^", color=color, ls=":", alpha=0.7, label=f"{metric} p90")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("sup distance to fluid curve")
    ax.legend(loc="best", fontsize=7)
    ax.set_title("convergence of sup distances")
    return fig


def _plot_frontier_overlay(spec: FigureSpec, meta: dict):
    fluid = _fluid(spec.input_dir, ["t", "r_bar"])
    fig, ax = plt.subplots()
    ax.plot(fluid["t"], fluid["r_bar"], color="black", lw=2.0, ls="--", label="frontier")
    for i, n in enumerate(_ns_with_paths(spec.input_dir, meta)):
        color = _N_COLORS[i % len(_N_COLORS)]
        for rep, path in sorted(_paths_by_rep(spec.input_dir, n).items()):
            pts = [(t, v) for t, v in zip(path["t"], path["t1bar"]) if not math.isnan(v)]
            if not pts:
                continue
            kw = {"label": f"n={n}"} if rep == 0 else {}
            ax.plot([p[0] for p in pts], [p[1] for p in pts], color=color, lw=0.7, alpha=0.8, **kw)
    ax.set_xlabel("t (scaled)")
    ax.set_ylabel("first positive atom")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("next-pick credit vs analytic frontier")
    return fig


def _plot_mginf_overlay(spec: FigureSpec, meta: dict):
    fluid = _fluid(spec.input_dir, ["t", "congestion"])
    fig, ax = plt.subplots()
    ax.plot(fluid["t"], fluid["congestion"], color="black", lw=2.0, ls="--", label="fluid")
    for i, n in enumerate(_ns_with_paths(spec.input_dir, meta)):
        color = _N_COLORS[i % len(_N_COLORS)]
        for rep, path in sorted(_paths_by_rep(spec.input_dir, n).items()):
            kw = {"label": f"n={n}"} if rep == 0 else {}
            ax.plot(path["t"], path["Qbar"], color=color, lw=0.7, alpha=0.8, **kw)
    ax.set_xlabel("t (scaled)")
    ax.set_ylabel("normalized number in service")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("pure-delay congestion vs fluid limit")
    return fig


_BUILDERS = {
    "paths_overlay": _plot_paths_overlay,
    "error_vs_n": _plot_error_vs_n,
    "frontier_overlay": _plot_frontier_overlay,
    "mginf_overlay": _plot_mginf_overlay,
}


def plot(spec: FigureSpec) -> Path:
    """Render one figure kind from an experiment directory."""
    meta = _meta(Path(spec.input_dir))
    with plt.rc_context(_STYLE):
        fig = _BUILDERS[spec.kind](spec, meta)
        return _save(fig, Path(spec.out_path))
