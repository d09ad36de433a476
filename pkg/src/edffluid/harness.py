"""Ensemble experiment driver: scaled systems, replications, convergence
metrics against the fluid curves, and the first-loss / emptying-time
frequency checks.

Replications are independent tasks keyed by (n, rep); aggregation sorts by
key first, so reports are bit-identical however the work was scheduled.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .calculus import Distribution, suite_by_name
from .fluid import (
    det_edf_model,
    fluid_curves_det,
    mginf_congestion,
    mginf_served,
    mginf_workload,
    nu_fluid_general,
    omega_star,
)
from .simulator import SimConfig, Trajectory, observables, run, substream

__all__ = [
    "ScalingScheme",
    "derive_seed",
    "normalized_paths",
    "sup_distance",
    "ConvergenceReport",
    "convergence_experiment",
    "lemma_checks",
    "mginf_experiment",
    "write_experiment_dir",
]

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, n: int, rep: int) -> int:
    """Replication seed: master XOR (n*10^6 + rep).  Stable and documented."""
    return (master ^ (n * 1_000_000 + rep)) & _MASK64


@dataclass(frozen=True)
class ScalingScheme:
    """The n-th system of the scaling family: constant rates, credits and
    horizon blown up by n, n+1 customers initially in the buffer."""

    n: int
    lam: float
    mu: float
    d: float
    T: float

    def config(self, seed: int) -> SimConfig:
        n = self.n
        return SimConfig(
            lam=self.lam,
            mu=self.mu,
            patience=Distribution.deterministic(n * self.d),
            horizon=n * self.T,
            initial_credits=(float(n * self.d),) * (n + 1),
            seed=seed,
            mode="edf",
        )


def pure_delay_config(
    n: int, lam: float, alpha: Distribution, T: float, seed: int
) -> SimConfig:
    """The n-th pure-delay system: durations scaled by n, n initial customers
    drawn from the scaled law (dedicated substream)."""
    scaled = alpha.scaled(n)
    init_rng = substream(seed, 3)
    credits = tuple(float(c) for c in scaled.sample_array(init_rng, n))
    return SimConfig(
        lam=lam,
        mu=0.0,
        patience=scaled,
        horizon=n * T,
        initial_credits=credits,
        seed=seed,
        mode="pure_delay",
    )


# ---------------------------------------------------------------------------
# per-trajectory normalized paths


def _pairings_on_grid(
    traj: Trajectory, n: int, raw_times: np.ndarray, fns: Sequence
) -> list[np.ndarray]:
    """<renormalized profile, f> on a grid, one array per f, vectorized over
    (customer, time).  Lost customers keep contributing; served ones stop at
    service start."""
    cols = traj.arrays()
    arrival = cols["arrival"][:, None]
    start = np.where(np.isnan(cols["start"]), math.inf, cols["start"])[:, None]
    deadline = cols["deadline"][:, None]
    ts = raw_times[None, :]
    active = (arrival <= ts) & (start > ts)
    locs = (deadline - ts) / n
    out = []
    for f in fns:
        vals = np.asarray(f(locs), dtype=np.float64)
        out.append(np.where(active, vals, 0.0).sum(axis=0) / n)
    return out


def normalized_paths(
    traj: Trajectory,
    n: int,
    grid: np.ndarray,
    phis: Sequence = (),
    pairing_grid: np.ndarray | None = None,
) -> dict:
    """Normalized performance paths of one trajectory on a grid in scaled
    time: counts divided by n, first positive atom divided by n (nan when the
    buffer holds no positive credit), and profile pairings for each probe."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size and (grid[0] < 0 or grid[-1] * n > traj.horizon + 1e-9):
        raise ValueError("grid outside [0, horizon/n]")
    obs = observables(traj)
    raw = grid * n
    result = {
        "grid": grid,
        "Qbar": obs.q_at(raw) / n,
        "Pbar": obs.p_at(raw) / n,
        "t1bar": obs.t1_on_grid(raw) / n,
        "tau0bar": obs.tau0 / n,
        "omega0bar": obs.omega0 / n,
    }
    if phis:
        pg = grid if pairing_grid is None else np.asarray(pairing_grid, dtype=np.float64)
        result["pairing_grid"] = pg
        vals = _pairings_on_grid(traj, n, pg * n, phis)
        result["pairs"] = {f.name: v for f, v in zip(phis, vals)}
    return result


def workload_probe():
    """x -> max(x, 0): residual-work pairing for the pure-delay system."""

    def ev(x):
        return np.maximum(np.asarray(x, dtype=np.float64), 0.0)

    ev.name = "workload"
    return ev


def sup_distance(values: np.ndarray, reference, grid: np.ndarray) -> float:
    """Max over the grid of |path - reference|.

    ``reference`` may be a callable of t or an array on the same grid.  Where
    the path is undefined (nan, e.g. no positive atom) the path value is read
    as 0, which is also the frontier's resting level.
    """
    vals = np.where(np.isnan(values), 0.0, np.asarray(values, dtype=np.float64))
    if callable(reference):
        ref = np.array([reference(t) for t in np.asarray(grid).tolist()])
    else:
        ref = np.asarray(reference, dtype=np.float64)
    if ref.shape != vals.shape:
        raise ValueError("path and reference must share the grid")
    return float(np.max(np.abs(vals - ref))) if vals.size else 0.0


# ---------------------------------------------------------------------------
# experiment reports


@dataclass
class ConvergenceReport:
    kind: str
    params: dict
    n_list: list[int]
    reps: int
    master_seed: int
    grid: np.ndarray
    pairing_grid: np.ndarray | None
    fluid: dict[str, np.ndarray]
    fluid_pairs: dict[str, np.ndarray] = field(default_factory=dict)
    # per n: list over reps of {"rep", "seed", metric -> sup distance, extremes}
    per_rep: dict[int, list[dict]] = field(default_factory=dict)
    paths: dict[int, dict[str, np.ndarray]] = field(default_factory=dict)
    summary: dict[str, dict[int, tuple[float, float]]] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(self.flags.values()) if self.flags else True


def _aggregate(report: ConvergenceReport, metric_names: Sequence[str]) -> None:
    for metric in metric_names:
        per_n: dict[int, tuple[float, float]] = {}
        for n in report.n_list:
            rows = sorted(report.per_rep[n], key=lambda r: r["rep"])
            vals = np.sort(np.array([r[metric] for r in rows], dtype=np.float64))
            per_n[n] = (float(np.median(vals)), float(np.quantile(vals, 0.9)))
        report.summary[metric] = per_n


def _decreasing_flag(report: ConvergenceReport, metric: str) -> bool:
    medians = [report.summary[metric][n][0] for n in report.n_list]
    return all(b < a for a, b in zip(medians, medians[1:]))


def _grid(T: float, step: float, extra: Sequence[float] = ()) -> np.ndarray:
    base = np.arange(0.0, T + step / 2, step)
    pts = np.unique(np.concatenate([base, [T], [p for p in extra if 0.0 <= p <= T]]))
    return pts


# -- EDF convergence ---------------------------------------------------------


def _edf_rep(args) -> tuple[int, int, dict]:
    (n, rep, seed, lam, mu, d, T, grid, pairing_grid, phi_names) = args
    scheme = ScalingScheme(n=n, lam=lam, mu=mu, d=d, T=T)
    traj = run(scheme.config(seed))
    phis = suite_by_name(phi_names)
    paths = normalized_paths(traj, n, grid, phis=phis, pairing_grid=pairing_grid)
    return n, rep, paths


def _run_jobs(worker: Callable, jobs: list, threads: int) -> list:
    if threads <= 1:
        return [worker(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, jobs, chunksize=1))


def resolve_threads(requested: int | None = None) -> int:
    """Worker-count policy: EDFFLUID_THREADS overrides any request; otherwise
    the request, otherwise machine parallelism."""
    env = os.environ.get("EDFFLUID_THREADS")
    if env:
        return max(1, int(env))
    if requested is not None:
        return max(1, requested)
    return os.cpu_count() or 1


def default_threads() -> int:
    return resolve_threads(None)


def convergence_experiment(
    lam: float,
    mu: float,
    d: float,
    n_list: Sequence[int],
    reps: int,
    T: float,
    master_seed: int,
    grid_step: float | None = None,
    pairing_step: float | None = None,
    phi_names: Sequence[str] | None = None,
    threads: int = 1,
    accept_median: float = 0.1,
) -> ConvergenceReport:
    """Scaled-system convergence study against the deterministic-deadline
    fluid curves.

    Per n and replication, sup distances over the grid of: normalized queue
    length vs its fluid curve, normalized losses vs theirs, the first positive
    atom vs the frontier, and profile pairings vs the limiting pairing for
    every probe.  Also collects normalized first-loss / first-empty epochs.
    """
    n_list = list(n_list)
    w0 = omega_star(lam, mu, d)
    step = grid_step if grid_step is not None else T / 500
    pstep = pairing_step if pairing_step is not None else max(step, T / 100)
    breaks = (1.0 / mu, d, w0)
    grid = _grid(T, step, breaks)
    pairing_grid = _grid(T, pstep, breaks)
    phis = suite_by_name(phi_names)
    names = [p.name for p in phis]

    fluid = fluid_curves_det(grid, lam, mu, d)
    model = det_edf_model(lam, mu, d)
    fluid_pairs = {
        p.name: np.array([nu_fluid_general(t, p, model) for t in pairing_grid.tolist()])
        for p in phis
    }

    report = ConvergenceReport(
        kind="converge",
        params={"lambda": lam, "mu": mu, "d": d, "T": T, "omega_star": w0},
        n_list=n_list,
        reps=reps,
        master_seed=master_seed,
        grid=grid,
        pairing_grid=pairing_grid,
        fluid=fluid,
        fluid_pairs=fluid_pairs,
    )

    jobs = [
        (n, rep, derive_seed(master_seed, n, rep), lam, mu, d, T, grid, pairing_grid, tuple(names))
        for n in n_list
        for rep in range(reps)
    ]
    results = _run_jobs(_edf_rep, jobs, threads)

    tau_by_T: dict[int, int] = {n: 0 for n in n_list}
    for n, rep, paths in sorted(results, key=lambda r: (r[0], r[1])):
        entry = {
            "rep": rep,
            "seed": derive_seed(master_seed, n, rep),
            "Qbar": sup_distance(paths["Qbar"], fluid["Q_fluid"], grid),
            "Pbar": sup_distance(paths["Pbar"], fluid["P_fluid"], grid),
            "t1bar": sup_distance(paths["t1bar"], fluid["r_bar"], grid),
            "tau0bar": paths["tau0bar"],
            "omega0bar": paths["omega0bar"],
        }
        for name in names:
            entry[f"pair:{name}"] = sup_distance(
                paths["pairs"][name], fluid_pairs[name], pairing_grid
            )
        report.per_rep.setdefault(n, []).append(entry)
        if paths["tau0bar"] <= T:
            tau_by_T[n] += 1
        slot = report.paths.setdefault(n, {"Qbar": [], "Pbar": [], "t1bar": []})
        slot["Qbar"].append(paths["Qbar"])
        slot["Pbar"].append(paths["Pbar"])
        slot["t1bar"].append(paths["t1bar"])

    metrics = ["Qbar", "Pbar", "t1bar"] + [f"pair:{n}" for n in names]
    _aggregate(report, metrics)
    n_last = n_list[-1]
    for metric in ("Qbar", "Pbar", "t1bar"):
        report.flags[f"{metric}_median_decreasing"] = _decreasing_flag(report, metric)
        report.flags[f"{metric}_median_final_le"] = (
            report.summary[metric][n_last][0] <= accept_median
        )
    # horizon-admissibility indicator (recorded, not a pass/fail flag)
    report.notes["freq_tau0_le_T"] = {
        n: tau_by_T[n] / reps for n in n_list
    }
    report.notes["accept_median"] = accept_median
    return report


# -- lemma frequency checks ---------------------------------------------------


def _lemma_rep(args) -> tuple[int, int, float, float]:
    n, rep, seed, lam, mu, d, T = args
    scheme = ScalingScheme(n=n, lam=lam, mu=mu, d=d, T=T)
    obs = observables(run(scheme.config(seed)))
    return n, rep, obs.tau0 / n, obs.omega0 / n


def lemma_checks(
    lam: float,
    mu: float,
    d: float,
    n_list: Sequence[int],
    reps: int,
    master_seed: int,
    T: float | None = None,
    threads: int = 1,
    x_threshold: float | None = None,
    omega_fraction: float = 0.75,
    accept_freq: float = 0.05,
) -> ConvergenceReport:
    """Empirical frequencies of an early buffer emptying and of an early first
    loss; both must fade as n grows.

    ``x_threshold`` defaults to 0.5/mu and the loss threshold is
    ``omega_fraction`` of the fluid first-loss epoch.  Runs censored at the
    horizon count as "not occurred".
    """
    n_list = list(n_list)
    w0 = omega_star(lam, mu, d)
    x_thr = 0.5 / mu if x_threshold is None else x_threshold
    om_thr = omega_fraction * w0
    horizon_T = T if T is not None else max(x_thr, om_thr) * 1.1

    report = ConvergenceReport(
        kind="lemmas",
        params={
            "lambda": lam,
            "mu": mu,
            "d": d,
            "T": horizon_T,
            "omega_star": w0,
            "x_threshold": x_thr,
            "omega_threshold": om_thr,
        },
        n_list=n_list,
        reps=reps,
        master_seed=master_seed,
        grid=np.array([]),
        pairing_grid=None,
        fluid={},
    )
    jobs = [
        (n, rep, derive_seed(master_seed, n, rep), lam, mu, d, horizon_T)
        for n in n_list
        for rep in range(reps)
    ]
    results = _run_jobs(_lemma_rep, jobs, threads)
    for n, rep, tau0bar, omega0bar in sorted(results, key=lambda r: (r[0], r[1])):
        report.per_rep.setdefault(n, []).append(
            {
                "rep": rep,
                "seed": derive_seed(master_seed, n, rep),
                "tau0bar": tau0bar,
                "omega0bar": omega0bar,
                "tau_early": float(tau0bar <= x_thr),
                "omega_early": float(omega0bar <= om_thr),
            }
        )
    for metric in ("tau_early", "omega_early"):
        freqs = {}
        for n in n_list:
            rows = sorted(report.per_rep[n], key=lambda r: r["rep"])
            f = float(np.mean([r[metric] for r in rows]))
            freqs[n] = (f, f)  # a frequency, repeated in both summary columns
        report.summary[metric] = freqs
    n_last = n_list[-1]
    for metric in ("tau_early", "omega_early"):
        freqs = [report.summary[metric][n][0] for n in n_list]
        report.flags[f"{metric}_nonincreasing"] = all(
            b <= a for a, b in zip(freqs, freqs[1:])
        )
        report.flags[f"{metric}_final_le"] = report.summary[metric][n_last][0] <= accept_freq
    return report


# -- pure-delay convergence ----------------------------------------------------


def _mginf_rep(args) -> tuple[int, int, dict]:
    n, rep, seed, lam, alpha_cfg, T, grid = args
    alpha = Distribution.from_config(alpha_cfg)
    traj = run(pure_delay_config(n, lam, alpha, T, seed))
    paths = normalized_paths(traj, n, grid, phis=(workload_probe(),), pairing_grid=grid)
    paths["workload"] = paths.pop("pairs")["workload"]
    return n, rep, paths


def mginf_experiment(
    lam: float,
    alpha: Distribution,
    n_list: Sequence[int],
    reps: int,
    T: float,
    master_seed: int,
    grid_step: float | None = None,
    threads: int = 1,
    accept_median: float = 0.05,
) -> ConvergenceReport:
    """Pure-delay convergence study: normalized in-service / residual-work /
    departed paths against the infinite-server fluid curves."""
    n_list = list(n_list)
    step = grid_step if grid_step is not None else T / 500
    grid = _grid(T, step, alpha.jump_points)
    fluid = {
        "t": grid,
        "congestion": np.array([mginf_congestion(t, lam, alpha) for t in grid.tolist()]),
        "workload": np.array([mginf_workload(t, lam, alpha) for t in grid.tolist()]),
        "served": np.array([mginf_served(t, lam, alpha) for t in grid.tolist()]),
    }
    report = ConvergenceReport(
        kind="mginf",
        params={"lambda": lam, "alpha": alpha.to_config(), "T": T},
        n_list=n_list,
        reps=reps,
        master_seed=master_seed,
        grid=grid,
        pairing_grid=None,
        fluid=fluid,
    )
    jobs = [
        (n, rep, derive_seed(master_seed, n, rep), lam, alpha.to_config(), T, grid)
        for n in n_list
        for rep in range(reps)
    ]
    results = _run_jobs(_mginf_rep, jobs, threads)
    for n, rep, paths in sorted(results, key=lambda r: (r[0], r[1])):
        entry = {
            "rep": rep,
            "seed": derive_seed(master_seed, n, rep),
            "congestion": sup_distance(paths["Qbar"], fluid["congestion"], grid),
            "served": sup_distance(paths["Pbar"], fluid["served"], grid),
            "workload": sup_distance(paths["workload"], fluid["workload"], grid),
            "tau0bar": paths["tau0bar"],
            "omega0bar": paths["omega0bar"],
        }
        report.per_rep.setdefault(n, []).append(entry)
        slot = report.paths.setdefault(n, {"Qbar": [], "Pbar": [], "t1bar": []})
        slot["Qbar"].append(paths["Qbar"])
        slot["Pbar"].append(paths["Pbar"])
        slot["t1bar"].append(paths["t1bar"])
    _aggregate(report, ["congestion", "served", "workload"])
    n_last = n_list[-1]
    report.flags["congestion_median_decreasing"] = _decreasing_flag(report, "congestion")
    report.flags["congestion_median_final_le"] = (
        report.summary["congestion"][n_last][0] <= accept_median
    )
    report.notes["accept_median"] = accept_median
    return report


# ---------------------------------------------------------------------------
# directory layout


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_experiment_dir(report: ConvergenceReport, out_dir: str | Path) -> Path:
    """Materialize a report: meta.json, fluid.csv, paths_n<k>.csv,
    reps_n<k>.csv and summary.csv.  Deterministic byte-for-byte."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    meta = {
        "kind": report.kind,
        "params": report.params,
        "n_list": report.n_list,
        "reps": report.reps,
        "master_seed": report.master_seed,
        "seed_rule": "master XOR (n*10^6 + rep)",
        "seeds": {
            str(n): [derive_seed(report.master_seed, n, r) for r in range(report.reps)]
            for n in report.n_list
        },
        "grid_points": int(report.grid.size),
        "flags": report.flags,
        "notes": report.notes,
        "version": __version__,
    }
    (out / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")

    if report.fluid:
        if report.kind == "mginf":
            header = ["t", "congestion", "workload", "served"]
            cols = [report.fluid[k] for k in ("t", "congestion", "workload", "served")]
        else:
            header = ["t", "Q_fluid", "P_fluid", "r_bar"]
            cols = [report.fluid[k] for k in ("t", "Q_fluid", "P_fluid", "r_bar")]
        _write_csv(
            out / "fluid.csv",
            header,
            ([_fmt(c[i]) for c in cols] for i in range(len(cols[0]))),
        )

    for n in report.n_list:
        if n in report.paths:
            rows = []
            grid = report.grid
            slot = report.paths[n]
            for rep, (q, p, t1) in enumerate(zip(slot["Qbar"], slot["Pbar"], slot["t1bar"])):
                for k in range(grid.size):
                    rows.append(
                        [_fmt(grid[k]), rep, _fmt(q[k]), _fmt(p[k]), _fmt(t1[k])]
                    )
            _write_csv(out / f"paths_n{n}.csv", ["t", "rep", "Qbar", "Pbar", "t1bar"], rows)

        per = sorted(report.per_rep.get(n, []), key=lambda r: r["rep"])
        if per:
            keys = [k for k in per[0] if k not in ("rep", "seed")]
            _write_csv(
                out / f"reps_n{n}.csv",
                ["rep", "seed"] + keys,
                ([r["rep"], r["seed"]] + [_fmt(r[k]) for k in keys] for r in per),
            )

    rows = []
    for metric in sorted(report.summary):
        for n in report.n_list:
            med, p90 = report.summary[metric][n]
            rows.append([n, metric, _fmt(med), _fmt(p90)])
    _write_csv(out / "summary.csv", ["n", "metric", "median", "p90"], rows)
    return out
