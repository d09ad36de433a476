"""Command-line entry point.

Subcommands: ``simulate`` (one trajectory + observables), ``fluid`` (fluid
curve tables), ``converge`` (ensemble experiments from a JSON config) and
``transport-check`` (residual report for the named transport cases).

Exit codes: 0 success / all checks pass, 1 runtime failure, 2 invalid
configuration or arguments.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calculus import Distribution, standard_test_suite
from .fluid import fluid_curves_det, fluid_curves_mginf
from .harness import (
    convergence_experiment,
    lemma_checks,
    mginf_experiment,
    resolve_threads,
    write_experiment_dir,
)
from .simulator import SimConfig, observables, run
from .transport import run_transport_check, transport_cases

__all__ = ["main"]


class ConfigError(ValueError):
    """Configuration rejected; the message names the offending key."""


# ---------------------------------------------------------------------------
# config validation (unknown keys rejected everywhere)


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing key {key!r} in {where}")
    return section[key]


def _no_unknown(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _positive(value, key: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"key {key!r} must be a number") from None
    if not out > 0:
        raise ConfigError(f"key {key!r} must be positive")
    return out


def load_config(path: str | Path) -> dict:
    """Parse and validate a run configuration document."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _no_unknown(raw, {"model", "mode", "experiment", "seeds", "output"}, "config")

    model = _require(raw, "model", "config")
    _no_unknown(
        model,
        {"lambda", "mu", "patience", "det_case", "initial_credits", "alpha"},
        "model",
    )
    out: dict = {"lambda": _positive(_require(model, "lambda", "model"), "model.lambda")}
    mode = raw.get("mode", "edf")
    if mode not in ("edf", "pure_delay"):
        raise ConfigError("key 'mode' must be 'edf' or 'pure_delay'")
    out["mode"] = mode

    if "mu" in model:
        mu = float(model["mu"])
        if mu < 0:
            raise ConfigError("key 'model.mu' must be nonnegative")
        out["mu"] = mu
    else:
        out["mu"] = 0.0
    if "det_case" in model:
        det = model["det_case"]
        _no_unknown(det, {"d"}, "model.det_case")
        out["d"] = _positive(_require(det, "d", "model.det_case"), "model.det_case.d")
    if "patience" in model:
        try:
            out["patience"] = Distribution.from_config(model["patience"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad 'model.patience': {exc}") from None
    if "alpha" in model:
        try:
            out["alpha"] = Distribution.from_config(model["alpha"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad 'model.alpha': {exc}") from None
    if "initial_credits" in model:
        credits = model["initial_credits"]
        if not isinstance(credits, list) or any(not float(c) > 0 for c in credits):
            raise ConfigError("key 'model.initial_credits' must be a list of positive numbers")
        out["initial_credits"] = tuple(float(c) for c in credits)

    exp = raw.get("experiment", {})
    _no_unknown(
        exp,
        {
            "kind",
            "n_list",
            "reps",
            "T",
            "grid_step",
            "pairing_grid_step",
            "accept_median",
            "accept_freq",
            "phis",
        },
        "experiment",
    )
    out["T"] = _positive(exp.get("T", 1.0), "experiment.T")
    out["kind"] = exp.get("kind", "converge")
    if out["kind"] not in ("converge", "lemmas", "mginf"):
        raise ConfigError("key 'experiment.kind' must be converge, lemmas or mginf")
    n_list = exp.get("n_list", [10, 100, 1000])
    if not isinstance(n_list, list) or not n_list or any(int(n) < 1 for n in n_list):
        raise ConfigError("key 'experiment.n_list' must be a nonempty list of positive integers")
    out["n_list"] = [int(n) for n in n_list]
    reps = exp.get("reps", 100)
    if int(reps) < 1:
        raise ConfigError("key 'experiment.reps' must be a positive integer")
    out["reps"] = int(reps)
    out["grid_step"] = (
        _positive(exp["grid_step"], "experiment.grid_step") if "grid_step" in exp else None
    )
    out["pairing_grid_step"] = (
        _positive(exp["pairing_grid_step"], "experiment.pairing_grid_step")
        if "pairing_grid_step" in exp
        else None
    )
    out["accept_median"] = float(exp.get("accept_median", 0.1))
    out["accept_freq"] = float(exp.get("accept_freq", 0.05))
    out["phis"] = exp.get("phis")

    seeds = raw.get("seeds", {})
    _no_unknown(seeds, {"master", "rule"}, "seeds")
    master = seeds.get("master", 0)
    if not isinstance(master, int) or not (0 <= master < 2**64):
        raise ConfigError("key 'seeds.master' must be a 64-bit unsigned integer")
    out["master_seed"] = master
    if seeds.get("rule", "xor") != "xor":
        raise ConfigError("key 'seeds.rule' only supports 'xor' (master XOR (n*10^6 + rep))")

    output = raw.get("output", {})
    _no_unknown(output, {"directory"}, "output")
    out["directory"] = output.get("directory")
    return out


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if "patience" not in cfg:
        raise ConfigError("simulate needs 'model.patience'")
    seed = args.seed if args.seed is not None else cfg["master_seed"]
    sim = SimConfig(
        lam=cfg["lambda"],
        mu=cfg["mu"],
        patience=cfg["patience"],
        horizon=cfg["T"],
        initial_credits=cfg.get("initial_credits", ()),
        seed=seed,
        mode=cfg["mode"],
    )
    traj = run(sim)
    out = Path(args.out or cfg["directory"] or ".")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trajectory.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "kind", "customer_id", "deadline"])
        for t, kind, cid, deadline in traj.event_rows():
            w.writerow([repr(t), kind, cid, repr(deadline)])
    obs = observables(traj)
    if args.grid_step is not None and args.grid_step <= 0:
        raise ConfigError("--grid-step must be positive")
    step = args.grid_step if args.grid_step is not None else sim.horizon / 200
    grid = np.arange(0.0, sim.horizon + step / 2, step)
    with open(out / "observables.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "Q", "P", "S", "X", "t1"])
        for row in obs.csv_rows(grid):
            w.writerow([repr(row[0]), row[1], row[2], row[3], row[4], repr(row[5])])
    print(f"simulate: {len(traj.events)} events -> {out}/trajectory.csv, {out}/observables.csv")
    return 0


def _cmd_fluid(args) -> int:
    if args.dt <= 0:
        raise ConfigError("--dt must be positive")
    if args.t_max <= 0:
        raise ConfigError("--t-max must be positive")
    ts = np.arange(0.0, args.t_max + args.dt / 2, args.dt)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if args.case == "det-edf":
        try:
            curves = fluid_curves_det(ts, args.lam, args.mu, args.d)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        header = ["t", "Q_fluid", "P_fluid", "r_bar"]
    else:
        if not args.alpha:
            raise ConfigError("--alpha is required for the mginf case")
        try:
            alpha = Distribution.from_config(json.loads(args.alpha))
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad --alpha: {exc}") from None
        curves = fluid_curves_mginf(ts, args.lam, alpha)
        header = ["t", "congestion", "workload", "served"]
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(ts.size):
            w.writerow([repr(float(curves[h][i])) for h in header])
    print(f"fluid: {args.case} -> {out_path} ({ts.size} rows)")
    return 0


def _cmd_converge(args) -> int:
    cfg = load_config(args.config)
    out_dir = args.out or cfg["directory"]
    if out_dir is None:
        raise ConfigError("an output directory is required (--out or output.directory)")
    threads = resolve_threads(args.threads)
    kind = cfg["kind"]
    if kind == "converge":
        if "d" not in cfg:
            raise ConfigError("converge needs 'model.det_case.d'")
        report = convergence_experiment(
            cfg["lambda"],
            cfg["mu"],
            cfg["d"],
            n_list=cfg["n_list"],
            reps=cfg["reps"],
            T=cfg["T"],
            master_seed=cfg["master_seed"],
            grid_step=cfg["grid_step"],
            pairing_step=cfg["pairing_grid_step"],
            phi_names=cfg["phis"],
            threads=threads,
            accept_median=cfg["accept_median"],
        )
    elif kind == "lemmas":
        if "d" not in cfg:
            raise ConfigError("lemmas needs 'model.det_case.d'")
        report = lemma_checks(
            cfg["lambda"],
            cfg["mu"],
            cfg["d"],
            n_list=cfg["n_list"],
            reps=cfg["reps"],
            master_seed=cfg["master_seed"],
            T=cfg["T"],
            threads=threads,
            accept_freq=cfg["accept_freq"],
        )
    else:
        if "alpha" not in cfg:
            raise ConfigError("mginf needs 'model.alpha'")
        report = mginf_experiment(
            cfg["lambda"],
            cfg["alpha"],
            n_list=cfg["n_list"],
            reps=cfg["reps"],
            T=cfg["T"],
            master_seed=cfg["master_seed"],
            grid_step=cfg["grid_step"],
            threads=threads,
            accept_median=cfg["accept_median"],
        )
    write_experiment_dir(report, out_dir)
    for name, ok in sorted(report.flags.items()):
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    print(f"converge[{kind}]: wrote {out_dir}; {'all pass' if report.all_pass else 'FAILURES'}")
    return 0 if report.all_pass else 1


def _cmd_transport_check(args) -> int:
    cases = transport_cases()
    if args.case not in cases:
        raise ConfigError(f"unknown case {args.case!r}; available: {', '.join(sorted(cases))}")
    case = cases[args.case]
    rows, ok = run_transport_check(case, standard_test_suite(), tol=args.tol)
    writer_target = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(writer_target)
        w.writerow(["case", "phi", "t", "residual", "tol", "pass"])
        for name, phi, t, res, tol, good in rows:
            w.writerow([name, phi, repr(float(t)), repr(float(res)), repr(float(tol)), good])
    finally:
        if args.out:
            writer_target.close()
    print(f"transport-check[{args.case}]: {'pass' if ok else 'FAIL'}", file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="edffluid",
        description="Simulate the hard-EDF M/M/1+GI queue and check its fluid limits.",
    )
    p.add_argument("--version", action="version", version=f"edffluid {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser(
        "simulate",
        help="run one trajectory, write trajectory.csv and observables.csv",
        description=(
            "Run one seeded trajectory.  Config keys used: model.lambda, model.mu, "
            "model.patience (tagged record, e.g. {\"kind\":\"deterministic\",\"d\":2.0}), "
            "model.initial_credits, mode (edf|pure_delay), experiment.T (horizon), "
            "seeds.master, output.directory."
        ),
    )
    ps.add_argument("--config", required=True, help="JSON config path")
    ps.add_argument("--seed", type=int, default=None, help="override seeds.master")
    ps.add_argument("--out", default=None, help="output directory (default: output.directory)")
    ps.add_argument(
        "--grid-step",
        type=float,
        default=None,
        help="observables sampling step (default: horizon/200; event times always included)",
    )
    ps.set_defaults(func=_cmd_simulate)

    pf = sub.add_parser(
        "fluid",
        help="tabulate fluid curves (det-edf or mginf case)",
        description=(
            "Write the fluid curves on a regular grid.  det-edf: columns "
            "t,Q_fluid,P_fluid,r_bar from --lam/--mu/--d.  mginf: columns "
            "t,congestion,workload,served from --lam and --alpha (a JSON "
            "distribution record)."
        ),
    )
    pf.add_argument("--case", choices=["det-edf", "mginf"], required=True)
    pf.add_argument("--lam", type=float, required=True, help="arrival rate")
    pf.add_argument("--mu", type=float, default=1.0, help="service rate (det-edf)")
    pf.add_argument("--d", type=float, default=2.0, help="deterministic deadline (det-edf)")
    pf.add_argument("--alpha", default=None, help="service-law JSON record (mginf)")
    pf.add_argument("--t-max", type=float, required=True, help="last grid time")
    pf.add_argument("--dt", type=float, required=True, help="grid step (> 0)")
    pf.add_argument("--out", required=True, help="output CSV path")
    pf.set_defaults(func=_cmd_fluid)

    pc = sub.add_parser(
        "converge",
        help="run an ensemble experiment (converge | lemmas | mginf)",
        description=(
            "Drive replicated scaled systems from a JSON config.  Config keys: "
            "model.lambda, model.mu, model.det_case.d (EDF cases) or model.alpha "
            "(mginf), experiment.kind (converge|lemmas|mginf), experiment.n_list, "
            "experiment.reps (default 100), experiment.T, experiment.grid_step "
            "(default T/500), experiment.pairing_grid_step, experiment.accept_median, "
            "experiment.accept_freq, experiment.phis, seeds.master, seeds.rule, "
            "output.directory.  Exit code 0 iff every acceptance flag passes."
        ),
    )
    pc.add_argument("--config", required=True, help="JSON config path")
    pc.add_argument("--out", default=None, help="output directory (default: output.directory)")
    pc.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker processes (EDFFLUID_THREADS overrides; default: machine parallelism)",
    )
    pc.set_defaults(func=_cmd_converge)

    pt = sub.add_parser(
        "transport-check",
        help="residual report for a named transport case",
        description="Check the closed-form transport solution by residual over the probe suite.",
    )
    pt.add_argument("--case", required=True, help="case name (see error message for the list)")
    pt.add_argument("--tol", type=float, default=None, help="residual tolerance (default: case's)")
    pt.add_argument("--out", default=None, help="CSV report path (default: stdout)")
    pt.set_defaults(func=_cmd_transport_check)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
