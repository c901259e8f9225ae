"""Command-line driver for the experiments.

Every run writes its CSV results, an SVG line plot per CSV (unless
``--no-plot``) and ``manifest.json`` into ``--out``.  The manifest is written
even when the run fails, with the message in its ``error`` field.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__, kernels
from .euler_circuit import build_euler_step, classical_run, run_integration
from .fixedpoint import FixedPointFormat, to_signed
from .plots import line_plot_svg
from .qubo import connectivity_count, dense_linear_connectivity, dense_linear_problem, worst_case_connectivity
from .rk import explicit_euler, integrate_classical, system_by_name, table_by_name
from .solvers import AnnealSchedule, make_solver
from .spectral import MAX_SCAN_VARS, gap_scaling_experiment
from .variational import integrate_qubo, variational_rk_step
from .verify import verify_all

SEED_ENV = "QODELAB_SEED"
log = logging.getLogger("qodelab")


class ConfigError(ValueError):
    pass


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    return [float(v) for v in str(text).split(",") if v.strip()]


# name -> (type, default, help)
PARAMS: dict[str, dict[str, tuple[Callable, Any, str]]] = {
    "euler-circuit": {
        "n": (int, 4, "register width"),
        "q": (int, 1, "fractional bits"),
        "dt": (float, 0.5, "time step, a negative power of two"),
        "steps": (int, 8, "number of Euler steps"),
        "u0": (str, "0,-1", "initial state u1,u2"),
    },
    "anneal-integrate": {
        "system": (str, "model", "model | riccati"),
        "scheme": (str, "gl6", "Butcher table name"),
        "dt": (float, 0.5, "time step"),
        "steps": (int, 20, "number of time steps"),
        "bits": (int, 3, "bits per register"),
        "iters": (int, 15, "variational iterations per step"),
        "k0": (float, 1.0, "initial resolution exponent"),
        "c": (float, 0.5, "exponent shift per iteration"),
        "solver": (str, "exact", "exact | sa"),
        "u0": (str, "1,0", "initial state"),
        "stage_form": (str, "rk", "rk | split"),
        "reads": (int, 100, "annealing reads"),
        "sweeps": (int, 200, "annealing sweeps"),
    },
    "variational-convergence": {
        "system": (str, "model", "model | riccati"),
        "scheme": (str, "gl6", "Butcher table name"),
        "dt": (float, 0.5, "time step"),
        "bits": (int, 2, "bits per register"),
        "iters": (int, 20, "variational iterations"),
        "k0": (float, 1.0, "initial resolution exponent"),
        "c": (str, "0.3,0.8", "comma-separated exponent shifts"),
        "u0": (str, "1,0", "initial state"),
        "stage_form": (str, "rk", "rk | split"),
        "reads": (int, 100, "annealing reads"),
        "sweeps": (int, 200, "annealing sweeps"),
    },
    "gap-scan": {
        "scheme": (str, "euler", "euler | crank-nicolson"),
        "dx": (str, "0.5,0.25,0.125,0.0625,0.03125", "comma-separated resolutions (powers of two)"),
        "dt": (str, "0.1,1e-6", "comma-separated time steps"),
        "grid": (int, 101, "points on the interpolation grid"),
    },
    "connectivity": {
        "n": (int, 3, "bits per register"),
        "s": (int, 3, "stages"),
        "N": (int, 2, "system dimension"),
    },
    "arith-verify": {
        "n": (int, 3, "register width"),
        "q": (int, 1, "fractional bits for the fixed-point multiplier"),
    },
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qodelab", description="Quantum-arithmetic and QUBO ODE experiments")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd, params in PARAMS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="JSON file with parameters; flags take precedence")
        sp.add_argument("--out", default=None, help="output directory (default: qodelab-out)")
        sp.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
        sp.add_argument("--no-plot", action="store_true", help="skip SVG plots")
        sp.add_argument("-v", "--verbose", action="store_true")
        for name, (typ, default, help_) in params.items():
            sp.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ, default=None,
                            help=f"{help_} (default: {default})")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    params = PARAMS[args.command]
    cfg: dict[str, Any] = {k: v[1] for k, v in params.items()}
    cfg.update(seed=int(os.environ.get(SEED_ENV, 0)), out="qodelab-out")
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
        file_cfg.pop("command", None)
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        for k, v in file_cfg.items():
            cfg[k] = params[k][0](v) if k in params and params[k][0] is not str else v
    for k in list(params) + ["seed", "out"]:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    cfg["seed"] = int(cfg["seed"])
    return cfg


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in row])


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _state(text, N: int) -> np.ndarray:
    u = np.array(_floats(text))
    _require(u.shape == (N,), f"initial state needs {N} components, got {len(u)}")
    return u


def _schedule(cfg) -> AnnealSchedule:
    _require(cfg["reads"] >= 1 and cfg["sweeps"] >= 1, "reads and sweeps must be positive")
    return AnnealSchedule(reads=cfg["reads"], sweeps=cfg["sweeps"], seed=cfg["seed"])


def _problem(cfg):
    try:
        return system_by_name(cfg["system"]), table_by_name(cfg["scheme"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _variational_checks(cfg, sys_, tbl) -> None:
    _require(cfg.get("solver", "exact") in ("exact", "sa"), "solver must be exact or sa")
    _require(cfg["bits"] >= 1, "bits must be at least 1")
    _require(cfg["stage_form"] in ("rk", "split"), "stage-form must be rk or split")
    nvars = cfg["bits"] * (tbl.s + 1) * sys_.N
    if cfg.get("solver", "exact") == "exact":
        _require(nvars <= 26, f"{nvars} register bits exceed the enumeration limit of 26")


def run_euler_circuit(cfg, out: Path) -> tuple[dict, dict]:
    n, q, dt = cfg["n"], cfg["q"], cfg["dt"]
    _require(n >= 2 and 0 <= q < n, "need n >= 2 and 0 <= q < n")
    _require(dt > 0 and float(np.log2(dt)).is_integer() and dt < 1, "dt must be 2**-k with k >= 1")
    dt_log2 = int(np.log2(dt))
    fmt = FixedPointFormat(n, q)
    u0 = _state(cfg["u0"], 2)
    plan = build_euler_step(fmt, dt_log2)
    _require(plan.layout.num_qubits <= 24, f"circuit needs {plan.layout.num_qubits} qubits, limit is 24")
    run = run_integration(plan, u0, cfg["steps"])
    ref = classical_run(fmt, dt_log2, u0, cfg["steps"])
    exact = integrate_classical(system_by_name("model"), explicit_euler(), u0, dt, cfg["steps"]).states
    rows = []
    for i, (t, ub, rb) in enumerate(zip(run.trajectory.times, run.bits, ref)):
        val = [to_signed(b, n) * fmt.resolution for b in ub]
        oracle = [to_signed(b, n) * fmt.resolution for b in rb]
        rows.append([i, float(t), val[0], val[1], format(ub[0], f"0{n}b"), format(ub[1], f"0{n}b"),
                     oracle[0], oracle[1], float(exact[i, 0]), float(exact[i, 1]), float(np.linalg.norm(exact[i]))])
    _write_csv(out / "trajectory.csv",
               ["step", "t", "u1_logical", "u2_logical", "u1_bits", "u2_bits", "u1_oracle", "u2_oracle",
                "u1_real", "u2_real", "norm_real"], rows)
    col = {name: np.array([r[j] for r in rows], dtype=float)
           for j, name in [(1, "t"), (2, "u1"), (3, "u2"), (8, "r1"), (9, "r2"), (10, "norm")]}
    plots = {"trajectory.csv": (col["t"], {"u1 circuit": col["u1"], "u2 circuit": col["u2"],
                                           "u1 real": col["r1"], "u2 real": col["r2"]}, "t", "u", False)}
    summary = {
        "qubits": plan.layout.num_qubits,
        "gates": len(plan.circuit),
        "bit_exact": run.bits == ref,
        "real_norm_nondecreasing": bool(np.all(np.diff(col["norm"]) >= -1e-12)),
    }
    return summary, plots


def run_anneal_integrate(cfg, out: Path):
    sys_, tbl = _problem(cfg)
    _variational_checks(cfg, sys_, tbl)
    u0 = _state(cfg["u0"], sys_.N)
    solver = make_solver(cfg["solver"], _schedule(cfg))
    res = integrate_qubo(sys_, tbl, cfg["dt"], u0, cfg["steps"], solver, cfg["bits"], cfg["k0"], cfg["c"],
                         cfg["iters"], cfg["stage_form"])
    ref = integrate_classical(sys_, tbl, u0, cfg["dt"], cfg["steps"])
    err = np.max(np.abs(res.trajectory.states - ref.states), axis=1)
    N = sys_.N
    header = ["t"] + [f"u{j + 1}" for j in range(N)] + [f"newton_u{j + 1}" for j in range(N)] + ["error"]
    rows = [[float(t)] + [float(v) for v in u] + [float(v) for v in r] + [float(e)]
            for t, u, r, e in zip(res.trajectory.times, res.trajectory.states, ref.states, err)]
    _write_csv(out / "trajectory.csv", header, rows)
    k_final = cfg["k0"] + cfg["c"] * cfg["iters"]
    series = {f"u{j + 1} qubo": res.trajectory.states[:, j] for j in range(N)}
    series.update({f"u{j + 1} newton": ref.states[:, j] for j in range(N)})
    summary = {
        "max_error": float(err.max()),
        "k_final": k_final,
        "bound_2_pow_minus_k_final_x2": 2 * 2.0 ** -k_final,
        "within_bound": bool(err.max() <= 2 * 2.0 ** -k_final),
        "register_bits": (tbl.s + 1) * N * cfg["bits"],
        "non_convex": bool(res.steps and res.steps[0].non_convex),
    }
    return summary, {"trajectory.csv": (res.trajectory.times, series, "t", "u", False)}


def run_variational_convergence(cfg, out: Path):
    sys_, tbl = _problem(cfg)
    _variational_checks(cfg, sys_, tbl)
    u0 = _state(cfg["u0"], sys_.N)
    cs = _floats(cfg["c"])
    _require(cs and all(c > 0 for c in cs), "c values must be positive")
    sched = _schedule(cfg)
    summary, plots = {}, {}
    for c in cs:
        runs = {}
        for kind in ("exact", "sa"):
            _, st = variational_rk_step(sys_, tbl, cfg["dt"], u0, make_solver(kind, sched), cfg["bits"],
                                        cfg["k0"], c, cfg["iters"], cfg["stage_form"])
            runs[kind] = st
        ks = [r.k for r in runs["exact"].history]
        e_ex, e_sa = runs["exact"].errors, runs["sa"].errors
        name = f"convergence_c{c:g}.csv"
        _write_csv(out / name, ["iteration", "k", "error_exact_solver", "error_sa"],
                   [[i, float(k), float(a), float(b)] for i, (k, a, b) in enumerate(zip(ks, e_ex, e_sa))])
        summary[f"c={c:g}"] = {"final_error_exact": float(e_ex[-1]), "final_error_sa": float(e_sa[-1]),
                               "final_k": float(ks[-1] + c)}
        plots[name] = (np.arange(len(ks)), {"exact solver": e_ex, "annealing": e_sa}, "iteration", "error", True)
    return summary, plots


def run_gap_scan(cfg, out: Path):
    dxs, dts = _floats(cfg["dx"]), _floats(cfg["dt"])
    _require(cfg["scheme"] in ("euler", "crank-nicolson"), "scheme must be euler or crank-nicolson")
    regs = 2 if cfg["scheme"] == "euler" else 3
    for dx in dxs:
        n = -np.log2(dx) if dx > 0 else 0.5
        _require(dx > 0 and float(n).is_integer() and n >= 1, f"dx={dx} is not 2**-k with k >= 1")
        _require(regs * int(n) <= MAX_SCAN_VARS, f"dx={dx} needs {regs * int(n)} qubits, limit is {MAX_SCAN_VARS}")
    _require(cfg["grid"] >= 2, "grid needs at least two points")
    table = gap_scaling_experiment(cfg["scheme"], dxs, dts, cfg["grid"])
    _write_csv(out / "gap_table.csv", ["dx", "dt", "gap_qubo", "gap_adiabatic", "lower_bound", "num_vars"],
               [[r.dx, r.dt, r.gap_qubo, r.gap_adiabatic, r.bound, r.num_vars] for r in table.rows])
    series = {}
    for dt in dts:
        series[f"qubo dt={dt:g}"] = table.column("gap_qubo", dt)
        series[f"adiabatic dt={dt:g}"] = table.column("gap_adiabatic", dt)
    summary = {"slopes": {f"{dt:g}": v for dt, v in table.slopes().items()} if len(dxs) > 1 else {},
               "bound_respected": bool(all(r.gap_qubo >= r.bound for r in table.rows))}
    return summary, {"gap_table.csv": (np.array(dxs), series, "dx", "gap", True)}


def run_connectivity(cfg, out: Path):
    n, s, N = cfg["n"], cfg["s"], cfg["N"]
    _require(n >= 1 and s >= 1 and N >= 1, "n, s and N must be positive")
    _require(n * (s + 1) * N <= 64, "problem too large to construct")
    built = connectivity_count(dense_linear_problem(n, s, N, seed=cfg["seed"]).qubo)
    formula, exact = worst_case_connectivity(n, s, N), dense_linear_connectivity(n, s, N)
    _write_csv(out / "connectivity.csv", ["n", "s", "N", "constructed", "worst_case_formula", "exact_count"],
               [[n, s, N, built, formula, exact]])
    print(f"worst_case_connectivity({n},{s},{N}) = {formula}; constructed = {built}")
    return {"constructed": built, "worst_case_formula": formula, "exact_count": exact,
            "formula_matches": built == formula}, {}


def run_arith_verify(cfg, out: Path):
    n, q = cfg["n"], cfg["q"]
    _require(1 <= n <= 5, "n must lie in 1..5 (exhaustive multiplier sweep over 2**(3n) inputs)")
    reports = verify_all(n, q)
    _write_csv(out / "arith_verify.csv", ["circuit", "cases", "mismatches", "min_probability", "pass"],
               [[r.name, r.cases, r.mismatches, r.min_probability, "pass" if r.ok else "FAIL"] for r in reports])
    for r in reports:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.cases} cases, {r.mismatches} mismatches")
    return {"all_pass": all(r.ok for r in reports), "reports": len(reports)}, {}


RUNNERS = {
    "euler-circuit": run_euler_circuit,
    "anneal-integrate": run_anneal_integrate,
    "variational-convergence": run_variational_convergence,
    "gap-scan": run_gap_scan,
    "connectivity": run_connectivity,
    "arith-verify": run_arith_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    manifest: dict[str, Any] = {"experiment": args.command, "version": __version__, "backend": kernels.BACKEND,
                                "config": None, "summary": None, "files": [], "error": None}
    out = Path(args.out or "qodelab-out")
    status = 0
    try:
        cfg = resolve_config(args)
        manifest["config"] = cfg
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        summary, plots = RUNNERS[args.command](cfg, out)
        manifest["summary"] = summary
        if not args.no_plot:
            for csv_name, (x, series, xl, yl, logy) in plots.items():
                svg = line_plot_svg(x, series, title=f"{args.command}: {csv_name}", xlabel=xl, ylabel=yl,
                                    logx=args.command == "gap-scan", logy=logy)
                (out / csv_name.replace(".csv", ".svg")).write_text(svg)
        print(json.dumps(summary, indent=2, default=str))
    except ConfigError as exc:
        manifest["error"] = f"invalid configuration: {exc}"
        status = 2
    except Exception as exc:  # reported through the manifest and exit status
        log.debug("run failed", exc_info=True)
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        status = 1
    try:
        out.mkdir(parents=True, exist_ok=True)
        manifest["files"] = sorted(p.name for p in out.iterdir() if p.name != "manifest.json")
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    except OSError as exc:
        print(f"qodelab: cannot write manifest: {exc}", file=sys.stderr)
        status = status or 1
    if manifest["error"]:
        print(f"qodelab: {manifest['error']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
