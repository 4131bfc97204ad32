"""Command-line surface.

One subcommand per capability: generate graphs, solve and bound eigenvalues,
run the patch-size calculators, integrate dynamics, and drive the Monte
Carlo experiments. Numeric results go to stdout as a single JSON object;
bulk data goes to CSV files, each paired with a .meta.json sidecar holding
the fully resolved configuration, seeds, tolerances, and library versions.

Every flag can also come from an optional JSON config file (--config) whose
keys mirror the flag names with underscores; explicit flags win over the
file, the file wins over built-in defaults. Exit status: 0 on success, 2 on
usage errors or infeasible parameter combinations.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .defaults import (
    DEFAULT_SAMPLES,
    EIG_TOL,
    MAX_EXPERIMENT_N,
    RATIO_P_GRID,
    THRESHOLD_C_GRID,
    THREADS_ENV_VAR,
)
from .dynamics import DynamicsSpec, NearCriticalError, classify_survival, integrate
from .graphs import Habitat, gen_gnm, gen_gnp, load_graph, save_graph
from .montecarlo import (
    run_expectation_check,
    run_fig2_experiment,
    run_ratio_experiment,
    run_threshold_experiment,
    write_metadata,
    write_stats_csv,
)
from .spectral import (
    bounds,
    dirichlet_system,
    min_eigenvalue,
    weyl_lower_bound,
)
from .thresholds import (
    CriticalSizeQuery,
    critical_patch_size,
    half_uniform_bounds,
    survival_check,
)

__all__ = ["main"]

_REQUIRED = object()


class UsageError(Exception):
    pass


# real defaults live here, not in argparse, so that a --config file can sit
# between explicit flags and the built-ins
_DEFAULTS = {
    "gen": {"n": _REQUIRED, "p": None, "m": None, "seed": 0, "out": None},
    "eig": {"graph": _REQUIRED, "sinks": _REQUIRED, "method": "auto",
            "tol": EIG_TOL},
    "bounds": {"graph": _REQUIRED, "sinks": _REQUIRED, "tol": EIG_TOL},
    "critical-size": {"rho": _REQUIRED, "s": _REQUIRED, "delta": _REQUIRED,
                      "eps": None, "n": None, "half_uniform": False},
    "dynamics": {"habitat": _REQUIRED, "sinks": _REQUIRED, "rho": _REQUIRED,
                 "mode": "logistic", "dt": None, "t_max": 50.0,
                 "classify": False, "out": "dynamics.csv"},
    "mc-ratio": {"s": 50, "p_grid": ",".join(map(str, RATIO_P_GRID)),
                 "n_grid": "200,500,1000,2000", "samples": DEFAULT_SAMPLES,
                 "seed": 0, "rho": None, "threads": None,
                 "deep_checks": False, "out": "ratio.csv"},
    "mc-threshold": {"n_list": _REQUIRED, "s": _REQUIRED,
                     "c_grid": ",".join(map(str, THRESHOLD_C_GRID)),
                     "samples": DEFAULT_SAMPLES, "seed": 0, "threads": None,
                     "deep_checks": False, "out": "threshold.csv"},
    "mc-fig2": {"delta": 0.01, "rho": 1.0, "s_list": "10",
                "eps_list": "0.1", "samples": DEFAULT_SAMPLES, "seed": 0,
                "max_n": MAX_EXPERIMENT_N, "threads": None,
                "deep_checks": False, "out": "fig2.csv"},
    "mc-expectation": {"n": _REQUIRED, "p": _REQUIRED, "s": _REQUIRED,
                       "samples": DEFAULT_SAMPLES, "seed": 0,
                       "threads": None, "out": None},
}


def _floats(text):
    return tuple(float(x) for x in str(text).split(",") if x != "")


def _ints(text):
    return tuple(int(x) for x in str(text).split(",") if x != "")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _resolve(args, name):
    """flag > config file > default table; errors on gaps and strays."""
    table = _DEFAULTS[name]
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}")
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        stray = set(cfg) - set(table)
        if stray:
            raise UsageError(f"config keys not valid for {name}: {sorted(stray)}")
    out = {}
    for key, default in table.items():
        val = getattr(args, key, None)
        if val is None:
            val = cfg.get(key, default)
        if val is _REQUIRED:
            raise UsageError(f"missing required --{key.replace('_', '-')}")
        out[key] = val
    if "threads" in out and out["threads"] is None:
        out["threads"] = int(os.environ.get(THREADS_ENV_VAR, "1"))
    return out


def _habitat_from(path, sinks):
    try:
        g = load_graph(path)
    except OSError as e:
        raise UsageError(str(e))
    return Habitat(g, sinks)


def _cmd_gen(args):
    c = _resolve(args, "gen")
    if (c["p"] is None) == (c["m"] is None):
        raise UsageError("give exactly one of --p or --m")
    if c["p"] is not None:
        g = gen_gnp(c["n"], c["p"], c["seed"])
        tag = f"gnp_n{c['n']}_p{c['p']}_seed{c['seed']}"
    else:
        g = gen_gnm(c["n"], c["m"], c["seed"])
        tag = f"gnm_n{c['n']}_m{c['m']}_seed{c['seed']}"
    out = c["out"] or f"{tag}.txt"
    save_graph(g, out)
    write_metadata(f"{out}.meta.json", {"command": "gen", **c, "out": out})
    return {"n": g.n, "m": g.num_edges, "path": out}


def _cmd_eig(args):
    c = _resolve(args, "eig")
    h = _habitat_from(c["graph"], c["sinks"])
    sysd = dirichlet_system(h)
    r = min_eigenvalue(sysd, tol=c["tol"], method=c["method"])
    zeta, theta = bounds(sysd)
    return {"n": h.graph.n, "s": h.s, "dim": sysd.dim, "xi": r.value,
            "residual": r.residual, "solver": r.solver,
            "iterations": r.iterations, "zeta": zeta, "theta": theta}


def _cmd_bounds(args):
    c = _resolve(args, "bounds")
    h = _habitat_from(c["graph"], c["sinks"])
    sysd = dirichlet_system(h)
    zeta, theta = bounds(sysd)
    r = min_eigenvalue(sysd, tol=c["tol"])
    return {"n": h.graph.n, "s": h.s, "dim": sysd.dim, "zeta": zeta,
            "theta": theta, "weyl": weyl_lower_bound(sysd), "xi": r.value,
            "sandwich_ok": zeta - 1e-8 <= r.value <= theta + 1e-8}


def _cmd_critical_size(args):
    c = _resolve(args, "critical-size")
    if c["half_uniform"]:
        res = half_uniform_bounds(c["s"], c["rho"], c["delta"])
        kind = type(res).__name__
        return {"model": "uniform (p = 1/2)", "kind": kind,
                "s": c["s"], "rho": c["rho"], "delta": c["delta"],
                **dataclasses.asdict(res)}
    if c["eps"] is None:
        raise UsageError("missing required --eps (or pass --half-uniform)")
    q = CriticalSizeQuery(rho=c["rho"], s=c["s"], delta=c["delta"],
                          eps=c["eps"])
    cs = critical_patch_size(q, n=c["n"])
    return dataclasses.asdict(cs)


def _cmd_dynamics(args):
    c = _resolve(args, "dynamics")
    h = _habitat_from(c["habitat"], c["sinks"])
    sysd = dirichlet_system(h)
    spec = DynamicsSpec(mode=c["mode"], rho=c["rho"], dt=c["dt"],
                        t_max=c["t_max"])
    summary = integrate(sysd, spec)
    lines = ["t,total_mass,norm"]
    for t, m, nr in zip(summary.times, summary.total_mass, summary.norms):
        lines.append(f"{float(t)!r},{float(m)!r},{float(nr)!r}")
    Path(c["out"]).write_text("\n".join(lines) + "\n")
    write_metadata(f"{c['out']}.meta.json",
                   {"command": "dynamics", **c, "dt_used": summary.dt})
    result = {"mode": summary.mode, "rho": summary.rho, "dt": summary.dt,
              "steps": summary.steps, "classification": summary.classification,
              "final_mass": summary.final_mass,
              "final_norm": summary.final_norm,
              "growth_rate": summary.growth_rate, "csv": c["out"]}
    if c["classify"]:
        xi = min_eigenvalue(sysd).value
        result["xi"] = xi
        result["trajectory_verdict"] = classify_survival(sysd, c["rho"])
        result["spectral_verdict"] = survival_check(xi, c["rho"])
    return result


def _mc_common(c, stats, command):
    write_stats_csv(c["out"], stats)
    write_metadata(f"{c['out']}.meta.json", {"command": command, **c})
    return {"csv": c["out"], "rows": len(stats),
            "violations": sum(st.violations for st in stats),
            "stats": stats}


def _cmd_mc_ratio(args):
    c = _resolve(args, "mc-ratio")
    stats = run_ratio_experiment(
        s=c["s"], p_grid=_floats(c["p_grid"]), n_grid=_ints(c["n_grid"]),
        samples=c["samples"], seed=c["seed"], rho=c["rho"],
        threads=c["threads"], deep_checks=c["deep_checks"])
    return _mc_common(c, stats, "mc-ratio")


def _cmd_mc_threshold(args):
    c = _resolve(args, "mc-threshold")
    stats = run_threshold_experiment(
        n_list=_ints(c["n_list"]), s=c["s"], samples=c["samples"],
        seed=c["seed"], c_grid=_floats(c["c_grid"]), threads=c["threads"],
        deep_checks=c["deep_checks"])
    return _mc_common(c, stats, "mc-threshold")


def _cmd_mc_fig2(args):
    c = _resolve(args, "mc-fig2")
    stats = run_fig2_experiment(
        delta=c["delta"], rho=c["rho"], s_list=_ints(c["s_list"]),
        eps_list=_floats(c["eps_list"]), samples=c["samples"],
        seed=c["seed"], max_n=c["max_n"], threads=c["threads"],
        deep_checks=c["deep_checks"])
    return _mc_common(c, stats, "mc-fig2")


def _cmd_mc_expectation(args):
    c = _resolve(args, "mc-expectation")
    rep = run_expectation_check(n=c["n"], p=c["p"], s=c["s"],
                                samples=c["samples"], seed=c["seed"],
                                threads=c["threads"])
    if c["out"]:
        fields = [f.name for f in dataclasses.fields(rep)]
        row = ",".join(repr(getattr(rep, f)) if isinstance(getattr(rep, f), float)
                       else str(getattr(rep, f)) for f in fields)
        Path(c["out"]).write_text(",".join(fields) + "\n" + row + "\n")
        write_metadata(f"{c['out']}.meta.json",
                       {"command": "mc-expectation", **c})
    return rep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchsize",
        description="Dirichlet eigenvalues and survival thresholds on "
                    "graph habitats")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **flags):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file mirroring the flags")
        for flag, kind in flags.items():
            dest = flag.replace("-", "_")
            if kind is bool:
                p.add_argument(f"--{flag}", dest=dest, action="store_true",
                               default=None)
            else:
                p.add_argument(f"--{flag}", dest=dest, type=kind)
        p.set_defaults(func=fn)
        return p

    add("gen", _cmd_gen, n=int, p=float, m=int, seed=int, out=str)
    add("eig", _cmd_eig, graph=str, sinks=int, method=str, tol=float)
    add("bounds", _cmd_bounds, graph=str, sinks=int, tol=float)
    add("critical-size", _cmd_critical_size, rho=float, s=int, delta=float,
        eps=float, n=int, **{"half-uniform": bool})
    add("dynamics", _cmd_dynamics, habitat=str, sinks=int, rho=float,
        mode=str, dt=float, classify=bool, out=str, **{"t-max": float})
    add("mc-ratio", _cmd_mc_ratio, s=int, samples=int, seed=int, rho=float,
        threads=int, out=str, **{"p-grid": str, "n-grid": str,
                                 "deep-checks": bool})
    add("mc-threshold", _cmd_mc_threshold, s=int, samples=int, seed=int,
        threads=int, out=str, **{"n-list": str, "c-grid": str,
                                 "deep-checks": bool})
    add("mc-fig2", _cmd_mc_fig2, delta=float, rho=float, samples=int,
        seed=int, threads=int, out=str,
        **{"s-list": str, "eps-list": str, "max-n": int,
           "deep-checks": bool})
    add("mc-expectation", _cmd_mc_expectation, n=int, p=float, s=int,
        samples=int, seed=int, threads=int, out=str)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except (UsageError, ValueError, NearCriticalError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(json.dumps(_jsonable(result), indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
