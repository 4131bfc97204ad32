"""Seeded Monte Carlo experiments on random habitats.

Every experiment walks a grid of (n, p-or-m, s) points, draws `samples`
habitats per point, solves each for the Dirichlet eigenvalue, and
aggregates. Reproducibility contract: the per-sample generator seed is
derived from (master seed, grid index, sample index) alone, samples are
aggregated in sample order, and BLAS threading is pinned inside workers, so
the output is a pure function of (spec, seed) no matter how many workers
run. Grid indices count the full intended grid, including points that get
skipped by the size cap, so raising the cap never reshuffles seeds.

Per-sample hard inequalities (the zeta/theta sandwich, optionally the Weyl
bound and an edge-monotonicity spot check) are counted in a violations
column that experiments expect to stay at zero.
"""
from __future__ import annotations

import json
import math
import platform
import subprocess
import warnings
from dataclasses import dataclass
from pathlib import Path

import joblib
import numpy as np
import scipy
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

from . import __version__
from .defaults import (
    DEFAULT_SAMPLES,
    EIG_TOL,
    MAX_EXPERIMENT_N,
    POSITIVITY_THRESHOLD,
    PRNG_NAME,
    RATIO_P_GRID,
    RIGHT_TAIL_LEVEL,
    SANDWICH_TOL,
    THRESHOLD_C_GRID,
    THRESHOLD_MAX_SINK_FRACTION,
)
from .graphs import Graph, Habitat, gen_gnm, gen_gnp, pair_count
from .spectral import bounds, dirichlet_system, min_eigenvalue, weyl_lower_bound
from .thresholds import CriticalSizeQuery, connectivity_threshold, critical_patch_size

__all__ = [
    "GridPoint",
    "ExperimentSpec",
    "SampleStats",
    "ExpectationReport",
    "run_experiment",
    "run_ratio_experiment",
    "run_threshold_experiment",
    "run_fig2_experiment",
    "run_expectation_check",
    "write_stats_csv",
    "write_metadata",
    "CSV_COLUMNS",
]

ALL_QUANTITIES = ("xi", "zeta", "theta", "ratio", "positive", "healthy")

CSV_COLUMNS = (
    "n", "p_or_m", "s", "samples", "mean_xi", "std_xi", "mean_ratio",
    "std_ratio", "p01_right_tail", "healthy_frac", "positive_frac",
    "violations",
    # documented extras beyond the core schema:
    "mean_theta_ratio", "mean_zeta_ratio", "min_xi", "max_xi", "param",
)


@dataclass(frozen=True)
class GridPoint:
    """One experiment cell: G(n,p) when kind is "gnp", G(n,m) when "gnm".

    `extra` carries the experiment-specific sweep parameter (the threshold
    multiplier c, or the slack eps) and lands in the CSV "param" column.
    """
    kind: str
    n: int
    param: float
    s: int
    extra: float | None = None

    def __post_init__(self):
        if self.kind not in ("gnp", "gnm"):
            raise ValueError("kind must be 'gnp' or 'gnm'")
        if not 1 <= self.s < self.n:
            raise ValueError(f"need 1 <= s < n, got s={self.s}, n={self.n}")
        if self.kind == "gnp" and not 0.0 <= self.param <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.kind == "gnm":
            m = int(self.param)
            if m != self.param or not 0 <= m <= pair_count(self.n):
                raise ValueError("m must be an integer in [0, C(n,2)]")

    def p_effective(self) -> float:
        """Edge density: p itself, or m / C(n,2) for the fixed-m model."""
        if self.kind == "gnp":
            return self.param
        return self.param / pair_count(self.n)


@dataclass(frozen=True)
class ExperimentSpec:
    grid: tuple
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    rho: float | None = None
    level: float = RIGHT_TAIL_LEVEL
    quantities: tuple = ALL_QUANTITIES
    deep_checks: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("need samples >= 1")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie in (0, 1)")
        if self.threads < 1:
            raise ValueError("need threads >= 1")
        unknown = set(self.quantities) - set(ALL_QUANTITIES)
        if unknown:
            raise ValueError(f"unknown quantities: {sorted(unknown)}")


@dataclass(frozen=True)
class SampleStats:
    """Aggregates over one grid point. Fractions are of the sample count;
    violations is the count of broken hard inequalities (expected: 0)."""
    n: int
    p_or_m: float
    s: int
    samples: int
    mean_xi: float
    std_xi: float
    mean_ratio: float
    std_ratio: float
    p01_right_tail: float
    healthy_frac: float
    positive_frac: float
    violations: int
    mean_theta_ratio: float
    mean_zeta_ratio: float
    min_xi: float
    max_xi: float
    param: float | None

    def __post_init__(self):
        if not (self.min_xi <= self.mean_xi <= self.max_xi):
            raise ValueError("min <= mean <= max violated")
        for frac in (self.healthy_frac, self.positive_frac):
            if not math.isnan(frac) and not 0.0 <= frac <= 1.0:
                raise ValueError("fractions must lie in [0, 1]")


def _sample_seed(master: int, grid_index: int, sample_index: int) -> int:
    ss = np.random.SeedSequence([master, grid_index, sample_index])
    return int(ss.generate_state(1, np.uint64)[0])


def _sample_one(kind, n, param, s, rho, deep, master, grid_index, sample_index):
    """One habitat draw -> (xi, zeta, theta, violations, positive, healthy).

    BLAS pools are pinned to one thread so the floating-point reduction
    order, and therefore the bytes of the output, cannot depend on the
    worker context.
    """
    with threadpool_limits(limits=1):
        seed = _sample_seed(master, grid_index, sample_index)
        if kind == "gnp":
            g = gen_gnp(n, param, seed)
        else:
            g = gen_gnm(n, int(param), seed)
        sysd = dirichlet_system(Habitat(g, s))
        xi = min_eigenvalue(sysd).value
        zeta, theta = bounds(sysd)
        violations = 0
        if not (zeta - SANDWICH_TOL <= xi <= theta + SANDWICH_TOL):
            violations += 1
        if deep:
            violations += _deep_checks(sysd, xi, master, grid_index,
                                       sample_index)
        positive = 1.0 if xi > POSITIVITY_THRESHOLD else 0.0
        healthy = math.nan if rho is None else (1.0 if xi <= rho else 0.0)
        return xi, zeta, theta, violations, positive, healthy


def _deep_checks(sysd, xi, master, grid_index, sample_index):
    """Weyl bound plus an add-one-edge monotonicity probe; returns violation
    count. Uses a side stream so graph seeds stay identical either way."""
    bad = 0
    if weyl_lower_bound(sysd) > xi + SANDWICH_TOL:
        bad += 1
    g = sysd.habitat.graph
    total = pair_count(g.n)
    if g.num_edges < total:
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([master, grid_index, sample_index, 1])))
        present = set(g.pair_idx.tolist())
        for _ in range(64):
            k = int(rng.integers(total))
            if k not in present:
                bigger = Graph(g.n, np.sort(np.append(g.pair_idx, k)),
                               _presorted=True)
                sys2 = dirichlet_system(Habitat(bigger, sysd.habitat.s))
                if min_eigenvalue(sys2).value < xi - SANDWICH_TOL:
                    bad += 1
                break
    return bad


def _aggregate(point: GridPoint, spec: ExperimentSpec,
               rows: list) -> SampleStats:
    arr = np.asarray(rows, dtype=np.float64)
    xi = arr[:, 0]
    k = len(rows)
    mean_xi = math.fsum(xi) / k
    std_xi = math.sqrt(math.fsum((x - mean_xi) ** 2 for x in xi) / k)
    denom = point.s * point.p_effective()
    if denom > 0:
        ratio = xi / denom
        mean_ratio = math.fsum(ratio) / k
        std_ratio = math.sqrt(math.fsum((r - mean_ratio) ** 2 for r in ratio) / k)
        mean_theta_ratio = math.fsum(arr[:, 2] / denom) / k
        mean_zeta_ratio = math.fsum(arr[:, 1] / denom) / k
    else:
        mean_ratio = std_ratio = mean_theta_ratio = mean_zeta_ratio = math.nan
    return SampleStats(
        n=point.n, p_or_m=point.param, s=point.s, samples=k,
        mean_xi=mean_xi, std_xi=std_xi,
        mean_ratio=mean_ratio, std_ratio=std_ratio,
        p01_right_tail=float(np.quantile(xi, 1.0 - spec.level)),
        healthy_frac=float(np.mean(arr[:, 5])) if spec.rho is not None
        else math.nan,
        positive_frac=float(np.mean(arr[:, 4])),
        violations=int(arr[:, 3].sum()),
        mean_theta_ratio=mean_theta_ratio, mean_zeta_ratio=mean_zeta_ratio,
        min_xi=float(xi.min()), max_xi=float(xi.max()), param=point.extra)


def run_experiment(spec: ExperimentSpec) -> list[SampleStats]:
    """Run every grid point; returns one SampleStats per point, grid order."""
    out = []
    for gi, point in enumerate(spec.grid):
        if point is None:  # hole left by a skipped (capped) point
            continue
        args = [(point.kind, point.n, point.param, point.s, spec.rho,
                 spec.deep_checks, spec.seed, gi, si)
                for si in range(spec.samples)]
        if spec.threads == 1:
            rows = [_sample_one(*a) for a in args]
        else:
            rows = Parallel(n_jobs=spec.threads, prefer="processes")(
                delayed(_sample_one)(*a) for a in args)
        out.append(_aggregate(point, spec, rows))
    return out


def run_ratio_experiment(s: int = 50, p_grid=RATIO_P_GRID,
                         n_grid=(200, 500, 1000, 2000),
                         samples: int = DEFAULT_SAMPLES, seed: int = 0,
                         rho: float | None = None, threads: int = 1,
                         deep_checks: bool = False) -> list[SampleStats]:
    """Concentration of xi/(s*p) along increasing n at fixed s and p."""
    n_grid = tuple(n_grid)
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n grid must be strictly increasing")
    if any(n > MAX_EXPERIMENT_N for n in n_grid):
        raise ValueError(f"n above the desk-scale cap {MAX_EXPERIMENT_N}")
    grid = tuple(GridPoint("gnp", n, p, s, extra=p)
                 for p in p_grid for n in n_grid)
    spec = ExperimentSpec(grid=grid, samples=samples, seed=seed, rho=rho,
                          threads=threads, deep_checks=deep_checks)
    return run_experiment(spec)


def run_threshold_experiment(n_list, s: int, samples: int = DEFAULT_SAMPLES,
                             seed: int = 0, c_grid=THRESHOLD_C_GRID,
                             threads: int = 1,
                             deep_checks: bool = False) -> list[SampleStats]:
    """Positive fraction of xi at p = c*log(n)/n for each n and multiplier c."""
    for n in n_list:
        if n > MAX_EXPERIMENT_N:
            raise ValueError(f"n above the desk-scale cap {MAX_EXPERIMENT_N}")
        if s > THRESHOLD_MAX_SINK_FRACTION * n:
            raise ValueError(
                f"need s <= n/{int(1 / THRESHOLD_MAX_SINK_FRACTION)}; "
                f"got s={s}, n={n}")
    grid = tuple(GridPoint("gnp", n, c * connectivity_threshold(n), s, extra=c)
                 for n in n_list for c in c_grid)
    spec = ExperimentSpec(grid=grid, samples=samples, seed=seed,
                          threads=threads, deep_checks=deep_checks)
    return run_experiment(spec)


def run_fig2_experiment(delta: float = 0.01, rho: float = 1.0,
                        s_list=(10,), eps_list=(0.1,),
                        samples: int = DEFAULT_SAMPLES, seed: int = 0,
                        max_n: int = MAX_EXPERIMENT_N, threads: int = 1,
                        deep_checks: bool = False) -> list[SampleStats]:
    """Eigenvalue distribution at the critical patch size.

    Each (s, eps) resolves to n_min and the maximal edge budget m_max; the
    habitat model is G(n_min, m_max) with the first s vertices as sinks.
    Points whose n_min exceeds max_n are skipped with a warning; raise max_n
    to force them. Right-tail level is delta itself.
    """
    grid = []
    for s in s_list:
        for eps in eps_list:
            cs = critical_patch_size(CriticalSizeQuery(rho, s, delta, eps))
            if cs.n_min > max_n:
                warnings.warn(
                    f"(s={s}, eps={eps}) needs n={cs.n_min} > max_n={max_n}; "
                    "point skipped, raise max_n to include it", stacklevel=2)
                grid.append(None)  # keep grid indices (and seeds) stable
                continue
            grid.append(GridPoint("gnm", cs.n_min, cs.m_max, s, extra=eps))
    spec = ExperimentSpec(grid=tuple(grid), samples=samples, seed=seed,
                          rho=rho, level=delta, threads=threads,
                          deep_checks=deep_checks)
    return run_experiment(spec)


@dataclass(frozen=True)
class ExpectationReport:
    n: int
    p: float
    s: int
    samples: int
    mean_xi: float
    std_xi: float
    stderr: float
    sp: float
    gap: float
    holds: bool


def run_expectation_check(n: int, p: float, s: int,
                          samples: int = DEFAULT_SAMPLES, seed: int = 0,
                          threads: int = 1) -> ExpectationReport:
    """Checks mean(xi) - 3*SE <= s*p, the sampled form of E[xi] <= s*p."""
    if n > MAX_EXPERIMENT_N:
        raise ValueError(f"n above the desk-scale cap {MAX_EXPERIMENT_N}")
    stats = run_experiment(ExperimentSpec(
        grid=(GridPoint("gnp", n, p, s),), samples=samples, seed=seed,
        threads=threads))[0]
    se = stats.std_xi / math.sqrt(samples)
    sp = s * p
    return ExpectationReport(
        n=n, p=p, s=s, samples=samples, mean_xi=stats.mean_xi,
        std_xi=stats.std_xi, stderr=se, sp=sp, gap=sp - stats.mean_xi,
        holds=stats.mean_xi - 3.0 * se <= sp)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_stats_csv(path, stats: list[SampleStats]) -> None:
    """Fixed-schema CSV; floats via repr so reruns are byte-identical."""
    lines = [",".join(CSV_COLUMNS)]
    for st in stats:
        lines.append(",".join(_fmt(getattr(st, col if col != "p_or_m" else
                                           "p_or_m")) for col in CSV_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "-C", str(Path(__file__).resolve().parent),
             "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=10)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def write_metadata(path, config: dict) -> None:
    """Sidecar with everything needed to re-run: resolved config, seed
    derivation scheme, tolerances, library versions, build id."""
    payload = {
        "config": config,
        "prng": PRNG_NAME,
        "tolerances": {
            "eig_tol": EIG_TOL,
            "sandwich_tol": SANDWICH_TOL,
            "positivity_threshold": POSITIVITY_THRESHOLD,
            "right_tail_interpolation": "linear",
            "std_convention": "population (ddof=0)",
        },
        "versions": {
            "package": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "joblib": joblib.__version__,
        },
        "build": _git_describe(),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
