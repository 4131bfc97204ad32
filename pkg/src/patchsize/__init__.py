"""Survival thresholds on graph habitats.

A habitat is a graph with a designated set of sink vertices. The package
computes the smallest eigenvalue of the Dirichlet matrix (the Laplacian
restricted to non-sink vertices), deterministic bounds on it, concentration
thresholds for random habitats, critical patch sizes, and reaction-diffusion
dynamics that realize the eigenvalue as a growth rate.
"""
from .graphs import (
    Graph,
    Habitat,
    RandomModel,
    gen_gnm,
    gen_gnp,
    induced_subgraph,
    is_connected,
    load_graph,
    pair_count,
    save_graph,
    sink_adjacency_counts,
)
from .spectral import (
    ConvergenceError,
    DirichletSystem,
    EigenResult,
    bounds,
    dirichlet_system,
    is_positive_definite,
    min_eigenvalue,
    min_eigenvalue_oracle,
    weyl_lower_bound,
)

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    DynamicsSpec,
    InstabilityError,
    NearCriticalError,
    TrajectorySummary,
    classify_survival,
    integrate,
    stable_step,
)
from .montecarlo import (  # noqa: E402
    ExperimentSpec,
    GridPoint,
    SampleStats,
    run_expectation_check,
    run_experiment,
    run_fig2_experiment,
    run_ratio_experiment,
    run_threshold_experiment,
    write_metadata,
    write_stats_csv,
)
from .thresholds import (  # noqa: E402
    ChernoffQuery,
    CriticalSize,
    CriticalSizeQuery,
    DeadlyBelow,
    HealthyAbove,
    chernoff_lower,
    chernoff_symmetric,
    chernoff_upper,
    connectivity_threshold,
    critical_patch_size,
    half_uniform_bounds,
    survival_check,
    survival_threshold,
)

__all__ = [
    "Graph",
    "Habitat",
    "RandomModel",
    "gen_gnm",
    "gen_gnp",
    "induced_subgraph",
    "is_connected",
    "load_graph",
    "pair_count",
    "save_graph",
    "sink_adjacency_counts",
    "ConvergenceError",
    "DirichletSystem",
    "EigenResult",
    "bounds",
    "dirichlet_system",
    "is_positive_definite",
    "min_eigenvalue",
    "min_eigenvalue_oracle",
    "weyl_lower_bound",
    "DynamicsSpec",
    "InstabilityError",
    "NearCriticalError",
    "TrajectorySummary",
    "classify_survival",
    "integrate",
    "stable_step",
    "ExperimentSpec",
    "GridPoint",
    "SampleStats",
    "run_expectation_check",
    "run_experiment",
    "run_fig2_experiment",
    "run_ratio_experiment",
    "run_threshold_experiment",
    "write_metadata",
    "write_stats_csv",
    "ChernoffQuery",
    "CriticalSize",
    "CriticalSizeQuery",
    "DeadlyBelow",
    "HealthyAbove",
    "chernoff_lower",
    "chernoff_symmetric",
    "chernoff_upper",
    "connectivity_threshold",
    "critical_patch_size",
    "half_uniform_bounds",
    "survival_check",
    "survival_threshold",
    "__version__",
]
