"""Central table of numerical defaults.

Every tolerance, sample count, and grid used anywhere in the package is
defined here, so a single place documents (and lets the CLI override) the
knobs that shape results.  README.md renders this table.
"""

# --- eigensolver ---------------------------------------------------------
EIG_TOL = 1e-10            # relative to max(1, Gershgorin radius)
DENSE_CROSSOVER = 512      # dim <= this uses the dense LAPACK path
LANCZOS_MAX_ITER = 600     # hard cap on Lanczos steps before giving up
ORACLE_MAX_DIM = 12        # Jacobi oracle refuses anything larger
POSITIVITY_THRESHOLD = 1e-8

# slack for the hard per-sample inequalities (zeta <= xi <= theta, Weyl)
SANDWICH_TOL = 1e-8

# --- dynamics ------------------------------------------------------------
DT_SAFETY = 0.5                 # auto dt = DT_SAFETY * 2/(rho + 2*max_degree)
SURVIVAL_MASS_THRESHOLD = 1e-3  # logistic-mode survival cutoff on total mass
CLASSIFY_MARGIN_FACTOR = 0.05   # refuse |rho - xi| <= factor * max(1, xi)

# --- Monte Carlo ---------------------------------------------------------
DEFAULT_SAMPLES = 1000
RATIO_P_GRID = (0.1, 0.2, 0.4, 0.8)     # sparse-to-dense sweep at fixed s
THRESHOLD_C_GRID = (0.5, 1.5, 2.0)      # p = c * log(n)/n probe points
RIGHT_TAIL_LEVEL = 0.01                 # right-tail percentile level
MAX_EXPERIMENT_N = 20000                # desk-scale cap on generated n
THRESHOLD_MAX_SINK_FRACTION = 0.10      # threshold experiment wants s <= n/10

# --- plumbing ------------------------------------------------------------
PRNG_NAME = "numpy.random.PCG64 seeded via SeedSequence([master, grid_index, sample_index])"
THREADS_ENV_VAR = "PATCHSIZE_THREADS"


def as_table() -> dict:
    """All defaults as one flat name -> value mapping (for metadata sidecars)."""
    return {
        k: v
        for k, v in globals().items()
        if k.isupper() and not k.startswith("_")
    }
