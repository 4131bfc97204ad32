"""Dirichlet matrices of habitats and their smallest eigenvalue.

The Dirichlet matrix of a habitat is the principal submatrix of the graph
Laplacian indexed by non-sink vertices. It decomposes as Z + Ltilde where
Z = diag(sink-adjacency counts) and Ltilde is the Laplacian of the interior
subgraph; the matrix-vector product uses that split and never materializes
a dense matrix above the configured crossover.

Solvers:
  * dense      -- LAPACK symmetric eigensolver on the materialized matrix
  * lanczos    -- Lanczos with full reorthogonalization on the Gershgorin
                  shift c*I - L, so the smallest eigenvalue of L becomes the
                  dominant eigenvalue of the shifted operator
  * oracle     -- hand-rolled cyclic Jacobi, small systems only; kept fully
                  independent of the LAPACK/Lanczos route for verification
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal

from .defaults import (
    DENSE_CROSSOVER,
    EIG_TOL,
    LANCZOS_MAX_ITER,
    ORACLE_MAX_DIM,
    POSITIVITY_THRESHOLD,
)
from .graphs import Graph, Habitat, induced_subgraph, sink_adjacency_counts

__all__ = [
    "DirichletSystem",
    "EigenResult",
    "ConvergenceError",
    "dirichlet_system",
    "min_eigenvalue",
    "min_eigenvalue_oracle",
    "bounds",
    "weyl_lower_bound",
    "is_positive_definite",
]

_LANCZOS_START_SEED = 0x5EED0001  # fixed: results must not depend on run context


class ConvergenceError(RuntimeError):
    """Iterative solve ran out of iterations; carries the best estimate."""

    def __init__(self, message, value=None, residual=None, iterations=None):
        super().__init__(message)
        self.value = value
        self.residual = residual
        self.iterations = iterations


class DirichletSystem:
    """Habitat-derived operator L = Z + Ltilde with its boundary statistics."""

    __slots__ = ("habitat", "dim", "z", "gtilde", "dtilde", "boundary_edges",
                 "zeta", "theta", "diag")

    def __init__(self, habitat: Habitat):
        self.habitat = habitat
        self.dim = habitat.interior_size
        self.z = sink_adjacency_counts(habitat)
        self.gtilde = induced_subgraph(habitat)
        self.dtilde = self.gtilde.degrees
        self.boundary_edges = int(self.z.sum())
        self.zeta = int(self.z.min())
        self.theta = self.boundary_edges / self.dim
        self.diag = (self.z + self.dtilde).astype(np.float64)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """y = Z x + Ltilde x = diag(z + dtilde) x - Atilde x."""
        return self.diag * x - self.gtilde.adjacency() @ x

    def gershgorin_radius(self) -> float:
        """Upper bound on every eigenvalue magnitude: max_i (z_i + 2 dtilde_i)."""
        return float(np.max(self.z + 2 * self.dtilde))

    def dense(self, force: bool = False) -> np.ndarray:
        if self.dim > DENSE_CROSSOVER and not force:
            raise ValueError(
                f"refusing to materialize dim={self.dim} > {DENSE_CROSSOVER}; "
                "pass force=True if you mean it")
        mat = -self.gtilde.adjacency().toarray()
        np.fill_diagonal(mat, self.diag)
        return mat

    def to_coordinate_text(self) -> str:
        """Debug export: "dim nnz" header, then 1-based "i j value" lines in
        row-major order with ascending columns."""
        lines = []
        for i in range(self.dim):
            cols = self.gtilde.neighbors(i)
            for j in cols[cols < i]:
                lines.append(f"{i + 1} {j + 1} {-1.0!r}")
            if self.diag[i] != 0.0:
                lines.append(f"{i + 1} {i + 1} {float(self.diag[i])!r}")
            for j in cols[cols > i]:
                lines.append(f"{i + 1} {j + 1} {-1.0!r}")
        return "\n".join([f"{self.dim} {len(lines)}"] + lines) + "\n"


def dirichlet_system(h: Habitat) -> DirichletSystem:
    return DirichletSystem(h)


@dataclass(frozen=True)
class EigenResult:
    value: float
    residual: float
    solver: str
    iterations: int


def min_eigenvalue(sys: DirichletSystem, tol: float = EIG_TOL,
                   method: str = "auto",
                   max_iter: int | None = None) -> EigenResult:
    """Smallest eigenvalue of the Dirichlet matrix.

    The result is accurate to tol * max(1, Gershgorin radius). "auto" picks
    the dense path up to dim DENSE_CROSSOVER and Lanczos beyond it.
    """
    if tol <= 0:
        raise ValueError("need tol > 0")
    if method == "auto":
        method = "dense" if sys.dim <= DENSE_CROSSOVER else "lanczos"
    if sys.dim == 1:
        return EigenResult(float(sys.diag[0]), 0.0, method, 0)
    if method == "dense":
        return _dense_min(sys)
    if method == "lanczos":
        return _lanczos_min(sys, tol, max_iter)
    raise ValueError(f"unknown method {method!r}")


def _dense_min(sys: DirichletSystem) -> EigenResult:
    mat = sys.dense(force=True)
    w, v = eigh(mat, subset_by_index=[0, 0])
    value = float(w[0])
    vec = v[:, 0]
    residual = float(np.linalg.norm(sys.matvec(vec) - value * vec))
    return EigenResult(value, residual, "dense", 0)


def _lanczos_min(sys: DirichletSystem, tol: float,
                 max_iter: int | None) -> EigenResult:
    dim = sys.dim
    c = sys.gershgorin_radius()
    tol_abs = tol * max(1.0, c)
    if c == 0.0:  # zero matrix: no edges anywhere, all z = 0
        return EigenResult(0.0, 0.0, "lanczos", 0)
    kmax = min(dim, max_iter if max_iter is not None else LANCZOS_MAX_ITER)

    def shifted_mv(x):
        return c * x - sys.matvec(x)

    rng = np.random.Generator(np.random.PCG64(_LANCZOS_START_SEED))
    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    Q = np.empty((dim, kmax))
    alphas: list[float] = []
    betas: list[float] = []
    beta = 0.0
    qprev = np.zeros(dim)
    best = None  # (value, residual, iterations)
    for k in range(kmax):
        Q[:, k] = q
        u = shifted_mv(q)
        alpha = float(q @ u)
        alphas.append(alpha)
        r = u - alpha * q - beta * qprev
        # full reorthogonalization, two passes
        r -= Q[:, :k + 1] @ (Q[:, :k + 1].T @ r)
        r -= Q[:, :k + 1] @ (Q[:, :k + 1].T @ r)
        beta = float(np.linalg.norm(r))
        breakdown = beta <= 1e-14 * c
        theta, y = _top_ritz(alphas, betas)
        resid_est = abs(beta * y[-1])
        if resid_est <= 0.5 * tol_abs or breakdown or k == kmax - 1:
            vec = Q[:, :k + 1] @ y
            vec /= np.linalg.norm(vec)
            value = c - theta
            residual = float(np.linalg.norm(sys.matvec(vec) - value * vec))
            best = (value, residual, k + 1)
            if residual <= tol_abs or breakdown:
                return EigenResult(value, residual, "lanczos", k + 1)
        if breakdown:
            break
        betas.append(beta)
        qprev = q
        q = r / beta
    value, residual, its = best
    if residual <= tol_abs:
        return EigenResult(value, residual, "lanczos", its)
    raise ConvergenceError(
        f"Lanczos did not reach tol {tol_abs:.3e} in {its} iterations "
        f"(best residual {residual:.3e})",
        value=value, residual=residual, iterations=its)


def _top_ritz(alphas, betas):
    k = len(alphas)
    if k == 1:
        return alphas[0], np.ones(1)
    w, y = eigh_tridiagonal(np.asarray(alphas), np.asarray(betas),
                            select="i", select_range=(k - 1, k - 1))
    return float(w[0]), y[:, 0]


def min_eigenvalue_oracle(sys: DirichletSystem) -> EigenResult:
    """Independent small-system eigensolver: cyclic Jacobi to machine precision.

    Test-only verification route; shares no code with the main solvers.
    """
    if sys.dim > ORACLE_MAX_DIM:
        raise ValueError(f"oracle limited to dim <= {ORACLE_MAX_DIM}")
    a = sys.dense(force=True).copy()
    n = sys.dim
    v = np.eye(n)
    scale = max(1.0, float(np.max(np.abs(a))))
    sweeps = 0
    for sweeps in range(1, 101):
        offpart = a - np.diag(np.diag(a))
        off = float(np.linalg.norm(offpart))
        if off <= 1e-15 * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                # classical Jacobi rotation annihilating a[p, q]
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(tau, 1.0)) if tau != 0 \
                    else 1.0
                cth = 1.0 / np.hypot(t, 1.0)
                sth = t * cth
                rot_p = cth * a[:, p] - sth * a[:, q]
                rot_q = sth * a[:, p] + cth * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = cth * a[p, :] - sth * a[q, :]
                rot_q = sth * a[p, :] + cth * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                rot_p = cth * v[:, p] - sth * v[:, q]
                rot_q = sth * v[:, p] + cth * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    d = np.diag(a)
    i = int(np.argmin(d))
    vec = v[:, i] / np.linalg.norm(v[:, i])
    value = float(d[i])
    residual = float(np.linalg.norm(sys.matvec(vec) - value * vec))
    return EigenResult(value, residual, "oracle", sweeps)


def bounds(sys: DirichletSystem) -> tuple[float, float]:
    """Deterministic sandwich (zeta, theta): zeta <= xi <= theta always."""
    return float(sys.zeta), float(sys.theta)


def weyl_lower_bound(sys: DirichletSystem, tol: float = 1e-10,
                     max_iter: int = 5000) -> float:
    """Diagnostic lower bound min_i d(i) - lambda_max(interior adjacency).

    d is the full-graph degree of non-sink vertices. May be negative; always
    at most xi. lambda_max comes from power iteration on the shifted
    adjacency (the shift keeps the dominant eigenvalue unambiguous).
    """
    dmin = float(np.min(sys.diag))  # diag = z + dtilde = full-graph degrees
    if sys.gtilde.num_edges == 0:
        return dmin
    adj = sys.gtilde.adjacency()
    shift = float(np.max(sys.dtilde)) + 1.0
    scale = max(1.0, float(np.max(sys.dtilde)))
    x = np.ones(sys.dim) / np.sqrt(sys.dim)
    lam = 0.0
    residual = np.inf
    for _ in range(max_iter):
        y = adj @ x + shift * x
        ny = np.linalg.norm(y)
        x = y / ny
        mx = adj @ x + shift * x
        lam = float(x @ mx)
        residual = float(np.linalg.norm(mx - lam * x))
        if residual <= tol * scale:
            break
    lam_adj = lam - shift
    # report from the safe side: overshooting lambda_max shrinks the bound
    return dmin - (lam_adj + residual)


def is_positive_definite(h: Habitat, tol: float = POSITIVITY_THRESHOLD) -> bool:
    """True iff the Dirichlet eigenvalue clears the positivity threshold."""
    if h.s < 1:
        raise ValueError("positive definiteness needs at least one sink")
    xi = min_eigenvalue(dirichlet_system(h)).value
    return xi > tol
