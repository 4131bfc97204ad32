"""Reaction-diffusion dynamics on habitats.

Population densities live on non-sink vertices; sinks are pinned to zero and
never stored. Two modes share one explicit RK4 stepper:

  linear    u' = (rho*I - L) u      growth rate rho - xi realized directly
  logistic  u' = rho*u*(1-u) - L u  bounded, so survival becomes a mass test

Linear trajectories are kept on the unit sphere with an accumulated log
norm, so exponential growth never overflows; the reported norm and mass are
reconstructed from the log factor and may round to inf only on output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .defaults import (
    CLASSIFY_MARGIN_FACTOR,
    DT_SAFETY,
    SURVIVAL_MASS_THRESHOLD,
)
from .spectral import DirichletSystem, min_eigenvalue

__all__ = [
    "DynamicsSpec",
    "State",
    "TrajectorySummary",
    "InstabilityError",
    "NearCriticalError",
    "stable_step",
    "integrate",
    "classify_survival",
]


class InstabilityError(RuntimeError):
    """Trajectory left the finite range; the step size was too large."""


class NearCriticalError(RuntimeError):
    """rho is too close to xi for a trajectory to decide survival."""

    def __init__(self, rho, xi, margin):
        super().__init__(
            f"|rho - xi| = {abs(rho - xi):.3g} <= margin {margin:.3g}; "
            "dynamic classification is inconclusive this close to critical")
        self.rho = rho
        self.xi = xi
        self.margin = margin


@dataclass(frozen=True)
class State:
    u: np.ndarray
    t: float


@dataclass
class DynamicsSpec:
    mode: str
    rho: float
    dt: float | None = None
    t_max: float = 50.0
    u0: np.ndarray | None = None
    survival_threshold_mass: float = SURVIVAL_MASS_THRESHOLD
    record_points: int = 256

    def __post_init__(self):
        if self.mode not in ("linear", "logistic"):
            raise ValueError("mode must be 'linear' or 'logistic'")
        if self.rho <= 0.0:
            raise ValueError("rho must be positive")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.dt is not None and self.t_max <= self.dt:
            raise ValueError("t_max must exceed dt")
        if self.survival_threshold_mass <= 0.0:
            raise ValueError("survival threshold mass must be positive")


@dataclass(frozen=True)
class TrajectorySummary:
    mode: str
    rho: float
    dt: float
    steps: int
    classification: str
    final_mass: float
    final_norm: float
    growth_rate: float | None
    times: np.ndarray = field(repr=False)
    total_mass: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    final_state: State = field(repr=False)


def stable_step(sys: DirichletSystem, rho: float) -> float:
    """Safe explicit step: DT_SAFETY * 2 / (rho + 2 * max interior degree)."""
    max_deg = float(np.max(sys.diag)) if sys.dim else 0.0
    return DT_SAFETY * 2.0 / (rho + 2.0 * max_deg)


def _default_u0(sys, mode):
    fill = 0.5 if mode == "logistic" else 1.0
    return np.full(sys.dim, fill)


def integrate(sys: DirichletSystem, spec: DynamicsSpec) -> TrajectorySummary:
    """Run the dynamics to t_max and summarize the trajectory.

    Linear mode estimates the asymptotic growth rate from the second half of
    the run: log(norm(t_max)/norm(t_max/2)) / (t_max/2). Logistic mode
    classifies survival by comparing the final total mass to the threshold.
    """
    rho = spec.rho
    max_deg = float(np.max(sys.diag)) if sys.dim else 0.0
    limit = 2.0 / (rho + 2.0 * max_deg)
    dt = spec.dt if spec.dt is not None else DT_SAFETY * limit
    if dt >= limit:
        raise ValueError(
            f"dt = {dt:.4g} violates the stability bound {limit:.4g} "
            "(= 2/(rho + 2*max_degree))")
    if spec.t_max <= dt:
        raise ValueError("t_max must exceed dt")
    steps = max(2, int(round(spec.t_max / dt)))

    u = _default_u0(sys, spec.mode) if spec.u0 is None else \
        np.array(spec.u0, dtype=np.float64)
    if u.shape != (sys.dim,):
        raise ValueError(f"u0 must have length {sys.dim}")
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise ValueError("u0 must be finite and nonnegative")
    if spec.mode == "logistic" and np.any(u > 1.0):
        raise ValueError("logistic mode needs u0 in [0, 1]")
    if spec.mode == "linear" and not np.any(u > 0):
        raise ValueError("linear mode needs a nonzero start")

    every = max(1, steps // max(1, spec.record_points - 1))
    times, masses, norms = [], [], []

    if spec.mode == "linear":
        def f(x):
            return rho * x - sys.matvec(x)

        lognorm = math.log(np.linalg.norm(u))
        u = u / np.linalg.norm(u)
        half_idx = steps // 2
        log_half = None

        def record(k):
            scale = math.exp(lognorm) if lognorm < 709 else math.inf
            times.append(k * dt)
            masses.append(float(u.sum()) * scale)
            norms.append(scale)

        record(0)
        for k in range(1, steps + 1):
            k1 = f(u)
            k2 = f(u + 0.5 * dt * k1)
            k3 = f(u + 0.5 * dt * k2)
            k4 = f(u + dt * k3)
            u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            nrm = float(np.linalg.norm(u))
            if not math.isfinite(nrm) or nrm == 0.0:
                raise InstabilityError(f"non-finite state at step {k}")
            lognorm += math.log(nrm)
            u /= nrm
            if k == half_idx:
                log_half = lognorm
            if k % every == 0 or k == steps:
                record(k)
        growth = (lognorm - log_half) / ((steps - half_idx) * dt)
        classification = "healthy" if growth > 0 else "deadly"
        final_norm = math.exp(lognorm) if lognorm < 709 else math.inf
        final_mass = float(u.sum()) * final_norm
    else:
        def f(x):
            return rho * x * (1.0 - x) - sys.matvec(x)

        def record(k):
            times.append(k * dt)
            masses.append(float(u.sum()))
            norms.append(float(np.linalg.norm(u)))

        record(0)
        for k in range(1, steps + 1):
            k1 = f(u)
            k2 = f(u + 0.5 * dt * k1)
            k3 = f(u + 0.5 * dt * k2)
            k4 = f(u + dt * k3)
            u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(u)):
                raise InstabilityError(f"non-finite state at step {k}")
            if k % every == 0 or k == steps:
                record(k)
        growth = None
        final_mass = float(u.sum())
        final_norm = float(np.linalg.norm(u))
        classification = ("healthy" if final_mass > spec.survival_threshold_mass
                          else "deadly")

    return TrajectorySummary(
        mode=spec.mode, rho=rho, dt=dt, steps=steps,
        classification=classification, final_mass=final_mass,
        final_norm=final_norm, growth_rate=growth,
        times=np.asarray(times), total_mass=np.asarray(masses),
        norms=np.asarray(norms), final_state=State(u, steps * dt))


def classify_survival(sys: DirichletSystem, rho: float,
                      spec: DynamicsSpec | None = None) -> str:
    """Survival verdict from a trajectory alone.

    Deliberately does not consult the sign of rho - xi for the verdict; the
    eigenvalue is used only to refuse near-critical cases, where no finite
    trajectory can decide. Agreement with the spectral criterion is the
    cross-check this function exists to provide.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    xi = min_eigenvalue(sys).value
    margin = CLASSIFY_MARGIN_FACTOR * max(1.0, xi)
    gap = abs(rho - xi)
    if gap <= margin:
        raise NearCriticalError(rho, xi, margin)
    if spec is None:
        thr = SURVIVAL_MASS_THRESHOLD
        horizon = 1.5 * math.log(0.5 * max(2, sys.dim) / thr) / gap + 5.0
        spec = DynamicsSpec(mode="logistic", rho=rho,
                            t_max=max(20.0, horizon))
    return integrate(sys, spec).classification
