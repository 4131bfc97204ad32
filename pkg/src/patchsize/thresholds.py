"""Closed-form survival calculators.

Chernoff tail bounds for binomial counts, the connectivity threshold
log(n)/n, the viability threshold s*p, and the two critical-patch-size
calculators: the binomial-model bound (how many vertices guarantee that all
but a delta-fraction of habitats are healthy) and the half-uniform variant
at p = 1/2. Everything here is a pure function of its arguments; all
logarithms are natural.

Rounding convention: ceil on "at least" quantities, floor on "no more than".
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ChernoffQuery",
    "CriticalSizeQuery",
    "CriticalSize",
    "HealthyAbove",
    "DeadlyBelow",
    "chernoff_upper",
    "chernoff_lower",
    "chernoff_symmetric",
    "connectivity_threshold",
    "survival_threshold",
    "critical_patch_size",
    "half_uniform_bounds",
    "survival_check",
]


@dataclass(frozen=True)
class ChernoffQuery:
    """Tail query for X ~ Bin(nu, p) deviating by a factor eps from its mean."""
    nu: int
    p: float
    eps: float

    def __post_init__(self):
        if not (isinstance(self.nu, int) and self.nu >= 1):
            raise ValueError("nu must be a positive integer")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")


def chernoff_upper(q: ChernoffQuery) -> float:
    """P(X >= (1+eps)*nu*p) <= exp(-eps^2 * nu * p / 3)."""
    return math.exp(-q.eps ** 2 * q.nu * q.p / 3.0)


def chernoff_lower(q: ChernoffQuery) -> float:
    """P(X <= (1-eps)*nu*p) <= exp(-eps^2 * nu * p / 2)."""
    return math.exp(-q.eps ** 2 * q.nu * q.p / 2.0)


def chernoff_symmetric(q: ChernoffQuery) -> float:
    """P(|X - nu*p| >= eps*nu*p) <= 2*exp(-eps^2 * nu * p / 3)."""
    return 2.0 * chernoff_upper(q)


def connectivity_threshold(n: int) -> float:
    """Sharp edge-probability threshold log(n)/n for a positive eigenvalue."""
    if n < 2:
        raise ValueError("need n >= 2")
    return math.log(n) / n


def survival_threshold(s: int, p: float) -> float:
    """Viability threshold s*p: the eigenvalue concentrates here."""
    if s < 1:
        raise ValueError("need at least one sink")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return s * p


@dataclass(frozen=True)
class CriticalSizeQuery:
    rho: float
    s: int
    delta: float
    eps: float

    def __post_init__(self):
        if self.rho <= 0.0:
            raise ValueError("rho must be positive")
        if not (isinstance(self.s, int) and self.s >= 1):
            raise ValueError("s must be a positive integer")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.p_eps > 1.0:
            raise ValueError(
                f"p_eps = {self.p_eps:.6g} > 1: rho too large relative to (1+eps)*s")

    @property
    def p_eps(self) -> float:
        return self.rho / ((1.0 + self.eps) * self.s)

    @property
    def mu(self) -> float:
        return self.s * self.p_eps


@dataclass(frozen=True)
class CriticalSize:
    """Resolved patch-size guarantee: habitats on n vertices with s sinks and
    at most m_max edges are healthy except for at most a delta fraction."""
    rho: float
    s: int
    delta: float
    eps: float
    p_eps: float
    mu: float
    n_min: int
    n: int
    m_max: int


def critical_patch_size(q: CriticalSizeQuery, n: int | None = None) -> CriticalSize:
    """n_min = ceil(s + 3*mu/(rho-mu)^2 * ln(4/delta)); m_max = floor(p_eps*C(n,2))."""
    gap = q.rho - q.mu
    n_min = math.ceil(q.s + 3.0 * q.mu / gap ** 2 * math.log(4.0 / q.delta))
    if n is None:
        n = n_min
    elif n < n_min:
        raise ValueError(f"n = {n} is below n_min = {n_min}; no guarantee applies")
    m_max = math.floor(q.p_eps * n * (n - 1) / 2.0)
    return CriticalSize(q.rho, q.s, q.delta, q.eps, q.p_eps, q.mu, n_min, n, m_max)


@dataclass(frozen=True)
class HealthyAbove:
    """At p = 1/2, all but a delta fraction of habitats with at least
    ntilde_min non-sink vertices are healthy."""
    ntilde_min: int


@dataclass(frozen=True)
class DeadlyBelow:
    """At p = 1/2, all but a delta fraction of the deadly habitats have at
    most ntilde_max non-sink vertices."""
    ntilde_max: int


def half_uniform_bounds(s: int, rho: float, delta: float):
    """Classify patch sizes under the uniform graph measure (p = 1/2).

    rho > s/2 gives a healthy-above-ntilde_min statement, rho < s/2 a
    deadly-below-ntilde_max one. The boundary rho = s/2 is rejected: both
    formulas are singular there.
    """
    if s < 1:
        raise ValueError("need at least one sink")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if rho == s / 2.0:
        raise ValueError("rho = s/2 is the singular boundary; no bound applies")
    if rho > s / 2.0:
        val = 6.0 * s / (s - 2.0 * rho) ** 2 * math.log(1.0 / delta)
        return HealthyAbove(math.ceil(val))
    val = delta * math.exp((s - 2.0 * rho) ** 2 / (4.0 * s))
    return DeadlyBelow(math.floor(val))


def survival_check(xi: float, rho: float) -> str:
    """"healthy" iff xi <= rho, else "deadly"."""
    if xi < 0.0:
        raise ValueError("xi must be nonnegative")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    return "healthy" if xi <= rho else "deadly"
