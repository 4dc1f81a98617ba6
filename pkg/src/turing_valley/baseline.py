"""Equilibrium with abundant machines and its comparative statics.

With abundant compute the rental rate is pinned at ``F(m)`` and every human
goes to the organization offering the highest zero-profit wage.  This module
classifies machine knowledge into the three organizational regions, solves
for prices and allocations, differentiates labor income in ``m``, and finds
the machine knowledge that maximizes labor income.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize

from .dist import ProblemDist
from .econ import (
    Economy,
    WageCandidates,
    abundance_holds,
    abundance_threshold,
    effective_success,
    span,
    span_value,
    wage_candidates,
)
from .errors import AbundanceError, DomainError, NonDifferentiableError

BISECT_XTOL = 1e-10


class Region(str, enum.Enum):
    Rs = "Rs"
    Rb = "Rb"
    Rt = "Rt"


@dataclass(frozen=True)
class Equilibrium:
    """Prices, human masses ``alpha = (s, b, t)``, machine masses
    ``mu_alloc = (s, b, t)`` and total output.

    ``r_star``, ``alpha``, ``mu_alloc`` and ``output`` are ``None`` only when
    humans are abundant and the rental rate is not characterized.
    """

    w_star: float
    r_star: Optional[float]
    region: str
    alpha: Optional[tuple]
    mu_alloc: Optional[tuple]
    output: Optional[float]

    def to_dict(self) -> dict:
        region = self.region.value if isinstance(self.region, enum.Enum) else self.region
        return {
            "region": region,
            "w_star": self.w_star,
            "r_star": self.r_star,
            "alpha": None if self.alpha is None else dict(zip("sbt", self.alpha)),
            "mu_alloc": None if self.mu_alloc is None else dict(zip("sbt", self.mu_alloc)),
            "output": self.output,
            "capital_income": None if self.output is None else self.output - self.w_star,
        }


def classify_candidates(wc: WageCandidates) -> Region:
    # singles win ties against two-layer firms; t wins ties against b
    if wc.w_s >= max(wc.w_b, wc.w_t):
        return Region.Rs
    if wc.w_b > max(wc.w_s, wc.w_t):
        return Region.Rb
    return Region.Rt


def classify(econ: Economy) -> Region:
    return classify_candidates(wage_candidates(econ))


def _allocation(econ: Economy, region: Region) -> tuple:
    """Human and machine masses when all humans join firms of ``region``'s type."""
    alpha = {Region.Rs: (1.0, 0.0, 0.0), Region.Rb: (0.0, 1.0, 0.0), Region.Rt: (0.0, 0.0, 1.0)}[region]
    mu_b = span(econ.m, econ) if region is Region.Rb else 0.0
    mu_t = 1.0 / span(econ.h, econ) if region is Region.Rt else 0.0
    return alpha, (econ.mu - mu_b - mu_t, mu_b, mu_t)


def output_from_allocation(econ: Economy, alpha, mu_alloc) -> float:
    """Total output summed firm by firm."""
    e = effective_success(econ)
    f_h = float(econ.dist.cdf(econ.h))
    f_m = float(econ.dist.cdf(econ.m))
    a_s, a_b, a_t = alpha
    mu_s = mu_alloc[0]
    y = a_s * f_h + a_t * e + mu_s * f_m
    if a_b:
        y += a_b * span(econ.m, econ) * e
    return y


def solve_from_candidates(econ: Economy, wc: WageCandidates) -> Equilibrium:
    """Abundant-compute equilibrium given the wage candidates.

    Does not check abundance; callers that already know the allocation fits
    the compute supply use this directly.
    """
    region = classify_candidates(wc)
    r_star = float(econ.dist.cdf(econ.m))
    w_star = wc.best
    alpha, mu_alloc = _allocation(econ, region)
    return Equilibrium(w_star, r_star, region, alpha, mu_alloc, econ.mu * r_star + w_star)


def solve_baseline(econ: Economy) -> Equilibrium:
    if not abundance_holds(econ):
        raise AbundanceError(
            f"mu={econ.mu} does not exceed the abundance threshold "
            f"{abundance_threshold(econ.dist, econ.h, econ.c):.6g}; use solve_general"
        )
    return solve_from_candidates(econ, wage_candidates(econ))


def _partials(econ: Economy, i: int) -> tuple:
    """Derivatives of ``F(m)`` and of the joint success probability in ``m_i``."""
    j = 2 if i == 1 else 1
    m_i, m_j = econ.m[i - 1], econ.m[j - 1]
    h_i, h_j = econ.h[i - 1], econ.h[j - 1]
    sec = econ.dist.section_integral
    d_fm = sec(i, m_i, 0.0, m_j)
    if econ.synergy:
        d_e = sec(i, m_i, 0.0, max(h_j, m_j)) if m_i > h_i else 0.0
    else:
        # E = F(m) + F(h) - F(m ^ h)
        d_meet = sec(i, m_i, 0.0, min(m_j, h_j)) if m_i < h_i else 0.0
        d_e = d_fm - d_meet
    return d_fm, d_e


def mpl_gradient(econ: Economy, tol: float = 1e-12) -> tuple:
    """Analytic gradient of equilibrium labor income with respect to ``m``.

    Raises NonDifferentiableError on region boundaries and, outside the
    single-layer region, where a machine coordinate equals the human one.
    """
    wc = wage_candidates(econ)
    region = classify_candidates(wc)
    ranked = sorted(wc.as_tuple(), reverse=True)
    if ranked[0] - ranked[1] <= tol:
        raise NonDifferentiableError(f"m={econ.m} lies on a region boundary")
    if region is Region.Rs:
        return (0.0, 0.0)
    if any(abs(mi - hi) <= tol for mi, hi in zip(econ.m, econ.h)):
        raise NonDifferentiableError(f"m={econ.m} shares a coordinate with h={econ.h}")

    e = effective_success(econ)
    f_m = float(econ.dist.cdf(econ.m))
    n_m = span(econ.m, econ)
    n_h = span(econ.h, econ)
    grad = []
    for i in (1, 2):
        d_fm, d_e = _partials(econ, i)
        if region is Region.Rb:
            d_n = econ.c * n_m * n_m * d_fm
            grad.append(d_n * (e - f_m) + n_m * (d_e - d_fm))
        else:
            grad.append(d_e - d_fm / n_h)
    return tuple(grad)


def stronger_in_dim2(dist: ProblemDist, h) -> bool:
    return float(dist.cdf((1.0, h[1]))) >= float(dist.cdf((h[0], 1.0)))


VERTEX_ORDER = ((1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0))


def vertex_incomes(dist: ProblemDist, h, c: float) -> dict:
    """Closed-form labor income at the four corners of the knowledge square."""
    return {
        (0.0, 0.0): float(dist.cdf(h)) / c,
        (0.0, 1.0): float(dist.cdf((h[0], 1.0))) / c,
        (1.0, 0.0): float(dist.cdf((1.0, h[1]))) / c,
        (1.0, 1.0): 1.0 - 1.0 / span_value(dist, h, c),
    }


class VertexMax(NamedTuple):
    argmax: tuple
    value: float


def labor_max_vertex(dist: ProblemDist, h, c: float) -> VertexMax:
    """Corner of ``[0, 1]^2`` maximizing labor income.

    Ties go to the earlier corner in (1,0), (1,1), (0,1), (0,0).
    """
    if not (0 < h[0] < 1 and 0 < h[1] < 1) or not 0 < c < 1:
        raise DomainError("need h in (0,1)^2 and c in (0,1)")
    values = vertex_incomes(dist, h, c)
    best = VERTEX_ORDER[0]
    for v in VERTEX_ORDER[1:]:
        if values[v] > values[best]:
            best = v
    return VertexMax(best, values[best])


def income_gap(dist: ProblemDist, h, c: float) -> float:
    """Labor income at m=(1,0) minus labor income at m=(1,1)."""
    return float(dist.cdf((1.0, h[1]))) / c - 1.0 + c * (1.0 - float(dist.cdf(h)))


@dataclass(frozen=True)
class ThresholdCurve:
    """Thresholds separating (1,0) from (1,1) as the labor-income maximizer.

    For ``h1 >= h1_bar`` the corner (1,0) wins whenever humans are stronger in
    dimension 2.  Below it, (1,1) wins for ``h2`` in ``[h2_lower, h2_bar)``.
    """

    c: float
    h1_bar: float
    h1: np.ndarray
    h2_lower: np.ndarray
    h2_bar: np.ndarray


def _bisect(fn, lo: float, hi: float) -> float:
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    return optimize.bisect(fn, lo, hi, xtol=BISECT_XTOL)


def lower_h2(dist: ProblemDist, h1: float) -> float:
    """``h2`` at which humans are equally strong in both dimensions."""
    target = float(dist.cdf((h1, 1.0)))
    return _bisect(lambda x: float(dist.cdf((1.0, x))) - target, 0.0, 1.0)


def upper_h2(dist: ProblemDist, h1: float, c: float) -> float:
    lo = lower_h2(dist, h1)
    if income_gap(dist, (h1, lo), c) >= 0:
        return lo
    return _bisect(lambda x: income_gap(dist, (h1, x), c), lo, 1.0)


def labor_max_thresholds(dist: ProblemDist, c: float, h1_grid: Optional[Sequence[float]] = None) -> ThresholdCurve:
    if not 0 < c < 1:
        raise DomainError("c must lie in (0, 1)")
    on_diagonal = lambda h1: income_gap(dist, (h1, lower_h2(dist, h1)), c)
    h1_bar = _bisect(on_diagonal, 0.0, 1.0)
    if h1_grid is None:
        h1_grid = np.linspace(0.0, 1.0, 101)[1:-1]
    h1 = np.asarray(h1_grid, dtype=float)
    lower = np.array([lower_h2(dist, x) for x in h1])
    upper = np.array([upper_h2(dist, x, c) for x in h1])
    return ThresholdCurve(c, h1_bar, h1, lower, upper)


@dataclass(frozen=True)
class TrajectoryPoint:
    m: tuple
    w_star: float
    r_star: float
    output: float
    region: Region


def straight_path(start, end, steps: int) -> list:
    ts = np.linspace(0.0, 1.0, steps + 1)
    return [(start[0] + t * (end[0] - start[0]), start[1] + t * (end[1] - start[1])) for t in ts]


def trajectory(econ: Economy, path: Iterable) -> list:
    out = []
    for m in path:
        eq = solve_baseline(econ.with_m(m))
        out.append(TrajectoryPoint(tuple(float(x) for x in m), eq.w_star, eq.r_star, eq.output, eq.region))
    return out
