"""Equilibrium for an arbitrary compute supply.

When compute is scarce, bottom-automated firms may want more machines than
exist.  Inside the bottom-automated region the economy then splits by
whether compute covers the demand (``K``) and, if not, whether mixing
bottom- and top-automated firms beats leaving some humans unmatched (``R_m``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .baseline import Equilibrium, Region, classify_candidates, solve_from_candidates
from .dist import ProblemDist
from .econ import Economy, WageCandidates, candidate_arrays, effective_success, span, wage_candidates

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class GeneralRegion(str, enum.Enum):
    Rs = "Rs"
    Rt = "Rt"
    RbK = "RbK"
    RbMixed = "RbMixed"
    RbScarce = "RbScarce"
    HumansAbundant = "HumansAbundant"


def in_K(econ: Economy) -> bool:
    """Compute supply covers bottom-automated demand at this ``m``."""
    return econ.mu >= span(econ.m, econ)


def _in_rm(wc: WageCandidates, n_m: float, n_h: float) -> bool:
    if math.isinf(n_m):
        return wc.w_t >= wc.w_s or wc.w_b <= wc.w_s
    return wc.w_b - wc.w_s <= n_m * n_h * (wc.w_t - wc.w_s)


def in_Rm(econ: Economy) -> bool:
    """Mixing bottom- and top-automated firms beats leaving humans alone."""
    return _in_rm(wage_candidates(econ), span(econ.m, econ), span(econ.h, econ))


def solve_general_from_candidates(econ: Economy, wc: WageCandidates) -> Equilibrium:
    n_h = span(econ.h, econ)
    f_h = float(econ.dist.cdf(econ.h))
    if econ.mu < 1.0 / n_h:
        # labor income is F(h) here; the rental rate is left uncharacterized
        return Equilibrium(f_h, None, GeneralRegion.HumansAbundant, None, None, None)

    region = classify_candidates(wc)
    if region is not Region.Rb or in_K(econ):
        eq = solve_from_candidates(econ, wc)
        label = {Region.Rs: GeneralRegion.Rs, Region.Rt: GeneralRegion.Rt, Region.Rb: GeneralRegion.RbK}[region]
        return Equilibrium(eq.w_star, eq.r_star, label, eq.alpha, eq.mu_alloc, eq.output)

    n_m = span(econ.m, econ)
    f_m = float(econ.dist.cdf(econ.m))
    mu = econ.mu
    if _in_rm(wc, n_m, n_h):
        nn = n_m * n_h
        r_star = f_m + n_h * (wc.w_b - wc.w_t) / (nn - 1.0)
        w_star = wc.w_b - nn * (wc.w_b - wc.w_t) / (nn - 1.0)
        a_b = (mu - 1.0 / n_h) / (n_m - 1.0 / n_h)
        a_t = 1.0 - a_b
        alpha = (0.0, a_b, a_t)
        mu_alloc = (0.0, a_b * n_m, a_t / n_h)
        label = GeneralRegion.RbMixed
    else:
        r_star = effective_success(econ) - f_h / n_m
        w_star = f_h
        a_b = mu / n_m
        alpha = (1.0 - a_b, a_b, 0.0)
        mu_alloc = (0.0, mu, 0.0)
        label = GeneralRegion.RbScarce
    return Equilibrium(w_star, r_star, label, alpha, mu_alloc, mu * r_star + w_star)


def solve_general(econ: Economy) -> Equilibrium:
    """Equilibrium for any compute supply ``mu > 0``."""
    return solve_general_from_candidates(econ, wage_candidates(econ))


@dataclass(frozen=True)
class ScanResult:
    t: np.ndarray
    m: np.ndarray
    w_star: np.ndarray
    r_star: np.ndarray
    regions: list
    jumps: list = field(default_factory=list)

    def w_jumps(self, direction: Optional[int] = None) -> list:
        return [j for j in self.jumps if j["series"] == "w_star" and (direction is None or j["direction"] == direction)]

    def r_jumps(self, direction: Optional[int] = None) -> list:
        return [j for j in self.jumps if j["series"] == "r_star" and (direction is None or j["direction"] == direction)]


def _flag_jumps(t, values, name: str, factor: float, floor: float) -> list:
    diffs = np.diff(values)
    jumps = []
    for k, d in enumerate(diffs):
        if not np.isfinite(d):
            continue
        neighbours = [abs(diffs[i]) for i in (k - 2, k - 1, k + 1, k + 2) if 0 <= i < len(diffs) and np.isfinite(diffs[i])]
        local = max(neighbours) if neighbours else 0.0
        if abs(d) > max(factor * local, floor):
            jumps.append({
                "series": name,
                "t_lo": float(t[k]),
                "t_hi": float(t[k + 1]),
                "size": float(d),
                "direction": 1 if d > 0 else -1,
            })
    return jumps


def discontinuity_scan(econ: Economy, start, end, steps: int = 1000,
                       factor: float = 10.0, floor: float = 1e-9) -> ScanResult:
    """Solve along the segment ``start -> end`` and flag price jumps.

    A step is a jump when it exceeds ``factor`` times the largest of the
    neighbouring steps (and the absolute ``floor``).
    """
    t = np.linspace(0.0, 1.0, steps + 1)
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    ms = start[None, :] + t[:, None] * (end - start)[None, :]
    ms = np.clip(ms, 0.0, 1.0)
    w = np.empty(len(t))
    r = np.empty(len(t))
    regions = []
    for k, m in enumerate(ms):
        eq = solve_general(econ.with_m((m[0], m[1])))
        w[k] = eq.w_star
        r[k] = np.nan if eq.r_star is None else eq.r_star
        regions.append(eq.region)
    jumps = _flag_jumps(t, w, "w_star", factor, floor) + _flag_jumps(t, r, "r_star", factor, floor)
    return ScanResult(t, ms, w, r, regions, jumps)


def _golden_max(fn, lo: float, hi: float, tol: float) -> tuple:
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = fn(x2)
    candidates = [(fn(a), a), (fn(b), b), (f1, x1), (f2, x2)]
    return max(candidates)


def compute_K_coverage_mu(dist: ProblemDist, h, c: float, resolution: int = 400, tol: float = 1e-6,
                          top_k: int = 5) -> float:
    """Smallest compute supply for which ``K`` contains the whole region ``R_b``.

    This is the supremum of ``n(m)`` over the closure of ``R_b``: a grid search
    followed by golden-section refinement along the region's boundary.
    """
    grid = np.linspace(0.0, 1.0, resolution)
    m1, m2 = np.meshgrid(grid, grid, indexing="ij")
    w_s, w_b, w_t = candidate_arrays(dist, h, (m1, m2), c)
    in_rb = w_b > np.maximum(w_s, w_t)
    if not in_rb.any():
        raise ValueError("bottom-automated region is empty on the grid")
    f_m = np.where(in_rb, dist.cdf((m1, m2)), -np.inf)
    flat = np.argsort(f_m, axis=None)[::-1][:top_k]
    step = grid[1] - grid[0]

    def rb(x1, x2):
        s, b, t = candidate_arrays(dist, h, (x1, x2), c)
        return bool(b > max(s, t))

    def edge(fixed_dim, a, centre):
        # largest coordinate in R_b along the free dimension, near ``centre``
        pt = (lambda x: (a, x)) if fixed_dim == 1 else (lambda x: (x, a))
        lo, hi = max(0.0, centre - 3 * step), min(1.0, centre + 3 * step)
        if not rb(*pt(lo)):
            return None
        if rb(*pt(hi)):
            return hi
        while hi - lo > 1e-13:
            mid = 0.5 * (lo + hi)
            if rb(*pt(mid)):
                lo = mid
            else:
                hi = mid
        return lo

    best = float(np.max(f_m))
    for idx in flat:
        i, j = np.unravel_index(idx, f_m.shape)
        if not np.isfinite(f_m[i, j]):
            continue
        c1, c2 = grid[i], grid[j]
        for fixed_dim, centre_fixed, centre_free in ((1, c1, c2), (2, c2, c1)):
            def value(a, fixed_dim=fixed_dim, centre_free=centre_free):
                e = edge(fixed_dim, a, centre_free)
                if e is None:
                    return -np.inf
                pt = (a, e) if fixed_dim == 1 else (e, a)
                return float(dist.cdf(pt))
            lo, hi = max(0.0, centre_fixed - step), min(1.0, centre_fixed + step)
            val, _ = _golden_max(value, lo, hi, tol)
            best = max(best, val)
    return 1.0 / (c * (1.0 - best))
