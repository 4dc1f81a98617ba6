"""Economy primitives: spans, firm profits, wage candidates, abundance."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist import UNIFORM, ProblemDist, dist_from_config, join
from .errors import DomainError

FIRM_TYPES = ("s-nonauto", "s-auto", "b", "t")


def _as_point(k: Sequence[float], name: str, open_interval: bool = False) -> tuple:
    if len(k) != 2:
        raise DomainError(f"{name} must have two components, got {k!r}")
    pt = (float(k[0]), float(k[1]))
    for v in pt:
        if open_interval and not 0.0 < v < 1.0:
            raise DomainError(f"{name} must lie in (0, 1)^2, got {k!r}")
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1]^2, got {k!r}")
    return pt


@dataclass(frozen=True)
class Economy:
    """One-type economy: human knowledge ``h``, machine knowledge ``m``,
    communication cost ``c`` and compute supply ``mu``.

    ``synergy=False`` switches to the model where humans and machines cannot
    pool knowledge and a problem is solved only if one of them solves it alone.
    """

    h: tuple
    m: tuple
    c: float
    mu: float = math.inf
    synergy: bool = True
    dist: ProblemDist = field(default=UNIFORM)

    def __post_init__(self):
        object.__setattr__(self, "h", _as_point(self.h, "h", open_interval=True))
        object.__setattr__(self, "m", _as_point(self.m, "m"))
        if not 0.0 < self.c < 1.0:
            raise DomainError(f"c must lie in (0, 1), got {self.c!r}")
        if not self.mu > 0.0:
            raise DomainError(f"mu must be positive, got {self.mu!r}")

    def with_m(self, m) -> "Economy":
        return Economy(self.h, m, self.c, self.mu, self.synergy, self.dist)

    def with_mu(self, mu: float) -> "Economy":
        return Economy(self.h, self.m, self.c, mu, self.synergy, self.dist)

    def to_config(self) -> dict:
        return {
            "h": list(self.h),
            "m": list(self.m),
            "c": self.c,
            "mu": self.mu,
            "synergy": self.synergy,
            "dist": self.dist.to_config(),
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "Economy":
        return cls(
            h=tuple(cfg["h"]),
            m=tuple(cfg["m"]),
            c=float(cfg["c"]),
            mu=float(cfg.get("mu", math.inf)),
            synergy=bool(cfg.get("synergy", True)),
            dist=dist_from_config(cfg.get("dist")),
        )


@dataclass(frozen=True)
class WageCandidates:
    """Highest zero-profit wages of single-layer, bottom- and top-automated firms."""

    w_s: float
    w_b: float
    w_t: float

    @property
    def best(self) -> float:
        return max(self.w_s, self.w_b, self.w_t)

    def as_tuple(self) -> tuple:
        return (self.w_s, self.w_b, self.w_t)


def span_value(dist: ProblemDist, k, c: float):
    """``1 / (c (1 - F(k)))``; ``inf`` where ``F(k) = 1``. Works on arrays."""
    gap = 1.0 - dist.cdf(k)
    if np.ndim(gap) == 0:
        return 1.0 / (c * float(gap)) if gap > 0.0 else math.inf
    with np.errstate(divide="ignore"):
        out = np.where(gap > 0.0, 1.0 / (c * np.where(gap > 0.0, gap, 1.0)), np.inf)
    return float(out) if np.ndim(out) == 0 else out


def span(k, econ: Economy) -> float:
    """Producers one solver with knowledge ``k`` can assist.

    Returns ``math.inf`` when ``F(k) = 1``: such agents never need help.
    """
    return span_value(econ.dist, k, econ.c)


def success_prob(dist: ProblemDist, h, m, synergy: bool = True):
    """Probability that a human-machine pair solves a problem."""
    if synergy:
        return dist.cdf(join(m, h))
    return dist.union_prob(m, h)


def effective_success(econ: Economy) -> float:
    return float(success_prob(econ.dist, econ.h, econ.m, econ.synergy))


def candidate_arrays(dist: ProblemDist, h, m, c: float, synergy: bool = True):
    """Vectorised wage candidates over arrays of machine knowledge ``m = (m1, m2)``.

    Returns ``(w_s, w_b, w_t)`` broadcast to the shape of ``m``.
    """
    f_h = dist.cdf(h)
    f_m = dist.cdf(m)
    e = success_prob(dist, h, m, synergy)
    n_m = span_value(dist, m, c)
    n_h = span_value(dist, h, c)
    gain = np.maximum(e - f_m, 0.0)
    # F(m) = 1 makes the gain identically zero; take the 0 * inf limit as 0.
    with np.errstate(invalid="ignore"):
        w_b = np.where(np.isinf(n_m), 0.0, n_m * gain)
    w_t = e - f_m / n_h
    w_s = np.broadcast_to(f_h, np.shape(w_b))
    return w_s, w_b, w_t


def wage_candidates(econ: Economy) -> WageCandidates:
    dist = econ.dist
    f_h = float(dist.cdf(econ.h))
    f_m = float(dist.cdf(econ.m))
    e = effective_success(econ)
    n_m = span_value(dist, econ.m, econ.c)
    n_h = span_value(dist, econ.h, econ.c)
    # E >= F(m) always; clamp roundoff in the no-synergy difference
    w_b = 0.0 if math.isinf(n_m) else n_m * max(e - f_m, 0.0)
    return WageCandidates(f_h, w_b, e - f_m / n_h)


def profit(firm_type: str, econ: Economy, w: float, r: float) -> float:
    """Profit of one firm of the given type at wage ``w`` and rental ``r``."""
    if w < 0 or r < 0:
        raise DomainError("prices must be nonnegative")
    dist = econ.dist
    if firm_type == "s-nonauto":
        return float(dist.cdf(econ.h)) - w
    if firm_type == "s-auto":
        return float(dist.cdf(econ.m)) - r
    e = effective_success(econ)
    if firm_type == "b":
        n_m = span(econ.m, econ)
        if math.isinf(n_m):
            # no machine ever escalates; the firm cannot employ its solver usefully
            return -w if e - r == 0 else math.copysign(math.inf, e - r)
        return n_m * (e - r) - w
    if firm_type == "t":
        return span(econ.h, econ) * (e - w) - r
    raise DomainError(f"unknown firm type {firm_type!r}; expected one of {FIRM_TYPES}")


def abundance_threshold(dist: ProblemDist, h, c: float) -> float:
    """Compute supply above which machines are abundant for any ``m``."""
    return max(span_value(dist, (1.0, h[1]), c), span_value(dist, (h[0], 1.0), c))


def abundance_holds(econ: Economy) -> bool:
    return econ.mu > abundance_threshold(econ.dist, econ.h, econ.c)
