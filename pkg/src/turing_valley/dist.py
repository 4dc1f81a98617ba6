"""Bivariate problem-difficulty distributions on the unit square.

Every solver only needs three things from a distribution: the joint CDF,
the density, and integrals of the density along one coordinate with the
other coordinate pinned (the partial derivatives of the CDF).  Subclasses
of :class:`ProblemDist` provide those; :class:`ProductPowerDist` is the
built-in family with marginals ``G_i(x) = x ** theta_i``.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError

QUAD_ABS_TOL = 1e-10


def _check_unit(*values) -> None:
    for v in values:
        if isinstance(v, (float, int)):
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"coordinate outside [0, 1]: {v!r}")
            continue
        arr = np.asarray(v, dtype=float)
        if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError(f"coordinate outside [0, 1]: {v!r}")


def join(u: Sequence[float], v: Sequence[float]) -> tuple:
    """Componentwise maximum of two knowledge profiles."""
    return (np.maximum(u[0], v[0]), np.maximum(u[1], v[1]))


def meet(u: Sequence[float], v: Sequence[float]) -> tuple:
    """Componentwise minimum of two knowledge profiles."""
    return (np.minimum(u[0], v[0]), np.minimum(u[1], v[1]))


class ProblemDist(ABC):
    """Distribution of problem difficulty with full support on [0, 1]^2.

    Points are passed as pairs ``(x1, x2)``; each coordinate may be a float
    or a numpy array (broadcast together).
    """

    @abstractmethod
    def cdf(self, x):
        ...

    @abstractmethod
    def density(self, x):
        ...

    def section_integral(self, fixed_dim: int, a: float, lo: float, hi: float) -> float:
        """Integrate the density over ``[lo, hi]`` with dimension ``fixed_dim`` held at ``a``.

        The generic version uses adaptive quadrature; closed-form families
        override it.
        """
        self._check_section(fixed_dim, a, lo, hi)
        if hi == lo:
            return 0.0
        if fixed_dim == 1:
            fn = lambda t: float(self.density((a, t)))
        else:
            fn = lambda t: float(self.density((t, a)))
        val, _ = integrate.quad(fn, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=0.0, limit=200)
        return val

    def union_prob(self, u, v):
        """Probability that at least one of two agents solves a problem alone."""
        return self.cdf(u) + self.cdf(v) - self.cdf(meet(u, v))

    def to_config(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no config form")

    @staticmethod
    def _check_section(fixed_dim, a, lo, hi):
        if fixed_dim not in (1, 2):
            raise DomainError(f"fixed_dim must be 1 or 2, got {fixed_dim!r}")
        _check_unit(a, lo, hi)
        if lo > hi:
            raise DomainError(f"empty interval: lo={lo} > hi={hi}")


@dataclass(frozen=True)
class ProductPowerDist(ProblemDist):
    """Independent coordinates with marginal CDFs ``x ** theta_i``.

    ``theta = (1, 1)`` is the uniform distribution ``F(x) = x1 * x2``.
    """

    theta: tuple = (1.0, 1.0)

    def __post_init__(self):
        theta = tuple(float(t) for t in self.theta)
        if len(theta) != 2 or min(theta) <= 0:
            raise DomainError(f"theta must be two positive numbers, got {self.theta!r}")
        object.__setattr__(self, "theta", theta)

    def marginal_cdf(self, dim: int, x):
        return np.power(x, self.theta[dim - 1])

    def marginal_density(self, dim: int, x):
        t = self.theta[dim - 1]
        if t == 1.0:
            return np.ones_like(np.asarray(x, dtype=float))
        return t * np.power(x, t - 1.0)

    def cdf(self, x):
        x1, x2 = x
        _check_unit(x1, x2)
        return self.marginal_cdf(1, x1) * self.marginal_cdf(2, x2)

    def density(self, x):
        x1, x2 = x
        _check_unit(x1, x2)
        return self.marginal_density(1, x1) * self.marginal_density(2, x2)

    def section_integral(self, fixed_dim: int, a: float, lo: float, hi: float) -> float:
        self._check_section(fixed_dim, a, lo, hi)
        other = 2 if fixed_dim == 1 else 1
        mass = self.marginal_cdf(other, hi) - self.marginal_cdf(other, lo)
        return float(self.marginal_density(fixed_dim, a) * mass)

    def to_config(self) -> dict:
        return {"family": "product_power", "theta": list(self.theta)}


UNIFORM = ProductPowerDist((1.0, 1.0))


def dist_from_config(cfg: dict | None) -> ProblemDist:
    """Build a distribution from ``{"family": "product_power", "theta": [..]}``."""
    if cfg is None:
        return UNIFORM
    family = cfg.get("family", "product_power")
    if family in ("product_power", "uniform"):
        return ProductPowerDist(tuple(cfg.get("theta", (1.0, 1.0))))
    raise DomainError(f"unknown distribution family {family!r}")
