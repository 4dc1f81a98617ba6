"""Output maximization solved directly, for cross-checking the closed forms.

Competitive equilibria here maximize total output, so an equilibrium can be
verified by maximizing output over feasible allocations and comparing.  Both
programs have two free variables; their optimum is found by enumerating the
vertices of the feasible polygon.  Objectives are assembled from firm
outputs and spans, never from the solvers' wage formulas.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable, NamedTuple

import numpy as np

from .dist import join
from .econ import Economy, span, success_prob

FEAS_TOL = 1e-12


class LPSolution(NamedTuple):
    value: float
    x: tuple
    active_residual: float


def enumerate_vertices(rows, rhs, objective, const: float = 0.0) -> LPSolution:
    """Maximize ``const + objective . x`` over ``{x in R^2 : rows @ x <= rhs}``.

    The region must be a nonempty bounded polygon.
    """
    rows = np.asarray(rows, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    objective = np.asarray(objective, dtype=float)
    best = None
    for i, j in itertools.combinations(range(len(rows)), 2):
        a = rows[[i, j]]
        if abs(np.linalg.det(a)) < 1e-14:
            continue
        x = np.linalg.solve(a, rhs[[i, j]])
        slack = rows @ x - rhs
        scale = 1.0 + np.abs(rhs)
        if np.any(slack > FEAS_TOL * scale):
            continue
        val = const + float(objective @ x)
        resid = float(np.max(np.abs(slack[[i, j]])))
        if best is None or val > best.value:
            best = LPSolution(val, (float(x[0]), float(x[1])), resid)
    if best is None:
        raise ValueError("feasible polygon has no vertices")
    return best


class OneTypeOptimum(NamedTuple):
    output: float
    alpha: tuple
    mu_alloc: tuple


def max_output_one_type(econ: Economy) -> OneTypeOptimum:
    """Largest total output over allocations of humans ``(s, b, t)`` and machines.

    Variables are the masses of humans in bottom- and top-automated firms;
    the rest work alone and leftover machines produce alone.
    """
    dist = econ.dist
    f_h = float(dist.cdf(econ.h))
    f_m = float(dist.cdf(econ.m))
    e = float(success_prob(dist, econ.h, econ.m, econ.synergy))
    n_m = span(econ.m, econ)
    n_h = span(econ.h, econ)
    mu = econ.mu
    if math.isinf(mu):
        raise ValueError("output is unbounded for infinite compute")

    # per human moved out of independent production:
    #   b firm: n(m) machines leave solo work, output n(m) * E
    #   t firm: 1/n(h) machines leave solo work, output E
    if math.isinf(n_m):
        gain_b, use_b = 0.0, None
    else:
        gain_b = n_m * e - n_m * f_m - f_h
        use_b = n_m
    gain_t = e - f_m / n_h - f_h
    const = mu * f_m + f_h

    rows = [[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]]
    rhs = [0.0, 0.0, 1.0]
    if use_b is None:
        rows.append([1.0, 0.0])
        rhs.append(0.0)
        rows.append([0.0, 1.0 / n_h])
    else:
        rows.append([use_b, 1.0 / n_h])
    rhs.append(mu)
    sol = enumerate_vertices(rows, rhs, [gain_b, gain_t], const)
    a_b, a_t = sol.x
    a_b, a_t = max(a_b, 0.0), max(a_t, 0.0)
    mu_b = a_b * n_m if a_b else 0.0
    mu_t = a_t / n_h
    return OneTypeOptimum(sol.value, (1.0 - a_b - a_t, a_b, a_t), (mu - mu_b - mu_t, mu_b, mu_t))


class TwoTypeOptimum(NamedTuple):
    output: float
    alpha_BA_A: float
    alpha_AB_B: float


def _unmatched_value(econ2, kind: str) -> float:
    """Output added by one type-``kind`` human left to work with machines or alone."""
    econ = econ2.economy(kind).with_mu(1.0)
    # with one human of mass 1 the program is linear in mu; subtract the solo machines
    big = max(econ2.mu, 1.0) + 1e3
    opt = max_output_one_type(econ.with_mu(big))
    return opt.output - big * float(econ2.dist.cdf(econ2.m))


def max_output_two_type(econ2) -> TwoTypeOptimum:
    """Largest total output when humans may also pair with each other.

    ``alpha_BA_A`` counts type-A workers under type-B solvers and
    ``alpha_AB_B`` type-B workers under type-A solvers.  Resource use is
    bounded by each type's mass (the inequality form of the matching constraints).
    """
    dist = econ2.dist
    v_a = _unmatched_value(econ2, "A")
    v_b = _unmatched_value(econ2, "B")
    n_a = span(econ2.hA, econ2.economy("A"))
    n_b = span(econ2.hB, econ2.economy("B"))
    f_joint = float(dist.cdf(join(econ2.hA, econ2.hB)))
    phi_a, phi_b = econ2.phiA, econ2.phiB
    f_m = float(dist.cdf(econ2.m))
    const = econ2.mu * f_m + phi_a * v_a + phi_b * v_b
    # a BA firm per A worker produces F(hA v hB), pulling 1/n(hA) B solvers
    gain_ba = f_joint - v_a - v_b / n_a
    gain_ab = f_joint - v_b - v_a / n_b
    rows = [[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0 / n_b], [1.0 / n_a, 1.0]]
    rhs = [0.0, 0.0, phi_a, phi_b]
    sol = enumerate_vertices(rows, rhs, [gain_ba, gain_ab], const)
    return TwoTypeOptimum(sol.value, max(sol.x[0], 0.0), max(sol.x[1], 0.0))


class FDGradient(NamedTuple):
    grad: tuple
    one_sided: tuple


def fd_gradient(f: Callable, m, step: float = 1e-5) -> FDGradient:
    """Central-difference gradient of ``f`` over ``[0, 1]^2``.

    Components whose stencil leaves the square fall back to one-sided
    differences and are flagged in ``one_sided``.
    """
    m = (float(m[0]), float(m[1]))
    grad, flags = [], []
    for i in range(2):
        up = list(m)
        dn = list(m)
        if m[i] - step < 0.0:
            up[i] += step
            grad.append((f(tuple(up)) - f(m)) / step)
            flags.append(True)
        elif m[i] + step > 1.0:
            dn[i] -= step
            grad.append((f(m) - f(tuple(dn))) / step)
            flags.append(True)
        else:
            up[i] += step
            dn[i] -= step
            grad.append((f(tuple(up)) - f(tuple(dn))) / (2.0 * step))
            flags.append(False)
    return FDGradient(tuple(grad), tuple(flags))
