"""Two types of humans sharing one AI, with machines abundant.

Besides working with machines, a type-A human can now work under a type-B
solver (a ``BA`` firm) or solve for type-B workers (an ``AB`` firm).  The
equilibrium depends on the marginal products of each type inside these
all-human firms, evaluated at the other type's outside option.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from .baseline import Region, VertexMax, classify_candidates, labor_max_vertex
from .dist import UNIFORM, ProblemDist, dist_from_config, join
from .econ import Economy, WageCandidates, _as_point, abundance_threshold, span, wage_candidates
from .errors import AbundanceError, DomainError

CASES = ("1", "2a", "2b-i", "2b-ii", "2b-iii", "2c")
ROLES = ("s", "b", "t", "BA_worker", "BA_solver", "AB_worker", "AB_solver")
# type A works in BA firms and solves in AB firms; type B the reverse
_HUMAN_ROLE = {("A", "BA"): "BA_worker", ("B", "BA"): "BA_solver", ("A", "AB"): "AB_solver", ("B", "AB"): "AB_worker"}
VERTICES = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))


@dataclass(frozen=True)
class TwoTypeEconomy:
    """Mass ``phiA`` of type-A humans with knowledge ``hA``; the rest are type B.

    ``mu`` only shifts capital income; when omitted, a supply just above the
    abundance threshold of both types is used.
    """

    hA: tuple
    hB: tuple
    phiA: float
    m: tuple
    c: float
    dist: ProblemDist = field(default=UNIFORM)
    mu: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "hA", _as_point(self.hA, "hA", open_interval=True))
        object.__setattr__(self, "hB", _as_point(self.hB, "hB", open_interval=True))
        object.__setattr__(self, "m", _as_point(self.m, "m"))
        if not 0.0 < self.phiA < 1.0:
            raise DomainError(f"phiA must lie in (0, 1), got {self.phiA!r}")
        if not 0.0 < self.c < 1.0:
            raise DomainError(f"c must lie in (0, 1), got {self.c!r}")
        need = max(abundance_threshold(self.dist, h, self.c) for h in (self.hA, self.hB))
        if self.mu is None:
            object.__setattr__(self, "mu", need + 1.0)
        elif not self.mu > need:
            raise AbundanceError(f"mu={self.mu!r} must exceed the abundance threshold {need:.6g} of both types")

    @property
    def phiB(self) -> float:
        return 1.0 - self.phiA

    def economy(self, kind: str) -> Economy:
        """One-type economy seen by humans of type ``kind``."""
        h = self.hA if kind == "A" else self.hB
        return Economy(h, self.m, self.c, math.inf, True, self.dist)

    def with_m(self, m) -> "TwoTypeEconomy":
        return TwoTypeEconomy(self.hA, self.hB, self.phiA, m, self.c, self.dist, self.mu)

    def to_config(self) -> dict:
        return {
            "hA": list(self.hA),
            "hB": list(self.hB),
            "phiA": self.phiA,
            "m": list(self.m),
            "c": self.c,
            "mu": self.mu,
            "dist": self.dist.to_config(),
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "TwoTypeEconomy":
        return cls(
            hA=tuple(cfg["hA"]),
            hB=tuple(cfg["hB"]),
            phiA=float(cfg["phiA"]),
            m=tuple(cfg["m"]),
            c=float(cfg["c"]),
            dist=dist_from_config(cfg.get("dist")),
            mu=cfg.get("mu"),
        )


class TypeCandidates(NamedTuple):
    A: WageCandidates
    B: WageCandidates

    @property
    def wA(self) -> float:
        return self.A.best

    @property
    def wB(self) -> float:
        return self.B.best


def per_type_candidates(econ2: TwoTypeEconomy) -> TypeCandidates:
    return TypeCandidates(wage_candidates(econ2.economy("A")), wage_candidates(econ2.economy("B")))


class MatchMargins(NamedTuple):
    """Marginal products inside all-human firms at the partner's outside wage.

    ``mBA_A`` is what a type-A worker adds under a type-B solver, and so on.
    """

    mBA_A: float
    mAB_A: float
    mBA_B: float
    mAB_B: float


def _spans(econ2: TwoTypeEconomy) -> tuple:
    return span(econ2.hA, econ2.economy("A")), span(econ2.hB, econ2.economy("B"))


def match_margins(econ2: TwoTypeEconomy, cands: Optional[TypeCandidates] = None) -> MatchMargins:
    cands = cands or per_type_candidates(econ2)
    n_a, n_b = _spans(econ2)
    f_joint = float(econ2.dist.cdf(join(econ2.hA, econ2.hB)))
    w_a, w_b = cands.wA, cands.wB
    return MatchMargins(
        mBA_A=f_joint - w_b / n_a,
        mAB_A=n_b * (f_joint - w_b),
        mBA_B=n_a * (f_joint - w_a),
        mAB_B=f_joint - w_a / n_b,
    )


@dataclass(frozen=True)
class TwoTypeEquilibrium:
    """Wages, rental rate and per-type allocation across roles.

    ``allocation[k][role]`` is the mass of type ``k`` in each role: ``s``
    (alone), ``b`` (solver for machines), ``t`` (worker under a machine) and
    the worker and solver seats of all-human ``BA`` and ``AB`` firms.
    """

    wA: float
    wB: float
    r_star: float
    total_w: float
    case: str
    allocation: dict
    machines: dict
    output: float
    regions: dict

    @property
    def touches_machines(self) -> bool:
        return any(self.allocation[k][r] > 0 for k in "AB" for r in ("b", "t"))

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "wA": self.wA,
            "wB": self.wB,
            "r_star": self.r_star,
            "total_w": self.total_w,
            "output": self.output,
            "allocation": self.allocation,
            "machines": self.machines,
            "regions": {k: v.value for k, v in self.regions.items()},
        }


def _place_rest(alloc: dict, kind: str, mass: float, region: Region) -> None:
    role = {Region.Rs: "s", Region.Rb: "b", Region.Rt: "t"}[region]
    alloc[kind][role] += mass


def _classify_case(econ2: TwoTypeEconomy, mm: MatchMargins, cands: TypeCandidates, n_a: float, n_b: float):
    if max(mm.mBA_A, mm.mAB_A) <= cands.wA:
        return "1"
    phi_a = econ2.phiA
    if phi_a <= 1.0 / (1.0 + n_b):
        return "2a"
    if phi_a >= n_a / (1.0 + n_a):
        return "2c"
    if mm.mAB_A <= mm.mBA_A and mm.mAB_B <= mm.mBA_B:
        return "2b-i"
    if mm.mBA_A <= mm.mAB_A and mm.mBA_B <= mm.mAB_B:
        return "2b-ii"
    return "2b-iii"


def solve_two_type(econ2: TwoTypeEconomy) -> TwoTypeEquilibrium:
    return solve_two_type_from_candidates(econ2, per_type_candidates(econ2))


def solve_two_type_from_candidates(econ2: TwoTypeEconomy, cands: TypeCandidates) -> TwoTypeEquilibrium:
    mm = match_margins(econ2, cands)
    n_a, n_b = _spans(econ2)
    phi_a, phi_b = econ2.phiA, econ2.phiB
    regions = {"A": classify_candidates(cands.A), "B": classify_candidates(cands.B)}
    alloc = {k: dict.fromkeys(ROLES, 0.0) for k in "AB"}
    case = _classify_case(econ2, mm, cands, n_a, n_b)

    if case == "1":
        w_a, w_b = cands.wA, cands.wB
        _place_rest(alloc, "A", phi_a, regions["A"])
        _place_rest(alloc, "B", phi_b, regions["B"])
    elif case in ("2a", "2c"):
        scarce, other = ("A", "B") if case == "2a" else ("B", "A")
        phi_s = phi_a if scarce == "A" else phi_b
        phi_o = phi_b if scarce == "A" else phi_a
        ba, ab = (mm.mBA_A, mm.mAB_A) if scarce == "A" else (mm.mBA_B, mm.mAB_B)
        wage = max(ba, ab)
        if scarce == "A":
            w_a, w_b = wage, cands.wB
        else:
            w_a, w_b = cands.wA, wage
        if ba >= ab:
            # scarce type takes its BA role; partners per head follow the span
            alloc[scarce][_HUMAN_ROLE[scarce, "BA"]] = phi_s
            partners = phi_s / n_a if scarce == "A" else phi_s * n_a
            alloc[other][_HUMAN_ROLE[other, "BA"]] = partners
        else:
            alloc[scarce][_HUMAN_ROLE[scarce, "AB"]] = phi_s
            partners = phi_s * n_b if scarce == "A" else phi_s / n_b
            alloc[other][_HUMAN_ROLE[other, "AB"]] = partners
        _place_rest(alloc, other, phi_o - partners, regions[other])
    elif case == "2b-i":
        w_a, w_b = mm.mBA_A, cands.wB
        alloc["A"]["BA_worker"] = phi_a
        alloc["B"]["BA_solver"] = phi_a / n_a
        _place_rest(alloc, "B", phi_b - phi_a / n_a, regions["B"])
    elif case == "2b-ii":
        w_a, w_b = cands.wA, mm.mAB_B
        alloc["B"]["AB_worker"] = phi_b
        alloc["A"]["AB_solver"] = phi_b / n_b
        _place_rest(alloc, "A", phi_a - phi_b / n_b, regions["A"])
    else:
        denom = n_a * n_b - 1.0
        w_a = cands.wA + (n_b / denom) * (mm.mBA_B - mm.mAB_B)
        w_b = cands.wB + (n_a / denom) * (mm.mAB_A - mm.mBA_A)
        a_ba = (n_a / denom) * (n_b * phi_a - phi_b)
        b_ab = (n_b / denom) * (n_a * phi_b - phi_a)
        alloc["A"]["BA_worker"] = a_ba
        alloc["A"]["AB_solver"] = phi_a - a_ba
        alloc["B"]["AB_worker"] = b_ab
        alloc["B"]["BA_solver"] = phi_b - b_ab

    f_m = float(econ2.dist.cdf(econ2.m))
    n_m = span(econ2.m, econ2.economy("A"))
    machines = {
        k: {
            "b": alloc[k]["b"] * n_m if alloc[k]["b"] else 0.0,
            "t": alloc[k]["t"] / (n_a if k == "A" else n_b),
        }
        for k in "AB"
    }
    machines["s"] = econ2.mu - sum(machines[k]["b"] + machines[k]["t"] for k in "AB")
    total_w = phi_a * w_a + phi_b * w_b
    return TwoTypeEquilibrium(
        wA=w_a,
        wB=w_b,
        r_star=f_m,
        total_w=total_w,
        case=case,
        allocation=alloc,
        machines=machines,
        output=econ2.mu * f_m + total_w,
        regions=regions,
    )


def output_from_allocation(econ2: TwoTypeEconomy, eq: TwoTypeEquilibrium) -> float:
    """Total output added up firm by firm."""
    dist = econ2.dist
    f_m = float(dist.cdf(econ2.m))
    f_joint = float(dist.cdf(join(econ2.hA, econ2.hB)))
    n_m = span(econ2.m, econ2.economy("A"))
    y = eq.machines["s"] * f_m
    for k, h in (("A", econ2.hA), ("B", econ2.hB)):
        e = float(dist.cdf(join(econ2.m, h)))
        a = eq.allocation[k]
        y += a["s"] * float(dist.cdf(h)) + a["t"] * e
        if a["b"]:
            y += a["b"] * n_m * e
    # one unit of output per solved problem, counted once per worker
    y += (eq.allocation["A"]["BA_worker"] + eq.allocation["B"]["AB_worker"]) * f_joint
    return y


def per_type_labor_max(econ2: TwoTypeEconomy, kind: str) -> VertexMax:
    h = econ2.hA if kind == "A" else econ2.hB
    return labor_max_vertex(econ2.dist, h, econ2.c)


@dataclass(frozen=True)
class LaborSurface:
    m1: np.ndarray
    m2: np.ndarray
    wA: np.ndarray
    wB: np.ndarray
    total_w: np.ndarray
    case: np.ndarray
    in_Rh: np.ndarray


def total_labor_surface(econ2: TwoTypeEconomy, resolution=200) -> LaborSurface:
    """Solve on a ``resolution`` (or ``(n1, n2)``) grid over ``[0, 1]^2``.

    ``in_Rh`` marks cells where no human works with a machine.
    """
    n1, n2 = (resolution, resolution) if np.isscalar(resolution) else resolution
    g1 = np.linspace(0.0, 1.0, n1)
    g2 = np.linspace(0.0, 1.0, n2)
    shape = (n1, n2)
    wa, wb, tw = np.empty(shape), np.empty(shape), np.empty(shape)
    case = np.empty(shape, dtype=object)
    rh = np.empty(shape, dtype=bool)
    for i, x in enumerate(g1):
        for j, y in enumerate(g2):
            eq = solve_two_type(econ2.with_m((x, y)))
            wa[i, j], wb[i, j], tw[i, j] = eq.wA, eq.wB, eq.total_w
            case[i, j] = eq.case
            rh[i, j] = not eq.touches_machines
    m1, m2 = np.meshgrid(g1, g2, indexing="ij")
    return LaborSurface(m1, m2, wa, wb, tw, case, rh)


@dataclass(frozen=True)
class LaborMax:
    argmax: tuple
    value: float
    is_vertex: bool
    vertex_values: dict


def find_max_total_labor(econ2: TwoTypeEconomy, resolution: int = 200, top_k: int = 5,
                         xatol: float = 1e-7) -> LaborMax:
    """Global maximizer of total labor income over machine knowledge.

    Coarse grid, then bounded Nelder-Mead from the best ``top_k`` cells.  The
    four corners are always candidates; ties resolve to the lexicographically
    smallest ``m``.
    """
    total = lambda m: solve_two_type(econ2.with_m((float(m[0]), float(m[1])))).total_w
    surf = total_labor_surface(econ2, resolution)
    vertex_values = {v: total(v) for v in VERTICES}
    candidates = [(val, v) for v, val in vertex_values.items()]
    order = np.argsort(-surf.total_w, axis=None, kind="stable")[:top_k]
    for idx in order:
        i, j = np.unravel_index(idx, surf.total_w.shape)
        x0 = np.array([surf.m1[i, j], surf.m2[i, j]])
        candidates.append((float(surf.total_w[i, j]), (float(x0[0]), float(x0[1]))))
        res = optimize.minimize(
            lambda m: -total(np.clip(m, 0.0, 1.0)),
            x0,
            method="Nelder-Mead",
            bounds=[(0.0, 1.0), (0.0, 1.0)],
            options={"xatol": xatol, "fatol": 1e-13, "maxiter": 4000},
        )
        m = np.clip(res.x, 0.0, 1.0)
        candidates.append((total(m), (float(m[0]), float(m[1]))))
    best_val = max(val for val, _ in candidates)
    best_m = min(m for val, m in candidates if val == best_val)
    is_vertex = any(max(abs(best_m[0] - v[0]), abs(best_m[1] - v[1])) <= 1e-6 for v in VERTICES)
    return LaborMax(best_m, best_val, is_vertex, vertex_values)
