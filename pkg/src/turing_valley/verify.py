"""Seeded random instances and the verification suites run by ``verify``.

Each suite returns a :class:`SuiteReport` with the worst residual and the
failing instances.  ``fault`` raises every bottom-automated wage candidate
before solving, which must make the welfare suite fail.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baseline import Region, classify_candidates, mpl_gradient, solve_from_candidates
from .dist import UNIFORM
from .econ import Economy, WageCandidates, abundance_threshold, span_value, wage_candidates
from .general import GeneralRegion, _flag_jumps, in_K, solve_general, solve_general_from_candidates
from .oracle import fd_gradient, max_output_one_type, max_output_two_type
from .twotype import CASES, TwoTypeEconomy, TypeCandidates, per_type_candidates, solve_two_type, solve_two_type_from_candidates

WELFARE_RTOL = 1e-8
GRADIENT_RTOL = 1e-5
FD_STEP = 1e-5
GENERAL_BRANCHES = (GeneralRegion.Rs, GeneralRegion.Rt, GeneralRegion.RbK, GeneralRegion.RbMixed, GeneralRegion.RbScarce)
MAX_DRAWS = 200_000


@dataclass
class SuiteReport:
    name: str
    checked: int = 0
    max_residual: float = 0.0
    failures: list = field(default_factory=list)
    coverage: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, residual: float, ok: bool, detail) -> None:
        self.checked += 1
        if np.isfinite(residual):
            self.max_residual = max(self.max_residual, residual)
        if not ok:
            self.failures.append(detail)

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "max_residual": self.max_residual,
            "failures": self.failures[:10],
            "n_failures": len(self.failures),
            "coverage": self.coverage,
            "warnings": self.warnings,
        }


def _faulty(wc: WageCandidates, fault: float) -> WageCandidates:
    return WageCandidates(wc.w_s, wc.w_b + fault, wc.w_t) if fault else wc


def _point(rng, lo=0.0, hi=1.0) -> tuple:
    return (float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi)))


def random_economy(rng, regime: str = "abundant", synergy: bool = True) -> Economy:
    """Uniform draws of ``h``, ``m`` and ``c`` with compute in one of three regimes.

    ``scarce`` puts ``mu`` below ``1/c`` so two-layer demand often binds,
    ``intermediate`` spans up to the abundance threshold and ``abundant``
    lies above it.
    """
    h = _point(rng, 0.02, 0.98)
    m = _point(rng)
    c = float(rng.uniform(0.05, 0.95))
    lo = 1.0 / span_value(UNIFORM, h, c)
    top = abundance_threshold(UNIFORM, h, c)
    if regime == "scarce":
        mu = float(rng.uniform(lo, max(lo, 1.0 / c) * 1.05))
    elif regime == "intermediate":
        mu = float(rng.uniform(lo, top))
    else:
        mu = float(top * rng.uniform(1.01, 3.0))
    return Economy(h, m, c, mu, synergy, UNIFORM)


def random_two_type(rng) -> TwoTypeEconomy:
    return TwoTypeEconomy(
        _point(rng, 0.02, 0.98),
        _point(rng, 0.02, 0.98),
        float(rng.uniform(0.02, 0.98)),
        _point(rng),
        float(rng.uniform(0.05, 0.95)),
    )


def _stratified(n: int, labels, draw, label_of) -> list:
    """``n`` draws spread as evenly as possible across ``labels``."""
    if n <= 0:
        return []
    quota = {lab: n // len(labels) + (1 if i < n % len(labels) else 0) for i, lab in enumerate(labels)}
    out = []
    for _ in range(MAX_DRAWS):
        if not any(quota.values()):
            break
        item = draw()
        lab = label_of(item)
        if quota.get(lab, 0) > 0:
            quota[lab] -= 1
            out.append(item)
    else:
        raise RuntimeError(f"could not fill strata: {quota}")
    return out


def baseline_instances(n: int, seed: int) -> list:
    rng = np.random.default_rng([seed, 1])
    return _stratified(
        n, tuple(Region), lambda: random_economy(rng, "abundant", bool(rng.integers(2))),
        lambda e: classify_candidates(wage_candidates(e)),
    )


def general_instances(n: int, seed: int) -> list:
    rng = np.random.default_rng([seed, 2])
    regimes = ("scarce", "intermediate", "abundant")
    return _stratified(
        n, GENERAL_BRANCHES, lambda: random_economy(rng, regimes[int(rng.integers(3))]),
        lambda e: solve_general(e).region,
    )


def two_type_instances(n: int, seed: int) -> list:
    rng = np.random.default_rng([seed, 3])
    return _stratified(n, CASES, lambda: random_two_type(rng), lambda e: solve_two_type(e).case)


def _welfare_ok(y_solver, y_oracle) -> tuple:
    resid = abs(y_solver - y_oracle) / max(1.0, abs(y_oracle))
    return resid, resid <= WELFARE_RTOL


def welfare_suite(n: int = 200, seed: int = 0, fault: float = 0.0) -> list:
    """Solver output against direct output maximization, per solver."""
    reports = []
    rep = SuiteReport("welfare/baseline")
    for e in baseline_instances(n, seed):
        eq = solve_from_candidates(e, _faulty(wage_candidates(e), fault))
        resid, ok = _welfare_ok(eq.output, max_output_one_type(e).output)
        rep.record(resid, ok, e.to_config())
        rep.coverage[eq.region.value] = rep.coverage.get(eq.region.value, 0) + 1
    reports.append(rep)

    rep = SuiteReport("welfare/general")
    for e in general_instances(n, seed):
        eq = solve_general_from_candidates(e, _faulty(wage_candidates(e), fault))
        resid, ok = _welfare_ok(eq.output, max_output_one_type(e).output)
        rep.record(resid, ok, e.to_config())
        rep.coverage[eq.region.value] = rep.coverage.get(eq.region.value, 0) + 1
    reports.append(rep)

    rep = SuiteReport("welfare/two-type")
    for e in two_type_instances(n, seed):
        cands = per_type_candidates(e)
        eq = solve_two_type_from_candidates(e, TypeCandidates(_faulty(cands.A, fault), _faulty(cands.B, fault)))
        resid, ok = _welfare_ok(eq.output, max_output_two_type(e).output)
        rep.record(resid, ok, e.to_config())
        rep.coverage[eq.case] = rep.coverage.get(eq.case, 0) + 1
    reports.append(rep)

    for r in reports:
        if r.checked == 0:
            r.warnings.append("no instances checked")
    return reports


def _baseline_w(econ: Economy):
    return lambda m: wage_candidates(econ.with_m(m)).best


def gradient_points(n: int, seed: int, synergy: bool = True, margin: float = 1e-3) -> list:
    """Interior points of the two-layer regions, away from kinks and ``m_j = 0``."""
    rng = np.random.default_rng([seed, 4, int(synergy)])
    out = []
    for _ in range(MAX_DRAWS):
        if len(out) >= n:
            break
        e = random_economy(rng, "abundant", synergy)
        wc = wage_candidates(e)
        if classify_candidates(wc) is Region.Rs:
            continue
        top = sorted(wc.as_tuple(), reverse=True)
        if top[0] - top[1] < margin or min(e.m) < 0.05 or max(e.m) > 1 - margin:
            continue
        if any(abs(mi - hi) < margin for mi, hi in zip(e.m, e.h)):
            continue
        out.append(e)
    return out


def _strict_sign_ok(g: float, e: Economy, i: int) -> bool:
    return g > 0 if e.m[i] > e.h[i] else g < 0


def _weak_sign_ok(g: float, e: Economy, i: int) -> bool:
    # without synergy the signs are weak: >= 0 above h_i, <= 0 below when m_j <= h_j
    mi, hi, mj, hj = e.m[i], e.h[i], e.m[1 - i], e.h[1 - i]
    if mi > hi:
        return g >= 0
    if mj <= hj:
        return g <= 0
    return True


def gradient_suite(n: int = 100, seed: int = 0) -> list:
    reports = []
    for synergy in (True, False):
        grad_rep = SuiteReport(f"gradient/{'synergy' if synergy else 'no-synergy'}")
        sign_rep = SuiteReport(f"sign/{'synergy' if synergy else 'no-synergy'}")
        for e in gradient_points(n, seed, synergy):
            analytic = mpl_gradient(e)
            fd = fd_gradient(_baseline_w(e), e.m, FD_STEP).grad
            for i in range(2):
                resid = abs(analytic[i] - fd[i]) / max(abs(analytic[i]), 1e-8)
                grad_rep.record(resid, resid <= GRADIENT_RTOL, {"m": e.m, "h": e.h, "c": e.c, "i": i + 1})
                ok = (_strict_sign_ok if synergy else _weak_sign_ok)(analytic[i], e, i)
                sign_rep.record(0.0, ok, {"m": e.m, "h": e.h, "c": e.c, "i": i + 1, "grad": analytic[i]})
        reports += [grad_rep, sign_rep]
    return reports


def _crosses_K_in_Rb(econ: Economy, m_lo, m_hi) -> bool:
    lo, hi = econ.with_m(m_lo), econ.with_m(m_hi)
    rb = lambda x: classify_candidates(wage_candidates(x)) is Region.Rb
    return rb(lo) and rb(hi) and in_K(lo) != in_K(hi)


def continuity_suite(n: int = 60, seed: int = 0, steps: int = 400) -> list:
    """Price scans along random segments.

    Every flagged jump must sit where the segment leaves or enters ``K``
    inside the bottom-automated region; jumps anywhere else fail.
    """
    rng = np.random.default_rng([seed, 5])
    reports = []
    for label, regime in (("continuity/baseline", "abundant"), ("continuity/general", "intermediate")):
        rep = SuiteReport(label)
        crossings = {}
        for _ in range(n):
            e = random_economy(rng, regime)
            start, end = np.array(_point(rng)), np.array(_point(rng))
            t = np.linspace(0.0, 1.0, steps + 1)
            ms = start[None, :] + t[:, None] * (end - start)[None, :]
            solver = solve_general
            eqs = [solver(e.with_m((float(a), float(b)))) for a, b in ms]
            w = np.array([q.w_star for q in eqs])
            regions = [q.region for q in eqs]
            for a, b in zip(regions, regions[1:]):
                if a != b:
                    key = "/".join(sorted((a.value, b.value)))
                    crossings[key] = crossings.get(key, 0) + 1
            jumps = _flag_jumps(t, w, "w_star", 10.0, 1e-9)
            bad = []
            for j in jumps:
                k = int(round(j["t_lo"] * steps))
                if not _crosses_K_in_Rb(e, tuple(ms[k]), tuple(ms[k + 1])):
                    bad.append(j)
            rep.record(max((abs(j["size"]) for j in bad), default=0.0), not bad,
                       {"economy": e.to_config(), "start": start.tolist(), "end": end.tolist(), "jumps": bad})
        rep.coverage = dict(sorted(crossings.items()))
        reports.append(rep)
    return reports


def two_type_sign_suite(econ2: TwoTypeEconomy, resolution: int = 41, step: float = 1e-5,
                        margin: float = 1e-3) -> SuiteReport:
    """Signs of total labor income slopes on a grid.

    A cell counts as differentiable when the central difference agrees with
    both one-sided differences.  Cells with ``m_j`` near zero, and cells
    where no human works with machines anywhere on the stencil, are skipped.
    """
    rep = SuiteReport("sign/two-type")
    lo_h = [min(econ2.hA[i], econ2.hB[i]) for i in range(2)]
    hi_h = [max(econ2.hA[i], econ2.hB[i]) for i in range(2)]
    solve = lambda m: solve_two_type(econ2.with_m(m))
    grid = np.linspace(0.0, 1.0, resolution)
    skipped = in_rh = 0
    for x in grid:
        for y in grid:
            m = (float(x), float(y))
            for i in range(2):
                if m[1 - i] < margin or not margin <= m[i] <= 1 - margin:
                    continue
                if m[i] < lo_h[i] - margin:
                    expected = -1
                elif m[i] > hi_h[i] + margin:
                    expected = 1
                else:
                    continue
                up, dn = list(m), list(m)
                up[i] += step
                dn[i] -= step
                stencil = [solve(m), solve(tuple(up)), solve(tuple(dn))]
                if not any(q.touches_machines for q in stencil):
                    # nobody works with machines: slopes vanish and no sign is implied
                    in_rh += 1
                    continue
                f0, fu, fd = (q.total_w for q in stencil)
                right, left = (fu - f0) / step, (f0 - fd) / step
                if abs(right - left) > 1e-4 * max(1.0, abs(right)):
                    skipped += 1
                    continue
                g = 0.5 * (right + left)
                ok = g < 0 if expected == -1 else g > 0
                rep.record(0.0, ok, {"m": m, "i": i + 1, "grad": g})
    rep.coverage = {"checked": rep.checked, "skipped_nondifferentiable": skipped, "skipped_no_machines": in_rh}
    if rep.checked == 0:
        rep.warnings.append("no differentiable cells checked")
    return rep


def run_all(n: int = 200, seed: int = 0, fault: float = 0.0) -> list:
    """Every suite; ``n`` instances for welfare, ``n // 2`` for gradients."""
    reports = welfare_suite(n, seed, fault)
    if n > 0:
        reports += gradient_suite(max(1, n // 2), seed)
        reports += continuity_suite(max(1, n // 10), seed)
        fig = TwoTypeEconomy((0.375, 0.475), (0.625, 0.725), 0.8, (0.5, 0.5), 0.5)
        reports.append(two_type_sign_suite(fig))
    return reports
