import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from turing_valley.baseline import (
    Region,
    classify,
    income_gap,
    labor_max_thresholds,
    labor_max_vertex,
    lower_h2,
    mpl_gradient,
    output_from_allocation,
    solve_baseline,
    straight_path,
    stronger_in_dim2,
    trajectory,
    upper_h2,
    vertex_incomes,
)
from turing_valley.dist import UNIFORM, ProductPowerDist
from turing_valley.econ import Economy, abundance_threshold, span, wage_candidates
from turing_valley.errors import AbundanceError, DomainError, NonDifferentiableError
from turing_valley.oracle import fd_gradient

H = (0.5, 0.6)
C = 0.5


def econ(m, mu=6.0, h=H, c=C, **kw):
    return Economy(h, m, c, mu, **kw)


def test_classify_examples():
    assert classify(econ((0.5, 0.1))) is Region.Rb
    assert wage_candidates(econ((0.5, 0.1))).as_tuple() == pytest.approx((0.3, 0.5263, 0.2825), abs=1e-4)
    assert classify(econ(H)) is Region.Rs
    assert classify(econ((1.0, 1.0))) is Region.Rt


def test_tie_breaks():
    from turing_valley.baseline import classify_candidates
    from turing_valley.econ import WageCandidates

    assert classify_candidates(WageCandidates(0.3, 0.3, 0.2)) is Region.Rs
    assert classify_candidates(WageCandidates(0.3, 0.2, 0.3)) is Region.Rs
    assert classify_candidates(WageCandidates(0.1, 0.3, 0.3)) is Region.Rt


def test_solve_baseline_examples():
    eq = solve_baseline(econ((0.5, 0.1)))
    assert eq.w_star == pytest.approx(0.25 / (0.5 * 0.95))
    assert eq.r_star == pytest.approx(0.05)
    assert eq.alpha == (0.0, 1.0, 0.0)
    assert eq.mu_alloc[1] == pytest.approx(1 / (0.5 * 0.95))

    eq = solve_baseline(econ((1.0, 1.0)))
    assert eq.w_star == pytest.approx(0.65)
    assert eq.r_star == 1.0
    assert eq.alpha == (0.0, 0.0, 1.0)
    assert eq.mu_alloc[2] == pytest.approx(7 / 20)

    eq = solve_baseline(econ(H))
    assert (eq.w_star, eq.r_star, eq.alpha) == (pytest.approx(0.3), pytest.approx(0.3), (1.0, 0.0, 0.0))


def test_solve_baseline_requires_abundance():
    with pytest.raises(AbundanceError):
        solve_baseline(econ((0.3, 0.3), mu=4.5))


def test_equilibrium_dict():
    d = solve_baseline(econ((0.5, 0.1))).to_dict()
    assert d["region"] == "Rb"
    assert d["capital_income"] == pytest.approx(6.0 * 0.05)


def test_gradient_examples():
    assert mpl_gradient(econ((0.45, 0.55))) == (0.0, 0.0)
    g = mpl_gradient(econ((0.3, 0.2)))
    assert g[0] == pytest.approx(-0.2 * 0.7 / (0.5 * 0.94 ** 2), rel=1e-12)
    assert g[0] == pytest.approx(-0.3168, abs=1e-4)
    g = mpl_gradient(econ((0.7, 0.2)))
    assert g[0] == pytest.approx((0.4 + 0.28 * 0.2 / 0.86) / (0.5 * 0.86), rel=1e-12)
    assert g[0] == pytest.approx(1.0817, abs=1e-4)
    fd = fd_gradient(lambda m: wage_candidates(econ(m)).best, (0.7, 0.2)).grad
    assert fd[0] == pytest.approx(g[0], rel=1e-8)


def test_gradient_rejects_kinks():
    with pytest.raises(NonDifferentiableError):
        mpl_gradient(econ((0.5, 0.1)))
    # region boundary: w_b = w_s on the m1 = 0.45 line
    from scipy.optimize import brentq

    def gap(y):
        wc = wage_candidates(econ((0.45, y)))
        return wc.w_b - wc.w_s

    y = brentq(gap, 0.3, 0.6, xtol=1e-15)
    with pytest.raises(NonDifferentiableError):
        mpl_gradient(econ((0.45, y)), tol=1e-9)


def test_stronger_in_dim2():
    assert stronger_in_dim2(UNIFORM, (0.5, 0.6))
    assert not stronger_in_dim2(UNIFORM, (0.6, 0.5))
    assert stronger_in_dim2(UNIFORM, (0.4, 0.4))


def test_labor_max_vertex_examples():
    assert labor_max_vertex(UNIFORM, (1 / 6, 4 / 5), 0.5) == ((1.0, 0.0), pytest.approx(1.6))
    assert labor_max_vertex(UNIFORM, (1 / 6, 1 / 5), 0.5).argmax == (1.0, 1.0)
    vm = labor_max_vertex(UNIFORM, H, 0.5)
    assert vm == ((1.0, 0.0), pytest.approx(1.2))
    assert list(vertex_incomes(UNIFORM, H, 0.5).values()) == pytest.approx([0.6, 1.0, 1.2, 0.65])
    with pytest.raises(DomainError):
        labor_max_vertex(UNIFORM, (0.0, 0.5), 0.5)


def test_labor_max_vertex_near_tie():
    from scipy.optimize import brentq

    # F(1, h2)/c = 1 - 1/n(h) on this h, so (1,0) and (1,1) tie
    h1 = 0.2
    h2 = brentq(lambda x: income_gap(UNIFORM, (h1, x), 0.5), 0.01, 0.99, xtol=1e-15)
    vals = vertex_incomes(UNIFORM, (h1, h2), 0.5)
    assert vals[(1.0, 0.0)] == pytest.approx(vals[(1.0, 1.0)], abs=1e-12)
    assert labor_max_vertex(UNIFORM, (h1, h2), 0.5).argmax in ((1.0, 0.0), (1.0, 1.0))


@pytest.mark.parametrize("tied, expected", [
    ([(1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)], (1.0, 0.0)),
    ([(1.0, 1.0), (0.0, 1.0), (0.0, 0.0)], (1.0, 1.0)),
    ([(0.0, 1.0), (0.0, 0.0)], (0.0, 1.0)),
])
def test_labor_max_vertex_tie_order(monkeypatch, tied, expected):
    from turing_valley import baseline

    table = {v: (1.0 if v in tied else 0.5) for v in baseline.VERTEX_ORDER}
    monkeypatch.setattr(baseline, "vertex_incomes", lambda *a: table)
    assert baseline.labor_max_vertex(UNIFORM, H, 0.5).argmax == expected


def test_income_gap_closed_form():
    assert income_gap(UNIFORM, H, 0.5) == pytest.approx(0.55)
    for h1, h2 in [(0.2, 0.3), (0.7, 0.1)]:
        assert income_gap(UNIFORM, (h1, h2), 0.5) == pytest.approx(2 * h2 - 1 + 0.5 * (1 - h1 * h2))


def test_thresholds_uniform_half():
    curve = labor_max_thresholds(UNIFORM, 0.5, [0.1, 0.2, 0.25])
    # on h2 = h1 the gap vanishes at h1^2 - 4 h1 + 1 = 0
    assert curve.h1_bar == pytest.approx(2 - math.sqrt(3), abs=1e-9)
    assert curve.h2_lower == pytest.approx([0.1, 0.2, 0.25], abs=1e-9)
    # h2_bar solves 2 h2 - 1 + 0.5 (1 - h1 h2) = 0
    assert curve.h2_bar == pytest.approx([0.5 / (2 - 0.5 * x) for x in (0.1, 0.2, 0.25)], abs=1e-9)
    assert upper_h2(UNIFORM, 1 / 6, 0.5) == pytest.approx(6 / 23, abs=1e-9)
    assert lower_h2(UNIFORM, 0.4) == pytest.approx(0.4, abs=1e-9)


def test_thresholds_above_h1_bar_collapse():
    curve = labor_max_thresholds(UNIFORM, 0.5, [0.5, 0.8])
    assert np.allclose(curve.h2_bar, curve.h2_lower)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.floats(0.1, 0.9))
def test_threshold_rule_agrees_with_vertex_max(h1, h2, c):
    # when humans are stronger in dimension 2, (1,0) wins iff h2 >= h2_bar(h1)
    assume(stronger_in_dim2(UNIFORM, (h1, h2)))
    assume(abs(income_gap(UNIFORM, (h1, h2), c)) > 1e-7)
    best = labor_max_vertex(UNIFORM, (h1, h2), c).argmax
    bar = upper_h2(UNIFORM, h1, c)
    assume(abs(h2 - bar) > 1e-9)  # bisection tolerance
    assert best == ((1.0, 0.0) if h2 >= bar else (1.0, 1.0))


def test_trajectory_constant_and_path():
    pts = trajectory(econ(H), [H] * 5)
    assert all(p.w_star == pytest.approx(0.3) for p in pts)
    path = straight_path((0.25, 0.25), (0.9, 0.325), 65)
    assert path[0] == (0.25, 0.25)
    assert path[-1] == pytest.approx((0.9, 0.325))
    pts = trajectory(econ(H), path)
    w = [p.w_star for p in pts]
    k = int(np.argmin(w))
    assert pts[k].m == pytest.approx((0.5, 0.28), abs=0.011)
    assert w[-1] > w[0]


def test_trajectory_inside_rs_is_flat():
    path = straight_path((0.45, 0.55), (0.52, 0.62), 20)
    w = [p.w_star for p in trajectory(econ(H), path)]
    assert max(w) - min(w) < 1e-15


@st.composite
def interior(draw, synergy=True):
    h = (draw(st.floats(0.05, 0.95)), draw(st.floats(0.05, 0.95)))
    m = (draw(st.floats(0.0, 1.0)), draw(st.floats(0.0, 1.0)))
    c = draw(st.floats(0.05, 0.95))
    theta = (draw(st.floats(0.5, 2.0)), draw(st.floats(0.5, 2.0)))
    if not isinstance(synergy, bool):
        synergy = draw(synergy)
    return Economy(h, m, c, math.inf, synergy, ProductPowerDist(theta))


@settings(max_examples=200)
@given(interior(synergy=st.booleans()))
def test_region_geometry(e):
    assert classify(e.with_m(e.h)) is Region.Rs
    assert classify(e.with_m((1.0, 1.0))) is Region.Rt
    if e.m[0] > 0:
        assert classify(e.with_m((e.m[0], 0.0))) is Region.Rb
    if e.m[1] > 0:
        assert classify(e.with_m((0.0, e.m[1]))) is Region.Rb
    if e.synergy and e.m[0] >= e.h[0] and e.m[1] >= e.h[1]:
        assert classify(e) is not Region.Rb


@settings(max_examples=200)
@given(interior())
def test_allocation_accounting(e):
    eq = solve_baseline(e)
    assert sum(eq.alpha) == pytest.approx(1.0)
    assert math.isinf(e.mu) or sum(eq.mu_alloc) == pytest.approx(e.mu)
    if eq.alpha[1]:
        assert eq.mu_alloc[1] == pytest.approx(span(e.m, e))
    if eq.alpha[2]:
        assert eq.mu_alloc[2] == pytest.approx(1 / span(e.h, e))


@settings(max_examples=100)
@given(interior(), st.floats(5.0, 50.0))
def test_output_identity(e, extra):
    e = e.with_mu(abundance_threshold(e.dist, e.h, e.c) + extra)
    eq = solve_baseline(e)
    assert output_from_allocation(e, eq.alpha, eq.mu_alloc) == pytest.approx(eq.output, rel=1e-12)
    assert eq.output == pytest.approx(e.mu * eq.r_star + eq.w_star, rel=1e-14)


@settings(max_examples=100)
@given(interior(), st.integers(0, 1), st.floats(1e-3, 0.2))
def test_output_monotone_in_m(e, i, dm):
    e = e.with_mu(abundance_threshold(e.dist, e.h, e.c) + 1.0)
    m2 = list(e.m)
    m2[i] = min(1.0, m2[i] + dm)
    lo, hi = solve_baseline(e), solve_baseline(e.with_m(tuple(m2)))
    assert hi.output >= lo.output - 1e-12
    assert hi.r_star >= lo.r_star


@settings(max_examples=150)
@given(interior(synergy=st.booleans()))
def test_continuity_along_small_steps(e):
    # Lipschitz only for densities bounded near the axes
    e = Economy(e.h, e.m, e.c, e.mu, e.synergy, UNIFORM)
    w0 = wage_candidates(e).best
    for d in ((1e-7, 0.0), (0.0, 1e-7)):
        m = (min(1.0, e.m[0] + d[0]), min(1.0, e.m[1] + d[1]))
        assert abs(wage_candidates(e.with_m(m)).best - w0) < 1e-4
