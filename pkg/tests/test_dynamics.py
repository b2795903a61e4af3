import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decopath.dynamics.billiard import BilliardTable, PhasePoint, billiard_orbit, billiard_push, billiard_step
from decopath.dynamics.pm import PMMap, pm_orbit, pm_orbit_batch
from decopath.dynamics.returns import ReturnStructure, birkhoff_wn, deepest_pair_gap, extract_profiles, \
    observe, return_stats
from decopath.errors import ParameterError, ShapeError, StatisticsError
from decopath.fastslow import butterfly_observable, pm_observable
from decopath.stats import deciles, hill, ks_two_sample, make_rng


# -- intermittent map -----------------------------------------------------

def test_pm_right_branch():
    assert pm_orbit(PMMap(), 0.75, 2).tolist() == [0.75, 0.5]


def test_pm_neutral_fixed_point():
    assert np.all(pm_orbit(PMMap(), 0.0, 50) == 0.0)


def test_pm_gamma_range():
    with pytest.raises(ParameterError):
        PMMap(0.4)


def test_pm_batch_matches_single():
    pm = PMMap()
    orb, last = pm_orbit_batch(pm, [0.1, 0.7], 100)
    assert np.array_equal(orb[:, 1], pm_orbit(pm, 0.7, 100))


def test_pm_left_inverse():
    pm = PMMap(0.6)
    z = np.linspace(0.01, 0.99, 25)
    assert pm(pm.inverse_left(z)) == pytest.approx(z, abs=1e-14)


def test_pm_measure_constants():
    m = PMMap().measure
    assert m.eigenvalue == pytest.approx(1.0, abs=1e-7)
    assert float(m.cdf(1.0)) == pytest.approx(1.0, abs=1e-12)
    v, v0 = pm_observable(PMMap())
    assert v0 == pytest.approx(1.0 - m.expectation(lambda y: 1.0 - y), abs=1e-15)
    # Birkhoff average of 1 - y along a long orbit
    y = pm_orbit(PMMap(), 0.3, 2_000_000)
    assert np.mean(1.0 - y) == pytest.approx(m.expectation(lambda y: 1.0 - y), abs=0.02)


def test_pm_return_tail():
    pm = PMMap()
    y = pm_orbit(pm, 0.3, 3_000_000)
    rs = ReturnStructure.from_section(y >= 0.5)
    st_ = return_stats(rs, alpha=pm.alpha)
    assert abs(st_["overall"].alpha - 1.5) < 0.15
    # empirical mean return against the induced-operator constant
    assert rs.times.mean() == pytest.approx(pm.measure.mean_return, rel=0.05)


def test_pm_profile_is_linear():
    pm = PMMap()
    v, v0 = pm_observable(pm)
    y = pm_orbit(pm, 0.3, 3_000_000)
    rs = ReturnStructure.from_section(y >= 0.5)
    prof = extract_profiles(observe(y, v), rs, 1000, min_count=5)
    assert prof.residual < 0.1 * abs(v0)
    assert prof.median[-1, 0] == pytest.approx(v0, abs=0.1 * abs(v0))


# -- billiard ---------------------------------------------------------------

TB = BilliardTable(3.0)


def test_table_geometry():
    assert TB.alpha == 1.5
    # the arc meets both walls at x = 1
    for piece, q in ((0, 1.0), (2, 1.0)):
        p = TB.position(piece, q)
        assert np.hypot(p[0] - TB.centre, p[1]) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_reflection_law(seed):
    rng = make_rng(seed)
    r, th = TB.sample_invariant(1, rng)
    p = billiard_step(TB, PhasePoint(float(r[0]), float(th[0])))
    piece, q = TB.to_param(p.r)
    _, n, t = TB.frame(int(piece[0]), float(q[0]))
    assert abs(p.theta) <= math.pi / 2
    assert np.dot(n, t) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_time_reversal(seed):
    r, th = TB.sample_invariant(200, make_rng(seed))
    r1, th1, ok1 = billiard_push(TB, r, th, 5)
    r2, th2, ok2 = billiard_push(TB, r1, -th1, 5)
    assert ok1.all() and ok2.all()
    assert np.abs(r2 - r).max() < 1e-9 and np.abs(th2 + th).max() < 1e-9


def test_param_round_trip():
    r = np.linspace(0.0, TB.perimeter, 1001)
    piece, q = TB.to_param(r)
    assert TB.to_r(piece, q) == pytest.approx(r, abs=1e-12)


def test_phase_point_angle_checked():
    with pytest.raises(ParameterError):
        PhasePoint(0.1, 2.0)


def test_orbit_length():
    o = billiard_orbit(TB, PhasePoint(1.2, 0.3), 100)
    assert o.theta.size == 101


# -- Birkhoff sums and returns ----------------------------------------------

def test_wn_zero_observable():
    W = birkhoff_wn(np.linspace(0, 1, 10), lambda y: np.zeros_like(y), 10, 1.5)
    assert np.all(W.values == 0.0)


def test_wn_single_step():
    W = birkhoff_wn(np.array([0.3]), lambda y: y, 1, 1.5)
    assert W.values[-1, 0] == 0.3 and W.times.tolist() == [0.0, 1.0]


def test_wn_needs_enough_states():
    with pytest.raises(ShapeError):
        birkhoff_wn(np.zeros(3), lambda y: y, 5, 1.5)


def test_butterfly_observable_shape():
    assert butterfly_observable(np.zeros(4)).shape == (4, 2)


def test_constant_summand_gives_linear_profile():
    section = np.zeros(100_000, dtype=bool)
    section[::97] = True
    section[::1000] = True
    rs = ReturnStructure.from_section(section)
    prof = extract_profiles(np.full(section.size, 2.0), rs, 50, min_count=5)
    assert prof.residual < 1e-12
    assert prof.median[:, 0] == pytest.approx(2.0 * prof.grid)


def test_deepest_pair_gap_constant():
    section = np.zeros(2000, dtype=bool)
    section[[0, 10, 500, 1200, 1999]] = True
    rs = ReturnStructure.from_section(section)
    assert deepest_pair_gap(np.ones(2000), rs) < 1e-12


# -- statistics --------------------------------------------------------------

def test_hill_degenerate_sentinel():
    h = hill(np.full(100, 5.0))
    assert h.degenerate


def test_hill_pareto():
    x = make_rng(1).pareto(1.5, 200_000) + 1.0
    assert hill(x, k=20_000).alpha == pytest.approx(1.5, abs=0.05)


def test_hill_needs_samples():
    with pytest.raises(StatisticsError):
        hill(np.ones(3))


def test_return_stats_needs_returns():
    rs = ReturnStructure.from_section(np.arange(100) % 3 == 0)
    with pytest.raises(StatisticsError):
        return_stats(rs)


def test_deciles_and_ks():
    x = np.arange(1, 101, dtype=float)
    assert deciles(x)[4] == pytest.approx(50.5)
    assert ks_two_sample(x, x) == 0.0


def test_rng_streams_independent():
    a = make_rng(5, 1).random(4)
    b = make_rng(5, 2).random(4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, make_rng(5, 1).random(4))
