import numpy as np
import pytest

from decopath.dynamics.billiard import BilliardTable
from decopath.dynamics.pm import PMMap, pm_orbit
from decopath.dynamics.returns import birkhoff_wn
from decopath.errors import ParameterError, StatisticsError
from decopath.experiments import example_field, unit_field
from decopath.fastslow import FastSlowConfig, LimitModel, _initial_states, butterfly_observable, \
    compare_samples, ensemble_compare, fastslow_endpoints, fastslow_run, limit_endpoints, pm_observable
from decopath.levy import ProfileSet, StableSpec
from decopath.young import SolveConfig, VectorField, zero_drift

PM = PMMap()
V, V0 = pm_observable(PM)


def field(drift, noise):
    return VectorField(lambda x: np.full(np.shape(x), drift), lambda x: np.full(np.shape(x) + (1,), noise), 1, 1)


def cfg(vf, **kw):
    base = dict(n=500, alpha=PM.alpha, vf=vf, xi=(0.0,), driver=PM, v=V, M=3, seed=4, burn_in=100)
    base.update(kw)
    return FastSlowConfig(**base)


def test_zero_field_keeps_initial_state():
    X = fastslow_run(cfg(field(0.0, 0.0), xi=(0.7,)))
    assert np.all(X.values == 0.7)


def test_unit_drift_reaches_one():
    assert fastslow_run(cfg(field(1.0, 0.0))).values[-1, 0] == pytest.approx(1.0, abs=1e-12)


def test_additive_noise_is_birkhoff_sum():
    c = cfg(unit_field())
    X = fastslow_run(c)
    y0 = _initial_states(c, 1)[0]
    W = birkhoff_wn(pm_orbit(PM, y0, c.n), V, c.n, c.alpha)
    assert np.array_equal(X.values, W.values)


def test_endpoints_match_runs():
    c = cfg(unit_field())
    ends = fastslow_endpoints(c, chunk=2)
    assert ends[1, 0] == fastslow_run(c, member=1).values[-1, 0]


def test_billiard_driver():
    tb = BilliardTable()
    vf = VectorField(zero_drift(2), lambda x: np.broadcast_to(np.eye(2), np.shape(x) + (2,)), 2, 2)
    c = FastSlowConfig(n=200, alpha=tb.alpha, vf=vf, xi=(0.0, 0.0), driver=tb, v=butterfly_observable, M=2)
    assert fastslow_endpoints(c).shape == (2, 2)


def test_config_validation():
    with pytest.raises(ParameterError):
        cfg(unit_field(), alpha=2.5)


def test_degenerate_compare_has_zero_gap():
    rep = compare_samples(np.zeros((600, 1)), np.zeros((600, 1)))
    assert rep.max_gap == 0.0 and rep.ks == 0.0
    assert "max gap" in rep.table()


def test_compare_needs_samples():
    with pytest.raises(StatisticsError):
        compare_samples(np.zeros((10, 1)), np.zeros((10, 1)))
    with pytest.raises(StatisticsError):
        ensemble_compare(cfg(unit_field(), M=10), LimitModel.for_pm(PM, V0))


def test_additive_limit_matches_decorated_solver():
    c = cfg(unit_field(), M=20)
    model = LimitModel.for_pm(PM, V0, K=20)
    a = limit_endpoints(model, c, "decorated")
    b = limit_endpoints(model, c, "marcus")
    assert np.abs(a - b).max() < 1e-6


def test_marcus_and_decorated_limits_agree_on_nonlinear_field():
    spec = StableSpec(PM.alpha, (1.0,), K=15, scale=PM.measure.stable_scale)
    model = LimitModel(spec, ProfileSet.linear([[V0], [0.5 * V0]]))
    c = FastSlowConfig(n=10, alpha=PM.alpha, vf=example_field(), xi=(0.0, 0.0), driver=PM,
                       v=lambda y: np.stack([V(y), 0.5 * V(y)], -1), M=10, seed=2)
    a = limit_endpoints(model, c, "decorated", SolveConfig(tol=1e-10))
    b = limit_endpoints(model, c, "marcus", SolveConfig(tol=1e-10))
    assert np.abs(a - b).max() < 1e-6
