import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decopath.decorated import trivial_lift
from decopath.errors import AccuracyError, DivergenceError, ShapeError
from decopath.experiments import example_field, jump_decorated, random_field, random_simple_path
from decopath.paths import LINEAR, STEP, CadlagPath, linear_path, step_path
from decopath.stats import make_rng
from decopath.young import SolveConfig, VectorField, marcus_flow, solve_decorated_ode, solve_marcus, \
    solve_young_ode, young_integral, zero_drift


def scalar_linear():
    return VectorField(zero_drift(1), lambda x: np.asarray(x)[..., None], 1, 1)


def no_noise_drift_one():
    return VectorField(lambda x: np.ones_like(np.asarray(x)), lambda x: np.zeros(np.shape(x) + (1,)), 1, 1)


def test_integral_smooth():
    t = linear_path([0.0], [1.0])
    assert young_integral(t, t) == pytest.approx(0.5, abs=1e-8)


def test_integral_step_is_left_point():
    W = step_path([0.0, 0.5], [[0.0], [1.0]], domain=(0.0, 1.0))
    assert young_integral(W, W) == 0.0
    assert young_integral(W, W, closed_form=False) == 0.0


def test_integral_constant_integrator():
    assert young_integral(linear_path([1.0], [3.0]), linear_path([2.0], [2.0])) == 0.0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000))
def test_integral_closed_form_matches_refinement(seed):
    rng = make_rng(seed)
    Y, W = random_simple_path(rng), random_simple_path(rng)
    a = young_integral(Y, W)
    b = young_integral(Y, W, tol=1e-5, closed_form=False)
    assert a == pytest.approx(b, abs=1e-4)


def test_exponential():
    X = solve_young_ode(scalar_linear(), [1.0], linear_path([0.0], [1.0]))
    assert X.values[-1, 0] == pytest.approx(math.e, abs=1e-6)


def test_pure_drift():
    X = solve_young_ode(no_noise_drift_one(), [0.0], linear_path([0.0], [0.0]))
    assert X.values[-1, 0] == pytest.approx(1.0, abs=1e-12)


def test_forward_jump():
    W = step_path([0.0, 0.5], [[0.0], [1.0]], domain=(0.0, 1.0))
    X = solve_young_ode(scalar_linear(), [1.0], W)
    assert X.values[-1, 0] == 2.0
    assert X.left_limit(0.5)[0] == 1.0


def test_marcus_scalar_jump_is_exponential():
    W0 = CadlagPath([0.0, 1.0], [[0.0], [0.0]], STEP)
    X = solve_marcus(scalar_linear(), [1.0], [(0.5, [1.0])], W0)
    assert X.values[-1, 0] == pytest.approx(math.e, abs=1e-8)


def test_marcus_flow_example_field():
    out = marcus_flow(example_field(), np.zeros(2), np.array([1.0, 1.0]), SolveConfig())
    assert out == pytest.approx([1.0, 0.5], abs=1e-9)


def test_marcus_without_jumps_matches_forward():
    rng = make_rng(11)
    vf = random_field(rng)
    W = CadlagPath(np.linspace(0, 1, 5), rng.normal(size=(5, 2)), LINEAR)
    a = solve_marcus(vf, [0.1, 0.2], [], W).values[-1]
    b = solve_young_ode(vf, [0.1, 0.2], W).values[-1]
    assert np.abs(a - b).max() <= 1e-8


@pytest.mark.parametrize("curve,expected", [("diagonal", 0.5), ("parabola", 2.0 / 3.0)])
def test_decorated_example(curve, expected):
    X = solve_decorated_ode(example_field(), [0.0, 0.0], jump_decorated(curve, 2049))
    assert X.skeleton.values[-1] == pytest.approx([1.0, expected], abs=1e-6)


def test_decorated_trivial_lift_is_forward():
    phi = trivial_lift(jump_decorated("parabola", 65).skeleton)
    X = solve_decorated_ode(example_field(), [0.0, 0.0], phi)
    assert X.skeleton.values[-1] == pytest.approx([1.0, 0.0], abs=1e-12)


def test_decorated_solution_extension_is_solved_path():
    X, ext = solve_decorated_ode(example_field(), [0.0, 0.0], jump_decorated("diagonal", 33),
                                 return_extension=True)
    assert ext.extended.values[-1] == pytest.approx(X.skeleton.values[-1])
    assert len(X.decorations) == 1


def test_blowup_detected():
    vf = VectorField(zero_drift(1), lambda x: (np.asarray(x) ** 2)[..., None], 1, 1)
    with pytest.raises((DivergenceError, AccuracyError)), np.errstate(over="ignore", invalid="ignore"):
        solve_young_ode(vf, [1.0], linear_path([0.0], [2.0]), SolveConfig(blowup=1e6))


def test_dimension_checked():
    with pytest.raises(ShapeError):
        solve_young_ode(scalar_linear(), [1.0], linear_path([0.0, 0.0], [1.0, 1.0]))


def test_refinement_info():
    _, info = solve_young_ode(scalar_linear(), [1.0], linear_path([0.0], [1.0]), return_info=True)
    assert info.endpoint_change < 1e-9 and info.refinements >= 1
    assert '"refinements"' in info.to_json()
