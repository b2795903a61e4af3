import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decopath.decorated import Decoration, DecoratedPath, alpha_inf, alpha_pvar, canonical, collapse, \
    delta_extension, linear_lift, pvar_decorated, restrict, trivial_lift
from decopath.errors import ContractError, ParameterError
from decopath.experiments import butterfly_curve, random_simple_path, stretched_pair
from decopath.paths import LINEAR, CadlagPath, linear_path, step_path
from decopath.pvar import p_variation
from decopath.skorokhod import frechet_dist, j1_dist
from decopath.stats import make_rng


def unit_step(t0):
    return step_path([0.0, t0], [[0.0], [1.0]], domain=(0.0, 1.0))


def test_constant_path_has_no_decorations():
    assert trivial_lift(linear_path([2.0], [2.0])).decorations == ()


def test_continuous_lifts_agree():
    h = CadlagPath([0.0, 0.4, 1.0], [[0.0], [1.0], [-1.0]], LINEAR)
    assert trivial_lift(h) == linear_lift(h)


def test_linear_lift_of_unit_step():
    phi = linear_lift(unit_step(0.5))
    (d,) = phi.decorations
    assert d.t == 0.5
    assert d.excursion.eval(0.3)[0] == pytest.approx(0.3)


def test_linear_lifts_of_shifted_steps():
    a = alpha_inf(linear_lift(unit_step(0.5)), linear_lift(unit_step(0.6)), 0.01)
    assert abs(a.value - 0.1) <= a.bias + 1e-6


def test_excursion_must_end_at_skeleton():
    ex = linear_path([0.0], [0.5])
    with pytest.raises(ContractError):
        DecoratedPath(unit_step(0.5), (Decoration(0.5, ex),))


def test_single_fictitious_interval_has_length_delta():
    ext = delta_extension(linear_lift(unit_step(0.5)), 0.3)
    assert ext.lengths[0] == pytest.approx(0.3, abs=1e-15)
    assert ext.extended.domain == (0.0, 1.3)


def test_fictitious_lengths_sum_to_delta():
    h = step_path([0.0, 0.2, 0.4, 0.7], [[0.0], [1.0], [-1.0], [2.0]], domain=(0.0, 1.0))
    ext = delta_extension(linear_lift(h), 0.1)
    assert ext.lengths.sum() == pytest.approx(0.1, abs=1e-15)
    assert np.all(np.diff(ext.lengths) < 0)


def test_delta_must_be_positive():
    with pytest.raises(ParameterError):
        delta_extension(linear_lift(unit_step(0.5)), 0.0)


def test_trivial_lift_of_continuous_path_reparametrises():
    h = CadlagPath([0.0, 0.3, 1.0], [[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]], LINEAR)
    ext = delta_extension(trivial_lift(h), 0.2).extended
    padded = CadlagPath(h.times, h.values, h.modes, domain=(0.0, 1.2))
    assert float(frechet_dist(ext, padded)) == pytest.approx(0.0, abs=1e-9)


def test_no_decorations_collapses_to_trivial_lift():
    h = CadlagPath([0.0, 0.3, 1.0], [[0.0], [1.0], [0.5]], LINEAR)
    assert collapse(delta_extension(trivial_lift(h), 0.5)) == trivial_lift(h)


def test_clock_frozen_after_end_without_decorations():
    h = linear_path([0.0], [1.0])
    ext = delta_extension(trivial_lift(h), 1.0)
    assert ext.tau_inv(np.array([0.5, 1.0, 1.5, 2.0])).tolist() == [0.5, 1.0, 1.0, 1.0]


def test_butterfly_excursion_pvar_exceeds_jump():
    s = np.linspace(0.0, 1.0, 257)
    ex = CadlagPath(s, butterfly_curve(s), LINEAR)
    sk = step_path([0.0, 0.5], [[0.0, 0.0], [1.0, 1.0]], domain=(0.0, 1.0))
    phi = DecoratedPath(sk, (Decoration(0.5, ex),))
    assert pvar_decorated(phi, 1.0) > math.sqrt(2.0) + 0.5


@pytest.mark.parametrize("p", [1.0, 1.7, 3.0])
def test_linear_excursion_pvar(p):
    assert pvar_decorated(linear_lift(unit_step(0.5)), p) == pytest.approx(1.0, rel=1e-14)


seeds = st.integers(0, 100_000)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(1.0, 4.0))
def test_trivial_lift_preserves_pvar(seed, p):
    h = random_simple_path(make_rng(seed), d=2)
    assert pvar_decorated(trivial_lift(h), p) == pytest.approx(p_variation(h, p), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0.01, 2.0), st.floats(0.01, 2.0), st.floats(1.0, 3.0))
def test_extension_pvar_independent_of_delta(seed, d1, d2, p):
    phi = linear_lift(random_simple_path(make_rng(seed)))
    a = p_variation(delta_extension(phi, d1).extended, p)
    b = p_variation(delta_extension(phi, d2).extended, p)
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_collapse_inverts_extension(seed):
    phi = linear_lift(random_simple_path(make_rng(seed), d=2))
    back = collapse(delta_extension(phi, 0.1))
    assert alpha_inf(back, phi, 0.01).value <= 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_identical_decorated_paths_are_at_distance_zero(seed):
    phi = trivial_lift(random_simple_path(make_rng(seed)))
    assert alpha_inf(phi, phi).value == 0.0
    assert alpha_pvar(phi, phi, 2.0).value == 0.0


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_lift_distance_matches_j1(seed):
    rng = make_rng(seed)
    h1, h2 = random_simple_path(rng), random_simple_path(rng)
    a = alpha_inf(trivial_lift(h1), trivial_lift(h2), 0.01)
    assert abs(a.value - float(j1_dist(h1, h2))) <= a.bias + 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_stretched_excursion_bound(seed):
    rng = make_rng(seed)
    phi, h = stretched_pair(rng)
    a = alpha_inf(phi, trivial_lift(h), 0.01)
    assert a.value <= (h.b - h.a) + a.bias + 1e-9


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_inf_variation_distance_at_most_three_uniform(seed):
    rng = make_rng(seed)
    f1, f2 = linear_lift(random_simple_path(rng)), linear_lift(random_simple_path(rng))
    a = alpha_inf(f1, f2, 0.01)
    assert alpha_pvar(f1, f2, math.inf, 0.01, resolution=9).value <= 3 * a.value + 1e-9


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_canonical_excursions_are_equivalent(seed):
    phi = linear_lift(random_simple_path(make_rng(seed), d=2))
    assert alpha_inf(canonical(phi), phi, 0.01).value <= 1e-6


def test_restrict_keeps_decorations_inside():
    h = step_path([0.0, 0.3, 0.6], [[0.0], [1.0], [2.0]], domain=(0.0, 1.0))
    phi = linear_lift(h)
    assert [d.t for d in restrict(phi, 0.0, 0.5).decorations] == [0.3]
    assert [d.t for d in restrict(phi, 0.3, 1.0, keep_start=False).decorations] == [0.6]
