import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stieltjes_ode.derivator import (Derivator, from_descriptor,
                                     identity_derivator, make_phi,
                                     make_silkworm_derivator,
                                     make_test_derivator)


@pytest.fixture(scope="module")
def silkworm():
    return make_silkworm_derivator(10.0)


class TestSilkwormDriver:
    @pytest.mark.parametrize("t, expected", [
        (2.0, 1.0),
        (4.0, 2.0),   # jump at 4 not yet included in the left value
        (3.0, 1.0),   # flat stretch
        (7.0, 5.0),   # one period up: 4 + g(2)
        (0.0, 0.0),
    ])
    def test_value(self, silkworm, t, expected):
        assert silkworm.value(t) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("t, expected", [
        (4.0, 3.0),
        (1.0, 0.5 * math.sqrt(3.0)),
        (5.0, 4.0),
    ])
    def test_right_value(self, silkworm, t, expected):
        assert silkworm.right_value(t) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("t, expected", [(4.0, 1.0), (1.0, 0.0), (9.0, 1.0)])
    def test_jump_gap(self, silkworm, t, expected):
        assert silkworm.jump_gap(t) == expected

    def test_jump_times(self, silkworm):
        assert silkworm.jump_times.tolist() == [4.0, 5.0, 9.0]
        assert silkworm.jump_gaps.tolist() == [1.0, 1.0, 1.0]

    @pytest.mark.parametrize("a, b, expected", [
        (0.0, 2.0, 1.0),
        (4.0, 5.0, 1.0),  # pure jump mass at 4; flat on (4, 5]
        (3.0, 3.0, 0.0),
    ])
    def test_measure(self, silkworm, a, b, expected):
        assert silkworm.measure(a, b) == pytest.approx(expected, abs=1e-12)

    def test_measure_rejects_reversed_interval(self, silkworm):
        with pytest.raises(ValueError):
            silkworm.measure(2.0, 1.0)


def test_identity_value():
    g = identity_derivator(1.0)
    assert g.value(0.3) == 0.3
    assert g.value(0.0) == 0.0


def test_normalization_subtracts_continuous_offset():
    g = Derivator(1.0, lambda t: np.asarray(t, dtype=float) + 5.0)
    assert g.value(0.0) == 0.0
    assert g.value(1.0) == pytest.approx(1.0)


@pytest.mark.parametrize("t", [-0.1, 10.1])
def test_value_outside_domain(silkworm, t):
    with pytest.raises(ValueError):
        silkworm.value(t)


def test_right_value_rejects_domain_end(silkworm):
    with pytest.raises(ValueError):
        silkworm.right_value(10.0)


@pytest.mark.parametrize("times, gaps", [
    ([0.0], [1.0]),          # jump at 0: driver must be continuous there
    ([10.0], [1.0]),         # jump at the domain end
    ([1.0], [0.0]),          # zero gap
    ([1.0], [-0.5]),         # negative gap
    ([2.0, 1.0], [1.0, 1.0]),  # unsorted
])
def test_constructor_rejects_bad_jumps(times, gaps):
    with pytest.raises(ValueError):
        Derivator(10.0, lambda t: np.asarray(t, dtype=float), times, gaps)


def test_right_minus_left_is_gap(silkworm):
    ts = np.concatenate((np.linspace(0.0, 9.99, 211), silkworm.jump_times))
    for t in ts:
        assert silkworm.right_value(t) - silkworm.value(t) == pytest.approx(
            silkworm.jump_gap(t), abs=1e-12)


@pytest.mark.parametrize("g", [make_silkworm_derivator(10.0),
                               make_test_derivator(4, alpha=3.0)],
                         ids=["silkworm", "ramps"])
def test_continuous_part_nondecreasing_on_random_samples(g):
    rng = np.random.default_rng(5)
    ts = np.sort(rng.uniform(0.0, 10.0, 4000))
    vals = g.continuous_value(ts)
    assert np.all(np.diff(vals) >= -1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.floats(0.0, 1.0))
def test_measure_additivity(a, b, frac):
    g = make_silkworm_derivator(10.0)
    a, b = min(a, b), max(a, b)
    m = a + frac * (b - a)
    total = g.measure(a, b)
    assert total == pytest.approx(g.measure(a, m) + g.measure(m, b), abs=1e-9)
    _, gaps = g.jumps_in(a, b)
    assert total >= gaps.sum() - 1e-12


class TestDecompose:
    def test_driver_decomposes_into_own_jumps(self, silkworm):
        f_cont, f_jump = silkworm.decompose(silkworm.value, silkworm.right_value)
        for d, gap in zip(silkworm.jump_times, silkworm.jump_gaps):
            assert f_jump(d + 1e-9) - f_jump(d) == pytest.approx(gap)

    def test_continuous_function_has_zero_jump_part(self, silkworm):
        f = lambda t: np.sin(np.asarray(t, dtype=float))
        f_cont, f_jump = silkworm.decompose(f, f)
        ts = np.linspace(0, 10, 101)
        assert np.all(f_jump(ts) == 0.0)
        assert f_cont(3.7) == pytest.approx(f(3.7))

    def test_scaled_driver_scales_jumps(self, silkworm):
        f = lambda t: 2.0 * silkworm.value(t)
        fr = lambda t: 2.0 * silkworm.right_value(t)
        _, f_jump = silkworm.decompose(f, fr)
        for d, gap in zip(silkworm.jump_times, silkworm.jump_gaps):
            assert f_jump(d + 1e-9) - f_jump(d) == pytest.approx(2.0 * gap)

    def test_parts_sum_back_to_f(self, silkworm):
        f = lambda t: silkworm.value(t) + np.cos(np.asarray(t, dtype=float))
        fr = lambda t: silkworm.right_value(t) + np.cos(np.asarray(t, dtype=float))
        f_cont, f_jump = silkworm.decompose(f, fr)
        ts = np.linspace(0, 10, 301)
        np.testing.assert_allclose(f_cont(ts) + f_jump(ts), f(ts), atol=1e-12)


def test_transfer_of_lipschitz_regularity():
    # f = c1*g + c2*sin(g) is g-Lipschitz with constant |c1| + |c2|; the
    # decomposition must keep jump sizes and continuous-part increments
    # within that constant
    rng = np.random.default_rng(1234)
    g = make_test_derivator(3, alpha=4.0)
    c1, c2 = 0.8, -1.1
    h_f = abs(c1) + abs(c2)
    f = lambda t: c1 * g.value(t) + c2 * np.sin(g.value(t))
    fr = lambda t: c1 * g.right_value(t) + c2 * np.sin(g.right_value(t))
    f_cont, _ = g.decompose(f, fr)
    for d, gap in zip(g.jump_times, g.jump_gaps):
        assert abs(fr(d) - f(d)) <= h_f * gap + 1e-12
    ts = rng.uniform(0.0, 10.0, size=(1000, 2))
    for t, s in ts:
        lhs = abs(f_cont(t) - f_cont(s))
        rhs = h_f * abs(g.continuous_value(t) - g.continuous_value(s))
        assert lhs <= rhs + 1e-9


class TestPhi:
    def test_endpoints_exact(self):
        phi = make_phi(4.0)
        assert phi(0.0) == 0.0
        assert phi(1.0) == 1.0
        assert phi(-3.0) == 0.0
        assert phi(2.0) == 1.0

    def test_midpoint(self):
        assert make_phi(4.0)(0.5) == pytest.approx(0.5)

    def test_monotone_and_bounded(self):
        phi = make_phi(2.5)
        xs = np.linspace(-0.5, 1.5, 2001)
        vals = phi(xs)
        assert np.all(np.diff(vals) >= 0.0)
        assert np.all((vals >= 0.0) & (vals <= 1.0))

    def test_steepness_ordering(self):
        phi = make_phi(4.0)
        assert phi(0.25) < phi(0.75)

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            make_phi(0.0)


class TestTestDerivator:
    def test_no_jumps_total_rise(self):
        g = make_test_derivator(0)
        assert g.value(10.0) == pytest.approx(3.0, abs=1e-12)

    def test_four_jumps_total(self):
        g = make_test_derivator(4)
        assert g.value(10.0) == pytest.approx(7.0, abs=1e-12)
        assert g.jump_times.tolist() == [2.0, 4.0, 6.0, 8.0]

    def test_two_jumps_equally_spaced(self):
        g = make_test_derivator(2, T=10.0)
        np.testing.assert_allclose(g.jump_times, [10.0 / 3.0, 20.0 / 3.0])

    def test_snap_places_jumps_on_grid(self):
        g = make_test_derivator(2, snap=0.1)
        for d in g.jump_times:
            assert abs(d / 0.1 - round(d / 0.1)) < 1e-9

    def test_flat_between_ramps(self):
        g = make_test_derivator(0)
        assert g.continuous_value(3.9) == g.continuous_value(2.1)

    def test_snap_collision_rejected(self):
        with pytest.raises(ValueError):
            make_test_derivator(9, snap=5.0)


class TestDescriptor:
    def test_identity(self):
        g = from_descriptor({"kind": "identity", "T": 2.0})
        assert g.value(1.5) == 1.5

    def test_test_kind(self):
        g = from_descriptor({"kind": "test", "T": 10.0, "num_jumps": 4,
                             "alpha": 4.0})
        assert g.n_jumps == 4

    def test_silkworm_kind(self):
        g = from_descriptor({"kind": "silkworm", "T": 10.0})
        assert g.jump_times.tolist() == [4.0, 5.0, 9.0]

    def test_custom(self):
        g = from_descriptor({"kind": "custom", "T": 2.0,
                             "continuous": "identity",
                             "jumps": [{"t": 1.0, "gap": 0.5}]})
        assert g.value(1.5) == pytest.approx(2.0)

    @pytest.mark.parametrize("desc", [
        {"T": 1.0},
        {"kind": "nope", "T": 1.0},
        {"kind": "custom", "T": 1.0, "continuous": "unknown"},
        "not a dict",
    ])
    def test_bad_descriptors(self, desc):
        with pytest.raises(ValueError):
            from_descriptor(desc)
