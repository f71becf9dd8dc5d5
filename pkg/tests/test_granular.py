import numpy as np
import pytest
from hypothesis import given, strategies as st

from granlog.granular import (RHO_MIN, GranularityState, Normalizer,
                              TrapezoidalSet, trap_membership)


def sorted_quad(draw_values):
    a, b, c, d = sorted(draw_values)
    return TrapezoidalSet(a, b, c, d)


trapezoids = st.builds(
    sorted_quad,
    st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
             min_size=4, max_size=4),
)
unit_floats = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestTrapezoidalSet:
    def test_rejects_out_of_order(self):
        with pytest.raises(ValueError):
            TrapezoidalSet(0.5, 0.4, 0.6, 0.7)
        with pytest.raises(ValueError):
            TrapezoidalSet(0.0, 0.3, 0.2, 0.7)

    def test_membership_inside_core(self):
        assert TrapezoidalSet(0, 0.25, 0.5, 0.75).membership(0.3) == 1.0

    def test_membership_outside_support(self):
        assert TrapezoidalSet(0, 0.25, 0.5, 0.75).membership(0.9) == 0.0

    def test_membership_on_shoulder(self):
        # hand evaluation: (0.125 - 0) / (0.25 - 0)
        assert TrapezoidalSet(0, 0.25, 0.5, 0.75).membership(0.125) == pytest.approx(0.5)

    def test_membership_degenerate_point(self):
        point = TrapezoidalSet(0.4, 0.4, 0.4, 0.4)
        assert point.membership(0.4) == 1.0
        assert point.membership(0.4000001) == 0.0

    def test_membership_degenerate_shoulder_is_crisp(self):
        tset = TrapezoidalSet(0.2, 0.2, 0.5, 0.6)
        assert tset.membership(0.2) == 1.0
        assert tset.membership(0.19999) == 0.0

    def test_midpoint_examples(self):
        assert TrapezoidalSet(0, 0.25, 0.5, 0.75).midpoint == pytest.approx(0.375)
        assert TrapezoidalSet(0.3, 0.3, 0.3, 0.3).midpoint == 0.3
        assert TrapezoidalSet(0, 0, 1, 1).midpoint == 0.5

    def test_expansion_region(self):
        tset = TrapezoidalSet(0.4, 0.5, 0.5, 0.6)
        assert tset.expansion_region(0.4) == pytest.approx((0.3, 0.7))
        point = TrapezoidalSet(0.5, 0.5, 0.5, 0.5)
        assert point.expansion_region(1.0) == pytest.approx((0.0, 1.0))
        lo, hi = tset.expansion_region(1e-12)
        assert lo == pytest.approx(0.5) and hi == pytest.approx(0.5)

    def test_contracted_clips_both_supports(self):
        tset = TrapezoidalSet(0.3, 0.5, 0.5, 0.8)
        assert tset.contracted(0.2).as_tuple() == pytest.approx((0.4, 0.5, 0.5, 0.6))

    def test_contracted_noop_when_inside_box(self):
        tset = TrapezoidalSet(0.4, 0.5, 0.5, 0.6)
        assert tset.contracted(0.4).as_tuple() == tset.as_tuple()
        point = TrapezoidalSet(0.5, 0.5, 0.5, 0.5)
        assert point.contracted(0.1).as_tuple() == point.as_tuple()

    @given(trapezoids, unit_floats)
    def test_membership_bounds_and_regions(self, tset, x):
        m = tset.membership(x)
        assert 0.0 <= m <= 1.0
        if tset.lower_core <= x <= tset.upper_core:
            assert m == 1.0
        if x < tset.lower_support or x > tset.upper_support:
            assert m == 0.0

    @given(trapezoids, st.floats(min_value=1e-6, max_value=1.0))
    def test_contracted_keeps_order_and_width(self, tset, rho):
        out = tset.contracted(rho)
        a, b, c, d = out.as_tuple()
        assert a <= b <= c <= d
        assert out.width <= rho + 1e-12

    @given(trapezoids, st.floats(min_value=0.05, max_value=1.0))
    def test_expansion_region_contains_narrow_core(self, tset, rho):
        if tset.upper_core - tset.lower_core <= rho:
            lo, hi = tset.expansion_region(rho)
            assert lo <= tset.lower_core + 1e-12
            assert hi >= tset.upper_core - 1e-12

    def test_membership_linear_on_shoulders(self):
        tset = TrapezoidalSet(0.1, 0.3, 0.5, 0.9)
        for x in np.linspace(0.1, 0.3, 7):
            assert tset.membership(float(x)) == pytest.approx((x - 0.1) / 0.2)
        for x in np.linspace(0.5, 0.9, 7):
            assert tset.membership(float(x)) == pytest.approx((0.9 - x) / 0.4)


class TestVectorizedMembership:
    def test_matches_scalar(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            quad = np.sort(rng.random(4))
            tset = TrapezoidalSet(*quad)
            xs = rng.random(16)
            vec = trap_membership(xs, *quad)
            for x, m in zip(xs, vec):
                assert m == pytest.approx(tset.membership(float(x)), abs=1e-15)

    def test_matrix_shape(self):
        quads = np.sort(np.random.default_rng(3).random((6, 5, 4)), axis=2)
        x = np.full(5, 0.5)
        m = trap_membership(x, quads[:, :, 0], quads[:, :, 1],
                            quads[:, :, 2], quads[:, :, 3])
        assert m.shape == (6, 5)
        assert ((m >= 0) & (m <= 1)).all()


class TestGranularityState:
    def test_growth_branch(self):
        state = GranularityState(rho=0.5, eta=3, h_r=100, created_this_period=5)
        assert state.adapted().rho == pytest.approx(0.525)

    def test_equal_rate_keeps_rho(self):
        state = GranularityState(rho=0.5, eta=3, h_r=100, created_this_period=3)
        assert state.adapted().rho == pytest.approx(0.5)

    def test_shrink_branch(self):
        state = GranularityState(rho=0.5, eta=3, h_r=100, created_this_period=0)
        assert state.adapted().rho == pytest.approx(0.485)

    def test_counter_resets(self):
        state = GranularityState(rho=0.5, created_this_period=9)
        assert state.adapted().created_this_period == 0

    def test_clamping(self):
        high = GranularityState(rho=0.9, eta=1, h_r=10, created_this_period=8)
        assert high.adapted().rho == 1.0
        low = GranularityState(rho=RHO_MIN, eta=3, h_r=10, created_this_period=0)
        assert low.adapted().rho == RHO_MIN

    def test_sign_property_randomized(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            rho = float(rng.uniform(0.05, 0.95))
            eta = float(rng.integers(0, 8))
            h_r = int(rng.integers(10, 300))
            r = int(rng.integers(0, 20))
            new = GranularityState(rho=rho, eta=eta, h_r=h_r,
                                   created_this_period=r).adapted().rho
            if r > eta:
                assert new > rho or new == 1.0
            elif r < eta:
                assert new < rho or new == RHO_MIN
            else:
                assert new == pytest.approx(rho)

    def test_boundary_detection(self):
        state = GranularityState(rho=0.5, h_r=50)
        assert not state.at_boundary()
        state.step = 50
        assert state.at_boundary()
        state.step = 51
        assert not state.at_boundary()
        state.step = 100
        assert state.at_boundary()

    def test_validation(self):
        with pytest.raises(ValueError):
            GranularityState(rho=0.0)
        with pytest.raises(ValueError):
            GranularityState(rho=0.5, h_r=0)


class TestNormalizer:
    def test_first_instance_maps_to_half(self):
        norm = Normalizer(5)
        assert norm.normalize([3.0, -1.0, 0.0, 7.0, 2.0]) == pytest.approx([0.5] * 5)

    def test_midpoint_of_seen_range(self):
        norm = Normalizer(1)
        norm.normalize([0.0])
        norm.normalize([10.0])
        assert norm.normalize([5.0])[0] == pytest.approx(0.5)

    def test_expanding_bound_maps_to_one(self):
        norm = Normalizer(1)
        norm.normalize([0.0])
        norm.normalize([10.0])
        assert norm.normalize([12.0])[0] == pytest.approx(1.0)
        assert norm.low[0] == 0.0 and norm.high[0] == 12.0

    def test_outputs_stay_in_unit_interval(self):
        rng = np.random.default_rng(5)
        norm = Normalizer(5)
        lows, highs = None, None
        for _ in range(300):
            out = norm.normalize(rng.normal(0, 100, size=5))
            assert ((out >= 0.0) & (out <= 1.0)).all()
            if lows is not None:
                assert (norm.low <= lows).all()
                assert (norm.high >= highs).all()
            lows, highs = norm.low.copy(), norm.high.copy()

    def test_shape_check(self):
        with pytest.raises(ValueError):
            Normalizer(5).normalize([1.0, 2.0])
