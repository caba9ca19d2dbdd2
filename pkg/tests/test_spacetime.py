import math

import numpy as np
import pytest

from collapsebell.spacetime import (
    CausalKind,
    CausalOrder,
    GeoPoint,
    PhysicalConstants,
    SpacetimeEvent,
    StationWindow,
    causal_class,
    chord_distance,
    geo_to_event,
    light_time,
    squared_interval,
    windows_spacelike,
)

K = PhysicalConstants()
ORIGIN = (0.0, 0.0, 0.0)


def ev(t, pos=ORIGIN):
    return SpacetimeEvent(t, pos)


class TestSquaredInterval:
    def test_pure_time_separation(self):
        s2 = squared_interval(ev(0.0), ev(1.0), K)
        assert s2 == pytest.approx(K.c**2)
        assert s2 == pytest.approx(8.9875e16, rel=1e-4)

    def test_pure_space_separation(self):
        assert squared_interval(ev(0.0), ev(0.0, (1.0, 0.0, 0.0)), K) == -1.0

    def test_lightlike_zero(self):
        s2 = squared_interval(ev(0.0), ev(1.0, (K.c, 0.0, 0.0)), K)
        assert abs(s2) <= 1e-12 * 2 * K.c**2

    def test_self_interval_zero(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            e = ev(rng.uniform(-10, 10), tuple(rng.uniform(-1e7, 1e7, 3)))
            assert squared_interval(e, e, K) == 0.0

    def test_symmetric(self):
        e1, e2 = ev(1.5, (3e5, -2e4, 7.0)), ev(-0.5, (1.0, 2.0, 3.0))
        assert squared_interval(e1, e2, K) == squared_interval(e2, e1, K)


class TestCausalClass:
    def test_timelike_first_earlier(self):
        cc = causal_class(ev(0.0), ev(1.0), K)
        assert cc.kind is CausalKind.TIMELIKE
        assert cc.order is CausalOrder.FIRST_EARLIER

    def test_spacelike(self):
        cc = causal_class(ev(0.0), ev(0.0, (1.0, 0.0, 0.0)), K)
        assert cc.kind is CausalKind.SPACELIKE
        assert cc.order is None
        assert cc.is_spacelike and not cc.is_ordered

    def test_lightlike_first_earlier(self):
        # dx = c * dt exactly
        cc = causal_class(ev(0.0), ev(1e-3, (K.c * 1e-3, 0.0, 0.0)), K)
        assert cc.kind is CausalKind.LIGHTLIKE
        assert cc.order is CausalOrder.FIRST_EARLIER
        assert cc.is_ordered

    def test_swap_preserves_kind_and_flips_order(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            e1 = ev(rng.uniform(-1, 1), tuple(rng.uniform(-1e8, 1e8, 3)))
            e2 = ev(rng.uniform(-1, 1), tuple(rng.uniform(-1e8, 1e8, 3)))
            c12 = causal_class(e1, e2, K)
            c21 = causal_class(e2, e1, K)
            assert c12.kind is c21.kind
            if c12.kind is not CausalKind.SPACELIKE:
                flip = {CausalOrder.FIRST_EARLIER: CausalOrder.SECOND_EARLIER,
                        CausalOrder.SECOND_EARLIER: CausalOrder.FIRST_EARLIER,
                        CausalOrder.SIMULTANEOUS: CausalOrder.SIMULTANEOUS}
                assert c21.order is flip[c12.order]

    def test_spacelike_rejects_order_tag(self):
        with pytest.raises(ValueError):
            from collapsebell.spacetime import CausalClass
            CausalClass(CausalKind.SPACELIKE, CausalOrder.FIRST_EARLIER)


class TestWindowsSpacelike:
    def test_margin_example(self):
        w1 = StationWindow(ORIGIN, 0.0, 1e-6)
        w2 = StationWindow((1.8e7, 0.0, 0.0), 0.0, 1e-6)
        ok, margin = windows_spacelike(w1, w2, K)
        assert ok
        assert margin == pytest.approx(1.8e7 / K.c - 1e-6, rel=1e-12)
        assert margin == pytest.approx(6.004e-2, rel=1e-3)

    def test_identical_windows_never_spacelike(self):
        w = StationWindow((5.0, 6.0, 7.0), 0.0, 1e-3)
        ok, margin = windows_spacelike(w, w, K)
        assert not ok
        assert margin == -1e-3

    def test_lightlike_boundary_not_spacelike(self):
        w1 = StationWindow(ORIGIN, 0.0, 0.0)
        w2 = StationWindow((K.c, 0.0, 0.0), 1.0, 1.0)
        ok, margin = windows_spacelike(w1, w2, K)
        assert not ok
        assert margin == 0.0

    def test_colocated_margin_is_negative_max_lag(self):
        w1 = StationWindow(ORIGIN, 0.0, 2.0)
        w2 = StationWindow(ORIGIN, 1.0, 5.0)
        ok, margin = windows_spacelike(w1, w2, K)
        assert not ok
        assert margin == -max(abs(2.0 - 1.0), abs(5.0 - 0.0))

    def test_instants_degenerate_to_causal_class(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            t1, t2 = rng.uniform(-1e-3, 1e-3, 2)
            p1 = tuple(rng.uniform(-1e6, 1e6, 3))
            p2 = tuple(rng.uniform(-1e6, 1e6, 3))
            ok, _ = windows_spacelike(StationWindow(p1, t1, t1),
                                      StationWindow(p2, t2, t2), K)
            cc = causal_class(SpacetimeEvent(t1, p1), SpacetimeEvent(t2, p2), K)
            assert ok == cc.is_spacelike

    def test_monotone_under_shrinking(self):
        rng = np.random.default_rng(5)
        count = 0
        while count < 100:
            p1 = tuple(rng.uniform(-1e7, 1e7, 3))
            p2 = tuple(rng.uniform(-1e7, 1e7, 3))
            t1 = sorted(rng.uniform(-1e-2, 1e-2, 2))
            t2 = sorted(rng.uniform(-1e-2, 1e-2, 2))
            w1 = StationWindow(p1, *t1)
            w2 = StationWindow(p2, *t2)
            if not windows_spacelike(w1, w2, K).spacelike:
                continue
            count += 1
            for _ in range(5):
                a = sorted(rng.uniform(t1[0], t1[1], 2)) if t1[0] < t1[1] else t1
                b = sorted(rng.uniform(t2[0], t2[1], 2)) if t2[0] < t2[1] else t2
                assert windows_spacelike(StationWindow(p1, *a),
                                         StationWindow(p2, *b), K).spacelike

    def test_brute_force_sampled_instants(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            p1 = tuple(rng.uniform(-1e7, 1e7, 3))
            p2 = tuple(rng.uniform(-1e7, 1e7, 3))
            t1 = sorted(rng.uniform(-0.05, 0.05, 2))
            t2 = sorted(rng.uniform(-0.05, 0.05, 2))
            w1 = StationWindow(p1, *t1)
            w2 = StationWindow(p2, *t2)
            ok, _ = windows_spacelike(w1, w2, K)
            samples_1 = list(rng.uniform(t1[0], t1[1], 25)) + list(t1)
            samples_2 = list(rng.uniform(t2[0], t2[1], 25)) + list(t2)
            classes = [causal_class(SpacetimeEvent(a, p1), SpacetimeEvent(b, p2), K).is_spacelike
                       for a in samples_1 for b in samples_2]
            if ok:
                assert all(classes)
            else:
                # the extremal corner pair must witness the failure
                corner = [causal_class(SpacetimeEvent(a, p1), SpacetimeEvent(b, p2), K).is_spacelike
                          for a in t1 for b in t2]
                assert not all(corner)


class TestGeo:
    def test_equatorial_reference(self):
        e = geo_to_event(GeoPoint(0.0, 0.0), 0.0, K)
        assert e.t == 0.0
        assert e.pos[0] == pytest.approx(K.earth_radius)
        assert abs(e.pos[1]) < 1e-6 and abs(e.pos[2]) < 1e-6

    def test_antipode(self):
        e = geo_to_event(GeoPoint(0.0, math.pi), 0.0, K)
        assert e.pos[0] == pytest.approx(-K.earth_radius)
        assert abs(e.pos[2]) < 1e-6

    def test_pole_with_altitude(self):
        e = geo_to_event(GeoPoint(math.pi / 2, 1.234, 1e6), 0.0, K)
        assert e.pos[2] == pytest.approx(K.earth_radius + 1e6)
        assert abs(e.pos[0]) < 1e-3 and abs(e.pos[1]) < 1e-3

    def test_invalid_geopoint(self):
        with pytest.raises(ValueError):
            GeoPoint(2.0, 0.0)
        with pytest.raises(ValueError):
            GeoPoint(0.0, 0.0, -1.0)

    def test_chord_antipodal_is_diameter(self):
        d = chord_distance(GeoPoint(0.0, 0.0), GeoPoint(0.0, math.pi), K)
        assert d == pytest.approx(1.24e7, rel=1e-12)

    def test_chord_same_point(self):
        g = GeoPoint(0.3, -1.2, 5.0)
        assert chord_distance(g, g, K) == 0.0

    def test_chord_quarter_turn(self):
        d = chord_distance(GeoPoint(0.0, 0.0), GeoPoint(0.0, math.pi / 2), K)
        assert d == pytest.approx(2 * K.earth_radius * math.sin(math.pi / 4), rel=1e-12)
        assert d == pytest.approx(8.768e6, rel=1e-3)

    def test_chord_bounded_by_diameter_plus_altitudes(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            g1 = GeoPoint(rng.uniform(-math.pi / 2, math.pi / 2),
                          rng.uniform(-math.pi, math.pi), rng.uniform(0, 1e6))
            g2 = GeoPoint(rng.uniform(-math.pi / 2, math.pi / 2),
                          rng.uniform(-math.pi, math.pi), rng.uniform(0, 1e6))
            assert chord_distance(g1, g2, K) <= K.earth_diameter + g1.altitude + g2.altitude + 1e-6


class TestLightTime:
    def test_earth_diameter_is_about_40_ms(self):
        t = light_time(1.24e7, K)
        assert t == pytest.approx(4.136e-2, rel=1e-3)

    def test_zero(self):
        assert light_time(0.0, K) == 0.0

    def test_round_trip_60_microseconds(self):
        assert light_time(K.c * 60e-6, K) == pytest.approx(60e-6, rel=1e-12)

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            light_time(-1.0, K)


class TestConstants:
    def test_defaults(self):
        assert K.c == 2.99792458e8
        assert K.earth_diameter == 1.24e7

    def test_positive_required(self):
        with pytest.raises(ValueError):
            PhysicalConstants(c=0.0)

    def test_earth_diameter_overridable(self):
        k2 = PhysicalConstants(earth_diameter=1.2742e7)
        assert chord_distance(GeoPoint(0, 0), GeoPoint(0, math.pi), k2) == pytest.approx(1.2742e7)


class TestValidation:
    def test_event_requires_finite(self):
        with pytest.raises(ValueError):
            SpacetimeEvent(math.nan, ORIGIN)
        with pytest.raises(ValueError):
            SpacetimeEvent(0.0, (math.inf, 0.0, 0.0))

    def test_window_order(self):
        with pytest.raises(ValueError):
            StationWindow(ORIGIN, 1.0, 0.0)
