import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sddr import (
    Instance,
    InvalidInstanceError,
    Location,
    MalformedInputError,
    OptionSet,
    Order,
    ReleaseDist,
    Station,
    distance_matrix,
    feasible_stations,
    instance_from_dict,
    instance_to_dict,
    validate_instance,
)
from conftest import build_instance

coords = st.floats(min_value=-1000, max_value=1000, allow_nan=False)


def test_paper_scale_instance_is_valid(options):
    inst = build_instance(
        orders=[(1, 10, 10, 0, (40, 30, 20)), (2, 20, 5, 50, (35, 25, 15))],
        stations=[(1, 15, 15, 3), (2, 80, 80, 3)],
        options=options,
        horizon=250.0,
        big_m=250.0,
        radius=30.0,
    )
    assert inst.big_m == 250.0
    assert inst.options.deadlines == (60.0, 120.0, 240.0)
    assert all(s.capacity == 3 for s in inst.stations)


def test_negative_release_rejected():
    with pytest.raises(InvalidInstanceError, match="negative release"):
        build_instance(orders=[(1, 3, 4, -1)])


def test_unknown_station_reference_rejected():
    with pytest.raises(InvalidInstanceError, match="unknown station 9"):
        build_instance(
            orders=[(1, 3, 4, 0, None, (9,))],
            stations=[(1, 0, 0, 1), (2, 1, 1, 1), (3, 2, 2, 1)],
        )


def test_duplicate_ids_rejected():
    with pytest.raises(InvalidInstanceError, match="duplicate order id"):
        build_instance(orders=[(1, 0, 0, 0), (1, 1, 1, 0)])
    with pytest.raises(InvalidInstanceError, match="duplicate station id"):
        build_instance(orders=[(1, 0, 0, 0)], stations=[(1, 0, 0, 1), (1, 2, 2, 1)])


def test_wtp_length_mismatch_rejected(options):
    with pytest.raises(InvalidInstanceError, match="wtp length"):
        build_instance(orders=[(1, 0, 0, 0, (10.0,))], options=options)


def test_horizon_must_be_positive():
    with pytest.raises(InvalidInstanceError, match="horizon"):
        build_instance(orders=[(1, 0, 0, 0)], horizon=0.0)


def test_defaults_filled():
    inst = build_instance(orders=[(1, 3, 4, 0), (2, 5, 5, 1)], horizon=100.0)
    assert inst.big_m == 100.0
    assert inst.max_trips == 2


def test_validation_idempotent():
    inst = build_instance(
        orders=[(1, 3, 4, 0), (2, 30, 4, 5)],
        stations=[(1, 3, 4, 2), (2, 90, 90, 1)],
        radius=10.0,
    )
    assert validate_instance(inst) == inst


def test_explicit_station_list_overrides_radius():
    inst = build_instance(
        orders=[(1, 3, 4, 0, None, (2,))],
        stations=[(1, 3, 4, 2), (2, 90, 90, 1)],
        radius=10.0,
    )
    # station 1 is in range but the explicit list wins
    assert inst.orders[0].feasible_stations == (2,)


def test_distance_matrix_345():
    d = distance_matrix([Location(0, 0), Location(3, 4)])
    assert d[0][1] == pytest.approx(5.0)
    assert d[1][0] == pytest.approx(5.0)
    assert d[0][0] == 0.0 and d[1][1] == 0.0


def test_distance_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        distance_matrix([Location(float("nan"), 0.0)])


def test_distance_matrix_triangle_inequality_random():
    rng = np.random.default_rng(42)
    pts = [Location(float(x), float(y)) for x, y in rng.uniform(0, 100, size=(10, 2))]
    d = distance_matrix(pts)
    n = len(pts)
    # direct pairwise check against every intermediate point
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert d[i][j] <= d[i][k] + d[k][j] + 1e-9
    assert np.allclose(d, d.T)
    assert np.allclose(np.diag(d), 0.0)


def test_feasible_stations_zero_radius():
    order = Order(id=1, loc=Location(3, 4), release=0.0)
    stations = [Station(id=1, loc=Location(3, 4), capacity=1)]
    assert feasible_stations(order, stations, 0.0) == [1]


def test_feasible_stations_strict_cutoff():
    order = Order(id=1, loc=Location(0, 0), release=0.0)
    stations = [
        Station(id=1, loc=Location(31, 0), capacity=1),
        Station(id=2, loc=Location(29, 0), capacity=1),
    ]
    assert feasible_stations(order, stations, 30.0) == [2]


@settings(max_examples=60, deadline=None)
@given(
    ox=coords, oy=coords,
    sx=st.lists(coords, min_size=1, max_size=6), sy=st.lists(coords, min_size=1, max_size=6),
    r1=st.floats(min_value=0, max_value=500), r2=st.floats(min_value=0, max_value=500),
)
def test_feasible_stations_monotone_in_radius(ox, oy, sx, sy, r1, r2):
    k = min(len(sx), len(sy))
    stations = [Station(id=i + 1, loc=Location(sx[i], sy[i]), capacity=1) for i in range(k)]
    order = Order(id=1, loc=Location(ox, oy), release=0.0)
    lo, hi = sorted((r1, r2))
    assert set(feasible_stations(order, stations, lo)) <= set(feasible_stations(order, stations, hi))


class TestReleaseDist:
    def test_point_sampling_degenerate(self):
        d = ReleaseDist.point(12.5)
        rng = np.random.default_rng(0)
        assert all(d.sample(rng) == 12.5 for _ in range(5))
        assert d.mean() == 12.5

    def test_uniform_support(self):
        d = ReleaseDist.uniform(0.0, 120.0)
        rng = np.random.default_rng(1)
        xs = [d.sample(rng) for _ in range(200)]
        assert all(0.0 <= x <= 120.0 for x in xs)
        assert all(d.support_contains(x) for x in xs)

    def test_discrete_mean_law_of_large_numbers(self):
        d = ReleaseDist.discrete([(10.0, 0.5), (20.0, 0.5)])
        rng = np.random.default_rng(2)
        xs = [d.sample(rng) for _ in range(10_000)]
        assert abs(sum(xs) / len(xs) - 15.0) < 0.5

    def test_discrete_probabilities_must_sum_to_one(self):
        bad = ReleaseDist.discrete([(10.0, 0.4), (20.0, 0.4)])
        assert bad.check()

    def test_conditional_mean(self):
        u = ReleaseDist.uniform(0.0, 100.0)
        assert u.conditional_mean_after(-5.0) == pytest.approx(50.0)
        assert u.conditional_mean_after(40.0) == pytest.approx(70.0)
        # past the support: boundary convention releases now
        assert u.conditional_mean_after(150.0) == 150.0
        p = ReleaseDist.point(10.0)
        assert p.conditional_mean_after(3.0) == 10.0
        assert p.conditional_mean_after(30.0) == 30.0
        d = ReleaseDist.discrete([(10.0, 0.5), (30.0, 0.5)])
        assert d.conditional_mean_after(20.0) == pytest.approx(30.0)

    def test_conditional_samples_stay_in_tail(self):
        u = ReleaseDist.uniform(0.0, 100.0)
        rng = np.random.default_rng(3)
        assert all(40.0 <= u.sample_after(40.0, rng) <= 100.0 for _ in range(100))


class TestInstanceFiles:
    def test_round_trip(self, options):
        inst = build_instance(
            orders=[(1, 3, 4, 10, (40, 30, 20)), (2, 8, 8, 0, (10, 8, 2))],
            stations=[(1, 5, 5, 3)],
            options=options,
            radius=30.0,
            big_m=250.0,
        )
        again = validate_instance(instance_from_dict(instance_to_dict(inst)))
        assert again == inst

    def test_unknown_top_level_key_rejected(self):
        doc = {"horizon": 10, "depot": {"x": 0, "y": 0}, "orders": [], "stations": [], "velocity": 3}
        with pytest.raises(MalformedInputError, match="velocity"):
            instance_from_dict(doc)

    def test_unknown_order_key_rejected(self):
        doc = {
            "horizon": 10,
            "depot": {"x": 0, "y": 0},
            "orders": [{"id": 1, "x": 0, "y": 0, "release": 0, "weight": 5}],
            "stations": [],
        }
        with pytest.raises(MalformedInputError, match="weight"):
            instance_from_dict(doc)

    def test_release_dist_round_trip(self):
        doc = {
            "horizon": 100,
            "depot": {"x": 0, "y": 0},
            "orders": [
                {"id": 1, "x": 1, "y": 1, "release": 5, "release_dist": {"kind": "uniform", "lo": 0, "hi": 50}},
                {"id": 2, "x": 2, "y": 2, "release": 5, "release_dist": {"kind": "discrete", "values": [[5, 0.5], [9, 0.5]]}},
            ],
            "stations": [],
        }
        inst = instance_from_dict(doc)
        assert inst.orders[0].release_dist == ReleaseDist.uniform(0, 50)
        assert inst.orders[1].release_dist == ReleaseDist.discrete([(5, 0.5), (9, 0.5)])
        assert instance_from_dict(instance_to_dict(inst)) == inst
