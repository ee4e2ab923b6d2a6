from collections import Counter
from dataclasses import replace

import pytest

from sddr import (
    ConfigError,
    eval_objective,
    oracle_solve,
    solve_f3,
    solve_f4,
    validate_instance,
    validate_plan,
)
from sddr.generator import GeneratorProfile, gen_instance, radius_family_instance
from conftest import build_instance


def gen_station(seed, orders=4, radius=35.0, capacity=2):
    return gen_instance(
        GeneratorProfile(orders=orders, stations=3, radius=radius, capacity=capacity, seed=seed)
    )


def test_single_direct_trip():
    inst = build_instance(
        orders=[(1, 3, 4, 0, None, (1,))], stations=[(1, 3, 4, 1)], horizon=250.0, big_m=250.0
    )
    report = solve_f3(inst)
    assert report.objective == pytest.approx(5.0)
    trip = report.plan.trips[0]
    assert trip.start == pytest.approx(0.0)
    assert report.plan.assignments[1].delivery_time == pytest.approx(5.0)


def test_zero_capacity_forces_penalty():
    inst = build_instance(
        orders=[(1, 3, 4, 0, None, (1,))], stations=[(1, 3, 4, 0)], horizon=250.0, big_m=250.0
    )
    report = solve_f3(inst)
    assert report.objective == pytest.approx(250.0)
    assert report.plan.unserved == {1}


def test_empty_feasible_set_is_preclassified():
    inst = build_instance(
        orders=[(1, 3, 4, 20, None, ())], stations=[(1, 90, 90, 3)], horizon=250.0, big_m=250.0
    )
    assert solve_f3(inst).objective == pytest.approx(230.0)
    assert solve_f4(inst).objective == pytest.approx(230.0)


def test_single_station_f4_equals_f3():
    inst = build_instance(
        orders=[(1, 3, 4, 0, None, (1,))], stations=[(1, 3, 4, 1)], horizon=250.0, big_m=250.0
    )
    assert solve_f4(inst).objective == pytest.approx(solve_f3(inst).objective) == pytest.approx(5.0)


def test_collinear_routing_beats_direct_trips():
    inst = build_instance(
        orders=[(1, 10, 0, 0, None, (1,)), (2, 20, 0, 0, None, (2,))],
        stations=[(1, 10, 0, 1), (2, 20, 0, 1)],
        horizon=250.0,
        big_m=250.0,
    )
    f3 = solve_f3(inst)
    f4 = solve_f4(inst)
    assert f3.objective == pytest.approx(50.0)
    assert f4.objective == pytest.approx(30.0)
    assert f4.plan.trips[0].route == (0, 1, 2, 0)


def test_big_m_guard():
    inst = build_instance(
        orders=[(1, 3, 4, 0, None, (1,))], stations=[(1, 3, 4, 1)], horizon=250.0, big_m=100.0
    )
    with pytest.raises(ConfigError, match="penalty"):
        solve_f3(inst)


def test_missing_stations_raises():
    inst = build_instance(orders=[(1, 3, 4, 0)], horizon=250.0)
    with pytest.raises(ConfigError):
        solve_f3(inst)


def test_oracle_equivalence():
    for seed in range(25):
        inst = gen_station(seed, orders=3 + seed % 3)
        for solver, kind in ((solve_f3, "F3"), (solve_f4, "F4")):
            got = solver(inst)
            want = oracle_solve(inst, kind)
            assert got.objective == pytest.approx(want.objective, abs=1e-6), f"{kind} seed {seed}"
            assert validate_plan(inst, got.plan) == []
            assert eval_objective(inst, got.plan) == pytest.approx(got.objective, abs=1e-9)


def test_f4_dominates_f3():
    for seed in range(30):
        inst = gen_station(seed + 200, orders=4)
        assert solve_f4(inst).objective <= solve_f3(inst).objective + 1e-6


def test_radius_family_pattern():
    for seed in range(10):
        narrow = radius_family_instance(seed, 30.0)
        wide = radius_family_instance(seed, 40.0)
        assert all(len(o.feasible_stations) == 1 for o in narrow.orders)
        assert any(len(o.feasible_stations) >= 2 for o in wide.orders)
        for solver in (solve_f3, solve_f4):
            n = solver(narrow)
            w = solver(wide)
            assert len(w.plan.assignments) >= len(n.plan.assignments)
            assert w.objective <= n.objective + 1e-6
        assert len(solve_f3(narrow).plan.assignments) == 3
        assert len(solve_f3(wide).plan.assignments) == 5


def test_objective_monotone_in_radius_on_random_instances():
    for seed in range(12):
        small = gen_station(seed, orders=4, radius=25.0)
        # same geometry, wider coverage
        big = validate_instance(
            replace(small, radius=40.0, orders=tuple(replace(o, feasible_stations=None) for o in small.orders))
        )
        for solver in (solve_f3, solve_f4):
            assert solver(big).objective <= solver(small).objective + 1e-6


def test_capacity_conserved_in_returned_plans():
    for seed in range(12):
        inst = gen_station(seed + 40, orders=5, radius=45.0, capacity=2)
        for solver in (solve_f3, solve_f4):
            plan = solver(inst).plan
            loads = Counter(a.station_id for a in plan.assignments.values())
            for sid, n in loads.items():
                assert n <= inst.station_by_id(sid).capacity


def test_no_station_visited_without_delivery():
    for seed in range(12):
        inst = gen_station(seed + 80, orders=5, radius=45.0)
        for solver in (solve_f3, solve_f4):
            plan = solver(inst).plan
            for t_i, trip in enumerate(plan.trips):
                delivered = {a.station_id for a in plan.assignments.values() if a.trip_index == t_i}
                assert set(trip.route[1:-1]) == delivered
